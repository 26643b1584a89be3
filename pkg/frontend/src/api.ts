/** Thin typed client over the service REST API.
 *
 * The base URL comes from `window.SERVER_URL` (set by public/config.js) so
 * the built assets stay fully static; tests inject a base URL and a fetch
 * implementation directly.
 */
import type {
  LabelResult,
  RoomList,
  SessionStatus,
  TrainMetrics,
  TrainTask,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServerError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ServerError(resp.status, body.error ?? `HTTP ${resp.status}`);
    }
    return body as T;
  }

  getTask(taskId: string): Promise<TrainTask> {
    return this.request(`/tasks/${taskId}`);
  }

  getSession(sessionId: string): Promise<SessionStatus> {
    return this.request(`/sessions/${sessionId}`);
  }

  getRooms(): Promise<RoomList> {
    return this.request("/rooms");
  }

  getMetrics(): Promise<TrainMetrics> {
    return this.request("/metrics");
  }

  submitLabel(sessionId: string, label: string): Promise<LabelResult> {
    return this.request("/labels", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, label }),
    });
  }
}

declare global {
  interface Window {
    SERVER_URL?: string;
  }
}

export function defaultClient(): ApiClient {
  const base = (typeof window !== "undefined" && window.SERVER_URL) || "";
  return new ApiClient(base.replace(/\/$/, ""));
}
