/** Page wiring: mounts the three views and drives polling. */
import { ApiClient, defaultClient, ServerError } from "./api.js";
import { Poller } from "./poller.js";
import { renderMetricsView } from "./views/matrix.js";
import { SessionReviewController, renderSessionReview } from "./views/session.js";
import { renderTaskMonitor, upsertTask } from "./views/tasks.js";
import type { TrainMetrics, TrainTask } from "./types.js";

interface AppState {
  session: SessionReviewController | null;
  sessionError: string | null;
  tasks: TrainTask[];
  watched: Set<string>;
  serverReachable: boolean;
  retryInMs: number;
  metrics: TrainMetrics | null;
}

export class App {
  readonly state: AppState = {
    session: null,
    sessionError: null,
    tasks: [],
    watched: new Set(),
    serverReachable: true,
    retryInMs: 0,
    metrics: null,
  };
  private taskPoller: Poller<TrainTask[]>;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    intervalMs = 2000,
  ) {
    this.taskPoller = new Poller(() => this.fetchWatchedTasks(), {
      intervalMs,
      onResult: (tasks) => {
        this.state.serverReachable = true;
        for (const t of tasks) this.state.tasks = upsertTask(this.state.tasks, t);
        this.render();
      },
      onError: (_err, nextDelayMs) => {
        this.state.serverReachable = false;
        this.state.retryInMs = nextDelayMs;
        this.render();
      },
    });
  }

  start(): void {
    this.taskPoller.start();
    this.root.addEventListener("click", (ev) => void this.onClick(ev));
    this.root.addEventListener("submit", (ev) => void this.onSubmit(ev));
    this.render();
  }

  async openSession(sessionId: string): Promise<void> {
    try {
      this.state.session = await SessionReviewController.load(this.api, sessionId);
      this.state.sessionError = null;
    } catch (err) {
      this.state.session = null;
      this.state.sessionError =
        err instanceof ServerError && err.status === 404
          ? `session ${sessionId} is unknown or expired`
          : `cannot load session: ${err instanceof Error ? err.message : err}`;
    }
    this.render();
  }

  async refreshMetrics(): Promise<void> {
    try {
      this.state.metrics = await this.api.getMetrics();
    } catch (err) {
      if (!(err instanceof ServerError && err.status === 404)) throw err;
      this.state.metrics = null;
    }
    this.render();
  }

  private async fetchWatchedTasks(): Promise<TrainTask[]> {
    const docs = await Promise.all(
      [...this.state.watched].map((id) => this.api.getTask(id)),
    );
    if (docs.some((d) => d.state === "done")) {
      await this.refreshMetrics().catch(() => undefined);
    }
    return docs;
  }

  private async onClick(ev: Event): Promise<void> {
    const target = ev.target as HTMLElement;
    if (target.matches("button.pick-label") && this.state.session) {
      await this.submit(target.dataset.label ?? "");
    }
  }

  private async onSubmit(ev: Event): Promise<void> {
    ev.preventDefault();
    const form = ev.target as HTMLFormElement;
    if (form.matches("form.new-label") && this.state.session) {
      const input = form.elements.namedItem("label") as HTMLInputElement;
      await this.submit(input.value);
    } else if (form.matches("form.open-session")) {
      const input = form.elements.namedItem("session") as HTMLInputElement;
      await this.openSession(input.value.trim());
    }
  }

  private async submit(label: string): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    await session.submitLabel(label);
    if (session.model.submit.phase === "submitted") {
      this.state.watched.add(session.model.submit.taskId);
    }
    this.render();
  }

  render(): void {
    const sessionHtml = this.state.session
      ? renderSessionReview(this.state.session.model)
      : `
<section class="session-review">
  <h2>Session review</h2>
  ${this.state.sessionError ? `<p class="banner error">${this.state.sessionError}</p>` : ""}
  <form class="open-session">
    <input name="session" placeholder="session id from upload" />
    <button type="submit">open</button>
  </form>
</section>`;
    this.root.innerHTML = [
      sessionHtml,
      renderTaskMonitor({
        tasks: this.state.tasks,
        serverReachable: this.state.serverReachable,
        retryInMs: this.state.retryInMs,
      }),
      renderMetricsView(this.state.metrics),
    ].join("\n");
  }
}

export function mount(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const app = new App(defaultClient(), root);
  app.start();
  void app.refreshMetrics();
}
