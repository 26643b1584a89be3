export class ServerError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
export class ApiClient {
    constructor(baseUrl, fetchImpl = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        const resp = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
        const body = await resp.json().catch(() => ({}));
        if (!resp.ok) {
            throw new ServerError(resp.status, body.error ?? `HTTP ${resp.status}`);
        }
        return body;
    }
    getTask(taskId) {
        return this.request(`/tasks/${taskId}`);
    }
    getSession(sessionId) {
        return this.request(`/sessions/${sessionId}`);
    }
    getRooms() {
        return this.request("/rooms");
    }
    getMetrics() {
        return this.request("/metrics");
    }
    submitLabel(sessionId, label) {
        return this.request("/labels", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ session_id: sessionId, label }),
        });
    }
}
export function defaultClient() {
    const base = (typeof window !== "undefined" && window.SERVER_URL) || "";
    return new ApiClient(base.replace(/\/$/, ""));
}
