import { ServerError } from "../api.js";
import { escapeHtml } from "./html.js";
export function renderSessionReview(model) {
    const locked = model.submit.phase !== "idle" && model.submit.phase !== "error";
    const rows = model.candidates
        .map((c, i) => `
    <li class="candidate" data-rank="${i}">
      <span class="candidate-label">${escapeHtml(c.label)}</span>
      <span class="candidate-score">${c.score.toFixed(3)}</span>
      <span class="candidate-confidence">${(c.confidence * 100).toFixed(1)}%</span>
      <button class="pick-label" data-label="${escapeHtml(c.label)}"
              ${locked ? "disabled" : ""}>use this room</button>
    </li>`)
        .join("");
    return `
<section class="session-review" data-session="${escapeHtml(model.sessionId)}">
  <h2>Session ${escapeHtml(model.sessionId)}</h2>
  ${renderBanner(model.submit)}
  <ol class="candidates">${rows}</ol>
  <p class="empty-candidates" ${model.candidates.length ? 'hidden=""' : ""}>
    No candidates: the model has not been trained yet.
  </p>
  <form class="new-label">
    <input name="label" placeholder="new room name" ${locked ? "disabled" : ""} />
    <button type="submit" ${locked ? "disabled" : ""}>create new label</button>
  </form>
</section>`;
}
function renderBanner(state) {
    switch (state.phase) {
        case "idle":
            return "";
        case "submitting":
            return `<p class="banner pending">submitting label...</p>`;
        case "submitted":
            return `<p class="banner ok">label accepted (${state.merged ? "merged into existing room" : "new room created"}); retrain task <code class="task-id">${escapeHtml(state.taskId)}</code></p>`;
        case "error":
            return `<p class="banner error">${escapeHtml(state.message)}</p>`;
    }
}
export class SessionReviewController {
    constructor(api, sessionId, candidates) {
        this.api = api;
        this.model = { sessionId, candidates, submit: { phase: "idle" } };
    }
    /** Load a session's candidates by id; 404 means expired or never existed. */
    static async load(api, sessionId) {
        const doc = await api.getSession(sessionId);
        return new SessionReviewController(api, sessionId, doc.candidates);
    }
    async submitLabel(label) {
        if (this.model.submit.phase === "submitting" || this.model.submit.phase === "submitted") {
            return; // idempotency guard: one accepted submission per session
        }
        if (!label.trim()) {
            this.model.submit = { phase: "error", message: "label must not be empty" };
            return;
        }
        this.model.submit = { phase: "submitting" };
        try {
            const result = await this.api.submitLabel(this.model.sessionId, label.trim());
            this.model.submit = {
                phase: "submitted",
                taskId: result.task_id,
                merged: result.merged,
            };
        }
        catch (err) {
            const message = err instanceof ServerError && err.status === 404
                ? `session ${this.model.sessionId} has expired; upload the records again`
                : err instanceof Error
                    ? err.message
                    : String(err);
            this.model.submit = { phase: "error", message };
        }
    }
}
