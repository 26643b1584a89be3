/** Task monitor: live list of training tasks, refreshed by polling. */
import type { TrainTask } from "../types.js";
import { escapeHtml } from "./html.js";

export interface TaskMonitorModel {
  tasks: TrainTask[];
  serverReachable: boolean;
  retryInMs: number;
}

export function renderTaskMonitor(model: TaskMonitorModel): string {
  const rows = model.tasks.map(renderTaskRow).join("");
  const offline = model.serverReachable
    ? ""
    : `<p class="banner error retry-indicator">server unreachable, retrying in ${(
        model.retryInMs / 1000
      ).toFixed(0)}s</p>`;
  return `
<section class="task-monitor">
  <h2>Training tasks</h2>
  ${offline}
  <table class="tasks">
    <thead><tr><th>task</th><th>label</th><th>state</th><th>result</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
  <p class="empty-tasks" ${model.tasks.length ? 'hidden=""' : ""}>No tasks yet.</p>
</section>`;
}

function renderTaskRow(task: TrainTask): string {
  let result = "";
  if (task.state === "done" && task.metrics) {
    const acc =
      task.metrics.accuracy !== undefined
        ? ` accuracy ${(task.metrics.accuracy * 100).toFixed(1)}%`
        : "";
    result = `model v${task.model_version}${acc}`;
  } else if (task.state === "failed") {
    result = escapeHtml(task.error ?? "training failed");
  }
  return `
    <tr class="task state-${task.state}" data-task="${escapeHtml(task.task_id)}">
      <td><code>${escapeHtml(task.task_id.slice(0, 8))}</code></td>
      <td>${escapeHtml(task.label)}</td>
      <td class="task-state">${task.state}</td>
      <td class="task-result">${result}</td>
    </tr>`;
}

/** Merge one polled task document into the tracked list (newest first). */
export function upsertTask(tasks: TrainTask[], doc: TrainTask): TrainTask[] {
  const rest = tasks.filter((t) => t.task_id !== doc.task_id);
  return [doc, ...rest];
}
