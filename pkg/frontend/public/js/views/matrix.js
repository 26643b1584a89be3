import { escapeHtml } from "./html.js";
/** Flatten a K x K count matrix into render-ready cells (row major). */
export function matrixCells(matrix) {
    const cells = [];
    matrix.forEach((row, r) => {
        const total = row.reduce((a, b) => a + b, 0);
        row.forEach((count, c) => {
            cells.push({
                row: r,
                col: c,
                count,
                share: total > 0 ? count / total : 0,
                diagonal: r === c,
            });
        });
    });
    return cells;
}
export function perRoomAccuracy(matrix) {
    return matrix.map((row, r) => {
        const total = row.reduce((a, b) => a + b, 0);
        return total > 0 ? row[r] / total : 0;
    });
}
function heatColor(share, diagonal) {
    // white -> saturated; green scale on the diagonal, red off it
    const alpha = (0.08 + 0.92 * share).toFixed(3);
    return diagonal ? `rgba(19,115,51,${alpha})` : `rgba(197,34,31,${alpha})`;
}
export function renderMetricsView(metrics) {
    if (!metrics || !metrics.confusion_matrix) {
        return `
<section class="metrics-view">
  <h2>Model metrics</h2>
  <p class="empty-metrics">No completed training yet.</p>
</section>`;
    }
    const labels = metrics.labels;
    const matrix = metrics.confusion_matrix;
    const cells = matrixCells(matrix);
    const header = labels
        .map((l) => `<th class="col-label">${escapeHtml(l)}</th>`)
        .join("");
    const perRoom = perRoomAccuracy(matrix);
    const body = labels
        .map((rowLabel, r) => {
        const rowCells = cells
            .filter((c) => c.row === r)
            .map((c) => `
        <td class="cell${c.diagonal ? " diagonal" : ""}"
            style="background:${heatColor(c.share, c.diagonal)}"
            title="${escapeHtml(labels[c.row])} recognized as ${escapeHtml(labels[c.col])}: ${c.count}">
          ${c.count}
        </td>`)
            .join("");
        return `
      <tr>
        <th class="row-label">${escapeHtml(rowLabel)}</th>${rowCells}
        <td class="room-accuracy">${(perRoom[r] * 100).toFixed(1)}%</td>
      </tr>`;
    })
        .join("");
    const acc = metrics.accuracy !== undefined
        ? `<p class="overall-accuracy">overall accuracy ${(metrics.accuracy * 100).toFixed(1)}%
         (model v${metrics.model_version}, ${metrics.num_classes} rooms)</p>`
        : "";
    return `
<section class="metrics-view">
  <h2>Model metrics</h2>
  ${acc}
  <table class="confusion-matrix">
    <thead><tr><th></th>${header}<th>accuracy</th></tr></thead>
    <tbody>${body}</tbody>
  </table>
  <p class="matrix-legend">rows: true room, columns: recognized room</p>
</section>`;
}
