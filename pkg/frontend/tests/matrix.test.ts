import { describe, expect, it } from "vitest";
import { matrixCells, perRoomAccuracy, renderMetricsView } from "../src/views/matrix.js";
import type { TrainMetrics } from "../src/types.js";

const METRICS: TrainMetrics = {
  model_version: 2,
  num_classes: 3,
  labels: ["hall", "office", "store"],
  accuracy: 0.9,
  confusion_matrix: [
    [18, 1, 1],
    [0, 20, 0],
    [2, 2, 16],
  ],
};

describe("matrixCells", () => {
  it("produces exactly K x K cells for a K-class matrix", () => {
    const cells = matrixCells(METRICS.confusion_matrix!);
    expect(cells).toHaveLength(9);
    expect(cells.filter((c) => c.diagonal)).toHaveLength(3);
  });

  it("normalizes shares by row totals", () => {
    const cells = matrixCells(METRICS.confusion_matrix!);
    const diag = cells.find((c) => c.row === 0 && c.col === 0)!;
    expect(diag.share).toBeCloseTo(18 / 20);
    const rowShares = cells
      .filter((c) => c.row === 2)
      .reduce((a, c) => a + c.share, 0);
    expect(rowShares).toBeCloseTo(1);
  });

  it("treats an empty row as zero share rather than dividing by zero", () => {
    const cells = matrixCells([
      [0, 0],
      [1, 1],
    ]);
    expect(cells[0].share).toBe(0);
    expect(cells[1].share).toBe(0);
  });
});

describe("perRoomAccuracy", () => {
  it("is the diagonal over the row total", () => {
    expect(perRoomAccuracy(METRICS.confusion_matrix!)).toEqual([
      18 / 20,
      1,
      16 / 20,
    ]);
  });
});

describe("renderMetricsView", () => {
  it("renders a K x K grid with row and column room labels", () => {
    const html = renderMetricsView(METRICS);
    expect([...html.matchAll(/<td class="cell/g)]).toHaveLength(9);
    expect([...html.matchAll(/col-label/g)]).toHaveLength(3);
    expect([...html.matchAll(/row-label/g)]).toHaveLength(3);
    for (const label of METRICS.labels) expect(html).toContain(label);
  });

  it("highlights the diagonal", () => {
    const html = renderMetricsView(METRICS);
    expect([...html.matchAll(/cell diagonal/g)]).toHaveLength(3);
  });

  it("shows an empty state before any training completed", () => {
    const html = renderMetricsView(null);
    expect(html).toContain("No completed training yet");
    expect(html).not.toContain("confusion-matrix");
  });
});
