/** Canvas heatmap of a numeric matrix with a client-side color map.
 *
 * Rendering is pure display: the matrix min/max used for the color scale
 * are computed only to map colors, never shown as analysis results. Row 0
 * of the matrix is drawn at the bottom (low frequency down, matching the
 * axis orientation of the maps). */

import type { PixelMapper } from "./picking.js";

const VIRIDIS: [number, number, number][] = [
  [68, 1, 84], [71, 44, 122], [59, 81, 139], [44, 113, 142], [33, 144, 141],
  [39, 173, 129], [92, 200, 99], [170, 220, 50], [253, 231, 37],
];

export function colorFor(t: number): [number, number, number] {
  const x = Math.max(0, Math.min(1, t)) * (VIRIDIS.length - 1);
  const i = Math.min(Math.floor(x), VIRIDIS.length - 2);
  const f = x - i;
  const a = VIRIDIS[i];
  const b = VIRIDIS[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export class HeatmapView implements PixelMapper {
  rows = 0;
  cols = 0;
  cell = 4;

  constructor(private canvas: HTMLCanvasElement) {}

  toCanvas(row: number, col: number): [number, number] {
    // row 0 at the bottom of the canvas
    return [(col + 0.5) * this.cell, (this.rows - row - 0.5) * this.cell];
  }

  fromCanvas(x: number, y: number): [number, number] {
    return [this.rows - y / this.cell - 0.5, x / this.cell - 0.5];
  }

  render(matrix: number[][]): void {
    this.rows = matrix.length;
    this.cols = matrix[0]?.length ?? 0;
    const maxCanvas = 900;
    this.cell = Math.max(1, Math.floor(maxCanvas / Math.max(this.rows, this.cols)));
    this.canvas.width = this.cols * this.cell;
    this.canvas.height = this.rows * this.cell;
    const ctx = this.canvas.getContext("2d")!;
    let lo = Infinity;
    let hi = -Infinity;
    for (const row of matrix) {
      for (const v of row) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
    const span = hi > lo ? hi - lo : 1;
    const img = ctx.createImageData(this.cols, this.rows);
    for (let r = 0; r < this.rows; r++) {
      const yr = this.rows - r - 1;
      for (let c = 0; c < this.cols; c++) {
        const [rr, gg, bb] = colorFor((matrix[r][c] - lo) / span);
        const o = (yr * this.cols + c) * 4;
        img.data[o] = rr;
        img.data[o + 1] = gg;
        img.data[o + 2] = bb;
        img.data[o + 3] = 255;
      }
    }
    const off = new OffscreenCanvas(this.cols, this.rows);
    const octx = off.getContext("2d")!;
    octx.putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(off, 0, 0, this.canvas.width, this.canvas.height);
  }
}
