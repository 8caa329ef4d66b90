/** Contour, peak-marker, and fit-curve overlays on top of the heatmap. */

import type { PixelMapper } from "./picking.js";
import type {
  ContourPayload,
  OverlayPayload,
  PeaksPayload,
} from "./types.js";

export const GROUP_COLORS = [
  "#e63c3c", "#3ca0e6", "#5ac85a", "#f0b428", "#be5adc", "#50dcd2",
  "#f078be", "#96963c",
];
export const UNASSIGNED_COLOR = "#ff8c00";
export const IGNORED_COLOR = "#666666";

export function groupColor(group: number | null): string {
  if (group === null) return UNASSIGNED_COLOR;
  if (group < 0) return IGNORED_COLOR;
  return GROUP_COLORS[group % GROUP_COLORS.length];
}

export function drawContours(
  ctx: CanvasRenderingContext2D,
  contours: ContourPayload[],
  mapper: PixelMapper,
  groupOf: (id: number) => number | null,
  activeId: number | null = null,
): void {
  ctx.save();
  for (const c of contours) {
    ctx.beginPath();
    ctx.strokeStyle = groupColor(groupOf(c.id));
    ctx.lineWidth = c.id === activeId ? 3 : 1.5;
    const [x0, y0] = mapper.toCanvas(c.vertices[0][0], c.vertices[0][1]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < c.vertices.length; i++) {
      const [x, y] = mapper.toCanvas(c.vertices[i][0], c.vertices[i][1]);
      ctx.lineTo(x, y);
    }
    if (c.closed) ctx.closePath();
    ctx.stroke();
    const mid = c.vertices[Math.floor(c.vertices.length / 2)];
    const [mx, my] = mapper.toCanvas(mid[0], mid[1]);
    ctx.fillStyle = "#ffff00";
    ctx.font = "11px monospace";
    ctx.fillText(String(c.id), mx + 3, my - 3);
  }
  ctx.restore();
}

/** Star markers for extracted peaks; positions come from the service's
 * bias_index and the frequency axis (index lookup only, no math). */
export function drawPeaks(
  ctx: CanvasRenderingContext2D,
  peaks: PeaksPayload,
  freqValues: number[],
  mapper: PixelMapper,
): void {
  ctx.save();
  for (const p of peaks.points) {
    const row = nearestIndex(freqValues, p.freq);
    const [x, y] = mapper.toCanvas(row, p.bias_index);
    ctx.strokeStyle = groupColor(p.group);
    star(ctx, x, y, 4);
  }
  ctx.restore();
}

export function drawFitCurves(
  ctx: CanvasRenderingContext2D,
  overlay: OverlayPayload,
  biasValues: number[],
  freqValues: number[],
  mapper: PixelMapper,
): void {
  ctx.save();
  ctx.lineWidth = 2;
  const labels = Object.keys(overlay.curves);
  labels.forEach((label, k) => {
    ctx.strokeStyle = GROUP_COLORS[k % GROUP_COLORS.length];
    ctx.beginPath();
    let started = false;
    overlay.bias.forEach((b, i) => {
      const f = overlay.curves[label][i];
      if (f < freqValues[0] || f > freqValues[freqValues.length - 1]) {
        started = false;
        return;
      }
      const row = fractionalIndex(freqValues, f);
      const col = fractionalIndex(biasValues, b);
      const [x, y] = mapper.toCanvas(row, col);
      if (started) {
        ctx.lineTo(x, y);
      } else {
        ctx.moveTo(x, y);
        started = true;
      }
    });
    ctx.stroke();
  });
  ctx.restore();
}

export function nearestIndex(values: number[], v: number): number {
  let best = 0;
  let bestDist = Infinity;
  values.forEach((x, i) => {
    const d = Math.abs(x - v);
    if (d < bestDist) {
      best = i;
      bestDist = d;
    }
  });
  return best;
}

/** Fractional grid index by linear interpolation (display positioning only). */
export function fractionalIndex(values: number[], v: number): number {
  const n = values.length;
  if (v <= values[0]) return 0;
  if (v >= values[n - 1]) return n - 1;
  for (let i = 1; i < n; i++) {
    if (v <= values[i]) {
      return i - 1 + (v - values[i - 1]) / (values[i] - values[i - 1]);
    }
  }
  return n - 1;
}

function star(ctx: CanvasRenderingContext2D, x: number, y: number, r: number): void {
  ctx.beginPath();
  ctx.moveTo(x - r, y);
  ctx.lineTo(x + r, y);
  ctx.moveTo(x, y - r);
  ctx.lineTo(x, y + r);
  ctx.moveTo(x - r * 0.7, y - r * 0.7);
  ctx.lineTo(x + r * 0.7, y + r * 0.7);
  ctx.moveTo(x - r * 0.7, y + r * 0.7);
  ctx.lineTo(x + r * 0.7, y - r * 0.7);
  ctx.stroke();
}
