/** Nearest-polyline hit testing for contour picking. */

import type { ContourPayload } from "./types.js";

export interface PixelMapper {
  /** (row, col) in data coordinates -> (x, y) canvas pixels. */
  toCanvas(row: number, col: number): [number, number];
}

function segmentDistance(
  px: number, py: number,
  ax: number, ay: number,
  bx: number, by: number,
): number {
  const dx = bx - ax;
  const dy = by - ay;
  const len2 = dx * dx + dy * dy;
  let t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0;
  t = Math.max(0, Math.min(1, t));
  const cx = ax + t * dx;
  const cy = ay + t * dy;
  return Math.hypot(px - cx, py - cy);
}

export function distanceToContour(
  x: number, y: number,
  contour: ContourPayload,
  mapper: PixelMapper,
): number {
  const v = contour.vertices;
  if (v.length === 1) {
    const [ax, ay] = mapper.toCanvas(v[0][0], v[0][1]);
    return Math.hypot(x - ax, y - ay);
  }
  let best = Infinity;
  let [ax, ay] = mapper.toCanvas(v[0][0], v[0][1]);
  for (let i = 1; i < v.length; i++) {
    const [bx, by] = mapper.toCanvas(v[i][0], v[i][1]);
    best = Math.min(best, segmentDistance(x, y, ax, ay, bx, by));
    [ax, ay] = [bx, by];
  }
  if (contour.closed && v.length > 2) {
    const [bx, by] = mapper.toCanvas(v[0][0], v[0][1]);
    best = Math.min(best, segmentDistance(x, y, ax, ay, bx, by));
  }
  return best;
}

/** Pick the contour nearest to the click, or null when nothing is within
 * the tolerance (px). */
export function pickContour(
  x: number, y: number,
  contours: ContourPayload[],
  mapper: PixelMapper,
  tolerancePx = 6,
): ContourPayload | null {
  let best: ContourPayload | null = null;
  let bestDist = tolerancePx;
  for (const c of contours) {
    const d = distanceToContour(x, y, c, mapper);
    if (d <= bestDist) {
      best = c;
      bestDist = d;
    }
  }
  return best;
}
