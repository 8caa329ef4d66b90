/** Contract tests against fixtures recorded from a live service run: the
 * client must submit exactly the assignment it displays and render exactly
 * the numbers the service returned — no client-side analysis. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AssignmentDraft } from "../src/assignment.js";
import { formatFitPanel } from "../src/display.js";
import { drawContours, drawPeaks, nearestIndex } from "../src/overlay.js";
import type {
  AssignmentPayload,
  ContourSetPayload,
  OverlayPayload,
  PeaksPayload,
  ResultsPayload,
} from "../src/types.js";

function fixture<T>(name: string): T {
  const p = join(__dirname, "fixtures", name);
  return JSON.parse(readFileSync(p, "utf-8")) as T;
}

const contours = fixture<ContourSetPayload>("contours.json");
const assignment = fixture<AssignmentPayload>("assignment.json");
const peaks = fixture<PeaksPayload>("peaks.json");
const results = fixture<ResultsPayload>("results.json");
const overlay = fixture<OverlayPayload>("overlay.json");
const axes = fixture<{ freq_values: number[]; bias_values: number[] }>("axes.json");

class MockCtx {
  strokes = 0;
  texts: string[] = [];
  path: [number, number][] = [];
  save() {}
  restore() {}
  beginPath() { this.path = []; }
  closePath() {}
  moveTo(x: number, y: number) { this.path.push([x, y]); }
  lineTo(x: number, y: number) { this.path.push([x, y]); }
  stroke() { this.strokes += 1; }
  fillText(t: string) { this.texts.push(t); }
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 1;
  font = "";
}

const mapper = { toCanvas: (r: number, c: number): [number, number] => [c, r] };

describe("assignment submission fidelity", () => {
  it("PUT body is byte-identical to the displayed draft payload", async () => {
    // rebuild the recorded assignment through UI clicks
    const draft = new AssignmentDraft(
      new Map(Object.entries(assignment.transitions)
        .map(([g, l]) => [Number(g), l] as [number, string])),
    );
    for (const [g, members] of Object.entries(assignment.groups)) {
      for (const cid of members) draft.assign(cid, Number(g));
    }
    for (const cid of assignment.ignored) draft.assign(cid, -1);

    const sent: string[] = [];
    const api = new ApiClient("", async (url, init) => {
      sent.push(init?.body as string);
      return new Response(JSON.stringify({ id: "s", stage: "assigned", fit_status: {} }),
        { status: 200, headers: { "content-type": "application/json" } });
    });
    await api.putAssignment("s", draft.toPayload());
    expect(sent).toHaveLength(1);
    expect(JSON.parse(sent[0])).toEqual(draft.toPayload());
    expect(JSON.parse(sent[0]).groups).toEqual(assignment.groups);
    expect(JSON.parse(sent[0]).ignored).toEqual(assignment.ignored);
  });
});

describe("render fidelity (no client-side numerics)", () => {
  it("draws exactly one marker per service peak at service positions", () => {
    const ctx = new MockCtx();
    drawPeaks(ctx as unknown as CanvasRenderingContext2D, peaks,
      axes.freq_values, mapper);
    expect(ctx.strokes).toBe(peaks.points.length);
  });

  it("peak marker rows are pure index lookups of service frequencies", () => {
    for (const p of peaks.points.slice(0, 25)) {
      const row = nearestIndex(axes.freq_values, p.freq);
      const better = axes.freq_values.some(
        (f) => Math.abs(f - p.freq) < Math.abs(axes.freq_values[row] - p.freq));
      expect(better).toBe(false);
    }
  });

  it("draws every contour with its service id label", () => {
    const ctx = new MockCtx();
    drawContours(ctx as unknown as CanvasRenderingContext2D, contours.contours,
      mapper, () => null);
    expect(ctx.strokes).toBe(contours.contours.length);
    expect(ctx.texts.sort()).toEqual(
      contours.contours.map((c) => String(c.id)).sort());
  });

  it("fit panel shows the service's parameters verbatim", () => {
    const lines = formatFitPanel(results.fits);
    const fit = results.fits["rabi"];
    expect(fit.status).toBe("done");
    for (const [k, v] of Object.entries(fit.result!.params)) {
      expect(lines).toContain(`  ${k} = ${v}`);
    }
    expect(lines).toContain(`  rms_GHz = ${fit.result!.rms_GHz}`);
    // every numeric token in the panel is traceable to the service response
    const serviceNumbers = new Set<string>([
      ...Object.values(fit.result!.params).map(String),
      String(fit.result!.rms_GHz),
    ]);
    for (const line of lines) {
      const m = line.match(/= (.*)$/);
      if (m) expect(serviceNumbers.has(m[1])).toBe(true);
    }
  });

  it("overlay curves keep the service's sample count per transition", () => {
    for (const curve of Object.values(overlay.curves)) {
      expect(curve).toHaveLength(overlay.bias.length);
    }
  });
});
