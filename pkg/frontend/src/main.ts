/** Single-page app wiring: load a spectrum, filter, trace contours, assign
 * them to transition groups by clicking, extract peaks, run fits, and
 * overlay the fitted curves. All numbers displayed come from the service. */

import { ApiClient, ServiceError } from "./api.js";
import { AssignmentDraft, IGNORE_GROUP } from "./assignment.js";
import { formatFitPanel } from "./display.js";
import { HeatmapView } from "./heatmap.js";
import { pickContour } from "./picking.js";
import {
  drawContours,
  drawFitCurves,
  drawPeaks,
  groupColor,
} from "./overlay.js";
import type {
  ContourSetPayload,
  FilteredPayload,
  OverlayPayload,
  ResultsPayload,
  SpectrumPayload,
} from "./types.js";

const N_GROUPS = 4;

interface ViewState {
  sessionId: string | null;
  showFiltered: boolean;
  activeGroup: number; // index or IGNORE_GROUP
  showFit: string | null;
  spectrum: SpectrumPayload | null;
  filtered: FilteredPayload | null;
  contours: ContourSetPayload | null;
  draft: AssignmentDraft;
  results: ResultsPayload | null;
  overlay: OverlayPayload | null;
  pollTimer: number | null;
}

const state: ViewState = {
  sessionId: null,
  showFiltered: true,
  activeGroup: 0,
  showFit: null,
  spectrum: null,
  filtered: null,
  contours: null,
  draft: new AssignmentDraft(
    new Map([[0, "w10"], [1, "w20"], [2, "w31"], [3, "w43"]]),
  ),
  results: null,
  overlay: null,
  pollTimer: null,
};

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function status(msg: string, isError = false): void {
  const bar = el<HTMLDivElement>("status");
  bar.textContent = msg;
  bar.className = isError ? "status error" : "status";
}

function render(): void {
  const canvas = el<HTMLCanvasElement>("map");
  const view = heatmap;
  const matrix = state.showFiltered && state.filtered
    ? state.filtered.data
    : state.spectrum?.amplitude;
  if (!matrix) return;
  view.render(matrix);
  const ctx = canvas.getContext("2d")!;
  if (state.contours) {
    drawContours(ctx, state.contours.contours, view,
      (id) => state.draft.groupOf(id));
  }
  if (state.results?.peaks && state.spectrum) {
    drawPeaks(ctx, state.results.peaks, state.spectrum.freq.values, view);
  }
  if (state.overlay && state.spectrum) {
    drawFitCurves(ctx, state.overlay, state.spectrum.bias.values,
      state.spectrum.freq.values, view);
  }
  renderSidebar();
}

function renderSidebar(): void {
  const groupsDiv = el<HTMLDivElement>("groups");
  groupsDiv.innerHTML = "";
  for (let g = 0; g < N_GROUPS; g++) {
    const members = state.draft.groups().get(g) ?? [];
    const row = document.createElement("div");
    row.className = "group-row" + (state.activeGroup === g ? " active" : "");
    row.innerHTML = `<span class="swatch" style="background:${groupColor(g)}"></span>` +
      `<b>${g}</b> ${state.draft.transitionLabels.get(g) ?? ""} ` +
      `<code>[${members.join(", ")}]</code>`;
    row.onclick = () => {
      state.activeGroup = g;
      renderSidebar();
    };
    groupsDiv.appendChild(row);
  }
  const ign = document.createElement("div");
  ign.className = "group-row" +
    (state.activeGroup === IGNORE_GROUP ? " active" : "");
  ign.innerHTML = `<span class="swatch" style="background:${groupColor(IGNORE_GROUP)}"></span>` +
    `ignore <code>[${state.draft.ignored().join(", ")}]</code>`;
  ign.onclick = () => {
    state.activeGroup = IGNORE_GROUP;
    renderSidebar();
  };
  groupsDiv.appendChild(ign);

  const panel = el<HTMLPreElement>("fit-panel");
  const lines = formatFitPanel(state.results?.fits ?? {});
  panel.textContent = lines.join("\n") || "(no fits yet)";
}

let heatmap: HeatmapView;

async function loadSpectrumFile(file: File): Promise<void> {
  const text = await file.text();
  const payload = JSON.parse(text) as SpectrumPayload;
  const summary = await api.createSession(payload);
  state.sessionId = summary.id;
  state.spectrum = await api.getSpectrum(summary.id);
  state.filtered = null;
  state.contours = null;
  state.results = null;
  state.overlay = null;
  status(`session ${summary.id}: ${summary.shape?.join("x")} spectrum loaded`);
  render();
}

async function runFilter(): Promise<void> {
  if (!state.sessionId) return;
  const scales = el<HTMLInputElement>("scales").value
    .split(",").map((s) => parseFloat(s.trim())).filter((x) => x > 0);
  await api.runFilter(state.sessionId, scales);
  state.filtered = await api.getFiltered(state.sessionId);
  state.contours = null;
  state.overlay = null;
  state.results = null;
  status(`filtered with scales [${state.filtered.scales.join(", ")}]`);
  render();
}

async function runContours(): Promise<void> {
  if (!state.sessionId) return;
  const level = parseFloat(el<HTMLInputElement>("level").value);
  const minLen = parseInt(el<HTMLInputElement>("minlen").value, 10);
  state.contours = await api.getContours(state.sessionId, level, minLen);
  state.draft = new AssignmentDraft(state.draft.transitionLabels);
  status(`${state.contours.contours.length} contours at level ${level}`);
  render();
}

async function submitAssignment(): Promise<void> {
  if (!state.sessionId || !state.draft.validate()) {
    status("assignment invalid", true);
    return;
  }
  await api.putAssignment(state.sessionId, state.draft.toPayload());
  state.draft.dirty = false;
  status("assignment submitted");
}

async function runExtract(): Promise<void> {
  if (!state.sessionId) return;
  if (state.draft.dirty) await submitAssignment();
  const peaks = await api.extract(state.sessionId);
  state.results = await api.getResults(state.sessionId);
  status(`${peaks.points.length} peak points extracted`);
  render();
}

function pollFit(model: string): void {
  if (state.pollTimer !== null) window.clearInterval(state.pollTimer);
  state.pollTimer = window.setInterval(async () => {
    if (!state.sessionId) return;
    state.results = await api.getResults(state.sessionId);
    const entry = state.results.fits[model];
    renderSidebar();
    if (entry && entry.status !== "running") {
      window.clearInterval(state.pollTimer!);
      state.pollTimer = null;
      if (entry.status === "done") {
        state.overlay = await api.getOverlay(state.sessionId, model);
        status(`${model} fit done`);
      } else {
        status(`${model} fit ${entry.status}: ${entry.message ?? ""}`, true);
      }
      render();
    }
  }, 500);
}

async function runFit(model: "rabi" | "circuit"): Promise<void> {
  if (!state.sessionId) return;
  const initial = JSON.parse(el<HTMLTextAreaElement>("fit-init").value);
  const body: Record<string, unknown> = { model, initial };
  if (model === "circuit") {
    const kappa = parseFloat(el<HTMLInputElement>("kappa").value);
    if (Number.isFinite(kappa) && kappa !== 0) body.kappa = kappa;
    else body.bias_is_flux = true;
  }
  await api.startFit(state.sessionId, body);
  status(`${model} fit running...`);
  pollFit(model);
}

function onCanvasClick(ev: MouseEvent): void {
  if (!state.contours) return;
  const canvas = el<HTMLCanvasElement>("map");
  const rect = canvas.getBoundingClientRect();
  const x = (ev.clientX - rect.left) * (canvas.width / rect.width);
  const y = (ev.clientY - rect.top) * (canvas.height / rect.height);
  const hit = pickContour(x, y, state.contours.contours, heatmap, 8);
  if (hit) {
    state.draft.assign(hit.id, state.activeGroup);
    render();
  }
}

function onKey(ev: KeyboardEvent): void {
  if (ev.target instanceof HTMLInputElement ||
      ev.target instanceof HTMLTextAreaElement) return;
  if (ev.key >= "0" && ev.key < String(N_GROUPS)) {
    state.activeGroup = parseInt(ev.key, 10);
    renderSidebar();
  } else if (ev.key === "i") {
    state.activeGroup = IGNORE_GROUP;
    renderSidebar();
  } else if (ev.key === "u" || (ev.key === "z" && (ev.ctrlKey || ev.metaKey))) {
    state.draft.undo();
    render();
  } else if (ev.key === "t") {
    state.showFiltered = !state.showFiltered;
    render();
  }
}

function guard<T extends unknown[]>(fn: (...args: T) => Promise<void>) {
  return (...args: T) => {
    fn(...args).catch((err) => {
      if (err instanceof ServiceError) {
        status(`${err.code}: ${err.message}`, true);
      } else {
        status(String(err), true);
      }
    });
  };
}

export function boot(): void {
  heatmap = new HeatmapView(el<HTMLCanvasElement>("map"));
  el<HTMLInputElement>("file").addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file) guard(loadSpectrumFile)(file);
  });
  el<HTMLButtonElement>("btn-filter").onclick = guard(runFilter);
  el<HTMLButtonElement>("btn-contours").onclick = guard(runContours);
  el<HTMLButtonElement>("btn-assign").onclick = guard(submitAssignment);
  el<HTMLButtonElement>("btn-extract").onclick = guard(runExtract);
  el<HTMLButtonElement>("btn-fit-rabi").onclick = () => guard(runFit)("rabi");
  el<HTMLButtonElement>("btn-fit-circuit").onclick = () => guard(runFit)("circuit");
  el<HTMLCanvasElement>("map").addEventListener("click", onCanvasClick);
  window.addEventListener("keydown", onKey);
  status("load a spectrum JSON to begin");
}

if (typeof document !== "undefined" && document.getElementById("map")) {
  boot();
}
