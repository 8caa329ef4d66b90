/** Wire types mirroring the analysis service JSON API. */

export interface Axis {
  values: number[];
  label: string;
  unit: string;
}

export interface SpectrumPayload {
  bias: Axis;
  freq: Axis;
  amplitude: number[][];
  metadata: Record<string, string>;
}

export interface FilteredPayload {
  data: number[][];
  scales: number[];
  degenerate: boolean;
  bias: Axis;
  freq: Axis;
}

export interface ContourPayload {
  id: number;
  closed: boolean;
  vertices: [number, number][]; // (row, col) sub-pixel
}

export interface ContourSetPayload {
  level: number;
  source_shape: [number, number];
  contours: ContourPayload[];
}

export interface AssignmentPayload {
  groups: Record<string, number[]>;
  transitions: Record<string, string>;
  ignored: number[];
}

export interface PeakPointPayload {
  group: number;
  bias_index: number;
  bias: number;
  freq: number;
  amplitude: number;
}

export interface PeaksPayload {
  method: string;
  points: PeakPointPayload[];
  tie_columns: [number, number][];
}

export interface FitResultPayload {
  params: Record<string, number>;
  rms_GHz: number;
  iterations: number;
  converged: boolean;
  objective: number;
  residuals_GHz: number[];
}

export interface FitEntry {
  status: "running" | "done" | "failed" | "cancelled";
  result?: FitResultPayload;
  message?: string;
}

export interface ResultsPayload {
  stage: string;
  peaks?: PeaksPayload;
  assignment?: AssignmentPayload;
  fits: Record<string, FitEntry>;
}

export interface OverlayPayload {
  bias: number[];
  model: string;
  curves: Record<string, number[]>;
}

export interface SessionSummary {
  id: string;
  stage: string;
  shape?: [number, number];
  n_contours?: number;
  n_peaks?: number;
  fit_status: Record<string, string>;
}
