/** Thin typed client for the analysis service. Every number the UI shows
 * comes back from these calls; the client never computes physics. */

import type {
  AssignmentPayload,
  ContourSetPayload,
  FilteredPayload,
  OverlayPayload,
  PeaksPayload,
  ResultsPayload,
  SessionSummary,
  SpectrumPayload,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public field?: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    const body = await resp.json();
    if (!resp.ok) {
      throw new ServiceError(
        resp.status,
        body.error ?? "unknown",
        body.message ?? resp.statusText,
        body.field,
      );
    }
    return body as T;
  }

  createSession(spectrum: SpectrumPayload): Promise<SessionSummary> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(spectrum),
    });
  }

  getSpectrum(id: string): Promise<SpectrumPayload> {
    return this.request(`/sessions/${id}/spectrum`);
  }

  runFilter(id: string, scales: number[], autoSelect = false): Promise<SessionSummary> {
    return this.request(`/sessions/${id}/filter`, {
      method: "POST",
      body: JSON.stringify({ scales, auto_select: autoSelect }),
    });
  }

  getFiltered(id: string): Promise<FilteredPayload> {
    return this.request(`/sessions/${id}/filtered`);
  }

  getContours(id: string, level = 0.25, minLength = 20): Promise<ContourSetPayload> {
    return this.request(
      `/sessions/${id}/contours?level=${level}&min_length=${minLength}`,
    );
  }

  putAssignment(id: string, assignment: AssignmentPayload): Promise<SessionSummary> {
    return this.request(`/sessions/${id}/assignment`, {
      method: "PUT",
      body: JSON.stringify(assignment),
    });
  }

  extract(id: string, method = "region-min"): Promise<PeaksPayload> {
    return this.request(`/sessions/${id}/extract`, {
      method: "POST",
      body: JSON.stringify({ method }),
    });
  }

  startFit(id: string, body: Record<string, unknown>): Promise<{ status: string }> {
    return this.request(`/sessions/${id}/fit`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  cancelFit(id: string): Promise<{ cancelling: boolean }> {
    return this.request(`/sessions/${id}/fit`, { method: "DELETE" });
  }

  getResults(id: string): Promise<ResultsPayload> {
    return this.request(`/sessions/${id}/results`);
  }

  getOverlay(id: string, model: string): Promise<OverlayPayload> {
    return this.request(`/sessions/${id}/overlay?model=${model}`);
  }
}
