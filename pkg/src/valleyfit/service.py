"""Local HTTP service driving the human-in-the-loop analysis pipeline.

Sessions are held in memory (optionally mirrored to a persistence
directory, one JSON bundle per session).  Stages advance strictly forward
(loaded -> filtered -> contoured -> assigned -> extracted -> fitted);
re-running an earlier stage invalidates everything downstream.  Fits run
as cancellable background jobs polled through /results.

All numeric truth travels as JSON; the PNG endpoints exist purely for
display.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .contours import ContourSet, filter_contours, marching_squares
from .errors import FitCancelled, StageError, ValleyfitError
from .fitting import FitProblem, Observation, fit_circuit, fit_rabi
from .hamiltonians import (
    BiasCalibration,
    CircuitParams,
    RabiParams,
    TruncationConfig,
    rabi_transitions,
)
from .peaks import GroupAssignment, build_regions, extract_peaks, xor_resolve
from .schemas import (
    AssignmentModel,
    ExtractRequest,
    FilterRequest,
    FitRequest,
    SessionSummary,
    SpectrumUpload,
)
from .spectrum import Spectrum2D, normalize_unit_range
from .valley_filter import FilterConfig, FilteredImage, multiscale_valley_response

STAGES = ("loaded", "filtered", "contoured", "assigned", "extracted", "fitted")


class Session:
    def __init__(self, sid, spectrum):
        self.id = sid
        self.spectrum = spectrum
        self.lock = threading.RLock()
        self.stage = "loaded"
        self.filtered = None
        self.filter_config = None
        self.contours = None
        self.contour_params = None
        self.assignment = None
        self.peaks = None
        self.masks = None
        self.fits = {}            # model -> {'status', 'result'?}
        self._fit_thread = None
        self._cancel = threading.Event()

    def invalidate_from(self, stage):
        """Drop artifacts at and after the given stage."""
        idx = STAGES.index(stage)
        if idx <= STAGES.index("filtered"):
            self.filtered = None
            self.filter_config = None
        if idx <= STAGES.index("contoured"):
            self.contours = None
            self.contour_params = None
        if idx <= STAGES.index("assigned"):
            self.assignment = None
        if idx <= STAGES.index("extracted"):
            self.peaks = None
            self.masks = None
        self.fits = {}
        self.stage = STAGES[max(idx - 1, 0)]

    def require(self, stage):
        if STAGES.index(self.stage) < STAGES.index(stage):
            raise StageError(f"stage is '{self.stage}', need '{stage}'")

    def summary(self):
        return SessionSummary(
            id=self.id, stage=self.stage,
            shape=list(self.spectrum.shape),
            n_contours=len(self.contours) if self.contours is not None else None,
            n_peaks=len(self.peaks.points) if self.peaks is not None else None,
            fit_status={k: v["status"] for k, v in self.fits.items()},
        )

    def to_bundle(self):
        out = {"id": self.id, "stage": self.stage, "spectrum": self.spectrum.to_dict()}
        if self.filtered is not None:
            out["filtered"] = self.filtered.data.tolist()
            out["filter_config"] = {"scales": list(self.filter_config.scales)}
        if self.contours is not None:
            out["contours"] = self.contours.to_dict()
            out["contour_params"] = self.contour_params
        if self.assignment is not None:
            out["assignment"] = self.assignment.to_dict()
        if self.peaks is not None:
            out["peaks"] = _peaks_dict(self.peaks)
        out["fits"] = {
            k: {"status": v["status"],
                **({"result": v["result"].to_dict()} if v.get("result") else {})}
            for k, v in self.fits.items()
        }
        return out

    @classmethod
    def from_bundle(cls, d):
        s = cls(d["id"], Spectrum2D.from_dict(d["spectrum"]))
        s.stage = d.get("stage", "loaded")
        if "filtered" in d:
            cfg = FilterConfig(scales=tuple(d["filter_config"]["scales"]))
            s.filtered = FilteredImage(np.asarray(d["filtered"]), cfg)
            s.filter_config = cfg
        if "contours" in d:
            s.contours = ContourSet.from_dict(d["contours"])
            s.contour_params = d.get("contour_params")
        if "assignment" in d:
            s.assignment = GroupAssignment.from_dict(d["assignment"])
        # peaks/masks/fits are recomputed rather than rehydrated; drop stage back
        if s.stage in ("extracted", "fitted"):
            s.stage = "assigned" if s.assignment is not None else s.stage
        return s


def _peaks_dict(ps):
    return {
        "method": ps.method,
        "points": [{"group": p.group_id, "bias_index": p.bias_index, "bias": p.bias,
                    "freq": p.freq, "amplitude": p.amplitude} for p in ps.points],
        "tie_columns": [list(t) for t in ps.tie_columns],
    }


def _png_response(matrix):
    from PIL import Image

    data = np.asarray(matrix, dtype=float)
    lo, hi = data.min(), data.max()
    span = hi - lo if hi > lo else 1.0
    img8 = np.clip((data - lo) / span * 255.0, 0, 255).astype(np.uint8)[::-1]
    buf = io.BytesIO()
    Image.fromarray(img8, mode="L").save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def create_app(persist_dir=None):
    app = FastAPI(title="valleyfit analysis service", version="0.1.0")
    sessions = {}
    persist = Path(persist_dir) if persist_dir else None
    if persist:
        persist.mkdir(parents=True, exist_ok=True)
        for p in sorted(persist.glob("*.json")):
            try:
                with open(p) as f:
                    s = Session.from_bundle(json.load(f))
                sessions[s.id] = s
            except (ValueError, KeyError, ValleyfitError):
                continue

    def save(session):
        if persist:
            with open(persist / f"{session.id}.json", "w") as f:
                json.dump(session.to_bundle(), f)

    def get_session(sid):
        if sid not in sessions:
            raise LookupError(f"unknown session {sid}")
        return sessions[sid]

    @app.exception_handler(LookupError)
    async def _not_found(request, exc):
        return JSONResponse(status_code=404,
                            content={"error": "not_found", "message": str(exc)})

    @app.exception_handler(StageError)
    async def _conflict(request, exc):
        return JSONResponse(status_code=409,
                            content={"error": "stage_violation", "message": str(exc)})

    @app.exception_handler(ValleyfitError)
    async def _domain_error(request, exc):
        return JSONResponse(status_code=422,
                            content={"error": type(exc).__name__, "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _validation(request, exc):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(x) for x in first.get("loc", ())[1:]) or None
        return JSONResponse(status_code=422, content={
            "error": "validation", "message": first.get("msg", "invalid payload"),
            "field": field})

    @app.post("/sessions", response_model=SessionSummary)
    def create_session(body: SpectrumUpload):
        spec = Spectrum2D.from_dict(body.model_dump(exclude={"negate"}))
        if body.negate:
            spec = Spectrum2D(spec.bias, spec.freq, -spec.amplitude, spec.metadata)
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, spec)
        sessions[sid] = session
        save(session)
        return session.summary()

    @app.get("/sessions")
    def list_sessions():
        return [s.summary().model_dump() for s in sessions.values()]

    @app.post("/sessions/{sid}/filter", response_model=SessionSummary)
    def run_filter(sid: str, body: FilterRequest):
        s = get_session(sid)
        with s.lock:
            s.invalidate_from("filtered")
            scales = tuple(body.scales)
            if body.auto_select:
                from .valley_filter import auto_select_scale
                scales = (auto_select_scale(s.spectrum.amplitude, scales,
                                            body.level, body.min_length),)
            s.filter_config = FilterConfig(scales=scales)
            s.filtered = multiscale_valley_response(s.spectrum.amplitude, s.filter_config)
            s.stage = "filtered"
            save(s)
            return s.summary()

    @app.get("/sessions/{sid}/filtered")
    def get_filtered(sid: str):
        s = get_session(sid)
        s.require("filtered")
        return {"data": s.filtered.data.tolist(),
                "scales": list(s.filter_config.scales),
                "degenerate": s.filtered.degenerate,
                "bias": s.spectrum.bias.to_dict(), "freq": s.spectrum.freq.to_dict()}

    @app.get("/sessions/{sid}/filtered.png")
    def get_filtered_png(sid: str):
        s = get_session(sid)
        s.require("filtered")
        return _png_response(s.filtered.data)

    @app.get("/sessions/{sid}/spectrum")
    def get_spectrum(sid: str):
        return get_session(sid).spectrum.to_dict()

    @app.get("/sessions/{sid}/spectrum.png")
    def get_spectrum_png(sid: str):
        return _png_response(get_session(sid).spectrum.amplitude)

    @app.get("/sessions/{sid}/contours")
    def get_contours(sid: str, level: float = 0.25, min_length: int = 20):
        s = get_session(sid)
        s.require("filtered")
        with s.lock:
            params = {"level": level, "min_length": min_length}
            if s.contours is None or s.contour_params != params:
                s.invalidate_from("contoured")
                cs = marching_squares(s.filtered.data, level)
                s.contours = filter_contours(cs, min_length)
                s.contour_params = params
                s.stage = "contoured"
                save(s)
            return s.contours.to_dict()

    @app.put("/sessions/{sid}/assignment", response_model=SessionSummary)
    def put_assignment(sid: str, body: AssignmentModel):
        s = get_session(sid)
        s.require("contoured")
        with s.lock:
            s.invalidate_from("assigned")
            known = {c.id for c in s.contours.contours}
            for gid, members in body.groups.items():
                for cid in members:
                    if cid not in known:
                        raise ValleyfitError(f"unknown contour id {cid} in group {gid}")
            s.assignment = GroupAssignment(groups=body.groups,
                                           transition_labels=body.transitions,
                                           ignored=body.ignored)
            s.stage = "assigned"
            save(s)
            return s.summary()

    @app.post("/sessions/{sid}/extract")
    def post_extract(sid: str, body: ExtractRequest):
        s = get_session(sid)
        s.require("assigned")
        with s.lock:
            s.invalidate_from("extracted")
            masks = xor_resolve(build_regions(
                s.contours, s.assignment, body.halfwidth_rows, body.halfwidth_cols))
            s.masks = masks
            s.peaks = extract_peaks(s.filtered, masks, raw=s.spectrum,
                                    method=body.method)
            s.stage = "extracted"
            save(s)
            return _peaks_dict(s.peaks)

    def _observations(s, req):
        labels = s.assignment.transition_labels
        obs = []
        for p in s.peaks.points:
            if p.group_id in labels:
                obs.append(Observation(labels[p.group_id], p.bias, p.freq, 1.0))
        return obs

    def _run_fit_job(s, req):
        stop = s._cancel.is_set
        try:
            if req.model == "rabi":
                problem = FitProblem(
                    observations=_observations(s, req), model="rabi",
                    initial=RabiParams.from_dict(req.initial),
                    trunc=TruncationConfig(fock=req.fock),
                    frozen=frozenset(req.frozen))
                maxfev = req.maxfev[0] if req.maxfev else 4000
                result = fit_rabi(problem, maxfev=maxfev, should_stop=stop)
            elif req.model == "circuit":
                from .fitting import sample_model_curve

                if req.bias_is_flux:
                    cal = None
                elif req.kappa is None:
                    raise ValleyfitError("circuit fit needs kappa (or flux bias)")
                else:
                    I0 = req.I0
                    if I0 is None and s.fits.get("rabi", {}).get("result"):
                        I0 = s.fits["rabi"]["result"].params.I0
                    cal = BiasCalibration(I0=I0 or 0.0, kappa=req.kappa)
                if s.fits.get("rabi", {}).get("result"):
                    # preferred path: fit the smooth Rabi curves, not raw peaks
                    rabi = s.fits["rabi"]["result"].params
                    flux = np.linspace(0.49, 0.50, req.n_points)
                    bias = flux if cal is None else cal.current(flux)
                    obs = sample_model_curve(rabi, ("w10", "w20", "w31"), bias,
                                             F=req.fock)
                else:
                    obs = _observations(s, req)
                problem = FitProblem(
                    observations=obs, model="circuit",
                    initial=CircuitParams.from_dict(req.initial),
                    frozen=frozenset(req.frozen))
                schedule = [{"charge": tuple(st), "qubit_space": req.qubit_space,
                             "fock": req.fock}
                            for st in (req.schedule or [[6, 6, 6], [9, 6, 7]])]
                maxfev = tuple(req.maxfev) if req.maxfev else (500, 300)
                result = fit_circuit(problem, schedule=schedule, maxfev=maxfev,
                                     calibration=cal, should_stop=stop)
            else:
                raise ValleyfitError(f"unknown fit model '{req.model}'")
            with s.lock:
                s.fits[req.model] = {"status": "done", "result": result,
                                     "request": req}
                s.stage = "fitted"
                save(s)
        except FitCancelled:
            with s.lock:
                s.fits[req.model] = {"status": "cancelled"}
        except (ValleyfitError, ValueError) as exc:
            with s.lock:
                s.fits[req.model] = {"status": "failed", "message": str(exc)}

    @app.post("/sessions/{sid}/fit", status_code=202)
    def post_fit(sid: str, body: FitRequest):
        s = get_session(sid)
        s.require("extracted")
        with s.lock:
            if s._fit_thread is not None and s._fit_thread.is_alive():
                raise StageError("a fit is already running for this session")
            s._cancel.clear()
            s.fits[body.model] = {"status": "running"}
            t = threading.Thread(target=_run_fit_job, args=(s, body), daemon=True)
            s._fit_thread = t
            t.start()
        return {"model": body.model, "status": "running"}

    @app.delete("/sessions/{sid}/fit")
    def cancel_fit(sid: str):
        s = get_session(sid)
        s._cancel.set()
        running = s._fit_thread is not None and s._fit_thread.is_alive()
        return {"cancelling": running}

    @app.get("/sessions/{sid}/results")
    def get_results(sid: str):
        s = get_session(sid)
        out = {"stage": s.stage, "fits": {}}
        if s.peaks is not None:
            out["peaks"] = _peaks_dict(s.peaks)
        if s.assignment is not None:
            out["assignment"] = s.assignment.to_dict()
        for model, rec in s.fits.items():
            entry = {"status": rec["status"]}
            if rec.get("result"):
                entry["result"] = rec["result"].to_dict()
            if rec.get("message"):
                entry["message"] = rec["message"]
            out["fits"][model] = entry
        return out

    @app.get("/sessions/{sid}/overlay")
    def get_overlay(sid: str, model: str = "rabi", n: int = 0):
        s = get_session(sid)
        s.require("fitted")
        rec = s.fits.get(model)
        if rec is None or rec.get("status") != "done":
            raise StageError(f"no completed '{model}' fit")
        params = rec["result"].params
        bias = s.spectrum.bias.values
        if n and n < bias.size:
            bias = np.linspace(bias.min(), bias.max(), n)
        curves = {"w10": [], "w20": [], "w31": []}
        if model == "rabi":
            for b in bias:
                w10, w20, w31 = rabi_transitions(params, float(b),
                                                 rec["request"].fock)
                curves["w10"].append(w10)
                curves["w20"].append(w20)
                curves["w31"].append(w31)
        else:
            from .fitting import circuit_curve_model

            req = rec["request"]
            if req.bias_is_flux:
                flux = bias
            else:
                rabi_rec = s.fits.get("rabi", {}).get("result")
                I0 = req.I0 if req.I0 is not None else (
                    rabi_rec.params.I0 if rabi_rec else 0.0)
                flux = BiasCalibration(I0=I0, kappa=req.kappa).phi_frac(bias)
            trunc = TruncationConfig(charge=tuple((req.schedule or [[6, 6, 6], [9, 6, 7]])[-1]),
                                     qubit_space=req.qubit_space, fock=req.fock)
            obs = [Observation(lbl, float(x), 0.0)
                   for x in flux for lbl in ("w10", "w20", "w31")]
            model_freqs = circuit_curve_model(
                params, obs, trunc,
                {"w10": (1, 0), "w20": (2, 0), "w31": (3, 1)})
            for i, o in enumerate(obs):
                curves[o.label].append(float(model_freqs[i]))
        return {"bias": bias.tolist(), "model": model,
                "curves": {k: list(map(float, v)) for k, v in curves.items()}}

    return app
