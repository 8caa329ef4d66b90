"""Batch command-line interface: thin wrappers chaining the library end to
end without the UI.

Every subcommand writes its artifacts plus a JSON provenance sidecar
(inputs with checksums, parameters, package version, timestamp).  Artifact
files themselves carry no timestamps, so re-running a subcommand with the
same configuration overwrites byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .contours import ContourSet, export_overlay_png, filter_contours, marching_squares
from .convergence import charge_convergence, fock_convergence, qubit_space_convergence
from .errors import ValleyfitError
from .fitting import FitProblem, fit_circuit, fit_rabi, sample_model_curve
from .hamiltonians import (
    BiasCalibration,
    CircuitParams,
    FluxoniumParams,
    RabiParams,
    TruncationConfig,
    fluxonium_transitions,
    rabi_transitions,
)
from .peaks import GroupAssignment, PeakSet, build_regions, extract_peaks, precision_study, xor_resolve
from .spectrum import (
    AxisGrid,
    Spectrum2D,
    SyntheticLineSpec,
    generate_synthetic_spectrum,
    load_spectrum,
    save_spectrum,
)
from .valley_filter import FilterConfig, auto_select_scale, export_png, multiscale_valley_response


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _sidecar(artifact, inputs, parameters):
    side = {
        "artifact": str(artifact),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "parameters": parameters,
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(str(artifact) + ".provenance.json", "w") as f:
        json.dump(side, f, indent=1)


def _axis(spec_str, label, unit):
    start, stop, n = spec_str.split(":")
    return AxisGrid(np.linspace(float(start), float(stop), int(n)), label, unit)


def _fail(exc):
    click.echo(f"ERROR kind={type(exc).__name__} message={exc}", err=True)
    sys.exit(1)


class _Cmd(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (ValleyfitError, ValueError, OSError, KeyError) as exc:
            _fail(exc)


@click.group(cls=_Cmd)
@click.version_option(__version__)
def main():
    """Spectroscopy peak tracing and Hamiltonian fitting workbench."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="JSON generator config (kind=lines|rabi|fluxonium).")
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def synth(config_path, seed, out_path):
    """Generate a synthetic spectrumCSV from a generator config."""
    with open(config_path) as f:
        cfg = json.load(f)
    bias = _axis(cfg["bias"], "bias", cfg.get("bias_unit", "mA"))
    freq = _axis(cfg["freq"], "freq", "GHz")
    gamma = cfg.get("gamma", 0.04)
    depth = cfg.get("depth", 1.0)
    kind = cfg.get("kind", "lines")
    lines = []
    if kind == "lines":
        for ln in cfg["lines"]:
            coeffs = list(ln["poly"])              # polynomial in bias, high->low
            lines.append(SyntheticLineSpec(
                (lambda c: (lambda b: np.polyval(c, b)))(coeffs),
                ln.get("gamma", gamma), ln.get("depth", depth)))
    elif kind == "rabi":
        params = RabiParams.from_dict(cfg["params"])
        F = cfg.get("fock", 13)
        for i, label in enumerate(cfg.get("transitions", ["w10", "w20", "w31"])):
            idx = {"w10": 0, "w20": 1, "w31": 2}[label]
            lines.append(SyntheticLineSpec(
                (lambda k: (lambda b: np.array([rabi_transitions(params, bb, F)[k]
                                                for bb in np.atleast_1d(b)])))(idx),
                gamma, depth))
    elif kind == "fluxonium":
        params = FluxoniumParams.from_dict(cfg["params"])
        nb = cfg.get("n_basis", 50)
        for k in range(cfg.get("n_transitions", 3)):
            lines.append(SyntheticLineSpec(
                (lambda kk: (lambda b: np.array(
                    [fluxonium_transitions(params, bb, nb)[kk]
                     for bb in np.atleast_1d(b)])))(k),
                gamma, depth))
    else:
        raise ValueError(f"unknown generator kind: {kind}")
    spec = generate_synthetic_spectrum(lines, bias, freq,
                                       sigma_g=cfg.get("sigma_g", 0.0), seed=seed)
    save_spectrum(spec, out_path)
    _sidecar(out_path, [config_path], {"seed": seed, "config": cfg})
    click.echo(f"wrote {out_path} shape={spec.shape}")


@main.command("filter")
@click.option("--input", "in_path", type=click.Path(exists=True), required=True)
@click.option("--scales", default="1,2,4", show_default=True,
              help="Comma-separated Gaussian scales in pixels.")
@click.option("--auto-select", is_flag=True,
              help="Pick the single scale extracting the most contour structure.")
@click.option("--level", default=0.25, show_default=True,
              help="Contour level used by --auto-select.")
@click.option("--min-length", default=20, show_default=True)
@click.option("--negate", is_flag=True, help="Ridge-style input: negate at load.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--png", "png_path", type=click.Path(), default=None)
def filter_cmd(in_path, scales, auto_select, level, min_length, negate, out_path, png_path):
    """Run the multi-scale valley filter over a spectrum."""
    spec = load_spectrum(in_path, negate=negate)
    scale_list = tuple(float(s) for s in scales.split(","))
    if auto_select:
        picked = auto_select_scale(spec.amplitude, scale_list, level, min_length)
        scale_list = (picked,)
    filt = multiscale_valley_response(spec.amplitude, FilterConfig(scales=scale_list))
    out = Spectrum2D(spec.bias, spec.freq, filt.data,
                     {**spec.metadata, "filtered": "true",
                      "filter_scales": ",".join(str(s) for s in scale_list)})
    save_spectrum(out, out_path)
    _sidecar(out_path, [in_path], {"scales": scale_list, "auto_select": auto_select})
    if png_path:
        export_png(filt, png_path)
        _sidecar(png_path, [in_path], {"scales": scale_list})
    click.echo(f"wrote {out_path} scales={scale_list} degenerate={filt.degenerate}")


@main.command()
@click.option("--input", "in_path", type=click.Path(exists=True), required=True,
              help="Filtered spectrum CSV.")
@click.option("--level", default=0.25, show_default=True)
@click.option("--min-length", default=20, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--overlay", "overlay_path", type=click.Path(), default=None,
              help="Labeled contour overlay PNG for scripted assignment.")
def contours(in_path, level, min_length, out_path, overlay_path):
    """Trace iso-level contours of a filtered spectrum."""
    spec = load_spectrum(in_path)
    cs = filter_contours(marching_squares(spec.amplitude, level), min_length)
    cs.save(out_path)
    _sidecar(out_path, [in_path], {"level": level, "min_length": min_length})
    if overlay_path:
        export_overlay_png(spec.amplitude, cs, overlay_path)
        _sidecar(overlay_path, [in_path], {"level": level, "min_length": min_length})
    click.echo(f"wrote {out_path} contours={len(cs)}")


@main.command()
@click.option("--contours", "contours_path", type=click.Path(exists=True), required=True)
@click.option("--assignment", "assignment_path", type=click.Path(exists=True), required=True)
@click.option("--halfwidth-rows", default=5, show_default=True)
@click.option("--halfwidth-cols", default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def regions(contours_path, assignment_path, halfwidth_rows, halfwidth_cols, out_path):
    """Build XOR-resolved exclusive region masks from grouped contours."""
    cs = ContourSet.load(contours_path)
    ga = GroupAssignment.load(assignment_path)
    masks = xor_resolve(build_regions(cs, ga, halfwidth_rows, halfwidth_cols))
    np.savez_compressed(out_path, **{f"group_{m.group_id}": m.cells for m in masks})
    _sidecar(out_path, [contours_path, assignment_path],
             {"halfwidth_rows": halfwidth_rows, "halfwidth_cols": halfwidth_cols})
    click.echo(f"wrote {out_path} groups={[m.group_id for m in masks]}")


@main.command()
@click.option("--filtered", "filtered_path", type=click.Path(exists=True), required=True)
@click.option("--regions", "regions_path", type=click.Path(exists=True), required=True)
@click.option("--raw", "raw_path", type=click.Path(exists=True), default=None)
@click.option("--method", type=click.Choice(["region-min", "lorentzian-fit"]),
              default="region-min", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def peaks(filtered_path, regions_path, raw_path, method, out_path):
    """Extract per-bias peak points inside the resolved regions."""
    from .peaks import RegionMask

    filt = load_spectrum(filtered_path)
    raw = load_spectrum(raw_path) if raw_path else None
    z = np.load(regions_path)
    masks = [RegionMask(int(k.split("_")[1]), z[k].astype(bool))
             for k in sorted(z.files, key=lambda k: int(k.split("_")[1]))]
    ps = extract_peaks(filt.amplitude, masks, raw=raw, method=method,
                       bias=filt.bias.values, freq=filt.freq.values)
    ps.save_csv(out_path)
    inputs = [filtered_path, regions_path] + ([raw_path] if raw_path else [])
    _sidecar(out_path, inputs, {"method": method})
    click.echo(f"wrote {out_path} points={len(ps.points)}")


def _load_labels(path):
    with open(path) as f:
        d = json.load(f)
    return {int(k): v for k, v in d.get("transitions", d).items()}


@main.command("fit-rabi")
@click.option("--peaks", "peaks_path", type=click.Path(exists=True), required=True)
@click.option("--assignment", "assignment_path", type=click.Path(exists=True), required=True,
              help="Provides the group -> transition labels.")
@click.option("--init", "init_path", type=click.Path(exists=True), required=True,
              help="JSON RabiParams initial guess.")
@click.option("--fock", default=13, show_default=True)
@click.option("--frozen", default="", help="Comma-separated frozen parameter names.")
@click.option("--maxfev", default=4000, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def fit_rabi_cmd(peaks_path, assignment_path, init_path, fock, frozen, maxfev, out_path):
    """Fit the two-level + resonator model to extracted peaks."""
    ps = PeakSet.load_csv(peaks_path)
    labels = _load_labels(assignment_path)
    init = RabiParams.from_dict(json.load(open(init_path)))
    observations = [(labels[p.group_id], p.bias, p.freq, 1.0)
                    for p in ps.points if p.group_id in labels]
    problem = FitProblem(observations=observations, model="rabi", initial=init,
                         trunc=TruncationConfig(fock=fock),
                         frozen=frozenset(s for s in frozen.split(",") if s))
    result = fit_rabi(problem, maxfev=maxfev)
    with open(out_path, "w") as f:
        json.dump(result.to_dict(), f, indent=1)
    _sidecar(out_path, [peaks_path, assignment_path, init_path],
             {"fock": fock, "frozen": frozen, "maxfev": maxfev})
    click.echo(result.report())


@main.command("fit-circuit")
@click.option("--rabi", "rabi_path", type=click.Path(exists=True), default=None,
              help="Fitted Rabi JSON; transition curves are sampled from it.")
@click.option("--peaks", "peaks_path", type=click.Path(exists=True), default=None,
              help="Fit raw peaks directly instead (comparison mode).")
@click.option("--assignment", "assignment_path", type=click.Path(exists=True), default=None)
@click.option("--init", "init_path", type=click.Path(exists=True), required=True)
@click.option("--kappa", type=float, required=True,
              help="d(phi_ex/2pi)/dI in 1/mA for the bias-to-flux mapping.")
@click.option("--i0", type=float, default=None,
              help="Symmetry-point current; defaults to the Rabi fit's I0.")
@click.option("--n-points", default=21, show_default=True,
              help="Sampled bias points per transition for the curve fit.")
@click.option("--schedule", default="6,6,6;9,6,7", show_default=True,
              help="Charge truncation stages, semicolon-separated.")
@click.option("--qubit-space", default=25, show_default=True)
@click.option("--fock", default=13, show_default=True)
@click.option("--maxfev", default="500,300", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def fit_circuit_cmd(rabi_path, peaks_path, assignment_path, init_path, kappa, i0,
                    n_points, schedule, qubit_space, fock, maxfev, out_path):
    """Two-stage circuit-model fit to Rabi curves (or raw peaks)."""
    init = CircuitParams.from_dict(json.load(open(init_path)))
    stages = [{"charge": tuple(int(x) for x in st.split(",")),
               "qubit_space": qubit_space, "fock": fock}
              for st in schedule.split(";")]
    budgets = tuple(int(x) for x in maxfev.split(","))
    inputs = [init_path]
    if rabi_path:
        rabi = RabiParams.from_dict(json.load(open(rabi_path))["params"])
        cal = BiasCalibration(I0=i0 if i0 is not None else rabi.I0, kappa=kappa)
        span = 0.01 / abs(kappa)   # covers phi_ex/2pi in [0.49, 0.50]
        bias = np.linspace(cal.I0 - span, cal.I0, n_points)
        observations = sample_model_curve(rabi, ("w10", "w20", "w31"), bias,
                                          F=fock)
        inputs.append(rabi_path)
    elif peaks_path and assignment_path:
        ps = PeakSet.load_csv(peaks_path)
        labels = _load_labels(assignment_path)
        cal = BiasCalibration(I0=i0 if i0 is not None else 0.0, kappa=kappa)
        observations = [(labels[p.group_id], p.bias, p.freq, 1.0)
                        for p in ps.points if p.group_id in labels]
        inputs += [peaks_path, assignment_path]
    else:
        raise ValueError("need --rabi, or --peaks with --assignment")
    problem = FitProblem(observations=observations, model="circuit", initial=init)
    result = fit_circuit(problem, schedule=stages, maxfev=budgets, calibration=cal,
                         verbose=True)
    with open(out_path, "w") as f:
        json.dump(result.to_dict(), f, indent=1)
    _sidecar(out_path, inputs, {"schedule": schedule, "kappa": kappa,
                                "n_points": n_points, "maxfev": list(budgets)})
    click.echo(result.report())


@main.command()
@click.option("--mode", type=click.Choice(["fock", "charge", "qubit-space"]), required=True)
@click.option("--params", "params_path", type=click.Path(exists=True), required=True,
              help="RabiParams JSON (fock) or CircuitParams JSON (charge, qubit-space).")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--png", "png_path", type=click.Path(), default=None)
@click.option("--n-bias", default=None, type=int, help="Bias grid density override.")
def converge(mode, params_path, out_path, png_path, n_bias):
    """Truncation-convergence report (CSV and optional PNG)."""
    with open(params_path) as f:
        d = json.load(f)
    if mode == "fock":
        rep = fock_convergence(RabiParams.from_dict(d), F_range=range(2, 14),
                               **({"n_bias": n_bias} if n_bias else {}))
        xlabel = "Fock states"
    elif mode == "charge":
        klm = [(k, l, m) for k in (6, 7, 8, 9) for l in (6, 7, 8, 9) for m in (6, 7, 8, 9)
               if (k, l, m) != (9, 9, 9)][:12]
        rep = charge_convergence(CircuitParams.from_dict(d), klm,
                                 **({"n_bias": n_bias} if n_bias else {}))
        xlabel = "(k, l, m)"
    else:
        rep = qubit_space_convergence(CircuitParams.from_dict(d), Q_range=range(2, 25),
                                      **({"n_bias": n_bias} if n_bias else {}))
        xlabel = "qubit eigenstates"
    rep.save_csv(out_path)
    _sidecar(out_path, [params_path], {"mode": mode})
    if png_path:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.4))
        xs = list(range(len(rep.settings)))
        ys = [max(rep.metric[s], 1e-12) for s in rep.settings]
        ax.semilogy(xs, ys, "o-")
        ax.set_xticks(xs)
        ax.set_xticklabels([str(s) for s in rep.settings], rotation=45, fontsize=7)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("max summed deviation (GHz)")
        fig.tight_layout()
        fig.savefig(png_path, dpi=150)
        _sidecar(png_path, [params_path], {"mode": mode})
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--gamma", default=10.0, show_default=True)
@click.option("--sigma-g", default="0.5:4:8", show_default=True,
              help="start:stop:count sweep of noise levels.")
@click.option("--n", default=10000, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--png", "png_path", type=click.Path(), default=None)
def precision(gamma, sigma_g, n, seed, out_path, png_path):
    """Peak-extraction precision benchmark (sigma_P vs sigma_g)."""
    start, stop, count = sigma_g.split(":")
    sweep = np.linspace(float(start), float(stop), int(count))
    out = precision_study(gamma=gamma, sigma_g_list=tuple(sweep), n=n, seed=seed)
    with open(out_path, "w") as f:
        f.write(f"# slope={out['slope']!r} intercept={out['intercept']!r} "
                f"r_squared={out['r_squared']!r}\n")
        f.write("sigma_g,sigma_P\n")
        for sg, sp in out["table"]:
            f.write(f"{sg!r},{sp!r}\n")
    _sidecar(out_path, [], {"gamma": gamma, "sigma_g": sigma_g, "n": n, "seed": seed})
    if png_path:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        sg = [r[0] for r in out["table"]]
        sp = [r[1] for r in out["table"]]
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        ax.plot(sg, sp, "o")
        ax.plot(sg, [out["slope"] * x + out["intercept"] for x in sg], "-",
                label=f"R$^2$={out['r_squared']:.3f}")
        ax.set_xlabel(r"noise $\sigma_g$")
        ax.set_ylabel(r"peak spread $\sigma_P$ (px)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(png_path, dpi=150)
        _sidecar(png_path, [], {"gamma": gamma, "n": n, "seed": seed})
    click.echo(f"wrote {out_path} R2={out['r_squared']:.4f}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8410, show_default=True, envvar="VALLEYFIT_PORT")
@click.option("--persist-dir", type=click.Path(), default=None)
def serve(host, port, persist_dir):
    """Run the analysis HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(persist_dir=persist_dir), host=host, port=port)


if __name__ == "__main__":
    main()
