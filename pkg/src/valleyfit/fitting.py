"""Least-squares estimation of Rabi-model and circuit-model parameters from
transition-frequency observations.

The optimizer is a deterministic derivative-free simplex (adaptive
Nelder-Mead) over scaled parameters, with a 5%-per-coordinate initial
simplex.  The objective is the weight-normalized sum of squared residuals
in GHz^2, so rescaling all weights by a constant changes nothing.

The circuit fit follows a two-stage truncation schedule: a rough stage at a
small charge basis whose optimum seeds a fine stage at the production
truncation, fitting the smooth curves sampled from an already-fitted Rabi
model rather than raw peaks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import least_squares, minimize

from .errors import FitCancelled, FitError
from .hamiltonians import (
    DEFAULT_TRANSITIONS,
    CircuitParams,
    QubitModel,
    RabiParams,
    TruncationConfig,
    coupling_matrix,
    qubit_eigensystem,
    rabi_hamiltonian,
    resonator_constants,
    total_hamiltonian,
    transition_frequencies,
)

RABI_PARAM_NAMES = ("g", "delta", "omega_r", "eps_tilde", "I0", "A_minus", "A_plus")
CIRCUIT_PARAM_NAMES = ("EJ", "Ec", "alpha", "beta", "Lr", "Cr")

#: default truncation schedule for the circuit fit: (charge, Q, F) per stage
DEFAULT_SCHEDULE = (
    {"charge": (6, 6, 6), "qubit_space": 25, "fock": 13},
    {"charge": (9, 6, 7), "qubit_space": 25, "fock": 13},
)


@dataclass(frozen=True)
class Observation:
    label: str
    bias: float          # mA for the Rabi model, phi_ex/2pi for the circuit model
    freq: float          # GHz
    weight: float = 1.0


@dataclass(frozen=True)
class FitProblem:
    observations: tuple
    model: str                           # 'rabi' | 'circuit'
    initial: object                      # RabiParams or CircuitParams
    trunc: TruncationConfig = TruncationConfig()
    frozen: frozenset = frozenset()
    bounds: dict = field(default_factory=dict)
    transitions: dict = field(default_factory=lambda: dict(DEFAULT_TRANSITIONS))

    def __post_init__(self):
        obs = tuple(o if isinstance(o, Observation) else Observation(*o)
                    for o in self.observations)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "frozen", frozenset(self.frozen))
        for o in obs:
            if o.label not in self.transitions:
                raise FitError(f"observation label '{o.label}' has no transition pair")
            if o.weight <= 0:
                raise FitError("weights must be positive")

    def to_dict(self):
        return {
            "observations": [[o.label, o.bias, o.freq, o.weight]
                             for o in self.observations],
            "model": self.model,
            "initial": self.initial.to_dict(),
            "trunc": self.trunc.to_dict(),
            "frozen": sorted(self.frozen),
            "bounds": {k: list(v) for k, v in self.bounds.items()},
            "transitions": {k: list(v) for k, v in self.transitions.items()},
        }

    @classmethod
    def from_dict(cls, d):
        model = d["model"]
        init_cls = RabiParams if model == "rabi" else CircuitParams
        return cls(
            observations=tuple(tuple(o) for o in d["observations"]),
            model=model,
            initial=init_cls.from_dict(d["initial"]),
            trunc=TruncationConfig.from_dict(d.get("trunc", {})),
            frozen=frozenset(d.get("frozen", ())),
            bounds={k: tuple(v) for k, v in d.get("bounds", {}).items()},
            transitions={k: tuple(v) for k, v in d.get("transitions", {}).items()},
        )


@dataclass(frozen=True)
class FitResult:
    params: object
    residuals: np.ndarray
    rms: float
    iterations: int
    converged: bool
    objective: float
    history: tuple = ()          # (eval count, best objective so far)

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "rms_GHz": self.rms,
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
            "residuals_GHz": np.asarray(self.residuals).tolist(),
        }

    def report(self):
        lines = [f"model parameters ({type(self.params).__name__}):"]
        for k, v in self.params.to_dict().items():
            lines.append(f"  {k:>22s} = {v:.6g}")
        lines.append(f"  rms residual = {self.rms:.3e} GHz over {len(self.residuals)} points")
        lines.append(f"  simplex evaluations = {self.iterations}, converged = {self.converged}")
        return "\n".join(lines)


def _grouped_biases(observations):
    """bias -> [(obs index, label)] preserving input order."""
    groups = {}
    for i, o in enumerate(observations):
        groups.setdefault(o.bias, []).append((i, o.label))
    return groups


def rabi_curve_model(params, observations, F, transitions):
    """Model transition frequencies for each observation (one eigensolve per
    distinct bias)."""
    out = np.empty(len(observations))
    for bias, members in _grouped_biases(observations).items():
        ev = np.linalg.eigvalsh(rabi_hamiltonian(params, bias, F))
        for i, label in members:
            out[i] = transition_frequencies(ev, [transitions[label]])[0]
    return out


def circuit_curve_model(params, observations, trunc, transitions, eig_tol=1e-12,
                        n_jobs=1, over_2pi=True):
    """Circuit-model transition frequencies; observations carry phi_ex/2pi.

    The bias-independent matrices are built once per parameter set; each
    distinct bias costs one sparse eigensolve plus a small dense one.
    """
    model = QubitModel(params, trunc)
    res = resonator_constants(params.Lr, params.Cr)
    groups = _grouped_biases(observations)

    def solve(bias):
        H_q = model.hamiltonian(2 * np.pi * bias)
        sol, phi_els = qubit_eigensystem(H_q, trunc.qubit_space, trunc, tol=eig_tol)
        g = coupling_matrix(phi_els, res["I_r_A"], over_2pi)
        H = total_hamiltonian(sol.eigenvalues, g, res["omega_r_GHz"], trunc.fock)
        return np.linalg.eigvalsh(H)

    biases = list(groups)
    evs = Parallel(n_jobs=n_jobs)(delayed(solve)(b) for b in biases)
    out = np.empty(len(observations))
    for bias, ev in zip(biases, evs):
        for i, label in groups[bias]:
            out[i] = transition_frequencies(ev, [transitions[label]])[0]
    return out


def _params_vector(params, names):
    return np.array([getattr(params, n) for n in names], dtype=float)


def _params_update(params, names, values):
    return replace(params, **dict(zip(names, values)))


def _simplex_minimize(objective, x0, scales, maxfev, fatol, xatol):
    """Scaled adaptive Nelder-Mead with a 5% initial simplex and a recorded
    best-objective history."""
    y0 = x0 / scales
    history = []
    best = [np.inf]

    def wrapped(y):
        val = objective(y * scales)
        if val < best[0]:
            best[0] = val
        history.append((len(history) + 1, best[0]))
        return val

    n = len(y0)
    simplex = np.vstack([y0] + [y0 + 0.05 * np.eye(n)[i] for i in range(n)])
    res = minimize(
        wrapped, y0, method="Nelder-Mead",
        options={"initial_simplex": simplex, "fatol": fatol, "xatol": xatol,
                 "maxfev": maxfev, "adaptive": True},
    )
    return res.x * scales, res, history


def _jittered_starts(initial, free, n_extra):
    """Deterministic multiplicative jitters of the starting point, used to
    escape the g-flip local minimum of the Rabi landscape and its kin."""
    rng = np.random.default_rng(1234321)
    x0 = _params_vector(initial, free)
    starts = []
    for _ in range(n_extra):
        factor = rng.uniform(0.8, 1.25, size=x0.size)
        shift = rng.uniform(-0.1, 0.1, size=x0.size) * (np.abs(x0) == 0)
        starts.append(_params_update(initial, free, x0 * factor + shift))
    return starts


def _run_fit(problem, model_fn, names, maxfev, fatol, xatol, starts=None,
             n_starts=1, early_stop=1e-12, polish=True, should_stop=None):
    free = [n for n in names if n not in problem.frozen]
    if not free:
        raise FitError("no free parameters")
    obs = problem.observations
    if len(obs) < len(free):
        raise FitError(f"{len(obs)} observations cannot determine {len(free)} parameters")
    w = np.array([o.weight for o in obs])
    w = w / w.sum()
    target = np.array([o.freq for o in obs])
    lo = np.array([problem.bounds.get(n, (-np.inf, np.inf))[0] for n in free])
    hi = np.array([problem.bounds.get(n, (-np.inf, np.inf))[1] for n in free])

    def objective_at(params):
        resid = model_fn(params, obs) - target
        return float(np.sum(w * resid**2))

    def objective(x):
        if should_stop is not None and should_stop():
            raise FitCancelled("fit cancelled")
        if np.any(x < lo) or np.any(x > hi):
            return 1e30
        try:
            return objective_at(_params_update(problem.initial, free, x))
        except (ValueError, FloatingPointError):
            return 1e30

    if starts is None:
        starts = [problem.initial]
        if n_starts > 1:
            starts += _jittered_starts(problem.initial, free, n_starts - 1)
    results = []
    for start in starts:
        x0 = _params_vector(start, free)
        scales = np.where(np.abs(x0) > 0, np.abs(x0), 1.0)
        xbest, res, history = _simplex_minimize(objective, x0, scales, maxfev, fatol, xatol)
        results.append((res.fun, xbest, res, history))
        if res.fun < early_stop:
            break
    fun, xbest, res, history = min(results, key=lambda t: t[0])
    nfev = int(res.nfev)
    converged = bool(res.success)

    if polish and fun < 1e29:
        # least-squares finish: the simplex parks near the optimum, a
        # trust-region step with a finite-difference Jacobian closes the last
        # stretch of the correlated-parameter valley far faster than more
        # simplex iterations would
        sqw = np.sqrt(w)
        scales = np.where(np.abs(xbest) > 0, np.abs(xbest), 1.0)

        def residual(y):
            try:
                r = model_fn(_params_update(problem.initial, free, y * scales), obs)
            except (ValueError, FloatingPointError):
                return np.full(len(obs), 1e10)
            return sqw * (r - target)

        plo, phi_ = lo / scales, hi / scales
        y0 = np.clip(xbest / scales, plo, phi_)
        ls = least_squares(residual, y0, bounds=(plo, phi_), xtol=1e-13,
                           ftol=1e-14, gtol=None, diff_step=1e-6, max_nfev=60 * len(free))
        nfev += int(ls.nfev)
        if float(2 * ls.cost) <= fun:      # cost = 1/2 sum(resid^2)
            xbest = ls.x * scales
            fun = float(2 * ls.cost)
            converged = converged or bool(ls.status > 0)

    fitted = _params_update(problem.initial, free, xbest)
    resid = model_fn(fitted, obs) - target
    rms = float(np.sqrt(np.sum(w * resid**2)))
    return FitResult(
        params=fitted, residuals=resid, rms=rms, iterations=nfev,
        converged=converged, objective=float(fun),
        history=tuple(history[:: max(1, len(history) // 200)]),
    )


def fit_rabi(problem, maxfev=4000, fatol=1e-14, xatol=1e-10, starts=None, n_starts=5,
             should_stop=None):
    """Fit (g, delta, omega_r, eps_tilde, I0, A_minus, A_plus) minus the
    frozen set to transition observations against the Rabi model.

    Runs a deterministic multi-start (initial guess plus jittered copies,
    best objective wins, stopping early once a machine-zero residual is
    found); the Rabi landscape has sign-flip local minima in g that a single
    simplex can fall into.
    """
    if problem.model != "rabi":
        raise FitError(f"expected a rabi problem, got '{problem.model}'")

    def model_fn(params, obs):
        return rabi_curve_model(params, obs, problem.trunc.fock, problem.transitions)

    return _run_fit(problem, model_fn, RABI_PARAM_NAMES, maxfev, fatol, xatol,
                    starts, n_starts=n_starts, should_stop=should_stop)


def sample_model_curve(params, labels, bias_points, F=13, transitions=None,
                       weight=1.0):
    """Evaluate fitted Rabi transitions on a bias grid, producing the clean
    pseudo-dataset the circuit fit consumes."""
    transitions = transitions or DEFAULT_TRANSITIONS
    obs = []
    for bias in np.asarray(bias_points, dtype=float):
        ev = np.linalg.eigvalsh(rabi_hamiltonian(params, bias, F))
        for label in labels:
            freq = transition_frequencies(ev, [transitions[label]])[0]
            obs.append(Observation(label, float(bias), float(freq), weight))
    return obs


def fit_circuit(problem, schedule=DEFAULT_SCHEDULE, maxfev=(500, 300),
                fatol=1e-14, xatol=1e-10, eig_tol=1e-12, n_jobs=1, calibration=None,
                verbose=False, should_stop=None):
    """Two-stage circuit fit: each stage reuses the previous stage's optimum
    as its starting point, at progressively larger charge truncations.

    Observations carry phi_ex/2pi, or bias current when ``calibration`` maps
    current to flux.  b is not fitted (identical a/b junctions).
    """
    if problem.model != "circuit":
        raise FitError(f"expected a circuit problem, got '{problem.model}'")
    obs = problem.observations
    if calibration is not None:
        obs = tuple(Observation(o.label, float(calibration.phi_frac(o.bias)),
                                o.freq, o.weight) for o in obs)
        problem = replace(problem, observations=obs)
    if not schedule:
        raise FitError("empty truncation schedule")
    if np.isscalar(maxfev):
        maxfev = [int(maxfev)] * len(schedule)
    current = problem
    stage_results = []
    for stage, cfg in enumerate(schedule):
        trunc = TruncationConfig(
            fock=cfg.get("fock", 13), charge=tuple(cfg["charge"]),
            qubit_space=cfg.get("qubit_space", 25))

        def model_fn(params, obs, _trunc=trunc):
            return circuit_curve_model(params, obs, _trunc, current.transitions,
                                       eig_tol=eig_tol, n_jobs=n_jobs)

        result = _run_fit(current, model_fn, CIRCUIT_PARAM_NAMES,
                          maxfev[stage], fatol, xatol, should_stop=should_stop)
        stage_results.append(result)
        if verbose:
            print(f"stage {stage} {cfg['charge']}: rms {result.rms:.3e} GHz "
                  f"after {result.iterations} evaluations")
        current = replace(current, initial=result.params)
    final = stage_results[-1]
    return replace(final, history=tuple(r.rms for r in stage_results))
