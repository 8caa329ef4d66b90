"""Truncation-convergence reports for Fock, charge, and qubit-eigenbasis
spaces.

Each sweep compares eigenvalue-derived quantities at reduced basis sizes
against a reference size; nested bases (Fock, qubit space) additionally
obey the Ritz inequality, which the reports expose for checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .hamiltonians import (
    DEFAULT_TRANSITIONS,
    QubitModel,
    coupling_matrix,
    eps_from_phi_frac,
    lowest_eigenvalues,
    qubit_eigensystem,
    rabi_hamiltonian,
    resonator_constants,
    total_hamiltonian,
    transition_frequencies,
)

#: the bias window used by the summed-deviation metrics, phi_ex/2pi
DEFAULT_BIAS_RANGE = (0.49, 0.50)
DEFAULT_BIAS_POINTS = 21

#: persistent current (nA) used to convert phi_ex/2pi into a spin bias for
#: Rabi-model sweeps when none is supplied
DEFAULT_IP_NA = 323.0


@dataclass(frozen=True)
class ConvergenceReport:
    axis: str                      # 'fock' | 'charge' | 'qubit_space'
    settings: tuple                # swept basis sizes
    reference: object
    metric: dict                   # setting -> metric value (GHz, or ratio table)
    bias_range: tuple
    detail: dict = field(default_factory=dict)

    def save_csv(self, path):
        with open(path, "w") as f:
            f.write(f"# axis={self.axis} reference={self.reference}\n")
            f.write("setting,metric\n")
            for s in self.settings:
                f.write(f"\"{s}\",{self.metric[s]!r}\n")


def _rabi_transition_table(params, eps_values, F, pairs):
    out = np.empty((len(eps_values), len(pairs)))
    base = RabiEps(params)
    for i, e in enumerate(eps_values):
        ev = np.linalg.eigvalsh(base.hamiltonian(e, F))
        out[i] = transition_frequencies(ev, pairs)
    return out


class RabiEps:
    """Rabi model addressed directly by the spin bias eps (GHz).

    Only (g, delta, omega_r) of the given parameters are used; the bias
    slope is unity and the resonator-slope coefficients are off, so eps is
    passed straight through.
    """

    def __init__(self, params):
        from .hamiltonians import RabiParams
        self.params = RabiParams(g=params.g, delta=params.delta,
                                 omega_r=params.omega_r, eps_tilde=1.0)

    def hamiltonian(self, eps, F):
        return rabi_hamiltonian(self.params, eps, F)


def fock_convergence(params, F_range, F_ref=14, transitions=None,
                     bias_range=DEFAULT_BIAS_RANGE, n_bias=DEFAULT_BIAS_POINTS,
                     Ip_nA=DEFAULT_IP_NA, eps_values=None):
    """Fock-space convergence of the Rabi model.

    Two metrics are reported: the per-transition ratio omega(F)/omega(F_ref)
    at eps = 0, and the bias-range maximum of the summed absolute transition
    deviations from F_ref.  The bias window (phi_ex/2pi) is converted to a
    spin bias through the persistent current unless eps_values is given.
    """
    pairs = list((transitions or DEFAULT_TRANSITIONS).values())
    labels = list((transitions or DEFAULT_TRANSITIONS).keys())
    F_range = [int(F) for F in F_range]
    if any(F < 2 or F > F_ref for F in F_range):
        raise ValueError(f"F_range must lie within [2, {F_ref}]")
    if eps_values is None:
        phi = np.linspace(bias_range[0], bias_range[1], n_bias)
        eps_values = eps_from_phi_frac(phi, Ip_nA)
    eps_values = np.asarray(eps_values, dtype=float)

    ref_table = _rabi_transition_table(params, eps_values, F_ref, pairs)
    ref_zero = np.array(transition_frequencies(
        np.linalg.eigvalsh(RabiEps(params).hamiltonian(0.0, F_ref)), pairs))

    metric = {}
    ratios = {}
    per_bias = {}
    for F in F_range:
        table = _rabi_transition_table(params, eps_values, F, pairs)
        dev = np.abs(table - ref_table).sum(axis=1)
        metric[F] = float(dev.max())
        per_bias[F] = dev
        at_zero = np.array(transition_frequencies(
            np.linalg.eigvalsh(RabiEps(params).hamiltonian(0.0, F)), pairs))
        ratios[F] = dict(zip(labels, (at_zero / ref_zero).tolist()))
    return ConvergenceReport(
        axis="fock", settings=tuple(F_range), reference=F_ref, metric=metric,
        bias_range=tuple(bias_range),
        detail={"ratios_at_eps0": ratios, "eps_values": eps_values.tolist(),
                "per_bias_deviation": {F: d.tolist() for F, d in per_bias.items()}},
    )


def charge_convergence(params, klm_list, reference=(9, 9, 9),
                       bias_range=DEFAULT_BIAS_RANGE, n_bias=11,
                       bias_points=None, n_jobs=1, eig_tol=0.0):
    """Charge-space convergence of the bare qubit splitting E01.

    For each (k, l, m) and each bias point, reports |E01(k,l,m) - E01(ref)|
    in GHz; the summary metric is the maximum over bias points.
    """
    from .hamiltonians import TruncationConfig

    reference = tuple(int(x) for x in reference)
    klm_list = [tuple(int(x) for x in klm) for klm in klm_list]
    for klm in klm_list:
        if any(a > r for a, r in zip(klm, reference)):
            raise ValueError(f"{klm} exceeds the reference {reference}")
    if bias_points is None:
        bias_points = np.linspace(bias_range[0], bias_range[1], n_bias)
    bias_points = np.asarray(bias_points, dtype=float)

    def e01_curve(klm):
        trunc = TruncationConfig(charge=klm)
        model = QubitModel(params, trunc)
        vals = []
        for x in bias_points:
            w = lowest_eigenvalues(model.hamiltonian(2 * np.pi * x), 2, tol=eig_tol)
            vals.append(w[1] - w[0])
        return np.array(vals)

    all_klm = list(dict.fromkeys(klm_list + [reference]))
    curves = Parallel(n_jobs=n_jobs)(delayed(e01_curve)(klm) for klm in all_klm)
    curves = dict(zip(all_klm, curves))
    ref_curve = curves[reference]
    metric = {}
    per_bias = {}
    for klm in klm_list:
        d = np.abs(curves[klm] - ref_curve)
        metric[klm] = float(d.max())
        per_bias[klm] = d.tolist()
    return ConvergenceReport(
        axis="charge", settings=tuple(klm_list), reference=reference, metric=metric,
        bias_range=(float(bias_points.min()), float(bias_points.max())),
        detail={"bias_points": bias_points.tolist(), "per_bias_deviation": per_bias,
                "E01_reference": ref_curve.tolist()},
    )


def qubit_space_convergence(params, Q_range, Q_ref=25, trunc=None,
                            transitions=None, bias_range=DEFAULT_BIAS_RANGE,
                            n_bias=DEFAULT_BIAS_POINTS, n_jobs=1, eig_tol=0.0):
    """Convergence in the number of retained qubit eigenstates Q.

    The Q_ref eigensystem is computed once per bias point and truncated to
    each smaller Q (nested subspaces), so the ground-state Ritz inequality
    holds exactly along the sweep.  Reports the bias-range maximum of the
    summed transition deviations vs Q_ref, plus per-Q spectra for plotting.
    """
    from .hamiltonians import TruncationConfig

    trunc = trunc or TruncationConfig()
    pairs = list((transitions or DEFAULT_TRANSITIONS).values())
    Q_range = [int(Q) for Q in Q_range]
    if any(Q < 2 or Q > Q_ref for Q in Q_range):
        raise ValueError(f"Q_range must lie within [2, {Q_ref}]")
    phi = np.linspace(bias_range[0], bias_range[1], n_bias)
    res = resonator_constants(params.Lr, params.Cr)
    model = QubitModel(params, trunc)

    def per_bias(x):
        H_q = model.hamiltonian(2 * np.pi * x)
        sol, phi_els = qubit_eigensystem(H_q, Q_ref, trunc, tol=eig_tol)
        rows = {}
        for Q in sorted(set(Q_range + [Q_ref])):
            g = coupling_matrix(phi_els[:Q, :Q], res["I_r_A"])
            H = total_hamiltonian(sol.eigenvalues[:Q], g, res["omega_r_GHz"], trunc.fock)
            ev = np.linalg.eigvalsh(H)
            rows[Q] = (transition_frequencies(ev, pairs), float(ev[0]))
        return rows

    tables = Parallel(n_jobs=n_jobs)(delayed(per_bias)(x) for x in phi)
    metric = {}
    spectra = {}
    ground = {}
    for Q in Q_range:
        dev = [np.abs(np.array(t[Q][0]) - np.array(t[Q_ref][0])).sum() for t in tables]
        metric[Q] = float(np.max(dev))
    for Q in sorted(set(Q_range + [Q_ref])):
        spectra[Q] = [t[Q][0] for t in tables]
        ground[Q] = [t[Q][1] for t in tables]
    return ConvergenceReport(
        axis="qubit_space", settings=tuple(Q_range), reference=Q_ref, metric=metric,
        bias_range=tuple(bias_range),
        detail={"bias_phi_frac": phi.tolist(), "spectra": spectra,
                "ground_state": ground},
    )
