"""Hamiltonian builders: two-level+resonator (Rabi), four-junction flux
qubit circuit, and fluxonium.

Conventions used throughout:
  * every Hamiltonian is stored as H/h in GHz;
  * circuit electrical parameters enter in nH / fF / GHz and are converted
    to SI exactly once, inside resonator_constants and the inductive term;
  * the flux-qubit charge basis is ordered (beta, alpha, a) row-major, i.e.
    index = (i_beta * dim_alpha + i_alpha) * dim_a + i_a;
  * the charge operators follow the plane-wave matrix elements
       <q'|cos phi|q> = (delta_{q',q+1} + delta_{q',q-1}) / 2
       <q'|phi|q>     = i (-1)^(q-q') / (q-q')        (0 on the diagonal)
       <q'|phi^2|q>   = 2 (-1)^(q-q') / (q-q')^2      (pi^2/3 on the diagonal)
    with sin phi the (delta_{q',q-1} - delta_{q',q+1}) / 2i ladder analog.

Large charge-basis matrices are sparse; the lowest eigenpairs are obtained
with a dense solver below ``DENSE_CUTOFF`` and Lanczos (ARPACK) above it,
with a deterministic start vector so repeated runs are bit-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .constants import H_PLANCK, HBAR, PHI0
from .errors import TruncationError

DENSE_CUTOFF = 900        # dimension below which dense eigh is used
DEFAULT_DIM_CAP = 20000   # refuse to build charge-basis matrices above this

#: transition label -> (upper, lower) eigenvalue indices
DEFAULT_TRANSITIONS = {"w10": (1, 0), "w20": (2, 0), "w31": (3, 1)}


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RabiParams:
    """Two-level + resonator model parameters (all frequencies /h in GHz)."""

    g: float                      # qubit-resonator coupling
    delta: float                  # qubit gap
    omega_r: float                # bare resonator frequency
    eps_tilde: float = 0.0        # spin-bias slope, GHz per mA
    I0: float = 0.0               # bias current at the symmetry point, mA
    A_minus: float = 0.0          # resonator slope below I0, 1/mA
    A_plus: float = 0.0           # resonator slope above I0, 1/mA

    def __post_init__(self):
        if self.delta < 0 or self.omega_r <= 0:
            raise ValueError("need delta >= 0 and omega_r > 0")

    def to_dict(self):
        return {
            "g_GHz": self.g, "delta_GHz": self.delta, "omega_r_GHz": self.omega_r,
            "eps_tilde_GHz_per_mA": self.eps_tilde, "I0_mA": self.I0,
            "A_minus_per_mA": self.A_minus, "A_plus_per_mA": self.A_plus,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(g=d["g_GHz"], delta=d["delta_GHz"], omega_r=d["omega_r_GHz"],
                   eps_tilde=d.get("eps_tilde_GHz_per_mA", 0.0), I0=d.get("I0_mA", 0.0),
                   A_minus=d.get("A_minus_per_mA", 0.0), A_plus=d.get("A_plus_per_mA", 0.0))


@dataclass(frozen=True)
class CircuitParams:
    """Four-junction flux qubit + LC resonator parameters.

    Junction area ratios are relative to the a-junction (a = 1); junctions
    a and b are assumed identical unless b is set explicitly.
    """

    EJ: float                     # Josephson energy of the a-junction, /h GHz
    Ec: float                     # charging energy of the a-junction, /h GHz
    alpha: float
    beta: float
    Lr: float                     # resonator inductance, nH
    Cr: float                     # resonator capacitance, fF
    b: float = 1.0

    def __post_init__(self):
        vals = (self.EJ, self.Ec, self.alpha, self.beta, self.Lr, self.Cr, self.b)
        if any(v <= 0 for v in vals):
            raise ValueError("all circuit parameters must be positive")

    def to_dict(self):
        return {"EJ_GHz": self.EJ, "Ec_GHz": self.Ec, "alpha": self.alpha,
                "beta": self.beta, "b": self.b, "Lr_nH": self.Lr, "Cr_fF": self.Cr}

    @classmethod
    def from_dict(cls, d):
        return cls(EJ=d["EJ_GHz"], Ec=d["Ec_GHz"], alpha=d["alpha"], beta=d["beta"],
                   Lr=d["Lr_nH"], Cr=d["Cr_fF"], b=d.get("b", 1.0))


@dataclass(frozen=True)
class FluxoniumParams:
    EJ: float
    EC: float
    EL: float

    def __post_init__(self):
        if any(v <= 0 for v in (self.EJ, self.EC, self.EL)):
            raise ValueError("all fluxonium energies must be positive")

    def to_dict(self):
        return {"EJ_GHz": self.EJ, "EC_GHz": self.EC, "EL_GHz": self.EL}

    @classmethod
    def from_dict(cls, d):
        return cls(EJ=d["EJ_GHz"], EC=d["EC_GHz"], EL=d["EL_GHz"])


@dataclass(frozen=True)
class TruncationConfig:
    """Basis sizes: resonator Fock states F, per-junction charge cutoffs
    (k, l, m) for the (beta, alpha, a) axes, retained qubit eigenstates Q."""

    fock: int = 13
    charge: tuple = (9, 6, 7)
    qubit_space: int = 25
    fluxonium_basis: int = 50

    def __post_init__(self):
        k, l, m = self.charge
        if self.fock < 2 or self.qubit_space < 2:
            raise TruncationError("need fock >= 2 and qubit_space >= 2")
        if min(k, l, m) < 1:
            raise TruncationError("charge cutoffs must be >= 1")
        if self.fluxonium_basis < 10:
            raise TruncationError("fluxonium basis must be >= 10")
        object.__setattr__(self, "charge", (int(k), int(l), int(m)))

    @property
    def charge_dims(self):
        k, l, m = self.charge
        return (2 * k + 1, 2 * l + 1, 2 * m + 1)

    @property
    def charge_dim(self):
        d = self.charge_dims
        return d[0] * d[1] * d[2]

    def to_dict(self):
        return {"fock": self.fock, "charge": list(self.charge),
                "qubit_space": self.qubit_space, "fluxonium_basis": self.fluxonium_basis}

    @classmethod
    def from_dict(cls, d):
        return cls(fock=d.get("fock", 13), charge=tuple(d.get("charge", (9, 6, 7))),
                   qubit_space=d.get("qubit_space", 25),
                   fluxonium_basis=d.get("fluxonium_basis", 50))


@dataclass(frozen=True)
class EigenSolution:
    eigenvalues: np.ndarray       # ascending, GHz
    eigenvectors: np.ndarray      # columns, build-basis components
    basis_descriptor: str = ""


@dataclass(frozen=True)
class CouplingMatrix:
    g_ij: np.ndarray              # Hermitian Q x Q, GHz
    I_r: float                    # zero-point current, A
    phi0: float = PHI0
    over_2pi: bool = True


# ---------------------------------------------------------------------------
# charge-basis operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChargeOperators:
    n: int
    cos_phi: np.ndarray
    sin_phi: np.ndarray
    phi: np.ndarray
    phi_sq: np.ndarray


@lru_cache(maxsize=32)
def charge_basis_operators(n):
    """Plane-wave (charge) basis operators for q in [-n, n].

    Returns cos, sin, phi and phi^2 as (2n+1)^2 Hermitian matrices; results
    are cached per n and safe to share between threads (arrays are frozen).
    """
    if n < 1:
        raise ValueError("charge cutoff must be >= 1")
    dim = 2 * n + 1
    d = np.subtract.outer(np.arange(dim), np.arange(dim))  # d[i,j] = q'_i - q_j index diff
    # matrix element arguments use q - q' = -d
    qdiff = -d
    cos_phi = 0.5 * (np.abs(qdiff) == 1).astype(float)
    sin_phi = np.where(qdiff == 1, -0.5j, 0) + np.where(qdiff == -1, 0.5j, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sign = np.where(qdiff % 2 == 0, 1.0, -1.0)
        phi = np.where(qdiff != 0, 1j * sign / np.where(qdiff == 0, 1, qdiff), 0.0)
        phi_sq = np.where(qdiff != 0, 2.0 * sign / np.where(qdiff == 0, 1, qdiff) ** 2,
                          np.pi**2 / 3.0)
    for arr in (cos_phi, sin_phi, phi, phi_sq):
        arr.setflags(write=False)
    return ChargeOperators(n, cos_phi, sin_phi, phi, phi_sq)


def mass_matrix(params):
    """Normalized capacitance matrix of the three retained junction phases
    (beta, alpha, a), in units of the a-junction capacitance."""
    b = params.b
    return np.array([
        [params.beta + b, b, b],
        [b, params.alpha + b, b],
        [b, b, 1.0 + b],
    ])


# ---------------------------------------------------------------------------
# flux-qubit Hamiltonian
# ---------------------------------------------------------------------------

class QubitModel:
    """Bias-independent pieces of the charge-basis flux-qubit Hamiltonian.

    The external flux enters only through cos/sin of the loop phase, so a
    bias sweep reuses the three precomputed sparse matrices:
        H(phi_ex) = H_static - EJ*b*(cos(phi_ex) * cos_loop + sin(phi_ex) * sin_loop)
    """

    def __init__(self, params, trunc, dim_cap=DEFAULT_DIM_CAP):
        if trunc.charge_dim > dim_cap:
            raise TruncationError(
                f"charge-basis dimension {trunc.charge_dim} exceeds cap {dim_cap}")
        self.params = params
        self.trunc = trunc
        k, l, m = trunc.charge
        db, da_, dm = trunc.charge_dims
        ob, oa, om = (charge_basis_operators(x) for x in (k, l, m))

        def kron3(A, B, C):
            return sp.kron(sp.kron(sp.csr_matrix(A), sp.csr_matrix(B)),
                           sp.csr_matrix(C), format="csr")

        eye_b, eye_a, eye_m = sp.identity(db), sp.identity(da_), sp.identity(dm)

        # kinetic term 4 Ec q^T Minv q: diagonal, charge numbers per axis
        minv = np.linalg.inv(mass_matrix(params))
        qb, qa, qm = (np.arange(-x, x + 1, dtype=float) for x in (k, l, m))
        QB, QA, QM = np.meshgrid(qb, qa, qm, indexing="ij")
        kinetic = 4.0 * params.Ec * (
            minv[0, 0] * QB**2 + minv[1, 1] * QA**2 + minv[2, 2] * QM**2
            + 2 * minv[0, 1] * QB * QA + 2 * minv[0, 2] * QB * QM
            + 2 * minv[1, 2] * QA * QM
        ).ravel()

        EJ = params.EJ
        h_static = sp.diags(kinetic.astype(complex), format="csr")
        h_static = h_static - EJ * params.beta * kron3(ob.cos_phi, eye_a, eye_m)
        h_static = h_static - EJ * params.alpha * kron3(eye_b, oa.cos_phi, eye_m)
        h_static = h_static - EJ * kron3(eye_b, eye_a, om.cos_phi)

        # inductive loading of the beta junction: (Phi0/2pi)^2 phi^2 / (2 Lr),
        # converted to GHz
        ind = (PHI0 / (2 * np.pi)) ** 2 / (2 * params.Lr * 1e-9) / H_PLANCK / 1e9
        h_static = h_static + ind * kron3(ob.phi_sq, eye_a, eye_m)
        self._h_static = h_static

        # loop-phase sum S = phi_beta + phi_alpha + phi_a via the cos/sin
        # product expansion of cos(S) and sin(S)
        cb, sb = ob.cos_phi, ob.sin_phi
        ca, sa = oa.cos_phi, oa.sin_phi
        cm, sm = om.cos_phi, om.sin_phi
        self._cos_loop = (kron3(cb, ca, cm) - kron3(cb, sa, sm)
                          - kron3(sb, sa, cm) - kron3(sb, ca, sm))
        self._sin_loop = (kron3(sb, ca, cm) - kron3(sb, sa, sm)
                          + kron3(cb, sa, cm) + kron3(cb, ca, sm))
        self.basis_descriptor = (
            f"charge(beta,alpha,a)=rowmajor{trunc.charge_dims}")

    @property
    def dim(self):
        return self._h_static.shape[0]

    def hamiltonian(self, phi_ex):
        """Sparse Hermitian H/h (GHz) at external loop phase phi_ex (radians)."""
        c, s = np.cos(phi_ex), np.sin(phi_ex)
        coupling = self.params.EJ * self.params.b
        return self._h_static - coupling * (c * self._cos_loop + s * self._sin_loop)


def qubit_hamiltonian(params, phi_ex, trunc, dim_cap=DEFAULT_DIM_CAP):
    """Charge-basis flux-qubit Hamiltonian at one bias point (sparse CSR)."""
    return QubitModel(params, trunc, dim_cap).hamiltonian(phi_ex)


def _deterministic_start(dim):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(dim)))
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def lowest_eigenpairs(H, k, dense_cutoff=DENSE_CUTOFF, tol=0.0):
    """Lowest k eigenpairs of a Hermitian matrix, ascending.

    Dense LAPACK below ``dense_cutoff`` (or when k approaches the dimension),
    ARPACK Lanczos otherwise.  The Lanczos start vector is fixed, so results
    are reproducible run to run.
    """
    dim = H.shape[0]
    if k > dim:
        raise ValueError(f"requested {k} eigenpairs of a {dim}-dim matrix")
    if dim <= dense_cutoff or k > max(1, dim // 3):
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        w, v = eigh(Hd, subset_by_index=(0, k - 1))
        return w, v
    w, v = spla.eigsh(H, k=k, which="SA", v0=_deterministic_start(dim), tol=tol)
    order = np.argsort(w)
    return w[order], v[:, order]


def lowest_eigenvalues(H, k, dense_cutoff=DENSE_CUTOFF, tol=0.0):
    dim = H.shape[0]
    if dim <= dense_cutoff or k > max(1, dim // 3):
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        return eigh(Hd, subset_by_index=(0, k - 1), eigvals_only=True)
    w = spla.eigsh(H, k=k, which="SA", v0=_deterministic_start(dim), tol=tol,
                   return_eigenvectors=False)
    return np.sort(w)


def qubit_eigensystem(H_q, Q, trunc, dense_cutoff=DENSE_CUTOFF, tol=0.0):
    """Lowest Q eigenpairs of the qubit plus the beta-junction phase matrix
    elements <i|phi_beta|j> needed for the coupling expansion."""
    if Q > H_q.shape[0]:
        raise ValueError(f"qubit space {Q} exceeds matrix dimension {H_q.shape[0]}")
    w, v = lowest_eigenpairs(H_q, Q, dense_cutoff, tol)
    k = trunc.charge[0]
    dims = trunc.charge_dims
    phi_b = charge_basis_operators(k).phi
    # apply phi on the beta axis only: reshape columns to (d_beta, rest)
    vt = v.reshape(dims[0], dims[1] * dims[2], Q)
    pv = np.einsum("ab,bcq->acq", phi_b, vt).reshape(-1, Q)
    phi_els = v.conj().T @ pv
    phi_els = 0.5 * (phi_els + phi_els.conj().T)   # symmetrize rounding noise
    sol = EigenSolution(w, v, basis_descriptor=f"charge(beta,alpha,a)=rowmajor{dims}")
    return sol, phi_els


# ---------------------------------------------------------------------------
# resonator and coupled system
# ---------------------------------------------------------------------------

def resonator_constants(Lr_nH, Cr_fF):
    """Bare frequency (GHz) and zero-point current (A) of the LC resonator:
    omega_r = 1/sqrt(Lr Cr),  I_r = sqrt(hbar / (2 Lr sqrt(Lr Cr)))."""
    if Lr_nH <= 0 or Cr_fF <= 0:
        raise ValueError("Lr and Cr must be positive")
    Lr = Lr_nH * 1e-9
    Cr = Cr_fF * 1e-15
    omega_r = 1.0 / np.sqrt(Lr * Cr)
    I_r = np.sqrt(HBAR / (2.0 * Lr * np.sqrt(Lr * Cr)))
    return {"omega_r_GHz": omega_r / (2 * np.pi) / 1e9, "I_r_A": float(I_r)}


def coupling_matrix(phi_els, I_r, over_2pi=True):
    """Coupling g_ij (GHz) = I_r * Phi0 / (2 pi) * <i|phi_beta|j> / h.

    ``over_2pi=False`` drops the 2 pi, for sensitivity checks against the
    alternative prefactor convention.
    """
    pref = I_r * PHI0 / H_PLANCK / 1e9
    if over_2pi:
        pref /= 2 * np.pi
    return CouplingMatrix(pref * np.asarray(phi_els), I_r, PHI0, over_2pi)


def fock_operators(F):
    n = np.arange(F)
    a = np.diag(np.sqrt(n[1:]).astype(float), 1)
    return a, a.T.copy(), np.diag(n.astype(float))


def total_hamiltonian(qubit_energies, coupling, omega_r_GHz, F):
    """Coupled qubit-eigenbasis x Fock Hamiltonian (dense, GHz).

    H = diag(Omega_i) (x) 1 + 1 (x) omega_r (n + 1/2) + g_ij (x) (a^dag + a).
    """
    omega = np.asarray(qubit_energies, dtype=float)
    Q = omega.size
    g = np.asarray(coupling.g_ij if isinstance(coupling, CouplingMatrix) else coupling)
    if g.shape != (Q, Q):
        raise ValueError(f"coupling shape {g.shape} != ({Q}, {Q})")
    a, ad, n = fock_operators(F)
    H = np.kron(np.diag(omega), np.eye(F)).astype(complex)
    H += np.kron(np.eye(Q), omega_r_GHz * (n + 0.5 * np.eye(F)))
    H += np.kron(g, ad + a)
    return H


def circuit_transitions(params, phi_ex, trunc, pairs=None, model=None,
                        eig_tol=0.0, over_2pi=True):
    """Transition frequencies of the full circuit at one bias point.

    Builds (or reuses, via ``model``) the qubit Hamiltonian, expands the
    coupling in the lowest Q qubit eigenstates, and diagonalizes the coupled
    system with F Fock states.
    """
    pairs = list(DEFAULT_TRANSITIONS.values()) if pairs is None else pairs
    if model is None:
        model = QubitModel(params, trunc)
    H_q = model.hamiltonian(phi_ex)
    sol, phi_els = qubit_eigensystem(H_q, trunc.qubit_space, trunc, tol=eig_tol)
    res = resonator_constants(params.Lr, params.Cr)
    g = coupling_matrix(phi_els, res["I_r_A"], over_2pi)
    H = total_hamiltonian(sol.eigenvalues, g, res["omega_r_GHz"], trunc.fock)
    ev = np.linalg.eigvalsh(H)
    return transition_frequencies(ev, pairs)


# ---------------------------------------------------------------------------
# Rabi model
# ---------------------------------------------------------------------------

def rabi_hamiltonian(params, I, F):
    """Bias-dependent two-level + resonator Hamiltonian (dense, GHz).

    H = (1/2)(eps sz + delta sx) (x) 1 + 1 (x) w_r_eff n + g sz (x) (a^dag + a)
    with eps = eps_tilde (I - I0) and w_r_eff = omega_r (1 + A_plus (I - I0))
    above I0, omega_r (1 - A_minus (I - I0)) below.
    """
    if F < 2:
        raise ValueError("need at least 2 Fock states")
    dI = I - params.I0
    eps = params.eps_tilde * dI
    wr = params.omega_r * (1.0 + (params.A_plus if dI >= 0 else -params.A_minus) * dI)
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    a, ad, n = fock_operators(F)
    H = 0.5 * np.kron(eps * sz + params.delta * sx, np.eye(F))
    H += np.kron(np.eye(2), wr * n)
    H += params.g * np.kron(sz, ad + a)
    return H


def rabi_transitions(params, I, F, pairs=None):
    pairs = list(DEFAULT_TRANSITIONS.values()) if pairs is None else pairs
    ev = np.linalg.eigvalsh(rabi_hamiltonian(params, I, F))
    return transition_frequencies(ev, pairs)


def transition_frequencies(solution, pairs):
    """omega_ij = E_i - E_j (GHz) for (i, j) index pairs with i > j."""
    ev = solution.eigenvalues if isinstance(solution, EigenSolution) else np.asarray(solution)
    out = []
    for i, j in pairs:
        if not (0 <= j < i < ev.size):
            raise IndexError(f"transition pair ({i}, {j}) out of range for {ev.size} levels")
        out.append(float(ev[i] - ev[j]))
    return out


# ---------------------------------------------------------------------------
# fluxonium
# ---------------------------------------------------------------------------

def fluxonium_hamiltonian(params, phi_ex, n_basis=None):
    """Fluxonium H = 4 EC q^2 + EL phi^2 / 2 - EJ cos(phi - phi_ex) in the
    harmonic-oscillator eigenbasis of its quadratic part (dense, GHz).

    cos(phi - phi_ex) is evaluated through the spectral decomposition of the
    truncated phi operator, which is numerically stable for any basis size.
    """
    n_basis = 50 if n_basis is None else int(n_basis)
    if n_basis < 10:
        raise TruncationError("fluxonium basis must be >= 10")
    om = np.sqrt(8.0 * params.EC * params.EL)
    phi_zpf = (2.0 * params.EC / params.EL) ** 0.25
    n = np.arange(n_basis)
    a = np.diag(np.sqrt(n[1:]).astype(float), 1)
    phi_op = phi_zpf * (a + a.T)
    w, U = eigh(phi_op)
    cos_shifted = (U * np.cos(w - phi_ex)) @ U.T
    return np.diag(om * (n + 0.5)) - params.EJ * cos_shifted


def fluxonium_transitions(params, phi_ex, n_basis=None, n_levels=6):
    ev = np.linalg.eigvalsh(fluxonium_hamiltonian(params, phi_ex, n_basis))
    return ev[1:n_levels + 1] - ev[0]


# ---------------------------------------------------------------------------
# bias calibration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BiasCalibration:
    """Linear current <-> flux mapping: phi_ex/2pi = 0.5 + kappa (I - I0)."""

    I0: float            # mA
    kappa: float         # d(phi_ex/2pi)/dI, 1/mA

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")

    def phi_frac(self, I):
        """phi_ex/2pi at bias current I (mA)."""
        return 0.5 + self.kappa * (np.asarray(I, dtype=float) - self.I0)

    def phi_ex(self, I):
        return 2 * np.pi * self.phi_frac(I)

    def current(self, phi_frac):
        return self.I0 + (np.asarray(phi_frac, dtype=float) - 0.5) / self.kappa

    def persistent_current_nA(self, eps_tilde):
        """I_p from the spin-slope identity h*eps_tilde*(I-I0) =
        2 I_p Phi0 (phi_ex/2pi - 0.5), with eps_tilde in GHz/mA."""
        eps_si = eps_tilde * 1e9 / 1e-3          # Hz per A
        kappa_si = self.kappa / 1e-3             # 1/A
        return H_PLANCK * eps_si / (2.0 * PHI0 * kappa_si) * 1e9


def eps_from_phi_frac(phi_frac, Ip_nA):
    """Spin bias eps (GHz) at a given phi_ex/2pi for persistent current Ip:
    h*eps = 2 Ip Phi0 (phi_ex/2pi - 0.5)."""
    return 2.0 * (Ip_nA * 1e-9) * PHI0 * (np.asarray(phi_frac) - 0.5) / H_PLANCK / 1e9


def hermiticity_defect(H):
    """max |H - H^dagger| entry."""
    if sp.issparse(H):
        d = (H - H.getH()).tocoo()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0
    Hd = np.asarray(H)
    return float(np.max(np.abs(Hd - Hd.conj().T)))


def save_params(params, path):
    with open(path, "w") as f:
        json.dump(params.to_dict(), f, indent=1)


def load_params(cls, path):
    with open(path) as f:
        return cls.from_dict(json.load(f))


def save_eigensolutions_csv(path, bias_values, solutions):
    """(bias, level index, energy GHz) rows for a bias sweep of eigenvalue
    sets (EigenSolution or plain arrays)."""
    with open(path, "w") as f:
        f.write("bias,level,energy_GHz\n")
        for b, sol in zip(bias_values, solutions):
            ev = sol.eigenvalues if isinstance(sol, EigenSolution) else np.asarray(sol)
            for k, e in enumerate(ev):
                f.write(f"{float(b)!r},{k},{float(e)!r}\n")
