import numpy as np
import pytest

from valleyfit.convergence import (
    charge_convergence,
    fock_convergence,
    qubit_space_convergence,
)
from valleyfit.hamiltonians import CircuitParams, RabiParams, TruncationConfig

FITTED_RABI = RabiParams(g=3.45, delta=0.83, omega_r=5.17)
FITTED_CIRCUIT = CircuitParams(EJ=278.0, Ec=2.88, alpha=0.66, beta=1.62, Lr=5.00, Cr=175.0)


class TestFockConvergence:
    def test_reference_self_consistency(self):
        rep = fock_convergence(FITTED_RABI, F_range=[14], F_ref=14, n_bias=5)
        assert rep.metric[14] == 0.0
        for label, ratio in rep.detail["ratios_at_eps0"][14].items():
            assert ratio == pytest.approx(1.0, abs=1e-15)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            fock_convergence(FITTED_RABI, F_range=[15], F_ref=14)

    def test_larger_coupling_converges_slower(self):
        # Fig-4-style sweep at eps = 0: deviation at fixed F grows with g/wr
        devs = {}
        for ratio in (0.2, 1.0):
            p = RabiParams(g=ratio * 5.0, delta=2.0, omega_r=5.0)
            rep = fock_convergence(p, F_range=[9], F_ref=14, eps_values=[0.0])
            devs[ratio] = rep.metric[9]
        assert devs[1.0] > 10 * devs[0.2]
        assert devs[1.0] > 1e-3      # g/wr ~ 1 is far from converged at F=9

    def test_deviation_decreases_with_fock(self):
        rep = fock_convergence(FITTED_RABI, F_range=range(6, 14), F_ref=14, n_bias=7)
        vals = [rep.metric[F] for F in range(6, 14)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


class TestChargeConvergence:
    def test_reference_vs_itself_zero(self):
        rep = charge_convergence(FITTED_CIRCUIT, [(3, 3, 3)], reference=(3, 3, 3),
                                 n_bias=3)
        assert rep.metric[(3, 3, 3)] == 0.0

    def test_exceeding_reference_rejected(self):
        with pytest.raises(ValueError):
            charge_convergence(FITTED_CIRCUIT, [(4, 3, 3)], reference=(3, 3, 3))

    def test_deviation_shrinks_with_truncation(self):
        rep = charge_convergence(FITTED_CIRCUIT, [(2, 2, 2), (4, 4, 4)],
                                 reference=(5, 5, 5), n_bias=3)
        assert rep.metric[(4, 4, 4)] < rep.metric[(2, 2, 2)]
        # per-bias detail has one entry per bias point
        assert len(rep.detail["per_bias_deviation"][(2, 2, 2)]) == 3


class TestQubitSpaceConvergence:
    def test_reference_zero_and_ritz(self):
        trunc = TruncationConfig(charge=(3, 3, 3), fock=6, qubit_space=12)
        rep = qubit_space_convergence(FITTED_CIRCUIT, Q_range=[4, 8, 12], Q_ref=12,
                                      trunc=trunc, n_bias=3)
        assert rep.metric[12] == 0.0
        ground = rep.detail["ground_state"]
        for i in range(3):
            seq = [ground[Q][i] for Q in (4, 8, 12)]
            assert all(a >= b - 1e-12 for a, b in zip(seq, seq[1:]))

    def test_range_validation(self):
        with pytest.raises(ValueError):
            qubit_space_convergence(FITTED_CIRCUIT, Q_range=[30], Q_ref=25)

    def test_larger_space_closer(self):
        trunc = TruncationConfig(charge=(3, 3, 3), fock=6, qubit_space=14)
        rep = qubit_space_convergence(FITTED_CIRCUIT, Q_range=[3, 10], Q_ref=14,
                                      trunc=trunc, n_bias=3)
        assert rep.metric[10] < rep.metric[3]


def test_report_csv_export(tmp_path):
    rep = fock_convergence(FITTED_RABI, F_range=[10, 12], F_ref=14, n_bias=3)
    p = tmp_path / "rep.csv"
    rep.save_csv(p)
    text = p.read_text()
    assert "axis=fock" in text and "10" in text
