"""Shared helpers: synthetic three-transition spectra and scripted contour
assignment (the no-UI stand-in for the manual grouping step)."""

import numpy as np
import pytest

from valleyfit.fitting import sample_model_curve
from valleyfit.hamiltonians import rabi_transitions
from valleyfit.peaks import GroupAssignment
from valleyfit.spectrum import AxisGrid, SyntheticLineSpec, generate_synthetic_spectrum

LABELS = ("w10", "w20", "w31")


def rabi_line_specs(params, gamma, F=13, depths=(1.0, 1.0, 1.0)):
    """SyntheticLineSpec per transition of a Rabi model."""
    def center_fn(idx):
        def fn(bias):
            return np.array([rabi_transitions(params, float(b), F)[idx]
                             for b in np.atleast_1d(bias)])
        return fn

    return [SyntheticLineSpec(center_fn(i), gamma, d) for i, d in enumerate(depths)]


def make_rabi_spectrum(params, bias, freq, gamma=0.02, sigma_g=0.0, seed=0, F=13,
                       depths=(1.0, 1.0, 1.0)):
    return generate_synthetic_spectrum(rabi_line_specs(params, gamma, F, depths),
                                       bias, freq, sigma_g, seed)


def scripted_assignment(cset, bias_values, freq_values, curve_fns, labels=LABELS,
                        max_dist=None):
    """Group contours by the transition curve they hug (median vertical
    distance); contours matching nothing are ignored.

    This reproduces the one manual step of the workflow in scripted form for
    round-trip tests: the generator's own curves play the analyst's eye.
    """
    groups = {i: [] for i in range(len(curve_fns))}
    ignored = []
    if max_dist is None:
        # generous gate: steep line segments shift a contour's apparent
        # frequency by (slope px/col) * df; closeness between candidate
        # curves is still resolved by the argmin
        max_dist = 40 * float(np.mean(np.abs(np.diff(freq_values))))
    for contour in cset.contours:
        rows = contour.vertices[:, 0]
        cols = contour.vertices[:, 1]
        f = np.interp(rows, np.arange(len(freq_values)), freq_values)
        b = np.interp(cols, np.arange(len(bias_values)), bias_values)
        dists = []
        for fn in curve_fns:
            centers = np.asarray(fn(b))
            dists.append(float(np.median(np.abs(f - centers))))
        best = int(np.argmin(dists))
        if dists[best] <= max_dist:
            groups[best].append(contour.id)
        else:
            ignored.append(contour.id)
    return GroupAssignment(
        groups=groups,
        transition_labels={i: lab for i, lab in enumerate(labels)},
        ignored=ignored)


@pytest.fixture(scope="session")
def fitted_rabi_params():
    from valleyfit.hamiltonians import RabiParams

    return RabiParams(g=3.45, delta=0.83, omega_r=5.17)
