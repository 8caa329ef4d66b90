"""2D spectroscopy maps: data model, CSV/JSON I/O, normalization, synthesis.

The amplitude matrix is oriented (rows = frequency, columns = bias).
Transitions are valleys (dips) of the amplitude; ridge-style data must be
negated at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRangeError, SpectrumFormatError

CSV_HEADER_CELL = "freq\\bias"
NOISE_ALGORITHM = "pcg64-seedseq-per-column"


@dataclass(frozen=True)
class AxisGrid:
    """Strictly monotonic axis with physical-unit metadata."""

    values: np.ndarray
    label: str = ""
    unit: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise SpectrumFormatError("axis needs at least 2 values")
        if not np.all(np.isfinite(vals)):
            raise SpectrumFormatError("axis contains non-finite values")
        d = np.diff(vals)
        if not (np.all(d > 0) or np.all(d < 0)):
            bad = int(np.argmin(np.abs(d))) if np.any(d == 0) else int(np.argmax(d <= 0))
            raise SpectrumFormatError(
                f"axis '{self.label}' not strictly monotonic", col=bad + 1
            )

    def __len__(self):
        return len(self.values)

    @property
    def step(self):
        """Mean grid step (exact for uniform grids)."""
        return float(np.mean(np.diff(self.values)))

    def to_dict(self):
        return {"values": self.values.tolist(), "label": self.label, "unit": self.unit}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["values"], dtype=float), d.get("label", ""), d.get("unit", ""))


@dataclass(frozen=True)
class Spectrum2D:
    """Rectangular amplitude map over (bias, frequency) axes."""

    bias: AxisGrid
    freq: AxisGrid
    amplitude: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=float)
        object.__setattr__(self, "amplitude", amp)
        if amp.shape != (len(self.freq), len(self.bias)):
            raise SpectrumFormatError(
                f"amplitude shape {amp.shape} != (freq {len(self.freq)}, bias {len(self.bias)})"
            )
        if not np.all(np.isfinite(amp)):
            r, c = np.argwhere(~np.isfinite(amp))[0]
            raise SpectrumFormatError("non-finite amplitude", row=int(r), col=int(c))

    @property
    def shape(self):
        return self.amplitude.shape

    def to_dict(self):
        return {
            "bias": self.bias.to_dict(),
            "freq": self.freq.to_dict(),
            "amplitude": self.amplitude.tolist(),
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            bias=AxisGrid.from_dict(d["bias"]),
            freq=AxisGrid.from_dict(d["freq"]),
            amplitude=np.asarray(d["amplitude"], dtype=float),
            metadata=dict(d.get("metadata", {})),
        )


@dataclass(frozen=True)
class SyntheticLineSpec:
    """One Lorentzian valley: center curve, FWHM gamma, dip depth."""

    center_fn: object            # callable bias -> frequency (GHz), vectorized or scalar
    gamma: float
    depth: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")

    def centers(self, bias_values):
        out = np.asarray(self.center_fn(np.asarray(bias_values, dtype=float)), dtype=float)
        if out.ndim == 0:
            out = np.full(len(bias_values), float(out))
        return out


def load_spectrum(path, format="csv-matrix", negate=False):
    """Load a Spectrum2D from disk.

    format 'csv-matrix': first cell is the literal ``freq\\bias``, remainder of
    the first row are bias values, first column holds frequency values, body
    holds amplitudes.  format 'json': the Spectrum2D.to_dict layout.
    ``negate`` flips ridge-style data into the valley convention.
    """
    if format == "json":
        with open(path) as f:
            spec = Spectrum2D.from_dict(json.load(f))
    elif format == "csv-matrix":
        spec = _load_csv_matrix(path)
    else:
        raise ValueError(f"unknown format: {format}")
    if negate:
        spec = Spectrum2D(spec.bias, spec.freq, -spec.amplitude,
                          {**spec.metadata, "negated_at_load": "true"})
    return spec


def _load_csv_matrix(path):
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise SpectrumFormatError("empty file")
    header = lines[0].split(",")
    if header[0].strip() != CSV_HEADER_CELL:
        raise SpectrumFormatError(
            f"first cell must be '{CSV_HEADER_CELL}', got '{header[0].strip()}'", row=0, col=0
        )
    if len(header) < 3:
        raise SpectrumFormatError("header row needs at least 2 bias values", row=0)
    try:
        bias_vals = np.array([float(x) for x in header[1:]])
    except ValueError as e:
        raise SpectrumFormatError(f"bad bias value in header: {e}", row=0) from None
    freq_vals = []
    rows = []
    for r, ln in enumerate(lines[1:], start=1):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise SpectrumFormatError(
                f"ragged row: {len(cells)} cells, expected {len(header)}", row=r
            )
        try:
            freq_vals.append(float(cells[0]))
        except ValueError:
            raise SpectrumFormatError(f"bad frequency value '{cells[0]}'", row=r, col=0) from None
        try:
            rows.append([float(x) for x in cells[1:]])
        except ValueError as e:
            raise SpectrumFormatError(f"bad amplitude: {e}", row=r) from None
    if len(freq_vals) < 2:
        raise SpectrumFormatError("need at least 2 frequency rows")
    try:
        bias = AxisGrid(bias_vals, label="bias")
    except SpectrumFormatError as e:
        raise SpectrumFormatError(f"bias axis: {e}", row=0) from None
    try:
        freq = AxisGrid(np.array(freq_vals), label="freq", unit="GHz")
    except SpectrumFormatError as e:
        raise SpectrumFormatError(f"freq axis: {e}", col=0) from None
    return Spectrum2D(bias, freq, np.array(rows))


def save_spectrum(spec, path, format="csv-matrix"):
    """Write a Spectrum2D; CSV uses 17 significant digits so a save/load
    cycle is bit-exact."""
    if format == "json":
        with open(path, "w") as f:
            json.dump(spec.to_dict(), f)
        return
    if format != "csv-matrix":
        raise ValueError(f"unknown format: {format}")
    fmt = "%.17g"
    with open(path, "w") as f:
        f.write(CSV_HEADER_CELL + "," + ",".join(fmt % b for b in spec.bias.values) + "\n")
        for i, fv in enumerate(spec.freq.values):
            f.write(fmt % fv + "," + ",".join(fmt % a for a in spec.amplitude[i]) + "\n")


def normalize_unit_range(image):
    """Affine rescale of a finite matrix onto [0, 1].

    Raises DegenerateRangeError when max == min.
    """
    img = np.asarray(image, dtype=float)
    if img.size == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(img)):
        raise ValueError("non-finite entries")
    lo, hi = img.min(), img.max()
    if hi <= lo:
        raise DegenerateRangeError(f"constant matrix (value {lo}); unit-range undefined")
    return (img - lo) / (hi - lo)


def lorentzian(f, center, gamma):
    """Unit-peak Lorentzian gamma^2 / (4 (f-center)^2 + gamma^2)."""
    return gamma**2 / (4.0 * (np.asarray(f) - center) ** 2 + gamma**2)


def generate_synthetic_spectrum(lines, bias, freq, sigma_g=0.0, seed=0, baseline=1.0,
                                metadata=None):
    """Superimpose Lorentzian valleys on a flat baseline plus Gaussian noise.

    Column i of the result is
        baseline - sum_lines depth * L(f; center_fn(bias_i), gamma) + N(0, sigma_g^2).

    Noise is drawn per column from a generator seeded with (seed, column), so
    the output is independent of evaluation order and identical across runs.
    """
    if sigma_g < 0:
        raise ValueError("sigma_g must be >= 0")
    nf, nb = len(freq), len(bias)
    amp = np.full((nf, nb), float(baseline))
    fvals = freq.values
    for line in lines:
        centers = line.centers(bias.values)
        amp -= line.depth * lorentzian(fvals[:, None], centers[None, :], line.gamma)
    if sigma_g > 0:
        for j in range(nb):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, j))))
            amp[:, j] += rng.normal(0.0, sigma_g, size=nf)
    meta = {
        "synthetic": "true",
        "noise_sigma": repr(float(sigma_g)),
        "noise_seed": repr(int(seed)),
        "noise_algorithm": NOISE_ALGORITHM,
    }
    if metadata:
        meta.update(metadata)
    return Spectrum2D(bias, freq, amp, meta)
