"""Multi-scale Hessian line filter emphasizing elongated valley structures.

Per pixel and per Gaussian scale sigma, the second-derivative (Hessian)
matrix of the smoothed image is scale-normalized by sigma^2; the valley
measure is the largest Hessian eigenvalue where positive (the profile
across a dip curves upward).  The multi-scale response is the maximum over
scales, then negated and rescaled to [0, 1] so that valleys come out as
minima, matching the dip convention of the raw spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DegenerateRangeError, ResolutionError
from .spectrum import normalize_unit_range

GAUSSIAN_FWHM_FACTOR = 2.355   # FWHM of a Gaussian = 2.355 sigma

MIN_SIGMA_PX = 0.5


@dataclass(frozen=True)
class FilterConfig:
    scales: tuple = (1.0, 2.0, 4.0)
    mode: str = "valley"            # 'valley' or 'ridge'
    boundary: str = "reflect"

    def __post_init__(self):
        scales = tuple(float(s) for s in np.atleast_1d(self.scales))
        object.__setattr__(self, "scales", scales)
        if not scales or any(s <= 0 for s in scales):
            raise ValueError("scales must be a non-empty list of positive values")
        if self.mode not in ("valley", "ridge"):
            raise ValueError(f"unknown mode: {self.mode}")


@dataclass(frozen=True)
class FilteredImage:
    data: np.ndarray
    config: FilterConfig
    per_pixel_best_scale: np.ndarray = None
    degenerate: bool = False

    @property
    def shape(self):
        return self.data.shape


@lru_cache(maxsize=64)
def _gaussian_derivative_kernels(sigma, truncate=4.0):
    """Sampled Gaussian kernels (orders 0, 1, 2) with discrete corrections.

    Plain truncated sampling leaks a small constant response through the
    derivative kernels; the corrections enforce exact discrete moments, so a
    constant image has identically zero Hessian, a ramp has unit first
    derivative, and x^2 has second derivative exactly 2.
    """
    radius = max(int(truncate * sigma + 0.5), 2)
    x = np.arange(-radius, radius + 1, dtype=float)
    g0 = np.exp(-0.5 * (x / sigma) ** 2)
    g0 /= g0.sum()
    g1 = x * g0                       # correlation weights for +d/dx
    g1 /= np.sum(g1 * x)
    g2 = (x**2 / sigma**2 - 1.0) * g0
    g2 -= g2.mean()
    g2 *= 2.0 / np.sum(g2 * x**2)
    for arr in (g0, g1, g2):
        arr.setflags(write=False)
    return g0, g1, g2


def hessian_at_scale(image, sigma, boundary="reflect"):
    """Scale-normalized Hessian (Hrr, Hrc, Hcc) of the Gaussian-smoothed image.

    Entries are second derivatives of the sigma-smoothed image multiplied by
    sigma^2 (gamma-normalization exponent 2), with reflective boundaries.
    """
    img = np.asarray(image, dtype=float)
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if sigma < MIN_SIGMA_PX:
        raise ResolutionError(f"sigma {sigma} px below the {MIN_SIGMA_PX} px floor")
    g0, g1, g2 = _gaussian_derivative_kernels(float(sigma))

    def sep(kr, kc):
        return correlate1d(correlate1d(img, kr, axis=0, mode=boundary),
                           kc, axis=1, mode=boundary)

    s2 = sigma * sigma
    hrr = sep(g2, g0) * s2
    hrc = sep(g1, g1) * s2
    hcc = sep(g0, g2) * s2
    return hrr, hrc, hcc


def valley_measure_at_scale(image, sigma, mode="valley", boundary="reflect"):
    """Single-scale line measure: largest Hessian eigenvalue clipped at zero
    (valleys); for ridges the sign is flipped first."""
    hrr, hrc, hcc = hessian_at_scale(image, sigma, boundary)
    if mode == "ridge":
        hrr, hrc, hcc = -hrr, -hrc, -hcc
    half_tr = 0.5 * (hrr + hcc)
    # eigenvalues of [[hrr, hrc], [hrc, hcc]]: half_tr +- sqrt(half_tr^2 - det)
    root = np.sqrt(np.maximum((0.5 * (hrr - hcc)) ** 2 + hrc**2, 0.0))
    lam2 = half_tr + root
    return np.where(lam2 > 0.0, lam2, 0.0)


def multiscale_valley_response(image, config=None):
    """Maximum valley measure over scales, negated and unit-normalized so
    valleys are minima.

    A structureless (constant-response) image cannot be normalized; the
    result is then all 0.5 with the ``degenerate`` flag set.
    """
    if config is None:
        config = FilterConfig()
    img = np.asarray(image, dtype=float)
    best = None
    best_idx = None
    for i, s in enumerate(config.scales):
        resp = valley_measure_at_scale(img, s, config.mode, config.boundary)
        if best is None:
            best = resp
            best_idx = np.zeros(img.shape, dtype=np.int16)
        else:
            take = resp > best
            best = np.where(take, resp, best)
            best_idx[take] = i
    try:
        out = normalize_unit_range(-best)
        degenerate = False
    except DegenerateRangeError:
        out = np.full(img.shape, 0.5)
        degenerate = True
    return FilteredImage(out, config, per_pixel_best_scale=best_idx, degenerate=degenerate)


def scale_from_fwhm(fwhm_px):
    """Filter scale (Gaussian sigma, px) matched to a line of the given FWHM."""
    if fwhm_px <= 0:
        raise ValueError("fwhm must be > 0")
    return fwhm_px / GAUSSIAN_FWHM_FACTOR


def auto_select_scale(image, scales, level, min_length, mode="valley"):
    """Pick the single scale whose filtered image yields the most contour
    structure (total retained vertex count) at the given level/length cut."""
    from .contours import filter_contours, marching_squares

    best_scale, best_total = None, -1
    for s in scales:
        filt = multiscale_valley_response(image, FilterConfig(scales=(s,), mode=mode))
        cs = filter_contours(marching_squares(filt.data, level), min_length)
        total = sum(len(c.vertices) for c in cs.contours)
        if total > best_total:
            best_scale, best_total = s, total
    return best_scale


def export_png(filtered, path):
    """8-bit grayscale PNG of a filtered image; row 0 is the highest frequency.

    Pixel value = round(255 * data); the data is already in [0, 1].
    """
    from PIL import Image

    data = filtered.data if isinstance(filtered, FilteredImage) \
        else np.asarray(filtered, dtype=float)
    img8 = np.clip(np.round(data * 255.0), 0, 255).astype(np.uint8)
    # amplitude rows run low->high frequency; PNG row 0 is the top of the image
    Image.fromarray(img8[::-1], mode="L").save(path)
