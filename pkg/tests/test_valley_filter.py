import numpy as np
import pytest

from valleyfit.errors import ResolutionError
from valleyfit.valley_filter import (
    FilterConfig,
    auto_select_scale,
    hessian_at_scale,
    multiscale_valley_response,
    scale_from_fwhm,
    valley_measure_at_scale,
)


def finite_difference_hessian(image):
    """Dense central-difference oracle for the unsmoothed Hessian."""
    hrr = np.zeros_like(image)
    hcc = np.zeros_like(image)
    hrc = np.zeros_like(image)
    hrr[1:-1, :] = image[2:, :] - 2 * image[1:-1, :] + image[:-2, :]
    hcc[:, 1:-1] = image[:, 2:] - 2 * image[:, 1:-1] + image[:, :-2]
    hrc[1:-1, 1:-1] = (image[2:, 2:] - image[2:, :-2] - image[:-2, 2:] + image[:-2, :-2]) / 4
    return hrr, hrc, hcc


class TestHessian:
    def test_constant_image_zero(self):
        img = np.full((32, 32), 3.7)
        for h in hessian_at_scale(img, 2.0):
            assert np.allclose(h, 0.0, atol=1e-12)

    @pytest.mark.parametrize("sigma", [1.0, 2.0, 3.5])
    def test_quadratic_column_field(self, sigma):
        # f(r,c) = c^2 has exact Hessian (0, 0, 2) and Gaussian smoothing
        # leaves a quadratic's second derivative unchanged in the interior
        c = np.arange(64, dtype=float)
        img = np.tile(c**2, (48, 1))
        hrr, hrc, hcc = hessian_at_scale(img, sigma)
        interior = (slice(12, -12), slice(20, -20))
        assert np.allclose(hcc[interior] / sigma**2, 2.0, atol=1e-6)
        assert np.allclose(hrc[interior], 0.0, atol=1e-8)
        assert np.allclose(hrr[interior], 0.0, atol=1e-8)
        # agreement with the dense finite-difference oracle applied to the
        # smoothed image (grid-step 1: FD of a quadratic is exact)
        fd_rr, fd_rc, fd_cc = finite_difference_hessian(img)
        assert np.allclose(fd_cc[interior], 2.0, atol=1e-9)

    def test_gaussian_valley_center_curvature(self):
        # 1 - exp(-y^2 / 2w^2) has analytic curvature +1/w^2 at y=0; smoothing
        # by s widens it to a Gaussian of variance w^2+s^2 with amplitude
        # w/sqrt(w^2+s^2), so the smoothed center curvature is w/(w^2+s^2)^1.5
        w, s = 4.0, 1.0
        y = np.arange(-40, 41, dtype=float)
        img = np.tile((1.0 - np.exp(-(y**2) / (2 * w**2)))[:, None], (1, 31))
        hrr, hrc, hcc = hessian_at_scale(img, s, boundary="reflect")
        center = 40
        assert hrr[center, 15] > 0
        expected = w / (w**2 + s**2) ** 1.5
        assert hrr[center, 15] / s**2 == pytest.approx(expected, rel=0.01)

    def test_sigma_floor(self):
        with pytest.raises(ResolutionError):
            hessian_at_scale(np.zeros((8, 8)), 0.2)


class TestMultiscale:
    def test_constant_image_degenerate(self):
        out = multiscale_valley_response(np.ones((16, 16)), FilterConfig(scales=(1.0,)))
        assert out.degenerate
        assert np.all(out.data == 0.5)

    def test_single_valley_argmin_within_pixel(self):
        w = 3.0
        rows, cols = 81, 41
        y0 = 37.3
        y = np.arange(rows, dtype=float)
        img = np.tile((1.0 - np.exp(-((y - y0) ** 2) / (2 * w**2)))[:, None], (1, cols))
        out = multiscale_valley_response(img, FilterConfig(scales=(w,)))
        mins = np.argmin(out.data, axis=0)
        assert np.all(np.abs(mins - y0) <= 1.0)

    def test_two_parallel_valleys_separate_at_level(self):
        w = 2.0
        rows, cols = 100, 30
        y = np.arange(rows, dtype=float)[:, None]
        dip = lambda y0: np.exp(-((y - y0) ** 2) / (2 * w**2))
        img = np.tile(1.0 - dip(40) - dip(40 + 6 * w), (1, cols))
        out = multiscale_valley_response(img, FilterConfig(scales=(w,)))
        # sub-level cells at 0.25 must form two disjoint row bands
        level_rows = np.unique(np.where(out.data < 0.25)[0])
        breaks = np.where(np.diff(level_rows) > 1)[0]
        assert len(breaks) == 1

    def test_shape_preserved_and_transpose_consistent(self):
        rng = np.random.default_rng(5)
        img = rng.normal(size=(40, 56))
        cfg = FilterConfig(scales=(1.5, 3.0))
        out = multiscale_valley_response(img, cfg)
        assert out.data.shape == img.shape
        out_t = multiscale_valley_response(img.T, cfg)
        assert np.allclose(out_t.data, out.data.T, atol=1e-12)

    def test_constant_offset_invariance(self):
        rng = np.random.default_rng(6)
        img = rng.normal(size=(32, 32))
        r1 = valley_measure_at_scale(img, 2.0)
        r2 = valley_measure_at_scale(img + 11.5, 2.0)
        assert np.allclose(r1, r2, atol=1e-10)

    def test_scale_selection_peaks_near_matching_width(self):
        # the sigma^2-normalized center response of a Gaussian valley of
        # width w is s^2 * w / (w^2+s^2)^1.5, maximal at s = sqrt(2) w; it
        # must beat strongly mismatched scales on both sides
        w = 4.0
        y = np.arange(-80, 81, dtype=float)
        img = np.tile((1.0 - np.exp(-(y**2) / (2 * w**2)))[:, None], (1, 21))
        center = 80
        responses = {s: valley_measure_at_scale(img, s)[center, 10]
                     for s in (w / 2, np.sqrt(2) * w, 4 * w)}
        best = np.sqrt(2) * w
        assert responses[best] == max(responses.values())
        analytic = {s: s**2 * w / (w**2 + s**2) ** 1.5 for s in responses}
        for s, r in responses.items():
            assert r == pytest.approx(analytic[s], rel=0.01)


class TestScaleFromFwhm:
    def test_definition(self):
        assert scale_from_fwhm(2.355) == pytest.approx(1.0)

    def test_direct_value(self):
        assert scale_from_fwhm(10.0) == pytest.approx(4.2463, abs=1e-4)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            scale_from_fwhm(0.0)

    def test_fwhm_from_lorentzian_fit_path(self):
        # measure gamma in GHz with a Lorentzian fit, convert to pixels via
        # the axis step, then to a filter scale
        from valleyfit.peaks import lorentzian_fit_1d
        from valleyfit.spectrum import lorentzian

        freq = np.linspace(4.0, 6.0, 201)
        gamma = 0.04
        col = 1.0 - lorentzian(freq, 5.0, gamma)
        fit = lorentzian_fit_1d(list(zip(freq, col)))
        step = freq[1] - freq[0]
        sigma_px = scale_from_fwhm(fit.fwhm / step)
        assert sigma_px == pytest.approx(gamma / step / 2.355, rel=1e-6)


def test_auto_select_scale_prefers_matched_width():
    w = 3.0
    y = np.arange(101, dtype=float)[:, None]
    img = np.tile(1.0 - np.exp(-((y - 50) ** 2) / (2 * w**2)), (1, 61))
    rng = np.random.default_rng(0)
    img = img + rng.normal(0, 0.25, img.shape)
    picked = auto_select_scale(img, scales=(0.8, w, 9.0), level=0.25, min_length=20)
    assert picked == w
