import numpy as np
import pytest

from valleyfit.errors import DegenerateRangeError, SpectrumFormatError
from valleyfit.spectrum import (
    AxisGrid,
    Spectrum2D,
    SyntheticLineSpec,
    generate_synthetic_spectrum,
    load_spectrum,
    normalize_unit_range,
    save_spectrum,
)


def grid(vals, label="x", unit=""):
    return AxisGrid(np.asarray(vals, dtype=float), label, unit)


class TestAxisGrid:
    def test_monotonic_required(self):
        with pytest.raises(SpectrumFormatError):
            grid([0.0, 1.0, 1.0, 2.0])
        with pytest.raises(SpectrumFormatError):
            grid([0.0, 2.0, 1.0])

    def test_decreasing_allowed(self):
        g = grid([3.0, 2.0, 1.0])
        assert len(g) == 3

    def test_too_short(self):
        with pytest.raises(SpectrumFormatError):
            grid([1.0])


class TestLoadSave:
    def test_minimal_csv(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("freq\\bias,0,1\n4,1,2\n5,3,4\n")
        s = load_spectrum(p)
        assert s.shape == (2, 2)
        assert s.bias.values.tolist() == [0.0, 1.0]
        assert s.freq.values.tolist() == [4.0, 5.0]
        assert s.amplitude.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_duplicate_bias_rejected(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("freq\\bias,0,0\n4,1,2\n5,3,4\n")
        with pytest.raises(SpectrumFormatError, match="monotonic"):
            load_spectrum(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("nope,0,1\n4,1,2\n5,3,4\n")
        with pytest.raises(SpectrumFormatError, match="first cell"):
            load_spectrum(p)

    def test_ragged_row_reports_position(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("freq\\bias,0,1\n4,1,2\n5,3\n")
        with pytest.raises(SpectrumFormatError, match="row 2"):
            load_spectrum(p)

    def test_non_finite_rejected(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("freq\\bias,0,1\n4,1,nan\n5,3,4\n")
        with pytest.raises(SpectrumFormatError):
            load_spectrum(p)

    def test_round_trip_bitwise(self, tmp_path):
        line = SyntheticLineSpec(lambda b: 5.0 + 0.3 * b, gamma=0.05)
        s = generate_synthetic_spectrum(
            [line], grid(np.linspace(-1, 1, 301), "bias", "mA"),
            grid(np.linspace(4, 6, 201), "freq", "GHz"), sigma_g=0.2, seed=7)
        p = tmp_path / "r.csv"
        save_spectrum(s, p)
        s2 = load_spectrum(p)
        assert np.array_equal(s.amplitude, s2.amplitude)
        assert np.array_equal(s.bias.values, s2.bias.values)
        assert np.array_equal(s.freq.values, s2.freq.values)

    def test_json_round_trip(self, tmp_path):
        line = SyntheticLineSpec(lambda b: 5.0 + 0.0 * b, gamma=0.1)
        s = generate_synthetic_spectrum(
            [line], grid([0, 1, 2], "bias", "mA"), grid([4, 5, 6], "freq", "GHz"),
            sigma_g=0.0, seed=0, metadata={"IF_bandwidth": "100 Hz"})
        p = tmp_path / "r.json"
        save_spectrum(s, p, format="json")
        s2 = load_spectrum(p, format="json")
        assert np.array_equal(s.amplitude, s2.amplitude)
        assert s2.metadata["IF_bandwidth"] == "100 Hz"

    def test_negate_flag(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("freq\\bias,0,1\n4,1,2\n5,3,4\n")
        s = load_spectrum(p, negate=True)
        assert s.amplitude[0, 0] == -1.0


class TestNormalize:
    def test_direct_arithmetic(self):
        out = normalize_unit_range(np.array([[0.0, 2.0], [4.0, 8.0]]))
        assert np.allclose(out, [[0.0, 0.25], [0.5, 1.0]])

    def test_constant_rejected(self):
        with pytest.raises(DegenerateRangeError):
            normalize_unit_range(np.array([[3.0, 3.0]]))

    def test_postcondition_and_idempotence(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(17, 11))
        out = normalize_unit_range(m)
        assert out.min() == 0.0 and out.max() == 1.0
        assert np.argmin(out) == np.argmin(m) and np.argmax(out) == np.argmax(m)
        assert np.allclose(normalize_unit_range(out), out)


class TestSynthetic:
    bias = property(lambda self: grid(np.linspace(-1, 1, 41), "bias", "mA"))
    freq = property(lambda self: grid(np.linspace(4, 6, 101), "freq", "GHz"))

    def test_dip_depth_at_center(self):
        line = SyntheticLineSpec(lambda b: 5.0 + 0.0 * b, gamma=0.2, depth=0.7)
        s = generate_synthetic_spectrum([line], self.bias, self.freq, 0.0, 0)
        center_row = 50   # f = 5.0 exactly on this grid
        assert np.allclose(s.amplitude[center_row], 1.0 - 0.7)

    def test_half_depth_at_half_width(self):
        gamma = 0.2
        line = SyntheticLineSpec(lambda b: 5.0 + 0.0 * b, gamma=gamma, depth=0.8)
        s = generate_synthetic_spectrum([line], self.bias, self.freq, 0.0, 0)
        row = 50 + 5      # f = 5.0 + gamma/2 = 5.1
        assert np.allclose(s.amplitude[row], 1.0 - 0.4)

    def test_determinism(self):
        line = SyntheticLineSpec(lambda b: 5.0 + 0.1 * b, gamma=0.1)
        a = generate_synthetic_spectrum([line], self.bias, self.freq, 0.5, 42)
        b = generate_synthetic_spectrum([line], self.bias, self.freq, 0.5, 42)
        c = generate_synthetic_spectrum([line], self.bias, self.freq, 0.5, 43)
        assert np.array_equal(a.amplitude, b.amplitude)
        assert not np.array_equal(a.amplitude, c.amplitude)

    def test_noiseless_argmin_tracks_center(self):
        line = SyntheticLineSpec(lambda b: 5.0 + 0.4 * b, gamma=0.1)
        s = generate_synthetic_spectrum([line], self.bias, self.freq, 0.0, 0)
        extracted = s.freq.values[np.argmin(s.amplitude, axis=0)]
        centers = 5.0 + 0.4 * s.bias.values
        step = s.freq.step
        assert np.all(np.abs(extracted - centers) <= step / 2 + 1e-12)

    def test_metadata_records_noise_stream(self):
        line = SyntheticLineSpec(lambda b: 5.0 + 0.0 * b, gamma=0.1)
        s = generate_synthetic_spectrum([line], self.bias, self.freq, 0.5, 42)
        assert s.metadata["noise_algorithm"] == "pcg64-seedseq-per-column"
        assert s.metadata["noise_seed"] == "42"
