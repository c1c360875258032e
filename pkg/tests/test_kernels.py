"""Filter kernel and filter design tests.

The compiled and pure-Python kernels are compared against each other and
against a direct-form-I difference-equation oracle written independently.
"""

import numpy as np
import pytest

from keytap import dsp
from keytap.errors import ContractError
from keytap.kernels import BACKEND, _iir_py, sosfilt


def sosfilt_oracle(sos, x):
    """Direct form I, straight from the difference equation."""
    y = np.asarray(x, dtype=np.float64).copy()
    for b0, b1, b2, _a0, a1, a2 in sos:
        src = y.copy()
        out = np.zeros_like(src)
        for i in range(len(src)):
            acc = b0 * src[i]
            if i >= 1:
                acc += b1 * src[i - 1] - a1 * out[i - 1]
            if i >= 2:
                acc += b2 * src[i - 2] - a2 * out[i - 2]
            out[i] = acc
        y = out
    return y


@pytest.fixture
def random_sos(rng):
    sections = []
    for _ in range(4):
        # poles safely inside the unit circle keep the cascade stable
        r = rng.uniform(0.2, 0.95)
        theta = rng.uniform(0.1, np.pi - 0.1)
        a1 = -2 * r * np.cos(theta)
        a2 = r * r
        b = rng.uniform(-1, 1, 3)
        sections.append([b[0], b[1], b[2], 1.0, a1, a2])
    return np.array(sections)


def test_matches_difference_equation_oracle(rng, random_sos):
    x = rng.standard_normal(400)
    assert np.allclose(sosfilt(random_sos, x), sosfilt_oracle(random_sos, x),
                       atol=1e-10)


def test_python_fallback_matches_selected_backend(rng, random_sos):
    x = rng.standard_normal(400)
    out_py = np.empty_like(x)
    _iir_py.sosfilt(random_sos, x, out_py)
    assert np.allclose(sosfilt(random_sos, x), out_py, atol=1e-12)


def test_backend_reported():
    assert BACKEND in ("compiled", "python")


def test_empty_signal(random_sos):
    assert len(sosfilt(random_sos, np.empty(0))) == 0


def test_input_not_modified(rng, random_sos):
    x = rng.standard_normal(100)
    x_copy = x.copy()
    sosfilt(random_sos, x)
    assert np.array_equal(x, x_copy)


def test_rejects_unnormalized_sections():
    bad = np.array([[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        sosfilt(bad, np.zeros(10))


class TestButterworthDesign:
    def test_dc_gain_unity(self):
        sos = dsp.butterworth_lowpass_sos(4000, 44100, order=8)
        resp = dsp.sos_frequency_response(sos, [0.0], 44100)
        assert abs(abs(resp[0]) - 1.0) < 1e-12

    def test_cutoff_is_half_power(self):
        for order in (2, 4, 8):
            sos = dsp.butterworth_lowpass_sos(4000, 44100, order=order)
            resp = dsp.sos_frequency_response(sos, [4000.0], 44100)
            assert abs(abs(resp[0]) - 1 / np.sqrt(2)) < 1e-9

    def test_measured_sine_attenuation_at_cutoff(self):
        # empirical check: filter a long on-cutoff sine, compare RMS ratio
        sr, fc = 16000, 2000
        t = np.arange(sr) / sr
        x = np.sin(2 * np.pi * fc * t)
        y = dsp.sosfilt(dsp.butterworth_lowpass_sos(fc, sr, order=8), x)
        steady = slice(sr // 4, None)  # skip the transient
        ratio = np.sqrt(np.mean(y[steady] ** 2) / np.mean(x[steady] ** 2))
        assert abs(ratio - 1 / np.sqrt(2)) < 0.01

    def test_monotone_rolloff(self):
        sos = dsp.butterworth_lowpass_sos(4000, 44100, order=8)
        freqs = np.linspace(100, 22000, 200)
        mags = np.abs(dsp.sos_frequency_response(sos, freqs, 44100))
        assert np.all(np.diff(mags) < 1e-9)

    def test_rejects_bad_cutoff_and_order(self):
        with pytest.raises(ContractError):
            dsp.butterworth_lowpass_sos(30000, 44100)
        with pytest.raises(ContractError):
            dsp.butterworth_lowpass_sos(1000, 44100, order=3)


class TestPeakingBiquad:
    def test_gain_at_center(self):
        for gain in (-5.0, -1.0, 2.5, 5.0):
            sos = dsp.peaking_biquad(1000, gain, 50, 44100)
            resp = dsp.sos_frequency_response(sos, [1000.0], 44100)
            assert abs(abs(resp[0]) - 10 ** (gain / 20)) < 1e-9

    def test_unity_far_from_center(self):
        sos = dsp.peaking_biquad(1000, 5.0, 50, 44100)
        resp = dsp.sos_frequency_response(sos, [20.0, 15000.0], 44100)
        assert np.allclose(np.abs(resp), 1.0, atol=1e-3)

    def test_zero_gain_is_identity(self, rng):
        sos = dsp.peaking_biquad(1000, 0.0, 50, 44100)
        x = rng.standard_normal(500)
        assert np.allclose(dsp.sosfilt(sos, x), x, atol=1e-12)

    def test_measured_sine_boost(self):
        sr, fc, gain = 44100, 1000, 5.0
        t = np.arange(sr) / sr
        x = np.sin(2 * np.pi * fc * t)
        y = dsp.sosfilt(dsp.peaking_biquad(fc, gain, 50, sr), x)
        steady = slice(sr // 2, None)
        ratio = np.sqrt(np.mean(y[steady] ** 2) / np.mean(x[steady] ** 2))
        assert abs(20 * np.log10(ratio) - gain) < 0.05

    def test_rejects_out_of_range_center(self):
        with pytest.raises(ContractError):
            dsp.peaking_biquad(0.0, 5.0, 50, 44100)
        with pytest.raises(ContractError):
            dsp.peaking_biquad(23000, 5.0, 50, 44100)
