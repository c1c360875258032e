"""IIR filter design: peaking equalizer biquads and Butterworth lowpass.

Designs are returned as second-order-section arrays of shape (n, 6) with
rows [b0, b1, b2, 1, a1, a2], ready for kernels.sosfilt. All coefficient
math is closed-form (bilinear transform), no iterative optimization.
"""

import math

import numpy as np

from .errors import ContractError
from .kernels import sosfilt  # noqa: F401  (re-exported convenience)


def peaking_biquad(center_hz, gain_db, q, sample_rate):
    """Single peaking-EQ section: +/- gain_db in a band around center_hz.

    Standard audio-EQ biquad: the response is unity far from the center
    and 10**(gain_db/20) exactly at it; q controls the bandwidth. Requires
    0 < center_hz < Nyquist.
    """
    nyquist = sample_rate / 2.0
    if not 0.0 < center_hz < nyquist:
        raise ContractError(
            f"peaking center {center_hz} Hz outside (0, {nyquist}) Hz")
    if q <= 0.0:
        raise ContractError("q must be positive")
    amp = 10.0 ** (gain_db / 40.0)
    w0 = 2.0 * math.pi * center_hz / sample_rate
    alpha = math.sin(w0) / (2.0 * q)
    cos_w0 = math.cos(w0)

    b0 = 1.0 + alpha * amp
    b1 = -2.0 * cos_w0
    b2 = 1.0 - alpha * amp
    a0 = 1.0 + alpha / amp
    a1 = -2.0 * cos_w0
    a2 = 1.0 - alpha / amp
    return np.array([[b0 / a0, b1 / a0, b2 / a0, 1.0, a1 / a0, a2 / a0]])


def butterworth_lowpass_sos(cutoff_hz, sample_rate, order=8):
    """Butterworth lowpass as a cascade of second-order sections.

    Analog prototype pole pairs are mapped through the bilinear transform
    with prewarped cutoff. Even orders only, so every section is a true
    biquad. DC gain is exactly 1 per section by construction.
    """
    nyquist = sample_rate / 2.0
    if not 0.0 < cutoff_hz < nyquist:
        raise ContractError(
            f"cutoff {cutoff_hz} Hz outside (0, {nyquist}) Hz")
    if order < 2 or order % 2 != 0:
        raise ContractError("order must be a positive even integer")

    k = math.tan(math.pi * cutoff_hz / sample_rate)
    k2 = k * k
    sections = []
    for s in range(1, order // 2 + 1):
        # analog section: 1 / (p^2 + c*p + 1), poles on the unit circle
        c = 2.0 * math.sin((2 * s - 1) * math.pi / (2 * order))
        norm = 1.0 + c * k + k2
        b0 = k2 / norm
        b1 = 2.0 * k2 / norm
        b2 = k2 / norm
        a1 = 2.0 * (k2 - 1.0) / norm
        a2 = (1.0 - c * k + k2) / norm
        sections.append([b0, b1, b2, 1.0, a1, a2])
    return np.array(sections)


def sos_frequency_response(sos, freqs_hz, sample_rate):
    """Complex frequency response of an SOS cascade at the given frequencies."""
    freqs_hz = np.asarray(freqs_hz, dtype=np.float64)
    z = np.exp(-1j * 2.0 * np.pi * freqs_hz / sample_rate)
    resp = np.ones_like(z)
    for b0, b1, b2, _a0, a1, a2 in sos:
        resp *= (b0 + b1 * z + b2 * z * z) / (1.0 + a1 * z + a2 * z * z)
    return resp
