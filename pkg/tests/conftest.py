"""Shared helpers for the test suite."""

import struct

import numpy as np
import pytest

from keytap.audio import AudioBuffer
from keytap.segment import KeystrokeSegment


def make_segment(samples, sample_rate, nominal_length_s=None, onset_s=0.0):
    samples = np.asarray(samples, dtype=np.float64)
    if nominal_length_s is None:
        nominal_length_s = len(samples) / sample_rate
    return KeystrokeSegment(
        onset_s=onset_s,
        waveform=AudioBuffer(samples, sample_rate),
        nominal_length_s=nominal_length_s,
    )


def write_wav_oracle(path, samples_int16, sample_rate, channels=1):
    """Independent minimal WAV writer used to cross-check the reader.

    Writes 16-bit PCM from already-quantized integer samples, interleaved.
    Deliberately shares no code with keytap.wavio.
    """
    samples_int16 = np.asarray(samples_int16, dtype="<i2")
    payload = samples_int16.tobytes()
    block_align = 2 * channels
    fmt = struct.pack("<HHIIHH", 1, channels, sample_rate,
                      sample_rate * block_align, block_align, 16)
    riff_size = 4 + 8 + len(fmt) + 8 + len(payload)
    with open(path, "wb") as fh:
        fh.write(b"RIFF")
        fh.write(struct.pack("<I", riff_size))
        fh.write(b"WAVE")
        fh.write(b"fmt ")
        fh.write(struct.pack("<I", len(fmt)))
        fh.write(fmt)
        fh.write(b"data")
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)


def dft_magnitudes_oracle(x):
    """One-sided DFT magnitudes straight from the definition."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    k = np.arange(n // 2 + 1)[:, None]
    j = np.arange(n)[None, :]
    return np.abs((x[None, :] * np.exp(-2j * np.pi * k * j / n)).sum(axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
