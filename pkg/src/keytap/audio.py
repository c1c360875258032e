"""Canonical audio carrier and the spectral primitives built on it.

Everything downstream (segmentation, features, channel simulation) works on
AudioBuffer: mono float64 samples plus a sample rate. All operations here are
pure functions; none mutate their inputs.
"""

from dataclasses import dataclass

import numpy as np

from . import wavio
from .errors import ContractError, DegenerateInputError


@dataclass(frozen=True)
class AudioBuffer:
    """Mono signal: samples nominally in [-1, 1] at `sample_rate` Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ContractError("sample_rate must be positive")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ContractError("AudioBuffer is mono: samples must be 1-D")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_seconds(self):
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class Frame:
    """A windowed slice of a parent buffer."""

    start_index: int
    samples: np.ndarray
    window_seconds: float
    sample_rate: int

    @property
    def start_seconds(self):
        return self.start_index / self.sample_rate


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum; bin k sits at k * bin_hz."""

    magnitudes: np.ndarray
    bin_hz: float


def load_wav(path):
    """Read a WAV file into a mono AudioBuffer.

    Multi-channel input is averaged per sample into one channel; samples are
    scaled to the nominal [-1, 1] range of the stored encoding.
    """
    data, rate, _encoding = wavio.read_wav(path)
    mono = data.mean(axis=1) if data.shape[1] > 1 else data[:, 0]
    return AudioBuffer(mono, rate)


def save_wav(path, buf, encoding="float32"):
    """Write an AudioBuffer to a mono WAV file."""
    wavio.write_wav(path, buf.samples, buf.sample_rate, encoding=encoding)


def rms(samples):
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) == 0:
        return 0.0
    return float(np.sqrt(np.mean(samples * samples)))


def normalize_rms(buf):
    """Scale the buffer so its root mean square is 1."""
    level = rms(buf.samples)
    if level == 0.0:
        raise DegenerateInputError("cannot RMS-normalize an all-zero buffer")
    return AudioBuffer(buf.samples / level, buf.sample_rate)


def remove_dc(buf):
    """Subtract the mean sample value. Not applied anywhere by default."""
    return AudioBuffer(buf.samples - buf.samples.mean(), buf.sample_rate)


def frame_signal(buf, window_s, step_s):
    """Slice the buffer into frames of `window_s` every `step_s` seconds.

    Frames start at sample offsets 0, S, 2S, ...; a final partial window is
    dropped, so the count is floor((N - W) / S) + 1 (zero when W > N).
    """
    window, step = _frame_sizes(buf.sample_rate, window_s, step_s)
    starts = frame_starts(len(buf.samples), window, step)
    return [Frame(int(s), buf.samples[s:s + window], window_s, buf.sample_rate)
            for s in starts]


def _frame_sizes(sample_rate, window_s, step_s):
    if step_s <= 0 or step_s > window_s:
        raise ContractError("need 0 < step_s <= window_s")
    window = int(round(window_s * sample_rate))
    step = int(round(step_s * sample_rate))
    if window < 1:
        raise ContractError("window shorter than one sample")
    step = max(step, 1)
    return window, step


def frame_starts(n_samples, window, step):
    if n_samples < window:
        return np.empty(0, dtype=np.intp)
    count = (n_samples - window) // step + 1
    return np.arange(count, dtype=np.intp) * step


def frame_matrix(samples, window, step):
    """All frames of `samples` stacked into a (count, window) matrix."""
    starts = frame_starts(len(samples), window, step)
    if len(starts) == 0:
        return np.empty((0, window), dtype=np.float64)
    idx = starts[:, None] + np.arange(window)[None, :]
    return np.asarray(samples, dtype=np.float64)[idx]


def next_pow2(n):
    p = 1
    while p < n:
        p *= 2
    return p


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def window_function(name, length):
    if name == "hamming":
        return np.hamming(length)
    if name == "rectangular":
        return np.ones(length)
    raise ContractError(f"unknown window function {name!r}")


def magnitude_spectrum(frame, fft_size=None, window="hamming"):
    """One-sided magnitude spectrum of a frame, zero-padded to `fft_size`.

    Default fft_size is the smallest power of two covering the frame. The
    frame is windowed (Hamming by default; pass "rectangular" to disable)
    before the transform.
    """
    n = len(frame.samples)
    if fft_size is None:
        fft_size = next_pow2(n)
    if fft_size < n:
        raise ContractError(
            f"fft_size {fft_size} smaller than frame length {n}")
    if not _is_pow2(fft_size):
        raise ContractError(f"fft_size {fft_size} is not a power of two")
    mags = batch_magnitudes(frame.samples[None, :], fft_size, window)[0]
    return Spectrum(mags, frame.sample_rate / fft_size)


def batch_magnitudes(frames, fft_size, window="hamming"):
    """Magnitude spectra for a (count, window_len) frame matrix."""
    frames = np.asarray(frames, dtype=np.float64)
    win = window_function(window, frames.shape[1])
    return np.abs(np.fft.rfft(frames * win, n=fft_size, axis=1))
