"""Feature extraction for keystroke waveforms: MFCC, FFT, and cepstral.

Segments are padded or truncated to their nominal length first so every
vector produced under one config has the same dimensionality regardless of
truncation at extraction time.
"""

from dataclasses import dataclass

import numpy as np

from .audio import batch_magnitudes, frame_matrix, next_pow2
from .errors import ContractError, DegenerateInputError

LOG_FLOOR = 1e-10

KIND_MFCC = "mfcc"
KIND_FFT = "fft"
KIND_CEPSTRAL = "cepstral"


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: str
    layout: tuple  # (frames, coefficients); (1, bins) for FFT kind

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ContractError("feature values must be 1-D")
        if len(values) != self.layout[0] * self.layout[1]:
            raise ContractError("layout does not match value count")
        if not np.all(np.isfinite(values)):
            raise ContractError("feature values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class MfccConfig:
    window_s: float = 0.010
    step_s: float = 0.0025
    n_mels: int = 32
    n_coeffs: int = 32
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None means Nyquist
    window: str = "hamming"
    average_frames: bool = False

    def __post_init__(self):
        if self.n_coeffs > self.n_mels:
            raise ContractError("n_coeffs must not exceed n_mels")
        if self.n_mels < 1:
            raise ContractError("need at least one mel filter")
        if self.fmin_hz < 0:
            raise ContractError("fmin_hz must be >= 0")
        if self.fmax_hz is not None and self.fmax_hz <= self.fmin_hz:
            raise ContractError("fmax_hz must exceed fmin_hz")
        if not 0 < self.step_s <= self.window_s:
            raise ContractError("need 0 < step_s <= window_s")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels, fft_size, sample_rate, fmin_hz, fmax_hz):
    """Triangular mel filterbank as an (n_mels, n_bins) weight matrix.

    Filter centers are uniformly spaced on the mel scale between fmin and
    fmax; each triangle rises and falls linearly in Hz and peaks at 1, so
    adjacent filters cross at weight 0.5.
    """
    nyquist = sample_rate / 2.0
    if fmax_hz > nyquist + 1e-9:
        raise ContractError(f"fmax_hz {fmax_hz} exceeds Nyquist {nyquist}")
    points_hz = mel_to_hz(np.linspace(
        hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2))
    n_bins = fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * (sample_rate / fft_size)
    weights = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        left, center, right = points_hz[i], points_hz[i + 1], points_hz[i + 2]
        rising = (bin_hz - left) / (center - left)
        falling = (right - bin_hz) / (right - center)
        weights[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return weights


def dct_ii_matrix(n):
    """Orthonormal type-II DCT matrix: row k dotted with x gives X_k."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    mat = np.cos(np.pi * k * (2 * j + 1) / (2 * n)) * np.sqrt(2.0 / n)
    mat[0] /= np.sqrt(2.0)
    return mat


def _fit_to_nominal(seg):
    """Pad with zeros or truncate to the segment's nominal length."""
    n = int(round(seg.nominal_length_s * seg.waveform.sample_rate))
    samples = seg.waveform.samples
    if len(samples) >= n:
        return samples[:n]
    out = np.zeros(n)
    out[:len(samples)] = samples
    return out


def _frames_of(seg, cfg):
    samples = _fit_to_nominal(seg)
    sr = seg.waveform.sample_rate
    window = int(round(cfg.window_s * sr))
    step = max(int(round(cfg.step_s * sr)), 1)
    if len(samples) < window:
        raise DegenerateInputError(
            f"segment of {len(samples)} samples is shorter than one "
            f"{window}-sample analysis window")
    return frame_matrix(samples, window, step), window


def mfcc(seg, cfg):
    """Mel-frequency cepstral coefficients, frames concatenated in time order.

    Per frame: power spectrum, mel filter energies, log with an additive
    floor, orthonormal type-II DCT, first n_coeffs coefficients.
    """
    frames, window = _frames_of(seg, cfg)
    sr = seg.waveform.sample_rate
    fft_size = next_pow2(window)
    fmax = cfg.fmax_hz if cfg.fmax_hz is not None else sr / 2.0
    power = batch_magnitudes(frames, fft_size, cfg.window) ** 2
    fbank = mel_filterbank(cfg.n_mels, fft_size, sr, cfg.fmin_hz, fmax)
    log_energies = np.log(power @ fbank.T + LOG_FLOOR)
    coeffs = log_energies @ dct_ii_matrix(cfg.n_mels).T[:, :cfg.n_coeffs]
    if cfg.average_frames:
        coeffs = coeffs.mean(axis=0, keepdims=True)
    return FeatureVector(coeffs.ravel(), KIND_MFCC, coeffs.shape)


def fft_features(seg, cfg=None, fft_size=None):
    """Mean per-frame magnitude spectrum over the segment, one value per bin."""
    cfg = cfg if cfg is not None else MfccConfig()
    frames, window = _frames_of(seg, cfg)
    if fft_size is None:
        fft_size = next_pow2(window)
    if fft_size < window:
        raise ContractError(
            f"fft_size {fft_size} smaller than analysis window {window}")
    mags = batch_magnitudes(frames, fft_size, cfg.window)
    mean = mags.mean(axis=0)
    return FeatureVector(mean, KIND_FFT, (1, len(mean)))


def cepstral_features(seg, cfg):
    """Real cepstrum per frame (inverse FFT of the floored log magnitude
    spectrum), first n_coeffs bins retained, frames concatenated."""
    frames, window = _frames_of(seg, cfg)
    fft_size = next_pow2(window)
    if cfg.n_coeffs > fft_size:
        raise ContractError("n_coeffs exceeds cepstrum length")
    mags = batch_magnitudes(frames, fft_size, cfg.window)
    cepstra = np.fft.irfft(np.log(mags + LOG_FLOOR), n=fft_size, axis=1)
    coeffs = cepstra[:, :cfg.n_coeffs]
    if cfg.average_frames:
        coeffs = coeffs.mean(axis=0, keepdims=True)
    return FeatureVector(coeffs.ravel(), KIND_CEPSTRAL, coeffs.shape)


def extract(seg, kind, cfg=None, fft_size=None):
    """Dispatch by feature kind string."""
    cfg = cfg if cfg is not None else MfccConfig()
    if kind == KIND_MFCC:
        return mfcc(seg, cfg)
    if kind == KIND_FFT:
        return fft_features(seg, cfg, fft_size)
    if kind == KIND_CEPSTRAL:
        return cepstral_features(seg, cfg)
    raise ContractError(f"unknown feature kind {kind!r}")
