"""Keystroke detection: energy thresholding over short windows.

A recording is cut into non-overlapping 10 ms windows; each window's energy
is the sum of its one-sided FFT magnitudes. A press is detected when a
window's energy reaches the threshold, and the following segment_length_s of
audio is extracted as the keystroke waveform. Release peaks are deliberately
not detected; the refractory period absorbs them.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .audio import AudioBuffer, frame_matrix
from .errors import CalibrationWarning, ContractError, DegenerateInputError


@dataclass(frozen=True)
class SegmenterConfig:
    threshold: float
    energy_window_s: float = 0.010
    segment_length_s: float = 0.100
    refractory_s: float = 0.100

    def __post_init__(self):
        if self.threshold <= 0:
            raise ContractError("threshold must be positive")
        for name in ("energy_window_s", "segment_length_s", "refractory_s"):
            if getattr(self, name) <= 0:
                raise ContractError(f"{name} must be positive")


@dataclass(frozen=True)
class KeystrokeSegment:
    onset_s: float
    waveform: AudioBuffer
    nominal_length_s: float

    @property
    def duration_s(self):
        return self.waveform.duration_seconds


def window_energy(buf, cfg):
    """Energy of each non-overlapping energy window.

    Returns (start_s, energy) arrays, one entry per complete window. Energy
    is the sum of one-sided FFT magnitudes of the raw (unwindowed) samples.
    """
    window = int(round(cfg.energy_window_s * buf.sample_rate))
    frames = frame_matrix(buf.samples, window, window)
    energies = np.abs(np.fft.rfft(frames, axis=1)).sum(axis=1)
    starts_s = np.arange(len(frames)) * window / buf.sample_rate
    return starts_s, energies


def detect_keystrokes(buf, cfg):
    """Detect press onsets and extract their waveforms.

    An onset is the start of the first window whose energy reaches
    cfg.threshold after the refractory period has elapsed. Each segment
    spans segment_length_s from its onset, truncated at the next onset or
    at the end of the recording.
    """
    sr = buf.sample_rate
    window = int(round(cfg.energy_window_s * sr))
    _starts, energies = window_energy(buf, cfg)
    refractory = int(round(cfg.refractory_s * sr))
    seg_len = int(round(cfg.segment_length_s * sr))

    onsets = []
    last = None
    for j in np.flatnonzero(energies >= cfg.threshold):
        idx = int(j) * window
        if last is None or idx - last >= refractory:
            onsets.append(idx)
            last = idx

    segments = []
    for i, idx in enumerate(onsets):
        end = idx + seg_len
        if i + 1 < len(onsets):
            end = min(end, onsets[i + 1])
        end = min(end, len(buf.samples))
        segments.append(KeystrokeSegment(
            onset_s=idx / sr,
            waveform=AudioBuffer(buf.samples[idx:end].copy(), sr),
            nominal_length_s=cfg.segment_length_s,
        ))
    return segments


def calibrate_threshold(buf, expected_count, cfg):
    """Find a threshold that detects exactly expected_count keystrokes.

    Candidate thresholds are the distinct window-energy values; the
    detection count is non-increasing in the threshold, so a bisection over
    the sorted candidates finds an exact match when one exists. When none
    does, the closest-achieving threshold is returned and a
    CalibrationWarning is emitted.
    """
    if expected_count < 1:
        raise ContractError("expected_count must be >= 1")
    if len(buf.samples) == 0:
        raise DegenerateInputError("cannot calibrate on an empty buffer")
    _starts, energies = window_energy(buf, cfg)
    candidates = np.unique(energies[energies > 0])
    if len(candidates) == 0:
        candidates = np.array([1.0])
    # one sentinel above every energy so "zero detections" is reachable
    candidates = np.append(candidates, candidates[-1] * 2 + 1)

    def count_at(threshold):
        return len(detect_keystrokes(buf, replace(cfg, threshold=threshold)))

    lo, hi = 0, len(candidates) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        t = float(candidates[mid])
        n = count_at(t)
        if best is None or abs(n - expected_count) < abs(best[1] - expected_count):
            best = (t, n)
        if n == expected_count:
            break
        if n > expected_count:
            lo = mid + 1  # too many detections: raise the threshold
        else:
            hi = mid - 1
    threshold, achieved = best
    if achieved != expected_count:
        warnings.warn(
            f"no threshold yields exactly {expected_count} detections; "
            f"closest achievable is {achieved}",
            CalibrationWarning,
            stacklevel=2,
        )
    return replace(cfg, threshold=threshold)
