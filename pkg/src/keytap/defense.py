"""Randomized multiband equalization: a defense that scrambles the spectral
fingerprint of each keystroke while leaving speech broadly intelligible.

Each keystroke is passed through a cascade of narrow peaking filters with
random centers and random gains. In batch mode every keystroke draws a
fresh seed, so no two keystrokes receive the same transform.
"""

from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .dsp import peaking_biquad
from .errors import ContractError
from .kernels import sosfilt
from .segment import KeystrokeSegment


@dataclass(frozen=True)
class EqConfig:
    n_bands: int = 100
    center_min_hz: float = 100.0
    center_max_hz: float = 3000.0
    q: float = 50.0
    gain_min_db: float = -5.0
    gain_max_db: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.n_bands < 1:
            raise ContractError("n_bands must be >= 1")
        if not 0.0 < self.center_min_hz < self.center_max_hz:
            raise ContractError("need 0 < center_min_hz < center_max_hz")
        if self.q <= 0:
            raise ContractError("q must be positive")
        if self.gain_min_db > self.gain_max_db:
            raise ContractError("gain_min_db must not exceed gain_max_db")


def draw_eq_sos(cfg, sample_rate, rng):
    """Random (center, gain) pairs realized as a peaking-filter cascade."""
    if cfg.center_max_hz >= sample_rate / 2.0:
        raise ContractError(
            f"center_max_hz {cfg.center_max_hz} must stay below the "
            f"Nyquist frequency {sample_rate / 2.0}")
    centers = rng.uniform(cfg.center_min_hz, cfg.center_max_hz, cfg.n_bands)
    gains = rng.uniform(cfg.gain_min_db, cfg.gain_max_db, cfg.n_bands)
    return np.vstack([
        peaking_biquad(c, g, cfg.q, sample_rate)
        for c, g in zip(centers, gains)
    ])


def randomize_eq(seg, cfg):
    """Apply one random equalizer draw (from cfg.seed) to a keystroke."""
    rng = np.random.default_rng(cfg.seed)
    sos = draw_eq_sos(cfg, seg.waveform.sample_rate, rng)
    out = sosfilt(sos, seg.waveform.samples)
    return KeystrokeSegment(
        onset_s=seg.onset_s,
        waveform=AudioBuffer(out, seg.waveform.sample_rate),
        nominal_length_s=seg.nominal_length_s,
    )


def randomize_eq_batch(segments, cfg):
    """Equalize many keystrokes, each with an independent child seed."""
    children = np.random.SeedSequence(cfg.seed).spawn(len(segments))
    out = []
    for seg, child in zip(segments, children):
        rng = np.random.default_rng(child)
        sos = draw_eq_sos(cfg, seg.waveform.sample_rate, rng)
        filtered = sosfilt(sos, seg.waveform.samples)
        out.append(KeystrokeSegment(
            onset_s=seg.onset_s,
            waveform=AudioBuffer(filtered, seg.waveform.sample_rate),
            nominal_length_s=seg.nominal_length_s,
        ))
    return out


def apply_eq_to_buffer(buf, cfg):
    """Equalize a whole recording with a single draw (per-recording mode)."""
    rng = np.random.default_rng(cfg.seed)
    sos = draw_eq_sos(cfg, buf.sample_rate, rng)
    return AudioBuffer(sosfilt(sos, buf.samples), buf.sample_rate)
