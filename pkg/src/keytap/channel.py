"""VoIP transmission channel simulation and speech overlay.

The channel proxy models a bandwidth-constrained call as a lowpass filter
whose cutoff falls with the simulated bitrate, followed by random packet
drops. It is a declared simulation of codec behavior, not a codec: the
bitrate-to-cutoff and bitrate-to-loss tables below are configuration, and
every report carries them.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, rms
from .dsp import butterworth_lowpass_sos, sosfilt
from .errors import ContractError, DegenerateInputError, VoiceWrapWarning

# target_kbps -> (cutoff_hz, packet_loss_rate)
BITRATE_TABLE = {
    70: (20000.0, 0.00),
    60: (16000.0, 0.00),
    50: (12000.0, 0.00),
    40: (8000.0, 0.01),
    30: (6000.0, 0.05),
    20: (4000.0, 0.15),
}


@dataclass(frozen=True)
class ChannelConfig:
    target_kbps: int = 70
    packet_ms: float = 20.0
    loss_rate: float | None = None   # None: looked up from BITRATE_TABLE
    cutoff_hz: float | None = None   # None: looked up from BITRATE_TABLE
    seed: int = 0

    def __post_init__(self):
        if self.target_kbps not in BITRATE_TABLE:
            raise ContractError(
                f"target_kbps must be one of {sorted(BITRATE_TABLE)}")
        if self.packet_ms <= 0:
            raise ContractError("packet_ms must be positive")
        if self.loss_rate is not None and not 0.0 <= self.loss_rate <= 1.0:
            raise ContractError("loss_rate must lie in [0, 1]")
        if self.cutoff_hz is not None and self.cutoff_hz <= 0:
            raise ContractError("cutoff_hz must be positive")

    @property
    def effective_cutoff_hz(self):
        if self.cutoff_hz is not None:
            return self.cutoff_hz
        return BITRATE_TABLE[self.target_kbps][0]

    @property
    def effective_loss_rate(self):
        if self.loss_rate is not None:
            return self.loss_rate
        return BITRATE_TABLE[self.target_kbps][1]


def simulate_channel(buf, cfg):
    """Push audio through the simulated call: lowpass, then packet loss.

    A cutoff at or above Nyquist skips filtering entirely, so the zero-loss
    full-bandwidth configuration is an exact identity. Output is clipped to
    the input peak (saturation), which keeps the channel level-safe against
    filter overshoot.
    """
    samples = buf.samples
    nyquist = buf.sample_rate / 2.0
    cutoff = cfg.effective_cutoff_hz
    if cutoff < nyquist and len(samples):
        peak = np.max(np.abs(samples))
        sos = butterworth_lowpass_sos(cutoff, buf.sample_rate, order=8)
        samples = np.clip(sosfilt(sos, samples), -peak, peak)

    loss = cfg.effective_loss_rate
    if loss > 0.0 and len(samples):
        samples = samples.copy()
        packet = max(int(round(cfg.packet_ms * buf.sample_rate / 1000.0)), 1)
        n_packets = int(np.ceil(len(samples) / packet))
        rng = np.random.default_rng(cfg.seed)
        dropped = rng.random(n_packets) < loss
        for i in np.flatnonzero(dropped):
            samples[i * packet:(i + 1) * packet] = 0.0
    return AudioBuffer(samples, buf.sample_rate)


@dataclass(frozen=True)
class MixConfig:
    """Target speech level relative to the keystroke level, in dB.

    -inf is the muted sentinel: mixing returns the keystroke audio
    untouched.
    """
    relative_db: float = 0.0

    def __post_init__(self):
        if self.relative_db == float("-inf"):
            return
        if not -20.0 <= self.relative_db <= 20.0:
            raise ContractError("relative_db must lie in [-20, 20] or be -inf")


def mix_voice(keystrokes, voice, cfg, seed=0):
    """Overlay a random slice of a speech recording onto keystroke audio.

    The slice starts at a seeded random offset and is scaled so that
    RMS(voice)/RMS(keystrokes) equals the configured dB ratio exactly. A
    voice recording shorter than the keystroke buffer is tiled, with a
    warning, before the offset is drawn.
    """
    if cfg.relative_db == float("-inf"):
        return AudioBuffer(keystrokes.samples.copy(), keystrokes.sample_rate)
    if voice.sample_rate != keystrokes.sample_rate:
        raise ContractError(
            f"voice rate {voice.sample_rate} != keystroke rate "
            f"{keystrokes.sample_rate}")
    n = len(keystrokes.samples)
    v = voice.samples
    if len(v) == 0:
        raise DegenerateInputError("voice recording is empty")
    rng = np.random.default_rng(seed)
    if len(v) < n:
        warnings.warn(
            f"voice recording ({len(v)} samples) shorter than target ({n}); "
            "tiling it", VoiceWrapWarning, stacklevel=2)
        reps = int(np.ceil((n + len(v)) / len(v)))
        v = np.tile(v, reps)
    offset = int(rng.integers(0, len(v) - n + 1))
    slice_ = v[offset:offset + n]

    key_rms = rms(keystrokes.samples)
    voice_rms = rms(slice_)
    if key_rms == 0.0:
        raise DegenerateInputError("keystroke buffer is silent")
    if voice_rms == 0.0:
        raise DegenerateInputError(
            "selected voice slice is silent; strip pauses first")
    scale = (10.0 ** (cfg.relative_db / 20.0)) * key_rms / voice_rms
    return AudioBuffer(keystrokes.samples + scale * slice_,
                       keystrokes.sample_rate)
