"""Synthetic keystroke corpus generator with exact ground truth.

Every key on a simulated device rings a set of damped resonant modes. The
mode frequencies are a device-model signature; which modes a key excites,
how strongly, and how fast they decay is the key's fingerprint. Units of a
model perturb the mode frequencies slightly; users shape the per-mode
amplitudes (their touch); typing style changes intensity variance and
timing only. One `separation` knob scales every key-dependent difference,
so separation 0 produces indistinguishable keys (chance accuracy) and large
values produce trivially separable ones.

Everything is drawn from a single seed through a fixed spawn tree, so a
corpus is bit-identical across runs of the same spec.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer
from .errors import ContractError
from .learn import SampleMeta
from .segment import KeystrokeSegment

LETTERS = tuple("abcdefghijklmnopqrstuvwxyz")


@dataclass(frozen=True)
class KeyFingerprint:
    key_label: str
    modes: tuple  # ((frequency_hz, relative_amplitude, decay_s), ...)
    transient_width_s: float = 0.002

    def __post_init__(self):
        for freq, amp, decay in self.modes:
            if freq <= 0 or amp <= 0 or decay <= 0:
                raise ContractError(
                    "mode frequencies, amplitudes and decays must be positive")


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 0
    sample_rate: int = 16000
    keys: tuple = LETTERS
    samples_per_key: int = 10
    n_models: int = 1
    units_per_model: int = 1
    n_users: int = 1
    styles: tuple = ("HP",)
    channel: str = "plain"

    separation: float = 1.0        # scales all key-dependent structure
    n_modes: int = 6
    mode_min_hz: float = 400.0
    mode_max_hz: float = 6000.0
    decay_min_s: float = 0.004
    decay_max_s: float = 0.020
    amp_sigma: float = 0.5         # per-key log-amplitude pattern
    decay_sigma: float = 0.4       # per-key log-decay pattern

    unit_jitter: float = 0.0       # relative mode-frequency shift per unit
    user_amp_sigma: float = 0.15   # per-user per-mode touch profile
    stroke_freq_jitter: float = 0.002
    stroke_amp_sigma: float = 0.1
    stroke_decay_sigma: float = 0.0
    intensity_sigma: dict = field(default_factory=lambda: {
        "HP": 0.20, "Touch": 0.40})

    noise_floor_db: float = -30.0  # noise RMS relative to stroke peak
    segment_length_s: float = 0.100
    lead_in_s: float = 0.25
    gap_s: float = 0.35
    gap_jitter_s: dict = field(default_factory=lambda: {
        "HP": 0.05, "Touch": 0.02})
    peak_amplitude: float = 0.3
    # rescale amplitudes so each mode's integrated energy is independent
    # of its key-specific decay: decay differences then shape only the
    # temporal envelope, not the average spectrum
    equalize_mode_energy: bool = False

    def __post_init__(self):
        if self.separation < 0:
            raise ContractError("separation must be >= 0")
        if not 0 < self.mode_min_hz < self.mode_max_hz:
            raise ContractError("need 0 < mode_min_hz < mode_max_hz")
        if self.mode_max_hz >= self.sample_rate / 2:
            raise ContractError("mode_max_hz must stay below Nyquist")
        if self.samples_per_key < 1 or self.n_modes < 1:
            raise ContractError("samples_per_key and n_modes must be >= 1")
        if self.gap_s <= self.segment_length_s:
            raise ContractError("gap_s must exceed segment_length_s")


@dataclass(frozen=True)
class SessionRecording:
    """One continuous recording with its ground truth."""
    buffer: AudioBuffer
    onsets_s: tuple
    labels: tuple
    meta: SampleMeta


@dataclass
class SegmentSet:
    """Keystroke waveforms with labels and metadata, pre-extraction."""
    segments: list
    labels: list
    meta: list
    ids: np.ndarray

    def __post_init__(self):
        if not (len(self.segments) == len(self.labels) == len(self.meta)
                == len(self.ids)):
            raise ContractError("segments, labels, meta and ids must align")

    @property
    def n_samples(self):
        return len(self.segments)

    def subset(self, indices):
        indices = np.asarray(indices)
        if indices.dtype == bool:
            indices = np.flatnonzero(indices)
        return SegmentSet(
            [self.segments[i] for i in indices],
            [self.labels[i] for i in indices],
            [self.meta[i] for i in indices],
            self.ids[indices.astype(np.intp)],
        )

    def filter(self, **meta_equals):
        keep = [i for i, m in enumerate(self.meta)
                if all(getattr(m, k) == v for k, v in meta_equals.items())]
        return self.subset(keep)


def _model_params(spec, rng):
    """Model signature plus per-key fingerprints scaled by separation."""
    freqs = np.sort(rng.uniform(spec.mode_min_hz, spec.mode_max_hz,
                                spec.n_modes))
    base_amps = np.exp(0.3 * rng.standard_normal(spec.n_modes))
    base_decays = np.exp(rng.uniform(np.log(spec.decay_min_s),
                                     np.log(spec.decay_max_s), spec.n_modes))
    key_amp = {}
    key_decay = {}

    def mode_integral(decay):
        # time integral of the decay envelope over the segment
        return decay * -np.expm1(-spec.segment_length_s / decay)

    for key in spec.keys:
        a = rng.standard_normal(spec.n_modes)
        d = rng.standard_normal(spec.n_modes)
        amps = base_amps * np.exp(spec.separation * spec.amp_sigma * a)
        decays = np.clip(
            base_decays * np.exp(spec.separation * spec.decay_sigma * d),
            0.002, 0.060)
        if spec.equalize_mode_energy:
            amps = amps * mode_integral(base_decays) / mode_integral(decays)
        key_amp[key] = amps
        key_decay[key] = decays
    return freqs, key_amp, key_decay


def _stroke_waveform(spec, freqs, amps, decays, rng, style):
    """One keystroke: damped sinusoids with per-stroke jitter plus attack."""
    n = int(round(spec.segment_length_s * spec.sample_rate))
    t = np.arange(n) / spec.sample_rate
    f = freqs * (1.0 + spec.stroke_freq_jitter * rng.standard_normal(len(freqs)))
    a = amps * np.exp(spec.stroke_amp_sigma * rng.standard_normal(len(amps)))
    d = decays * np.exp(
        spec.stroke_decay_sigma * rng.standard_normal(len(decays)))
    phases = rng.uniform(0, 2 * np.pi, len(freqs))
    x = np.zeros(n)
    for fj, aj, dj, ph in zip(f, a, d, phases):
        x += aj * np.exp(-t / dj) * np.sin(2 * np.pi * fj * t + ph)
    transient = max(int(round(0.002 * spec.sample_rate)), 1)
    attack = np.ones(n)
    attack[:transient] = np.linspace(0.0, 1.0, transient, endpoint=False)
    x *= attack
    peak = np.max(np.abs(x))
    if peak > 0:
        x *= spec.peak_amplitude / peak
    sigma = spec.intensity_sigma.get(style, 0.2)
    x *= np.exp(sigma * rng.standard_normal())
    return x


def build_corpus(spec):
    """Generate the corpus in memory.

    Returns (segment_set, sessions). Each session is one continuous
    recording per (model, unit, user, style) combination containing
    samples_per_key repetitions of the key sequence; segments are cut at
    the ground-truth onsets, so both representations agree exactly.
    """
    root = np.random.SeedSequence(spec.seed)
    model_ss, unit_ss, user_ss, stroke_ss = root.spawn(4)

    model_rngs = [np.random.default_rng(s)
                  for s in model_ss.spawn(spec.n_models)]
    models = [_model_params(spec, r) for r in model_rngs]

    unit_rngs = [np.random.default_rng(s) for s in
                 unit_ss.spawn(spec.n_models * spec.units_per_model)]
    unit_shift = {}
    for m in range(spec.n_models):
        for u in range(spec.units_per_model):
            rng = unit_rngs[m * spec.units_per_model + u]
            unit_shift[(m, u)] = 1.0 + spec.unit_jitter * rng.standard_normal(
                spec.n_modes)

    user_rngs = [np.random.default_rng(s) for s in user_ss.spawn(spec.n_users)]
    user_amp = {u: np.exp(spec.user_amp_sigma * r.standard_normal(spec.n_modes))
                for u, r in enumerate(user_rngs)}

    combos = [(m, u, person, style)
              for m in range(spec.n_models)
              for u in range(spec.units_per_model)
              for person in range(spec.n_users)
              for style in spec.styles]
    session_seeds = stroke_ss.spawn(len(combos))

    segments, labels, metas = [], [], []
    sessions = []
    noise_std = spec.peak_amplitude * 10.0 ** (spec.noise_floor_db / 20.0)
    seg_len = int(round(spec.segment_length_s * spec.sample_rate))

    for (m, u, person, style), session_seed in zip(combos, session_seeds):
        rng = np.random.default_rng(session_seed)
        freqs, key_amp, key_decay = models[m]
        freqs_unit = freqs * unit_shift[(m, u)]
        meta = SampleMeta(
            user=f"u{person}",
            device_model=f"model{m}",
            device_unit=f"model{m}-unit{u}",
            typing_style=style,
            channel=spec.channel,
        )
        sequence = [key for _rep in range(spec.samples_per_key)
                    for key in spec.keys]
        jitter = spec.gap_jitter_s.get(style, 0.03)
        onsets = []
        cursor = spec.lead_in_s
        for _ in sequence:
            onsets.append(cursor)
            cursor += spec.gap_s + rng.uniform(-jitter, jitter)
        total = int(round((onsets[-1] + spec.gap_s) * spec.sample_rate))
        samples = noise_std * rng.standard_normal(total)

        onset_indices = []
        for key, onset in zip(sequence, onsets):
            idx = int(round(onset * spec.sample_rate))
            onset_indices.append(idx)
            stroke = _stroke_waveform(
                spec, freqs_unit, key_amp[key] * user_amp[person],
                key_decay[key], rng, style)
            samples[idx:idx + seg_len] += stroke

        buffer = AudioBuffer(samples, spec.sample_rate)
        sessions.append(SessionRecording(
            buffer=buffer,
            onsets_s=tuple(i / spec.sample_rate for i in onset_indices),
            labels=tuple(sequence),
            meta=meta,
        ))
        for key, idx in zip(sequence, onset_indices):
            segments.append(KeystrokeSegment(
                onset_s=idx / spec.sample_rate,
                waveform=AudioBuffer(samples[idx:idx + seg_len].copy(),
                                     spec.sample_rate),
                nominal_length_s=spec.segment_length_s,
            ))
            labels.append(key)
            metas.append(meta)

    segment_set = SegmentSet(segments, labels, metas,
                             np.arange(len(segments)))
    return segment_set, sessions


def spec_to_dict(spec):
    doc = {}
    for name in spec.__dataclass_fields__:
        value = getattr(spec, name)
        if isinstance(value, tuple):
            value = list(value)
        doc[name] = value
    return doc


def spec_from_dict(doc):
    kwargs = dict(doc)
    for name in ("keys", "styles"):
        if name in kwargs:
            kwargs[name] = tuple(kwargs[name])
    unknown = set(kwargs) - set(CorpusSpec.__dataclass_fields__)
    if unknown:
        raise ContractError(f"unknown corpus spec fields: {sorted(unknown)}")
    return CorpusSpec(**kwargs)


def voice_like(duration_s, sample_rate, seed=0):
    """Continuous speech-like audio: a harmonic stack on a wandering pitch
    with slowly moving band emphasis and no silent gaps. RMS-normalized.

    Stands in for real speech in overlay experiments; real recordings can
    be substituted anywhere a voice buffer is accepted.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate

    def smooth_walk(lo, hi, rate_hz):
        # random walk resampled from a coarse grid, clipped to [lo, hi]
        coarse = max(int(duration_s * rate_hz) + 2, 4)
        walk = np.cumsum(rng.standard_normal(coarse))
        walk = lo + (hi - lo) * (walk - walk.min()) / max(np.ptp(walk), 1e-9)
        grid = np.linspace(0, duration_s, coarse)
        return np.interp(t, grid, walk)

    f0 = smooth_walk(85.0, 240.0, 3.0)
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    x = np.zeros(n)
    formant1 = smooth_walk(300.0, 900.0, 2.0)
    formant2 = smooth_walk(900.0, 2600.0, 2.0)
    formant3 = smooth_walk(2200.0, 3800.0, 2.0)
    n_harm = max(int(0.45 * sample_rate / 240.0), 12)
    for h in range(1, n_harm + 1):
        fh = f0 * h
        weight = (1.0 / h) * (
            np.exp(-((fh - formant1) / 250.0) ** 2)
            + 0.7 * np.exp(-((fh - formant2) / 350.0) ** 2)
            + 0.5 * np.exp(-((fh - formant3) / 500.0) ** 2)
            + 0.1)
        x += weight * np.sin(h * phase)
    # fricative/sibilance stand-in: first-differenced noise tilts energy
    # upward, keeping the masker broadband above the harmonic stack
    hiss = np.diff(rng.standard_normal(n + 1))
    hiss /= np.sqrt(np.mean(hiss * hiss))
    hiss_level = 0.15 + 0.45 * smooth_walk(0.0, 1.0, 4.0)
    x /= np.sqrt(np.mean(x * x))
    x += hiss * hiss_level
    envelope = 0.4 + 0.6 * smooth_walk(0.0, 1.0, 6.0)
    x *= envelope
    x /= np.sqrt(np.mean(x * x))
    return AudioBuffer(x, sample_rate)


def generate_corpus(spec, out_dir):
    """Write the corpus to disk: per-keystroke WAVs, session WAVs with
    ground-truth onsets, and a JSON-lines manifest. Returns the manifest
    path."""
    from pathlib import Path

    from . import wavio

    out = Path(out_dir)
    (out / "segments").mkdir(parents=True, exist_ok=True)
    (out / "sessions").mkdir(parents=True, exist_ok=True)
    segment_set, sessions = build_corpus(spec)

    manifest_rows = []
    for i, (seg, label, meta) in enumerate(zip(
            segment_set.segments, segment_set.labels, segment_set.meta)):
        rel = f"segments/{i:05d}_{label}.wav"
        wavio.write_wav(out / rel, seg.waveform.samples,
                        spec.sample_rate, encoding="float32")
        manifest_rows.append({
            "path": rel,
            "key_label": label,
            "user": meta.user,
            "device_model": meta.device_model,
            "device_unit": meta.device_unit,
            "typing_style": meta.typing_style,
            "channel": meta.channel,
        })

    truth = []
    for j, session in enumerate(sessions):
        rel = f"sessions/session_{j:03d}.wav"
        wavio.write_wav(out / rel, session.buffer.samples,
                        spec.sample_rate, encoding="float32")
        truth.append({
            "path": rel,
            "onsets_s": list(session.onsets_s),
            "labels": list(session.labels),
            "user": session.meta.user,
            "device_model": session.meta.device_model,
            "device_unit": session.meta.device_unit,
            "typing_style": session.meta.typing_style,
            "channel": session.meta.channel,
        })

    manifest_path = out / "manifest.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for row in manifest_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "sessions.json", "w", encoding="utf-8") as fh:
        json.dump({"spec": spec_to_dict(spec), "sessions": truth}, fh,
                  sort_keys=True, indent=2)
    return manifest_path


def default_spec_variants():
    """Named corpus presets used by reports and examples."""
    return {
        "high-separation": CorpusSpec(separation=2.0),
        "mid-separation": CorpusSpec(separation=0.6),
        "multi-device": CorpusSpec(
            n_models=3, units_per_model=2, n_users=3,
            unit_jitter=0.02, separation=1.2),
    }
