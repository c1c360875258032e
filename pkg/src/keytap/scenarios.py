"""Attack-scenario orchestration and comparison reports.

Three attacker knowledge levels share one evaluation engine:

* complete profiling: train and test on the same user and device via
  stratified cross-validation with per-fold feature selection;
* user profiling: train on one unit, test on a different unit of the same
  model used by the same person;
* model profiling: identify the victim's device model first, then train on
  other people's recordings from that model — one donor, or everyone
  pooled ("crowd").

The same engine also drives the robustness sweeps: segment length, voice
overlay level, transmission bitrate, and the randomized-EQ countermeasure.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import features as feat
from . import learn
from .audio import AudioBuffer
from .channel import ChannelConfig, MixConfig, mix_voice, simulate_channel
from .datasets import extract_dataset
from .defense import randomize_eq_batch
from .errors import ContractError
from .segment import KeystrokeSegment

KIND_COMPLETE = "CompleteProfiling"
KIND_USER = "UserProfiling"
KIND_MODEL = "ModelProfiling"
KIND_MODEL_CROWD = "ModelProfilingCrowd"

DEFAULT_TOP_N = (1, 2, 3, 4, 5, 10, 26)

# Letters by descending frequency in English text (Oxford corpus ranking).
ENGLISH_FREQUENCY_ORDER = "eariotnslcudpmhgbfywkvxzjq"

# Retained sample counts by frequency rank: 10 for the most common letter
# stepping down to 1 for the rarest, monotone, totaling exactly 105.
DEFAULT_RETENTION_SCHEDULE = (10, 9, 8, 8, 7, 7, 6, 6, 5, 5, 4, 4, 4,
                              3, 3, 3, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    train_filters: dict = field(default_factory=dict)
    test_filters: dict = field(default_factory=dict)
    folds: int = 10
    top_n: tuple = DEFAULT_TOP_N
    seed: int = 0
    rfe_fraction: float = 0.5
    l2: float = 1e-2
    feature_kind: str = feat.KIND_MFCC

    def __post_init__(self):
        kinds = (KIND_COMPLETE, KIND_USER, KIND_MODEL, KIND_MODEL_CROWD)
        if self.kind not in kinds:
            raise ContractError(f"scenario kind must be one of {kinds}")
        if not self.top_n or any(n < 1 for n in self.top_n):
            raise ContractError("top_n values must be >= 1")
        if self.rfe_fraction is not None and not 0 < self.rfe_fraction <= 1:
            raise ContractError("rfe_fraction must lie in (0, 1]")


@dataclass
class ScenarioReport:
    kind: str
    top_n: tuple
    mean: dict               # n -> mean accuracy over repetitions
    std: dict                # n -> std; empty when a single repetition
    baseline: dict            # n -> n / #classes
    n_repetitions: int
    n_classes: int
    config: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_repetitions < 1:
            raise ContractError("a report needs at least one repetition")
        for n in self.top_n:
            if not 0.0 <= self.mean[n] <= 1.0:
                raise ContractError("accuracies must lie in [0, 1]")
        if self.n_repetitions >= 2 and set(self.std) != set(self.top_n):
            raise ContractError(
                "std must cover every top_n when repetitions >= 2")

    def to_dict(self):
        return {
            "kind": self.kind,
            "top_n": list(self.top_n),
            "mean": {str(n): self.mean[n] for n in self.top_n},
            "std": {str(n): self.std[n] for n in self.std},
            "baseline": {str(n): self.baseline[n] for n in self.top_n},
            "n_repetitions": self.n_repetitions,
            "n_classes": self.n_classes,
            "config": self.config,
            "extras": self.extras,
        }


def _summarize(kind, per_rep, top_n, n_classes, config, extras=None):
    """Fold per-repetition accuracy dicts into a ScenarioReport."""
    mean = {n: float(np.mean([r[n] for r in per_rep])) for n in top_n}
    std = {}
    if len(per_rep) >= 2:
        std = {n: float(np.std([r[n] for r in per_rep])) for n in top_n}
    baseline = {n: min(n / n_classes, 1.0) for n in top_n}
    return ScenarioReport(
        kind=kind, top_n=tuple(top_n), mean=mean, std=std,
        baseline=baseline, n_repetitions=len(per_rep),
        n_classes=n_classes, config=config, extras=extras or {})


def _check_disjoint(train, test):
    common = np.intersect1d(train.ids, test.ids)
    if len(common):
        raise ContractError(
            f"train/test leak: {len(common)} shared sample ids")


def _eval_top_n(model, test, top_n):
    return {n: learn.top_n_accuracy(model, test, min(n, len(model.classes)))
            for n in top_n}


def run_complete_profiling(data, folds=10, top_n=DEFAULT_TOP_N,
                           rfe_fraction=0.5, l2=1e-2, seed=0,
                           max_iter=300):
    """Cross-validated attack with full victim knowledge.

    Per fold: recursive feature elimination on the training portion down
    to rfe_fraction of the features, logistic regression on the survivors,
    top-n accuracy on the held-out portion.
    """
    splits = learn.stratified_kfold(data, folds, seed=seed)
    per_fold = []
    for train_idx, test_idx in splits:
        train = data.subset(train_idx)
        test = data.subset(test_idx)
        _check_disjoint(train, test)
        mask = None
        if rfe_fraction is not None and rfe_fraction < 1:
            target = max(1, int(round(rfe_fraction * data.n_features)))
            mask = learn.rfe_select(train, target, l2=l2,
                                    max_iter=max_iter).mask
        model = learn.train_logistic_regression(
            train, l2=l2, max_iter=max_iter, feature_mask=mask)
        per_fold.append(_eval_top_n(model, test, top_n))
    config = {"folds": folds, "rfe_fraction": rfe_fraction, "l2": l2,
              "seed": seed, "feature_kind": data.kind}
    return _summarize(KIND_COMPLETE, per_fold, top_n,
                      len(data.classes), config)


def make_frequency_subset(data, seed, schedule=DEFAULT_RETENTION_SCHEDULE):
    """Subsample letters by their frequency in English text.

    The most frequent letter keeps schedule[0] samples (all 10 under the
    default), stepping down to 1 for the rarest; removal within a letter
    is seeded-random. Raises when a letter lacks the samples its rank
    requires.
    """
    if len(schedule) != len(ENGLISH_FREQUENCY_ORDER):
        raise ContractError("schedule must cover all 26 letters")
    if any(schedule[i] < schedule[i + 1]
           for i in range(len(schedule) - 1)) or schedule[-1] < 1:
        raise ContractError("schedule must be non-increasing and >= 1")
    rng = np.random.default_rng(seed)
    labels = np.asarray(data.labels)
    keep = []
    for rank, letter in enumerate(ENGLISH_FREQUENCY_ORDER):
        idx = np.flatnonzero(labels == letter)
        want = schedule[rank]
        if len(idx) < want:
            raise ContractError(
                f"letter {letter!r} has {len(idx)} samples, schedule "
                f"needs {want}")
        keep.extend(rng.choice(idx, size=want, replace=False))
    return data.subset(sorted(int(i) for i in keep))


def run_user_profiling(train_data, test_data, top_n=DEFAULT_TOP_N,
                       l2=1e-2, seed=0, repetitions=1, max_iter=300):
    """Train on one device unit, test on another unit of the same model.

    With repetitions > 1 each repetition refits on a seeded 90% subsample
    of the training set so the report carries a spread, mirroring repeated
    profiling sessions.
    """
    if repetitions < 1:
        raise ContractError("repetitions must be >= 1")
    _check_disjoint(train_data, test_data)
    per_rep = []
    rng = np.random.default_rng(seed)
    for rep in range(repetitions):
        if repetitions == 1:
            train = train_data
        else:
            n_keep = max(len(train_data.classes),
                         int(round(0.9 * train_data.n_samples)))
            idx = rng.choice(train_data.n_samples, size=n_keep,
                             replace=False)
            train = train_data.subset(np.sort(idx))
        model = learn.train_logistic_regression(train, l2=l2,
                                                max_iter=max_iter)
        per_rep.append(_eval_top_n(model, test_data, top_n))
    config = {"l2": l2, "seed": seed, "repetitions": repetitions,
              "feature_kind": train_data.kind}
    return _summarize(KIND_USER, per_rep, top_n,
                      len(train_data.classes), config)


def classify_device(db, samples, k=10, threshold=0.33):
    """Identify which device model in the database produced the samples.

    The database is relabeled by device model and a k-NN majority vote
    over all query samples decides. `known` is True when the vote
    confidence reaches the threshold; a single-model database always
    returns confidence 0, flagging the degenerate vote.
    """
    model_labels = [m.device_model for m in db.meta]
    device_db = db.relabel(model_labels)
    knn = learn.train_knn(device_db, k=min(k, db.n_samples))
    label, confidence = learn.predict_mode(knn, samples)
    return label, confidence, bool(confidence >= threshold)


def run_model_profiling(db, victim_data, crowd=False, top_n=DEFAULT_TOP_N,
                        l2=1e-2, seed=0, device_k=10,
                        device_threshold=0.33, max_iter=300):
    """Attack without any victim-device recordings.

    First classifies the victim's device model against the attacker
    database, then trains the key classifier on that model's recordings
    from other people: a single seeded donor user, or all of them pooled
    when crowd=True.
    """
    victim_users = set(m.user for m in victim_data.meta)
    db_users = set(m.user for m in db.meta)
    if victim_users & db_users:
        raise ContractError(
            "attacker database must not contain the victim's recordings")
    _check_disjoint(db, victim_data)

    model_label, confidence, known = classify_device(
        db, victim_data.X, k=device_k, threshold=device_threshold)
    # train on the identified model but never on the victim's exact unit
    victim_units = set(m.device_unit for m in victim_data.meta)
    pool = db.filter(device_model=model_label)
    other_units = [i for i, m in enumerate(pool.meta)
                   if m.device_unit not in victim_units]
    if other_units:
        pool = pool.subset(other_units)
    donors = sorted(set(m.user for m in pool.meta))
    if crowd:
        train = pool
        chosen = donors
    else:
        rng = np.random.default_rng(seed)
        donor = donors[int(rng.integers(len(donors)))]
        train = pool.filter(user=donor)
        chosen = [donor]
    model = learn.train_logistic_regression(train, l2=l2, max_iter=max_iter)
    per_rep = [_eval_top_n(model, victim_data, top_n)]
    config = {"crowd": crowd, "l2": l2, "seed": seed,
              "device_k": device_k, "device_threshold": device_threshold,
              "feature_kind": db.kind}
    extras = {"device": {"identified_model": model_label,
                         "confidence": float(confidence),
                         "known": known,
                         "donor_users": chosen}}
    kind = KIND_MODEL_CROWD if crowd else KIND_MODEL
    return _summarize(kind, per_rep, top_n, len(train.classes),
                      config, extras)


# ------------------------------------------------------------- sweeps

def _truncate_segment(seg, length_s):
    n = int(round(length_s * seg.waveform.sample_rate))
    if n < 1:
        raise ContractError("segment length must cover >= 1 sample")
    return KeystrokeSegment(
        onset_s=seg.onset_s,
        waveform=AudioBuffer(seg.waveform.samples[:n].copy(),
                             seg.waveform.sample_rate),
        nominal_length_s=length_s,
    )


def mfcc_config_for_length(length_s, base_cfg=None):
    """Shrink the analysis window when the segment is shorter than it.

    Very short segments (the 3 ms point) use a single frame spanning the
    whole segment; otherwise the base configuration applies unchanged.
    """
    cfg = base_cfg or feat.MfccConfig()
    if length_s >= cfg.window_s:
        return cfg
    return replace(cfg, window_s=length_s, step_s=length_s)


DEFAULT_SWEEP_LENGTHS = (0.003, 0.010, 0.020, 0.030, 0.040, 0.050,
                         0.060, 0.070, 0.080, 0.090, 0.100)


def sweep_segment_length(segment_set, lengths=DEFAULT_SWEEP_LENGTHS,
                         folds=5, top_n=(1, 5), l2=1e-2, seed=0,
                         base_cfg=None, max_iter=300):
    """Accuracy as a function of how much waveform follows each onset.

    Re-extracts features at every length and runs complete profiling
    without feature selection (the curve isolates the segment-length
    effect). Returns {length_s: ScenarioReport}.
    """
    out = {}
    for length in lengths:
        truncated = segment_set.subset(range(segment_set.n_samples))
        truncated.segments = [_truncate_segment(s, length)
                              for s in segment_set.segments]
        cfg = mfcc_config_for_length(length, base_cfg)
        data = extract_dataset(truncated, kind=feat.KIND_MFCC, cfg=cfg)
        out[length] = run_complete_profiling(
            data, folds=folds, top_n=top_n, rfe_fraction=None, l2=l2,
            seed=seed, max_iter=max_iter)
    return out


def _eval_transformed_test(segment_set, transform, folds, top_n, kind,
                           cfg, fft_size, l2, seed, max_iter):
    """Train on clean features, test on transformed waveforms, per fold.

    `transform(segments, indices) -> segments` maps the held-out
    keystrokes; indices allow per-sample seeding.
    """
    clean = extract_dataset(segment_set, kind=kind, cfg=cfg,
                            fft_size=fft_size)
    splits = learn.stratified_kfold(clean, folds, seed=seed)
    per_fold = []
    for train_idx, test_idx in splits:
        train = clean.subset(train_idx)
        model = learn.train_logistic_regression(train, l2=l2,
                                                max_iter=max_iter)
        test_set = segment_set.subset(test_idx)
        test_set.segments = list(transform(test_set.segments, test_idx))
        test = extract_dataset(test_set, kind=kind, cfg=cfg,
                               fft_size=fft_size)
        _check_disjoint(train, test)
        per_fold.append(_eval_top_n(model, test, top_n))
    return per_fold, len(clean.classes)


def run_voice_overlay_sweep(segment_set, voice, levels_db=None, folds=5,
                            top_n=(1,), kind=feat.KIND_MFCC, cfg=None,
                            l2=1e-2, seed=0, max_iter=300):
    """Accuracy vs relative level of speech mixed over the test keystrokes.

    Models are trained on clean data; each level mixes the same seeded
    voice slices into the held-out keystrokes at the given dB offset.
    Includes a "clean" entry (no voice) for reference. Returns
    {level: ScenarioReport} with the clean run under the key "clean".
    """
    if levels_db is None:
        levels_db = tuple(range(-20, 25, 5))
    out = {}

    def identity(segments, _idx):
        return segments

    per_fold, n_classes = _eval_transformed_test(
        segment_set, identity, folds, top_n, kind, cfg, None, l2, seed,
        max_iter)
    base_config = {"folds": folds, "l2": l2, "seed": seed,
                   "feature_kind": kind}
    out["clean"] = _summarize(KIND_COMPLETE, per_fold, top_n, n_classes,
                              dict(base_config, level_db="clean"))

    for level in levels_db:
        mix_cfg = MixConfig(relative_db=float(level))

        def mixer(segments, indices, _cfg=mix_cfg):
            return [
                KeystrokeSegment(
                    onset_s=seg.onset_s,
                    waveform=mix_voice(seg.waveform, voice, _cfg,
                                       seed=seed * 100003 + int(i)),
                    nominal_length_s=seg.nominal_length_s)
                for seg, i in zip(segments, indices)]

        per_fold, n_classes = _eval_transformed_test(
            segment_set, mixer, folds, top_n, kind, cfg, None, l2, seed,
            max_iter)
        out[level] = _summarize(
            KIND_COMPLETE, per_fold, top_n, n_classes,
            dict(base_config, level_db=level))
    return out


def run_channel_comparison(segment_set, kbps_list=(70, 60, 50, 40, 30, 20),
                           folds=5, top_n=(1, 5), kind=feat.KIND_MFCC,
                           cfg=None, l2=1e-2, seed=0, max_iter=300):
    """Complete profiling after pushing every keystroke through the
    transmission simulation at each bitrate. Train and test both pass
    through the channel, as they would when profiling over a live call.
    Returns {kbps: ScenarioReport}."""
    out = {}
    for kbps in kbps_list:
        ch_cfg = ChannelConfig(target_kbps=kbps, seed=seed)
        passed = segment_set.subset(range(segment_set.n_samples))
        passed.segments = [
            KeystrokeSegment(
                onset_s=seg.onset_s,
                waveform=simulate_channel(
                    seg.waveform, replace(ch_cfg, seed=seed * 9176 + i)),
                nominal_length_s=seg.nominal_length_s)
            for i, seg in enumerate(segment_set.segments)]
        data = extract_dataset(passed, kind=kind, cfg=cfg)
        report = run_complete_profiling(
            data, folds=folds, top_n=top_n, rfe_fraction=None, l2=l2,
            seed=seed, max_iter=max_iter)
        report.config["target_kbps"] = kbps
        out[kbps] = report
    return out


def run_countermeasure_eval(segment_set, eq_cfg, folds=5, top_n=(1,),
                            kinds=(feat.KIND_MFCC, feat.KIND_FFT),
                            cfg=None, fft_size=None, l2=1e-2, seed=0,
                            max_iter=300):
    """Clean-vs-equalized accuracy per feature kind.

    Trains on clean recordings and tests on the same held-out keystrokes
    after per-keystroke randomized equalization. Returns
    {kind: {"clean": ScenarioReport, "equalized": ScenarioReport}}.
    """
    out = {}
    for kind in kinds:
        def identity(segments, _idx):
            return segments

        def equalize(segments, _idx):
            return randomize_eq_batch(segments, eq_cfg)

        reports = {}
        for name, transform in (("clean", identity),
                                ("equalized", equalize)):
            per_fold, n_classes = _eval_transformed_test(
                segment_set, transform, folds, top_n, kind, cfg,
                fft_size, l2, seed, max_iter)
            reports[name] = _summarize(
                KIND_COMPLETE, per_fold, top_n, n_classes,
                {"folds": folds, "l2": l2, "seed": seed,
                 "feature_kind": kind, "condition": name})
        out[kind] = reports
    return out
