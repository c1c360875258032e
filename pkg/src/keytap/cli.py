"""Command-line interface: every pipeline stage as a subcommand.

Exit codes: 0 success, 1 contract violation (one-line diagnostic on
stderr), 2 I/O failure. The environment variable KEYTAP_SEED overrides
any --seed flag, so a whole scripted run can be re-seeded externally.
All file outputs are written atomically.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, apps, datasets, features as feat, learn, report
from . import scenarios, synth, wavio
from .audio import load_wav
from .channel import BITRATE_TABLE, ChannelConfig, MixConfig, mix_voice, \
    simulate_channel
from .defense import EqConfig, apply_eq_to_buffer
from .errors import ContractError, KeytapError, WavError
from .segment import SegmenterConfig, calibrate_threshold, detect_keystrokes

SUBCOMMANDS = ("synth", "segment", "features", "train", "eval", "scenario",
               "device-id", "channel", "mixvoice", "defend",
               "eval-countermeasure", "words", "crack-estimate",
               "sweep-length")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# --------------------------------------------------------------- helpers

def _resolve_seed(args):
    env = os.environ.get("KEYTAP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ContractError(f"KEYTAP_SEED must be an integer, got {env!r}")
    return getattr(args, "seed", 0)


def _parse_filters(pairs):
    allowed = ("key_label", "user", "device_model", "device_unit",
               "typing_style", "channel")
    filters = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ContractError(f"--filter needs field=value, got {pair!r}")
        key, value = pair.split("=", 1)
        if key not in allowed:
            raise ContractError(
                f"unknown filter field {key!r}; expected one of {allowed}")
        filters[key] = value
    return filters


def _apply_filters(segment_set, filters):
    out = segment_set
    if "key_label" in filters:
        wanted = filters["key_label"]
        out = out.subset([i for i, lab in enumerate(out.labels)
                          if lab == wanted])
    meta_filters = {k: v for k, v in filters.items() if k != "key_label"}
    if meta_filters:
        out = out.filter(**meta_filters)
    if out.n_samples == 0:
        raise ContractError(f"no samples left after filters {filters}")
    return out


def _parse_top_n(text):
    """Accepts '1,5,10' and '1..26' and combinations thereof."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    if not values or any(v < 1 for v in values):
        raise ContractError(f"bad top-n list {text!r}")
    return tuple(dict.fromkeys(values))


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractError(f"{path} is not valid JSON: {exc}")


def _feature_cfg_from_doc(doc):
    if not doc:
        return None, None
    doc = dict(doc)
    fft_size = doc.pop("fft_size", None)
    cfg = feat.MfccConfig(**doc) if doc else None
    return cfg, fft_size


def _load_segment_source(path, nominal_length_s=0.100):
    """A manifest path, a corpus directory, or a segmenter output dir."""
    path = Path(path)
    if path.is_file():
        return datasets.load_segments(path, nominal_length_s)
    if (path / "manifest.jsonl").exists():
        return datasets.load_segments(path / "manifest.jsonl",
                                      nominal_length_s)
    if (path / "segments.json").exists():
        doc = _load_json(path / "segments.json")
        entries = doc.get("results", doc).get("segments", [])
        from .segment import KeystrokeSegment
        segments, labels, metas = [], [], []
        for entry in entries:
            buf = load_wav(path / entry["path"])
            segments.append(KeystrokeSegment(
                onset_s=entry["onset_s"], waveform=buf,
                nominal_length_s=nominal_length_s))
            labels.append(entry.get("key_label", "?"))
            metas.append(learn.SampleMeta())
        return synth.SegmentSet(segments, labels, metas,
                                np.arange(len(segments)))
    raise FileNotFoundError(
        f"{path}: no manifest.jsonl or segments.json found")


def _extract(segment_set, kind, cfg, fft_size):
    return datasets.extract_dataset(segment_set, kind=kind, cfg=cfg,
                                    fft_size=fft_size)


# ----------------------------------------------------------- subcommands

def _cmd_synth(args):
    seed = _resolve_seed(args)
    if args.preset:
        spec = synth.default_spec_variants()[args.preset]
        doc = synth.spec_to_dict(spec)
    elif args.spec:
        doc = _load_json(args.spec)
    else:
        raise ContractError("synth needs --spec or --preset")
    doc["seed"] = seed
    spec = synth.spec_from_dict(doc)
    manifest = synth.generate_corpus(spec, args.out)
    print(f"wrote corpus: {manifest}")
    return 0


def _cmd_segment(args):
    buf = load_wav(args.input)
    cfg = SegmenterConfig(
        threshold=args.threshold if args.threshold is not None else 1.0,
        energy_window_s=args.window_ms / 1000.0,
        segment_length_s=args.length_ms / 1000.0,
        refractory_s=args.refractory_ms / 1000.0,
    )
    if args.threshold is None:
        if args.expected is None:
            raise ContractError("segment needs --threshold or --expected")
        cfg = calibrate_threshold(buf, args.expected, cfg)
    segments = detect_keystrokes(buf, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, seg in enumerate(segments):
        rel = f"segment_{i:04d}.wav"
        wavio.write_wav(out_dir / rel, seg.waveform.samples,
                        seg.waveform.sample_rate, encoding="float32")
        entries.append({"index": i, "path": rel,
                        "onset_s": seg.onset_s,
                        "duration_s": seg.duration_s})
    payload = {"segments": entries, "threshold": cfg.threshold,
               "count": len(entries)}
    config = {"input": str(args.input), "threshold": cfg.threshold,
              "window_ms": args.window_ms, "length_ms": args.length_ms,
              "refractory_ms": args.refractory_ms}
    report.write_json_report(out_dir / "segments.json", payload, config,
                             seed=_resolve_seed(args))
    print(f"{len(entries)} segments -> {out_dir}")
    return 0


def _cmd_features(args):
    segment_set = _load_segment_source(args.segments)
    if args.filter:
        segment_set = _apply_filters(segment_set,
                                     _parse_filters(args.filter))
    cfg, fft_size = _feature_cfg_from_doc(
        _load_json(args.config) if args.config else None)
    data = _extract(segment_set, args.kind, cfg, fft_size)
    datasets.export_features_csv(args.out, data)
    print(f"{data.n_samples} x {data.n_features} {args.kind} features "
          f"-> {args.out}")
    return 0


def _cmd_train(args):
    seed = _resolve_seed(args)
    segment_set = _load_segment_source(args.manifest)
    if args.filter:
        segment_set = _apply_filters(segment_set,
                                     _parse_filters(args.filter))
    cfg, fft_size = _feature_cfg_from_doc(
        _load_json(args.feature_config) if args.feature_config else None)
    data = _extract(segment_set, args.features, cfg, fft_size)
    params = {}
    if args.kind in ("lr", "svm"):
        params = {"l2": args.l2, "max_iter": args.max_iter}
    elif args.kind == "lda":
        params = {"shrinkage": args.shrinkage}
    elif args.kind == "rf":
        params = {"n_trees": args.trees, "seed": seed}
    elif args.kind == "knn":
        params = {"k": args.k}
    model = learn.train_model(args.kind, data, **params)
    learn.save_model(args.out, model)
    print(f"trained {args.kind} on {data.n_samples} samples -> {args.out}")
    return 0


def _cmd_eval(args):
    model = learn.load_model(args.model)
    segment_set = _load_segment_source(args.manifest)
    if args.filter:
        segment_set = _apply_filters(segment_set,
                                     _parse_filters(args.filter))
    cfg, fft_size = _feature_cfg_from_doc(
        _load_json(args.feature_config) if args.feature_config else None)
    data = _extract(segment_set, args.features, cfg, fft_size)
    top_n = _parse_top_n(args.top_n)
    results = {}
    for n in top_n:
        n_eff = min(n, len(model.classes))
        results[str(n)] = learn.top_n_accuracy(model, data, n_eff)
        print(f"top-{n}: {results[str(n)]:.4f}")
    if args.out:
        config = {"model": str(args.model), "manifest": str(args.manifest),
                  "top_n": list(top_n)}
        report.write_json_report(args.out, {"accuracy": results}, config,
                                 seed=_resolve_seed(args))
    return 0


def _cmd_scenario(args):
    seed = _resolve_seed(args)
    doc = _load_json(args.spec)
    kind = doc.get("kind")
    if kind not in (scenarios.KIND_COMPLETE, scenarios.KIND_USER,
                    scenarios.KIND_MODEL, scenarios.KIND_MODEL_CROWD):
        raise ContractError(f"unknown scenario kind {kind!r}")
    top_n = tuple(doc.get("top_n", scenarios.DEFAULT_TOP_N))
    l2 = float(doc.get("l2", 1e-2))
    folds = int(doc.get("folds", 10))
    feature_kind = doc.get("feature_kind", feat.KIND_MFCC)
    cfg, fft_size = _feature_cfg_from_doc(doc.get("feature_config"))
    doc_seed = int(doc.get("seed", 0))
    if os.environ.get("KEYTAP_SEED") is None and args.seed == 0:
        seed = doc_seed

    segment_set = _load_segment_source(args.manifest)
    train_set = _apply_filters(segment_set, doc.get("train_filters", {}))
    train_data = _extract(train_set, feature_kind, cfg, fft_size)

    if kind == scenarios.KIND_COMPLETE:
        rep = scenarios.run_complete_profiling(
            train_data, folds=folds, top_n=top_n,
            rfe_fraction=doc.get("rfe_fraction", 0.5), l2=l2, seed=seed)
    else:
        test_set = _apply_filters(segment_set, doc.get("test_filters", {}))
        test_data = _extract(test_set, feature_kind, cfg, fft_size)
        if kind == scenarios.KIND_USER:
            rep = scenarios.run_user_profiling(
                train_data, test_data, top_n=top_n, l2=l2, seed=seed,
                repetitions=int(doc.get("repetitions", 1)))
        else:
            rep = scenarios.run_model_profiling(
                train_data, test_data,
                crowd=(kind == scenarios.KIND_MODEL_CROWD),
                top_n=top_n, l2=l2, seed=seed,
                device_k=int(doc.get("device_k", 10)),
                device_threshold=float(doc.get("device_threshold", 0.33)))
    config = {"spec": doc, "manifest": str(args.manifest)}
    report.write_json_report(args.out, rep.to_dict(), config, seed)
    if args.svg:
        points = [(n, rep.mean[n]) for n in rep.top_n]
        base = [(n, rep.baseline[n]) for n in rep.top_n]
        report.write_svg_curves(
            args.svg, [(kind, points), ("baseline", base)],
            title=kind, x_label="top-n", y_label="accuracy",
            y_range=(0.0, 1.0))
    for n in rep.top_n:
        print(f"top-{n}: mean={rep.mean[n]:.4f}"
              + (f" std={rep.std[n]:.4f}" if n in rep.std else ""))
    return 0


def _cmd_device_id(args):
    db_set = _load_segment_source(args.db)
    query_set = _load_segment_source(args.query)
    if args.filter:
        query_set = _apply_filters(query_set, _parse_filters(args.filter))
    cfg, fft_size = _feature_cfg_from_doc(
        _load_json(args.feature_config) if args.feature_config else None)
    db = _extract(db_set, args.features, cfg, fft_size)
    query = _extract(query_set, args.features, cfg, fft_size)
    label, confidence, known = scenarios.classify_device(
        db, query.X, k=args.k, threshold=args.threshold)
    print(f"model={label} confidence={confidence:.4f} known={known}")
    if args.out:
        config = {"db": str(args.db), "query": str(args.query),
                  "k": args.k, "threshold": args.threshold}
        report.write_json_report(
            args.out,
            {"identified_model": label, "confidence": confidence,
             "known": known},
            config, seed=_resolve_seed(args))
    return 0


def _cmd_channel(args):
    seed = _resolve_seed(args)
    buf = load_wav(args.input)
    cfg = ChannelConfig(target_kbps=args.kbps, seed=seed,
                        cutoff_hz=args.cutoff_hz, loss_rate=args.loss_rate)
    out = simulate_channel(buf, cfg)
    wavio.write_wav(args.output, out.samples, out.sample_rate,
                    encoding="float32")
    print(f"{args.kbps} kbps (cutoff {cfg.effective_cutoff_hz} Hz, "
          f"loss {cfg.effective_loss_rate}) -> {args.output}")
    return 0


def _cmd_mixvoice(args):
    seed = _resolve_seed(args)
    keys = load_wav(args.input)
    voice = load_wav(args.voice)
    out = mix_voice(keys, voice, MixConfig(relative_db=args.rel_db),
                    seed=seed)
    wavio.write_wav(args.output, out.samples, out.sample_rate,
                    encoding="float32")
    print(f"voice at {args.rel_db:+.1f} dB -> {args.output}")
    return 0


def _cmd_defend(args):
    seed = _resolve_seed(args)
    eq = EqConfig(n_bands=args.bands, center_min_hz=args.center_min,
                  center_max_hz=args.center_max, q=args.q,
                  gain_min_db=args.gain_min, gain_max_db=args.gain_max,
                  seed=seed)
    if args.in_dir:
        if not args.out_dir:
            raise ContractError("--in-dir requires --out-dir")
        paths = sorted(Path(args.in_dir).glob("*.wav"))
        if not paths:
            raise ContractError(f"no WAV files in {args.in_dir}")
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        children = np.random.SeedSequence(seed).spawn(len(paths))
        for path, child in zip(paths, children):
            buf = load_wav(path)
            child_seed = (int(child.generate_state(1)[0])
                          if args.seed_mode == "per-keystroke" else seed)
            out = apply_eq_to_buffer(
                buf, EqConfig(n_bands=eq.n_bands,
                              center_min_hz=eq.center_min_hz,
                              center_max_hz=eq.center_max_hz, q=eq.q,
                              gain_min_db=eq.gain_min_db,
                              gain_max_db=eq.gain_max_db,
                              seed=child_seed))
            wavio.write_wav(out_dir / path.name, out.samples,
                            out.sample_rate, encoding="float32")
        print(f"equalized {len(paths)} files -> {out_dir}")
        return 0
    if not (args.input and args.output):
        raise ContractError("defend needs in.wav out.wav or --in-dir")
    buf = load_wav(args.input)
    out = apply_eq_to_buffer(buf, eq)
    wavio.write_wav(args.output, out.samples, out.sample_rate,
                    encoding="float32")
    print(f"equalized ({args.seed_mode}) -> {args.output}")
    return 0


def _cmd_eval_countermeasure(args):
    seed = _resolve_seed(args)
    segment_set = _load_segment_source(args.manifest)
    if args.filter:
        segment_set = _apply_filters(segment_set,
                                     _parse_filters(args.filter))
    cfg, fft_size = _feature_cfg_from_doc(
        _load_json(args.feature_config) if args.feature_config else None)
    eq = EqConfig(n_bands=args.bands, center_min_hz=args.center_min,
                  center_max_hz=args.center_max, q=args.q,
                  gain_min_db=args.gain_min, gain_max_db=args.gain_max,
                  seed=seed)
    kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
    top_n = _parse_top_n(args.top_n)
    out = scenarios.run_countermeasure_eval(
        segment_set, eq, folds=args.folds, top_n=top_n, kinds=kinds,
        cfg=cfg, fft_size=fft_size, seed=seed)
    payload = {kind: {name: rep.to_dict() for name, rep in pair.items()}
               for kind, pair in out.items()}
    config = {"manifest": str(args.manifest), "folds": args.folds,
              "kinds": list(kinds),
              "eq": {"n_bands": eq.n_bands,
                     "center_min_hz": eq.center_min_hz,
                     "center_max_hz": eq.center_max_hz, "q": eq.q,
                     "gain_min_db": eq.gain_min_db,
                     "gain_max_db": eq.gain_max_db,
                     "draw": "uniform centers in Hz, uniform gains in dB"}}
    report.write_json_report(args.out, payload, config, seed)
    for kind, pair in out.items():
        for name, rep in pair.items():
            line = " ".join(f"top-{n}={rep.mean[n]:.4f}" for n in rep.top_n)
            print(f"{kind} {name}: {line}")
    return 0


def _cmd_words(args):
    seed = _resolve_seed(args)
    model = learn.load_model(args.model)
    bank_set = _load_segment_source(args.bank)
    bank = {}
    for seg, label in zip(bank_set.segments, bank_set.labels):
        bank.setdefault(label, []).append(seg)
    dictionary = apps.load_dictionary(args.dict)
    cfg, fft_size = _feature_cfg_from_doc(
        _load_json(args.feature_config) if args.feature_config else None)
    trials = apps.recover_words(
        model, bank, dictionary, args.trials, seed=seed,
        feature_kind=args.features, feature_cfg=cfg)
    summary = apps.word_error_summary(trials)
    print(f"{summary['n_trials']} trials: char error "
          f"{summary['char_error_mean']:.4f} "
          f"(corrected {summary['corrected_error_mean']:.4f})")
    if args.out:
        payload = dict(summary)
        payload["trials"] = [
            {"actual": t.actual_word, "guessed": t.guessed_word,
             "corrected": t.corrected_word, "char_error": t.char_error,
             "corrected_error": t.corrected_error}
            for t in trials]
        config = {"model": str(args.model), "dict": str(args.dict),
                  "trials": args.trials}
        report.write_json_report(args.out, payload, config, seed)
    return 0


def _cmd_crack_estimate(args):
    plan = apps.CrackPlan(args.alphabet, args.length, args.guesses,
                          args.acc)
    baseline = apps.CrackPlan(args.alphabet, args.length, args.alphabet,
                              1.0)
    references = {}
    if args.reference_half_space is not None:
        references["half_space"] = args.reference_half_space
    rep = apps.speedup_report(plan, baseline, success_target=args.target,
                              references=references or None)
    print(f"phase0_count {rep['phase0_count']}")
    print(f"phase0_mass {rep['phase0_mass']:.6f}")
    print(f"interpolated_guesses {rep['assisted_guesses']:.6g}")
    print(f"baseline_guesses {rep['baseline_guesses']:.6g}")
    print(f"speedup {rep['speedup']:.6g}")
    print(f"entropy_reduction {rep['entropy_reduction']:.4f}")
    for check in rep.get("reference_checks", ()):
        status = "consistent" if check["consistent"] else "INCONSISTENT"
        print(f"reference {check['name']}: claimed {check['claimed']:.6g} "
              f"vs exact {check['exact']} -> {status}")
    if args.out:
        config = {"alphabet": args.alphabet, "length": args.length,
                  "guesses": args.guesses, "acc": args.acc,
                  "target": args.target}
        report.write_json_report(args.out, rep, config,
                                 seed=_resolve_seed(args))
    return 0


def _cmd_sweep_length(args):
    seed = _resolve_seed(args)
    segment_set = _load_segment_source(args.manifest)
    if args.filter:
        segment_set = _apply_filters(segment_set,
                                     _parse_filters(args.filter))
    lengths = tuple(float(x) / 1000.0 for x in args.lengths.split(","))
    top_n = _parse_top_n(args.top_n)
    out = scenarios.sweep_segment_length(
        segment_set, lengths=lengths, folds=args.folds, top_n=top_n,
        seed=seed)
    payload = {f"{length:.3f}": rep.to_dict()
               for length, rep in out.items()}
    config = {"manifest": str(args.manifest), "lengths_ms": args.lengths,
              "folds": args.folds}
    report.write_json_report(args.out, payload, config, seed)
    if args.svg:
        curves = []
        for n in top_n:
            pts = [(length * 1000.0, rep.mean[n])
                   for length, rep in sorted(out.items())]
            curves.append((f"top-{n}", pts))
        report.write_svg_curves(args.svg, curves,
                                title="accuracy vs segment length",
                                x_label="segment length (ms)",
                                y_label="accuracy", y_range=(0.0, 1.0))
    for length, rep in sorted(out.items()):
        line = " ".join(f"top-{n}={rep.mean[n]:.4f}" for n in rep.top_n)
        print(f"{length * 1000:.0f} ms: {line}")
    return 0


# ------------------------------------------------------------- parser

def _add_filter_and_features(sub, with_feature_kind=True):
    sub.add_argument("--filter", action="append", metavar="FIELD=VALUE",
                     help="restrict samples; repeatable")
    if with_feature_kind:
        sub.add_argument("--features", default="mfcc",
                         choices=(feat.KIND_MFCC, feat.KIND_FFT,
                                  feat.KIND_CEPSTRAL),
                         help="feature kind")
    sub.add_argument("--feature-config", default=None,
                     help="JSON file of feature parameters")


def build_parser():
    parser = _Parser(prog="keytap",
                     description="Keystroke-sound eavesdropping toolkit")
    parser.add_argument("--version", action="version",
                        version=f"keytap {__version__}")
    subs = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    p = subs.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--spec", help="CorpusSpec JSON file")
    p.add_argument("--preset", choices=sorted(synth.default_spec_variants()),
                   help="named corpus preset instead of --spec")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = subs.add_parser("segment", help="detect keystroke onsets in a WAV")
    p.add_argument("input", help="input WAV")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--expected", type=int, default=None,
                   help="calibrate the threshold to this keystroke count")
    p.add_argument("--window-ms", type=float, default=10.0)
    p.add_argument("--length-ms", type=float, default=100.0)
    p.add_argument("--refractory-ms", type=float, default=100.0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_segment)

    p = subs.add_parser("features", help="extract feature vectors to CSV")
    p.add_argument("segments", help="manifest, corpus dir, or segments dir")
    p.add_argument("--kind", default="mfcc",
                   choices=(feat.KIND_MFCC, feat.KIND_FFT,
                            feat.KIND_CEPSTRAL))
    p.add_argument("--config", default=None, help="feature parameter JSON")
    p.add_argument("--filter", action="append", metavar="FIELD=VALUE")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=_cmd_features)

    p = subs.add_parser("train", help="fit a classifier on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--kind", default="lr",
                   choices=(learn.KIND_LR, learn.KIND_SVM, learn.KIND_LDA,
                            learn.KIND_RF, learn.KIND_KNN))
    _add_filter_and_features(p)
    p.add_argument("--l2", type=float, default=1e-2)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--shrinkage", type=float, default=0.1)
    p.add_argument("--trees", type=int, default=50)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = subs.add_parser("eval", help="top-n accuracy of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--top-n", default="1,5", help="e.g. 1,5 or 1..26")
    _add_filter_and_features(p)
    p.add_argument("--out", default=None, help="optional JSON report")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_eval)

    p = subs.add_parser("scenario", help="run an attack scenario")
    p.add_argument("--spec", required=True, help="ScenarioSpec JSON")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--svg", default=None, help="optional accuracy plot")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_scenario)

    p = subs.add_parser("device-id", help="identify a device model")
    p.add_argument("--db", required=True, help="attacker database manifest")
    p.add_argument("--query", required=True, help="victim samples manifest")
    _add_filter_and_features(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.33)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_device_id)

    p = subs.add_parser("channel", help="simulate a bandwidth-limited call")
    p.add_argument("--kbps", type=int, default=70,
                   choices=sorted(BITRATE_TABLE))
    p.add_argument("--cutoff-hz", type=float, default=None,
                   help="override the table cutoff")
    p.add_argument("--loss-rate", type=float, default=None,
                   help="override the table packet-loss rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=_cmd_channel)

    p = subs.add_parser("mixvoice", help="overlay speech on keystroke audio")
    p.add_argument("--rel-db", type=float, default=0.0)
    p.add_argument("--voice", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=_cmd_mixvoice)

    p = subs.add_parser("defend", help="apply the randomized equalizer")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("output", nargs="?", default=None)
    p.add_argument("--in-dir", default=None,
                   help="equalize every WAV in a directory")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--seed-mode", default="per-keystroke",
                   choices=("per-keystroke", "per-recording"),
                   help="independent draw per file, or one shared draw")
    p.add_argument("--bands", type=int, default=100)
    p.add_argument("--center-min", type=float, default=100.0)
    p.add_argument("--center-max", type=float, default=3000.0)
    p.add_argument("--q", type=float, default=50.0)
    p.add_argument("--gain-min", type=float, default=-5.0)
    p.add_argument("--gain-max", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_defend)

    p = subs.add_parser("eval-countermeasure",
                        help="clean vs equalized accuracy")
    p.add_argument("--manifest", required=True)
    p.add_argument("--filter", action="append", metavar="FIELD=VALUE")
    p.add_argument("--feature-config", default=None)
    p.add_argument("--kinds", default="mfcc,fft")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--top-n", default="1")
    p.add_argument("--bands", type=int, default=100)
    p.add_argument("--center-min", type=float, default=100.0)
    p.add_argument("--center-max", type=float, default=3000.0)
    p.add_argument("--q", type=float, default=50.0)
    p.add_argument("--gain-min", type=float, default=-5.0)
    p.add_argument("--gain-max", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_eval_countermeasure)

    p = subs.add_parser("words", help="dictionary word recovery")
    p.add_argument("--model", required=True)
    p.add_argument("--bank", required=True,
                   help="manifest or dir of held-out per-letter samples")
    p.add_argument("--dict", required=True, help="word list file")
    p.add_argument("--trials", type=int, default=100)
    _add_filter_and_features(p)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_words)

    p = subs.add_parser("crack-estimate",
                        help="password enumeration planning")
    p.add_argument("--alphabet", type=int, default=26)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--guesses", type=int, required=True)
    p.add_argument("--acc", type=float, required=True,
                   help="per-character top-x accuracy")
    p.add_argument("--target", type=float, default=0.5)
    p.add_argument("--reference-half-space", type=float, default=None,
                   help="claimed half-space size to verify exactly")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_crack_estimate)

    p = subs.add_parser("sweep-length",
                        help="accuracy vs segment length curve")
    p.add_argument("--manifest", required=True)
    p.add_argument("--filter", action="append", metavar="FIELD=VALUE")
    p.add_argument("--lengths", default="3,10,20,30,40,50,60,70,80,90,100",
                   help="comma-separated milliseconds")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--top-n", default="1,5")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sweep_length)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:   # --help / --version
        return exc.code or 0
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except WavError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else exc
        print(f"I/O error: input not found: {name}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except KeytapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
