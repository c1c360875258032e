"""Manifests, feature extraction over segment sets, and CSV export.

A dataset manifest is JSON-lines: one record per keystroke recording with
fields path, key_label, user, device_model, device_unit, typing_style and
channel. Paths are relative to the manifest's directory.
"""

import csv
import json
from pathlib import Path

import numpy as np

from . import features as feat
from .audio import load_wav
from .errors import ContractError
from .learn import LabeledDataset, SampleMeta
from .segment import KeystrokeSegment
from .synth import SegmentSet

MANIFEST_FIELDS = ("path", "key_label", "user", "device_model",
                   "device_unit", "typing_style", "channel")


def write_manifest(path, rows):
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            missing = set(MANIFEST_FIELDS) - set(row)
            if missing:
                raise ContractError(
                    f"manifest row missing fields: {sorted(missing)}")
            fh.write(json.dumps({k: row[k] for k in MANIFEST_FIELDS},
                                sort_keys=True) + "\n")
    return path


def read_manifest(path):
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ContractError(
                    f"manifest line {lineno} is not valid JSON: {exc}")
            missing = set(MANIFEST_FIELDS) - set(row)
            if missing:
                raise ContractError(
                    f"manifest line {lineno} missing fields: "
                    f"{sorted(missing)}")
            rows.append(row)
    return rows


def load_segments(manifest_path, nominal_length_s=0.100):
    """Read every recording in a manifest into a SegmentSet.

    Each WAV holds one keystroke; the whole file becomes the segment
    waveform and `nominal_length_s` sets the padding target used later by
    feature extraction.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    rows = read_manifest(manifest_path)
    if not rows:
        raise ContractError("manifest contains no records")
    segments, labels, metas = [], [], []
    for row in rows:
        buf = load_wav(base / row["path"])
        segments.append(KeystrokeSegment(
            onset_s=0.0, waveform=buf, nominal_length_s=nominal_length_s))
        labels.append(row["key_label"])
        metas.append(SampleMeta(
            user=row["user"],
            device_model=row["device_model"],
            device_unit=row["device_unit"],
            typing_style=row["typing_style"],
            channel=row["channel"],
        ))
    return SegmentSet(segments, labels, metas, np.arange(len(segments)))


def extract_dataset(segment_set, kind=feat.KIND_MFCC, cfg=None,
                    fft_size=None):
    """Turn a SegmentSet into a LabeledDataset of feature vectors."""
    if segment_set.n_samples == 0:
        raise ContractError("cannot extract features from an empty set")
    vectors = [feat.extract(seg, kind=kind, cfg=cfg, fft_size=fft_size)
               for seg in segment_set.segments]
    return LabeledDataset.from_feature_vectors(
        vectors, segment_set.labels, segment_set.meta, ids=segment_set.ids)


def export_features_csv(path, dataset):
    """Write a LabeledDataset to CSV: metadata columns then f0..fN."""
    path = Path(path)
    header = ["key_label", "user", "device_model", "device_unit",
              "typing_style", "channel"]
    header += [f"f{i}" for i in range(dataset.n_features)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for label, meta, row in zip(dataset.labels, dataset.meta, dataset.X):
            writer.writerow(
                [label, meta.user, meta.device_model, meta.device_unit,
                 meta.typing_style, meta.channel]
                + [repr(float(v)) for v in row])
    return path
