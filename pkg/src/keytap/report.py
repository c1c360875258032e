"""Deterministic report emission: JSON, CSV curves, and SVG plots.

Every report embeds the tool version, the full configuration it was run
with, and the seed, so a run can be reproduced from its output alone.
Writes are atomic (temp file + rename) and byte-identical for identical
inputs: keys are sorted, floats use repr, and the SVG writer is
hand-rolled with no timestamps or library version strings.
"""

import json
import os
import tempfile
from pathlib import Path

from . import __version__
from .errors import ContractError


def provenance(config, seed):
    return {"tool": "keytap", "version": __version__,
            "config": config, "seed": seed}


def _atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-",
                               suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json_report(path, payload, config, seed):
    """Serialize payload with provenance; sorted keys, stable floats."""
    doc = {"provenance": provenance(config, seed), "results": payload}
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
    return _atomic_write_text(path, text + "\n")


def read_json_report(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv_curve(path, header, rows):
    """A curve table: header tuple plus rows of equal arity."""
    if not header:
        raise ContractError("CSV header must not be empty")
    out = []
    for row in rows:
        if len(row) != len(header):
            raise ContractError(
                f"row arity {len(row)} != header arity {len(header)}")
        out.append([repr(float(v)) if isinstance(v, float) else str(v)
                    for v in row])
    lines = [",".join(header)] + [",".join(r) for r in out]
    return _atomic_write_text(path, "\n".join(lines) + "\n")


def _svg_escape(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def write_svg_curves(path, curves, title="", x_label="", y_label="",
                     width=640, height=400, y_range=None):
    """Plot one or more named polylines.

    `curves` is a list of (name, points) with points as (x, y) pairs.
    Output is deterministic: fixed palette, fixed float formatting, no
    metadata that varies across runs.
    """
    if not curves:
        raise ContractError("need at least one curve")
    margin = 60
    xs = [p[0] for _name, pts in curves for p in pts]
    ys = [p[1] for _name, pts in curves for p in pts]
    if not xs:
        raise ContractError("curves contain no points")
    x_lo, x_hi = min(xs), max(xs)
    if y_range is not None:
        y_lo, y_hi = y_range
    else:
        y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf", "#7f7f7f")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_svg_escape(title)}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">'
        f'{_svg_escape(x_label)}</text>',
        f'<text x="18" y="{height / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {height / 2:.1f})">'
        f'{_svg_escape(y_label)}</text>',
    ]
    for tick in range(5):
        frac = tick / 4
        x_val = x_lo + frac * x_span
        y_val = y_lo + frac * y_span
        x_pos = px(x_val)
        y_pos = py(y_val)
        parts.append(
            f'<text x="{x_pos:.1f}" y="{height - margin + 16}" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'font-size="10">{x_val:.3g}</text>')
        parts.append(
            f'<text x="{margin - 6}" y="{y_pos:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{y_val:.3g}</text>')
    for i, (name, points) in enumerate(curves):
        color = palette[i % len(palette)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="2"/>')
        parts.append(
            f'<text x="{width - margin + 4}" y="{margin + 14 * i + 10}" '
            f'font-family="sans-serif" font-size="11" fill="{color}">'
            f'{_svg_escape(name)}</text>')
    parts.append("</svg>")
    return _atomic_write_text(path, "\n".join(parts) + "\n")
