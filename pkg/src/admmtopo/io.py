"""JSON, CSV and SVG writers. Every writer takes an optional path and writes to
stdout when it is ``None``; output is deterministic for identical input."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SWEEP_HEADER = ("n", "delta", "tau_a", "tau_g", "ratio", "bound_ok")
TRAJECTORY_HEADER = ("t", "residual", "log_residual")
SPECTRUM_HEADER = ("re", "im", "branch", "walk_source", "on_circle", "is_lambda2",
                   "is_one_minus_gamma")
LAMBDA2_HEADER = ("gamma", "rho", "lambda2_abs", "tau_star")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def emit(text: str, path: str | Path | None = None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_json(obj, path: str | Path | None = None) -> None:
    emit(to_json(obj), path)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence], preamble: dict | None = None) -> str:
    """CSV with an optional ``# {json}`` first line carrying run metadata."""
    buf = io.StringIO()
    if preamble is not None:
        buf.write("# " + json.dumps(_jsonable(preamble), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict | None, list[str], list[list[str]]]:
    """Inverse of :func:`csv_text`: ``(preamble, header, rows)``."""
    lines = text.splitlines()
    pre = None
    if lines and lines[0].startswith("# "):
        pre = json.loads(lines[0][2:])
        lines = lines[1:]
    rows = list(csv.reader(lines))
    return pre, rows[0], rows[1:]


def matrix_csv(m: np.ndarray) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.asarray(m, dtype=float), fmt="%.17e", delimiter=",")
    return buf.getvalue()


def spectrum_svg(eigs: np.ndarray, center: float, radius: float, highlight: Sequence[bool],
                 marked: Sequence[bool], size: int = 480) -> str:
    """Scatter of complex eigenvalues with the predicted circle and the unit circle.

    ``highlight`` marks the second-largest pair (red), ``marked`` the value
    ``1 - gamma`` (green); everything else is drawn in blue.
    """
    lim = 1.1 * max(1.0, float(np.max(np.abs(eigs))) if len(eigs) else 1.0)
    scale = size / (2 * lim)

    def px(x, y):
        return f"{(x + lim) * scale:.3f}", f"{(lim - y) * scale:.3f}"

    ox, oy = px(0.0, 0.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="0" y1="{oy}" x2="{size}" y2="{oy}" stroke="#888" stroke-width="1"/>',
        f'<line x1="{ox}" y1="0" x2="{ox}" y2="{size}" stroke="#888" stroke-width="1"/>',
        f'<circle cx="{ox}" cy="{oy}" r="{scale:.3f}" fill="none" stroke="#bbb" '
        'stroke-dasharray="4 3"/>',
    ]
    if radius > 0:
        cx, cy = px(center, 0.0)
        parts.append(f'<circle cx="{cx}" cy="{cy}" r="{radius * scale:.3f}" fill="none" '
                     'stroke="black" stroke-width="1"/>')
    for z, hi, mk in zip(eigs, highlight, marked):
        x, y = px(float(z.real), float(z.imag))
        color = "red" if hi else ("green" if mk else "blue")
        parts.append(f'<circle cx="{x}" cy="{y}" r="4" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
