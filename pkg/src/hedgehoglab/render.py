"""Deterministic artifact emission: JSON reports, CSV point clouds, SVG plots.

Identical inputs must produce byte-identical files (reports carry a timestamp
field that comparisons are expected to exclude).  All floats go through one
fixed formatter and all iteration orders are explicit.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .compacta import CompactSetApprox
from .errors import MissingArtifact

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#e377c2", "#bcbd22", "#7f7f7f", "#aec7e8", "#ff9896")


def fnum(v) -> str:
    """Fixed decimal rendering used everywhere in artifacts."""
    return f"{float(v):.9g}"


def json_ready(obj):
    """Recursively convert report objects into JSON-serializable form."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": float(f"{obj.real:.12g}"), "im": float(f"{obj.imag:.12g}")}
    if isinstance(obj, np.ndarray):
        if obj.size > 64:
            return {"array": "omitted", "size": int(obj.size)}
        return [json_ready(v) for v in obj.tolist()]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: json_ready(getattr(obj, k)) for k in sorted(obj.__dataclass_fields__)
                if not k.startswith("_")}
    if obj is None or isinstance(obj, (str,)):
        return obj
    return str(obj)


def write_json_report(path, payload: dict, timestamp: str = ""):
    data = dict(json_ready(payload))
    data["timestamp"] = timestamp
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")


def write_point_cloud_csv(path, points, header=("re", "im")):
    pts = np.asarray(points, dtype=complex).ravel()
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for z in pts:
            f.write(f"{fnum(z.real)},{fnum(z.imag)}\n")


def write_jet_csv(path, jet):
    """Coefficient table with metadata for a manifold jet."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# orientation={jet.orientation} degree={jet.degree} "
                f"validity_radius={fnum(jet.validity_radius)} residual={fnum(jet.residual)}\n")
        f.write("degree,re,im\n")
        for k, c in enumerate(jet.coefficients):
            f.write(f"{k},{fnum(c.real)},{fnum(c.imag)}\n")


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def _rect_runs(occ):
    """Row-wise run-length encoding of an occupancy grid."""
    runs = []
    n, m = occ.shape
    for i in range(n):
        j = 0
        row = occ[i]
        while j < m:
            if row[j]:
                j0 = j
                while j < m and row[j]:
                    j += 1
                runs.append((i, j0, j - j0))
            else:
                j += 1
    return runs


def _svg_rects(compact: CompactSetApprox, color, opacity, max_cells=256):
    """Downsample to at most max_cells per axis and emit one rect per run."""
    occ = compact.occupancy
    n = occ.shape[0]
    step = max(1, n // max_cells)
    if step > 1:
        k = n // step
        occ = occ[: k * step, : k * step].reshape(k, step, k, step).any(axis=(1, 3))
    h = 2.0 * compact.half_width / occ.shape[0]
    parts = []
    for i, j0, ln in _rect_runs(occ):
        x = -compact.half_width + i * h
        y = -compact.half_width + j0 * h
        parts.append(f'<rect x="{fnum(x)}" y="{fnum(y)}" width="{fnum(h)}" '
                     f'height="{fnum(ln * h)}" fill="{color}" fill-opacity="{opacity}"/>')
    return parts


def render_svg(path, ball_radius: float, layers, title: str = "",
               markers=((0.0, 0.0),)):
    """Petal/hedgehog figure: ball circle, one colored layer per component or
    stage, origin markers.  ``layers`` is a sequence of (compact, label)."""
    if not layers:
        raise MissingArtifact("nothing to render")
    W = max(ball_radius * 1.1, max(c.half_width for c, _ in layers) * 1.02)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="720" height="720" '
        f'viewBox="{fnum(-W)} {fnum(-W)} {fnum(2 * W)} {fnum(2 * W)}">',
        f'<desc>{title}</desc>' if title else "<desc/>",
        f'<rect x="{fnum(-W)}" y="{fnum(-W)}" width="{fnum(2 * W)}" '
        f'height="{fnum(2 * W)}" fill="#ffffff"/>',
    ]
    for idx, (compact, label) in enumerate(layers):
        color = PALETTE[idx % len(PALETTE)]
        parts.append(f'<g id="layer-{idx}" data-label="{label}">')
        parts.extend(_svg_rects(compact, color, 0.85 if len(layers) <= len(PALETTE) else 0.6))
        parts.append("</g>")
    parts.append(f'<circle cx="0" cy="0" r="{fnum(ball_radius)}" fill="none" '
                 f'stroke="#000000" stroke-width="{fnum(W / 240)}"/>')
    for mx, my in markers:
        s = W / 60
        parts.append(f'<path d="M {fnum(mx - s)} {fnum(my)} L {fnum(mx + s)} {fnum(my)} '
                     f'M {fnum(mx)} {fnum(my - s)} L {fnum(mx)} {fnum(my + s)}" '
                     f'stroke="#000000" stroke-width="{fnum(W / 300)}" fill="none"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(parts) + "\n")
