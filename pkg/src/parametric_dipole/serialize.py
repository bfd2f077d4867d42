"""Byte-stable text output: CSV numbers, JSON documents and SVG figures.

Numbers are written in scientific notation with 17 significant digits, which
round-trips every IEEE double exactly.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["fmt", "dumps_json", "heatmap_svg", "lineplot_svg", "COLOR_RAMP"]


def fmt(x) -> str:
    """17-significant-digit scientific representation of a number."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.16e}"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, Enum):
        return json.dumps(obj.value)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no NaN/Infinity; null keeps the document valid
        return fmt(x) if math.isfinite(x) else "null"
    if isinstance(obj, complex):
        return _encode({"imag": obj.imag, "real": obj.real}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    """JSON with sorted keys and 17-digit floats; ends with a newline."""
    return _encode(obj, indent, 0) + "\n"


# fixed diverging ramp: negative exponents blue, zero white, positive red
COLOR_RAMP = [
    (-1.0, (33, 102, 172)),
    (-0.5, (146, 197, 222)),
    (0.0, (247, 247, 247)),
    (0.5, (244, 165, 130)),
    (1.0, (178, 24, 43)),
]


def _ramp(u: float) -> str:
    u = min(1.0, max(-1.0, u))
    for (x0, c0), (x1, c1) in zip(COLOR_RAMP, COLOR_RAMP[1:]):
        if u <= x1:
            w = (u - x0) / (x1 - x0)
            rgb = [round(a + w * (b - a)) for a, b in zip(c0, c1)]
            return "#%02x%02x%02x" % tuple(rgb)
    return "#%02x%02x%02x" % COLOR_RAMP[-1][1]


def heatmap_svg(x_axis, y_axis, values, contour=(), title="", xlabel="", ylabel="",
                width=480, height=360) -> str:
    """Heat map of ``values[iy, ix]`` with an optional polyline overlay.

    Colours are scaled symmetrically by max |value| so zero is always white.
    """
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    values = np.asarray(values, dtype=float)
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    nx, ny = len(x_axis), len(y_axis)
    scale = float(np.nanmax(np.abs(values))) if values.size else 0.0
    scale = scale if scale > 0 else 1.0
    cw, ch = pw / nx, ph / ny
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>']
    for iy in range(ny):
        for ix in range(nx):
            color = _ramp(values[iy, ix] / scale)
            x = ml + ix * cw
            y = mt + (ny - 1 - iy) * ch
            out.append(f'<rect x="{x:.3f}" y="{y:.3f}" width="{cw:.3f}" height="{ch:.3f}" fill="{color}"/>')

    def px(xv, yv):
        xs = (xv - x_axis[0]) / (x_axis[-1] - x_axis[0]) if nx > 1 else 0.5
        ys = (yv - y_axis[0]) / (y_axis[-1] - y_axis[0]) if ny > 1 and y_axis[-1] != y_axis[0] else 0.5
        return ml + cw / 2 + xs * (pw - cw), mt + ph - ch / 2 - ys * (ph - ch)

    pts = [px(xv, yv) for xv, yv in contour if math.isfinite(yv)]
    if len(pts) > 1:
        path = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="#000000" stroke-width="1.5"/>')
    out += _axes(ml, mt, pw, ph, x_axis[0], x_axis[-1], y_axis[0], y_axis[-1], title, xlabel, ylabel)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _axes(ml, mt, pw, ph, x0, x1, y0, y1, title, xlabel, ylabel):
    return [
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{mt - 10}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{ml + pw / 2:.1f}" y="{mt + ph + 35}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{escape(ylabel)}</text>',
        f'<text x="{ml}" y="{mt + ph + 15}" text-anchor="start" font-size="10">{x0:.4g}</text>',
        f'<text x="{ml + pw}" y="{mt + ph + 15}" text-anchor="end" font-size="10">{x1:.4g}</text>',
        f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end" font-size="10">{y1:.4g}</text>',
    ]


def lineplot_svg(x, y, title="", xlabel="", ylabel="", width=480, height=300, max_points=2000) -> str:
    """Single-series line plot, decimated to at most ``max_points`` vertices."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    stride = max(1, int(math.ceil(len(x) / max_points)))
    x, y = x[::stride], y[::stride]
    ml, mr, mt, mb = 70, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    pts = " ".join(f"{ml + (a - x0) / (x1 - x0) * pw:.3f},{mt + ph - (b - y0) / (y1 - y0) * ph:.3f}"
                   for a, b in zip(x, y))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
           f'<polyline points="{pts}" fill="none" stroke="#21669c" stroke-width="1"/>']
    out += _axes(ml, mt, pw, ph, x0, x1, y0, y1, title, xlabel, ylabel)
    out.append("</svg>")
    return "\n".join(out) + "\n"
