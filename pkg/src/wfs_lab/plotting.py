"""Deterministic SVG emission: heatmaps for 2D Laplace maps, line plots
for sweeps, slice montages for 3D tensors.

No randomness, no timestamps, fixed layout — identical input produces a
byte-identical file, so plots can be diffed in CI.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

# compact 8-stop blue-to-yellow ramp (perceptually ordered, rng-free)
_RAMP = (
    (13, 8, 135),
    (84, 2, 163),
    (139, 10, 165),
    (185, 50, 137),
    (219, 92, 104),
    (244, 136, 73),
    (254, 188, 43),
    (240, 249, 33),
)


def _color(frac: float) -> str:
    f = min(max(float(frac), 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(f), len(_RAMP) - 2)
    t = f - i
    r, g, b = (
        round(_RAMP[i][c] * (1 - t) + _RAMP[i + 1][c] * t) for c in range(3)
    )
    return f"#{r:02x}{g:02x}{b:02x}"


def _fmt(x: float) -> str:
    return f"{float(x):.6g}"


def _header(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _text(x, y, s, size=12, anchor="start") -> str:
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="monospace" '
        f'font-size="{size}" text-anchor="{anchor}">{s}</text>'
    )


def svg_heatmap(
    values,
    x_axis,
    y_axis,
    title: str = "",
    log_scale: bool = True,
    size: int = 480,
) -> str:
    """Render a 2D array (rows indexed by x_axis, columns by y_axis) as an
    SVG heatmap; magnitudes are color-coded on a log scale by default."""
    V = np.abs(np.asarray(values, dtype=float))
    if V.ndim != 2:
        raise InvalidInputError("heatmap needs a 2D array")
    x = np.asarray(x_axis, dtype=float)
    y = np.asarray(y_axis, dtype=float)
    if V.shape != (x.size, y.size):
        raise InvalidInputError("axis lengths must match the value grid")
    vmax = V.max()
    if log_scale:
        floor = vmax * 1e-8 if vmax > 0 else 1.0
        W = np.log10(np.maximum(V, floor))
        lo, hi = W.min(), W.max()
    else:
        W, lo, hi = V, 0.0, vmax if vmax > 0 else 1.0
    span = hi - lo if hi > lo else 1.0

    margin = 60
    plot = size - 2 * margin
    cw = plot / V.shape[1]
    ch = plot / V.shape[0]
    out = _header(size, size)
    if title:
        out.append(_text(size / 2, margin / 2, title, 14, "middle"))
    for i in range(V.shape[0]):
        for j in range(V.shape[1]):
            c = _color((W[i, j] - lo) / span)
            # x_axis runs along the vertical (row) direction, origin bottom
            px = margin + j * cw
            py = margin + plot - (i + 1) * ch
            out.append(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cw)}" '
                f'height="{_fmt(ch)}" fill="{c}"/>'
            )
    out.append(
        f'<rect x="{margin}" y="{margin}" width="{_fmt(plot)}" '
        f'height="{_fmt(plot)}" fill="none" stroke="black"/>'
    )
    out.append(_text(margin, size - margin / 3, _fmt(y[0])))
    out.append(_text(margin + plot, size - margin / 3, _fmt(y[-1]), anchor="end"))
    out.append(_text(margin / 3, margin + plot, _fmt(x[0])))
    out.append(_text(margin / 3, margin, _fmt(x[-1])))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_line(
    x,
    y,
    title: str = "",
    loglog: bool = False,
    annotation: str = "",
    size: int = 480,
) -> str:
    """Single-series line plot; optional log-log scaling and a fixed-place
    annotation string (e.g. the fitted slope)."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.size != yv.size or xv.size < 2:
        raise InvalidInputError("line plot needs two same-length arrays, n >= 2")
    if loglog:
        if np.any(xv <= 0) or np.any(yv <= 0):
            raise InvalidInputError("log-log plot needs positive data")
        xv, yv = np.log10(xv), np.log10(yv)
    margin = 60
    plot = size - 2 * margin
    xr = xv.max() - xv.min() or 1.0
    yr = yv.max() - yv.min() or 1.0
    pts = []
    for xi, yi in zip(xv, yv):
        px = margin + (xi - xv.min()) / xr * plot
        py = margin + plot - (yi - yv.min()) / yr * plot
        pts.append(f"{_fmt(px)},{_fmt(py)}")
    out = _header(size, size)
    if title:
        out.append(_text(size / 2, margin / 2, title, 14, "middle"))
    out.append(
        f'<polyline points="{" ".join(pts)}" fill="none" stroke="#1f4e9c" '
        'stroke-width="2"/>'
    )
    for p in pts:
        cx, cy = p.split(",")
        out.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="#1f4e9c"/>')
    out.append(
        f'<rect x="{margin}" y="{margin}" width="{_fmt(plot)}" '
        f'height="{_fmt(plot)}" fill="none" stroke="black"/>'
    )
    if annotation:
        out.append(_text(margin + 8, margin + 18, annotation))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_montage(
    tensor,
    x_axis,
    slice_axis,
    y_axis,
    slice_indices=None,
    title: str = "",
    columns: int = 3,
    tile: int = 220,
) -> str:
    """Slice montage of a 3D magnitude tensor along its middle axis."""
    T = np.abs(np.asarray(tensor)).astype(float)
    if T.ndim != 3:
        raise InvalidInputError("montage needs a 3D tensor")
    sv = np.asarray(slice_axis, dtype=float)
    if slice_indices is None:
        # the most energetic slices, in axis order
        energy = T.sum(axis=(0, 2))
        slice_indices = sorted(np.argsort(energy)[::-1][: 2 * columns].tolist())
    n = len(slice_indices)
    rows = (n + columns - 1) // columns
    width = columns * tile
    height = rows * (tile + 24) + 30
    out = _header(width, height)
    if title:
        out.append(_text(width / 2, 18, title, 14, "middle"))
    vmax = T.max() or 1.0
    for pos, idx in enumerate(slice_indices):
        r, c = divmod(pos, columns)
        ox = c * tile
        oy = 30 + r * (tile + 24)
        sl = T[:, idx, :]
        m = 8
        inner = tile - 2 * m
        cw = inner / sl.shape[1]
        ch = inner / sl.shape[0]
        floor = vmax * 1e-8
        W = np.log10(np.maximum(sl, floor))
        lo, hi = np.log10(floor), np.log10(vmax)
        span = hi - lo or 1.0
        for i in range(sl.shape[0]):
            for j in range(sl.shape[1]):
                col = _color((W[i, j] - lo) / span)
                out.append(
                    f'<rect x="{_fmt(ox + m + j * cw)}" '
                    f'y="{_fmt(oy + m + inner - (i + 1) * ch)}" '
                    f'width="{_fmt(cw)}" height="{_fmt(ch)}" fill="{col}"/>'
                )
        out.append(
            f'<rect x="{ox + m}" y="{oy + m}" width="{_fmt(inner)}" '
            f'height="{_fmt(inner)}" fill="none" stroke="black"/>'
        )
        out.append(
            _text(ox + tile / 2, oy + tile + 12, f"s2={_fmt(sv[idx])}", 11, "middle")
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
