"""SVG rendering of shadow sets and phase diagrams.

Two artifact kinds: a spatial picture of one forest with its occupied
shadow regions (trees dark, shadows light grey, vacancy white), and a
log-log heatmap of mean normalized maximum width over a density/speed
grid with contour polylines and the analytic bound curves overlaid.

Everything is assembled by hand into SVG strings with fixed-precision
coordinates, so output bytes are a pure function of the inputs; no
plotting library is involved.  Disk outlines are 64-gon approximations.
Contours come from marching squares on the grid in log-log coordinates
with linear interpolation along cell edges; values are never
extrapolated outside the grid hull, so contours stop at the border.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .bounds import BoundConfig, phase_boundary_table
from .experiment import PhaseTable
from .forest import Forest
from .shadow import (
    KIND_CONTACT,
    KIND_INDUCED,
    KIND_LEFT,
    KIND_RIGHT,
    ShadowSet,
    build_shadow_set,
)

_CIRCLE_STEPS = 64
_SHADOW_FILL = "#d4d4d4"
_TREE_FILL = "#303030"
_CONTOUR_STROKE = "#b04030"
_BOUND_STROKES = ("#3060b0", "#208040")

CONTOUR_LEVELS = tuple(round(0.1 * k, 1) for k in range(1, 10))


def _fmt(x: float) -> str:
    # fixed precision keeps output bytes reproducible across platforms
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


def _poly(points: Iterable[tuple[float, float]], fill: str) -> str:
    body = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'<polygon points="{body}" fill="{fill}"/>'


def _circle_points(cx: float, cy: float, r: float) -> list[tuple[float, float]]:
    step = 2.0 * math.pi / _CIRCLE_STEPS
    return [
        (cx + r * math.cos(k * step), cy + r * math.sin(k * step))
        for k in range(_CIRCLE_STEPS)
    ]


def _primary_outline(s: ShadowSet, i: int) -> list[tuple[float, float]]:
    """Wedge plus far-side disk cap for one primary wake.

    The tangent lines from the apex touch the disk at distance
    ``r cos / sin`` along directions ``+-half_angle`` off the axis; the
    cap walks the disk boundary between the two tangency points through
    the far side, sampled at the 64-gon angular step.
    """
    ax, ay = s.apex_x[i], s.apex_y[i]
    cx, cy = s.aux_x[i], s.aux_y[i]
    r = s.forest.tree_radius
    sh, ch = s.cone.sin_half, s.cone.cos_half
    sgn = 1.0 if s.kind[i] == KIND_LEFT else -1.0
    t = r * ch / sh
    top = (ax + sgn * t * ch, ay + t * sh)
    bot = (ax + sgn * t * ch, ay - t * sh)
    # tangency angles about the center; the far side passes through 0
    # (left wake) or pi (right wake)
    a_top = math.atan2(top[1] - cy, top[0] - cx)
    a_bot = math.atan2(bot[1] - cy, bot[0] - cx)
    if sgn > 0:
        span = a_top - a_bot
    else:
        span = 2.0 * math.pi - (a_top - a_bot)
    steps = max(2, int(round(abs(span) / (2.0 * math.pi / _CIRCLE_STEPS))))
    pts = [(ax, ay), top]
    for k in range(1, steps):
        a = a_top - sgn * span * k / steps
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    pts.append(bot)
    return pts


def _funnel_outline(s: ShadowSet, i: int) -> list[tuple[float, float]]:
    ua, ub = s.parent_a[i], s.parent_b[i]
    return [
        (s.apex_x[i], s.apex_y[i]),
        (s.apex_x[ua], s.apex_y[ua]),
        (s.aux_x[i], s.aux_y[i]),
        (s.apex_x[ub], s.apex_y[ub]),
    ]


def _contact_outline(s: ShadowSet, i: int) -> list[tuple[float, float]]:
    slot = i - s._contact_base
    m = int(s._cn[slot])
    return [(s._cv[slot, k, 0], s._cv[slot, k, 1]) for k in range(m)]


def render_shadow_svg(
    forest: Forest,
    nu: float,
    out: str,
    shadow_set: ShadowSet | None = None,
    px_width: int = 800,
) -> None:
    """Write the forest and its occupied shadow regions as an SVG file.

    The view covers the window plus whatever the wakes add on the left;
    world y points up, so rows are flipped into screen coordinates.
    Passing a prebuilt ``shadow_set`` skips the construction.
    """
    s = shadow_set if shadow_set is not None else build_shadow_set(forest, nu)
    w = forest.window
    r = forest.tree_radius
    x0, x1 = 0.0, w.length
    y0, y1 = 0.0, w.width
    if s.apex_x.size:
        x0 = min(x0, float(np.min(s.apex_x)))
        x1 = max(x1, float(np.max(s.aux_x) + r))
    pad = 2.0 * r
    x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad
    scale = px_width / (x1 - x0)
    px_height = int(math.ceil((y1 - y0) * scale))

    def to_px(x: float, y: float) -> tuple[float, float]:
        return ((x - x0) * scale, (y1 - y) * scale)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px_width}" '
        f'height="{px_height}" viewBox="0 0 {px_width} {px_height}">',
        f'<rect width="{px_width}" height="{px_height}" fill="#ffffff"/>',
    ]
    for i in range(s.apex_x.size):
        kind = int(s.kind[i])
        if kind in (KIND_LEFT, KIND_RIGHT):
            pts = _primary_outline(s, i)
        elif kind == KIND_INDUCED:
            pts = _funnel_outline(s, i)
        else:
            pts = _contact_outline(s, i)
        parts.append(_poly((to_px(x, y) for x, y in pts), _SHADOW_FILL))
    for cx, cy in forest.centers:
        pts = _circle_points(float(cx), float(cy), r)
        parts.append(_poly((to_px(x, y) for x, y in pts), _TREE_FILL))
    parts.append(
        f'<rect x="{_fmt(to_px(0.0, y1 - pad)[0])}" '
        f'y="{_fmt(to_px(0.0, w.width)[1])}" '
        f'width="{_fmt(w.length * scale)}" height="{_fmt(w.width * scale)}" '
        f'fill="none" stroke="#808080" stroke-width="1"/>'
    )
    parts.append("</svg>")
    with open(out, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# phase diagram


def _greyscale(v: float) -> str:
    # 0 -> near white, 1 -> dark; clipped so blocked cells stay readable
    g = int(round(245.0 - 195.0 * min(max(v, 0.0), 1.0)))
    return f"rgb({g},{g},{g})"


_MS_EDGES = {
    1: ((3, 0),), 2: ((0, 1),), 3: ((3, 1),), 4: ((1, 2),),
    6: ((0, 2),), 7: ((3, 2),), 8: ((2, 3),), 9: ((0, 3),),
    11: ((2, 1),), 12: ((2, 0),), 13: ((1, 0),), 14: ((0, 3), (2, 1)),
}


def _cell_segments(level, vals, xs, ys):
    """Marching-squares segments for one cell, corners CCW from top-left.

    The two ambiguous cases split on the cell-center average, which
    keeps contour topology consistent with the bilinear surface.
    """
    code = 0
    for k in range(4):
        if vals[k] >= level:
            code |= 1 << k
    if code in (0, 15):
        return []
    if code == 5 or code == 10:
        center = 0.25 * sum(vals)
        if code == 5:
            edges = ((3, 0), (1, 2)) if center < level else ((3, 2), (1, 0))
        else:
            edges = ((0, 1), (2, 3)) if center < level else ((0, 3), (2, 1))
    else:
        edges = _MS_EDGES[code]
    corner = ((xs[0], ys[0]), (xs[1], ys[0]), (xs[1], ys[1]), (xs[0], ys[1]))
    side = ((0, 1), (1, 2), (3, 2), (0, 3))

    def on_edge(e):
        a, b = side[e]
        va, vb = vals[a], vals[b]
        t = 0.5 if vb == va else (level - va) / (vb - va)
        (xa, ya), (xb, yb) = corner[a], corner[b]
        return (xa + t * (xb - xa), ya + t * (yb - ya))

    return [(on_edge(e0), on_edge(e1)) for e0, e1 in edges]


def render_phase_svg(
    table: PhaseTable,
    bounds_rows: Sequence[tuple[float, float | None, float]] | None = None,
    out: str = "phase.svg",
    px: int = 640,
) -> None:
    """Write the phase diagram as a log-log SVG heatmap.

    Cells show the mean normalized maximum width at each grid point,
    contour polylines mark levels 0.1 through 0.9, and the two bound
    curves are overlaid (dashed: below it flight is certified feasible;
    solid: above it certified blocked).  ``bounds_rows`` defaults to a
    table computed over the grid's density range.
    """
    rhos = [math.log10(r) for r in table.rho_grid]
    nus = [math.log10(v) for v in table.nu_grid]
    mean = table.mean_grid()
    if bounds_rows is None:
        bounds_rows = phase_boundary_table(
            table.rho_grid[0], table.rho_grid[-1], samples=96,
        )
    mx, my = 64.0, 48.0
    u0, u1 = rhos[0], rhos[-1]
    v0, v1 = nus[0], nus[-1]
    if u1 == u0:
        u1 = u0 + 1.0
    if v1 == v0:
        v1 = v0 + 1.0
    sx = (px - 2 * mx) / (u1 - u0)
    sy = (px - 2 * my) / (v1 - v0)

    def to_px(u: float, v: float) -> tuple[float, float]:
        return (mx + (u - u0) * sx, px - my - (v - v0) * sy)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" '
        f'viewBox="0 0 {px} {px}">',
        f'<rect width="{px}" height="{px}" fill="#ffffff"/>',
    ]
    # heatmap: each grid point owns the rectangle out to the midlines
    for i, u in enumerate(rhos):
        ulo = u0 if i == 0 else 0.5 * (rhos[i - 1] + u)
        uhi = u1 if i == len(rhos) - 1 else 0.5 * (u + rhos[i + 1])
        for j, v in enumerate(nus):
            vlo = v0 if j == 0 else 0.5 * (nus[j - 1] + v)
            vhi = v1 if j == len(nus) - 1 else 0.5 * (v + nus[j + 1])
            xa, yb = to_px(ulo, vlo)
            xb, ya = to_px(uhi, vhi)
            parts.append(
                f'<rect x="{_fmt(xa)}" y="{_fmt(ya)}" '
                f'width="{_fmt(xb - xa)}" height="{_fmt(yb - ya)}" '
                f'fill="{_greyscale(mean[i][j])}"/>'
            )
    # contours on the log-log grid
    for level in CONTOUR_LEVELS:
        segs = []
        for i in range(len(rhos) - 1):
            for j in range(len(nus) - 1):
                vals = (mean[i][j], mean[i + 1][j], mean[i + 1][j + 1], mean[i][j + 1])
                xs = (rhos[i], rhos[i + 1])
                ys = (nus[j], nus[j + 1])
                segs.extend(_cell_segments(level, vals, xs, ys))
        if not segs:
            continue
        wd = "2.0" if level == 0.5 else "1.0"
        d = []
        for (ua, va), (ub, vb) in segs:
            xa, ya = to_px(ua, va)
            xb, yb = to_px(ub, vb)
            d.append(f"M{_fmt(xa)} {_fmt(ya)}L{_fmt(xb)} {_fmt(yb)}")
        parts.append(
            f'<path d="{"".join(d)}" stroke="{_CONTOUR_STROKE}" '
            f'stroke-width="{wd}" fill="none"/>'
        )
    # bound curves, clipped to the plotted speed range
    for which, stroke, dash in (
        (1, _BOUND_STROKES[0], ' stroke-dasharray="6 3"'),
        (2, _BOUND_STROKES[1], ""),
    ):
        pts = []
        for rho, nu_lo, nu_hi in bounds_rows:
            val = nu_lo if which == 1 else nu_hi
            if val is None or val <= 0:
                pts.append(None)
                continue
            u, v = math.log10(rho), math.log10(val)
            pts.append((u, v) if v0 <= v <= v1 and u0 <= u <= u1 else None)
        d = []
        pen = False
        for p in pts:
            if p is None:
                pen = False
                continue
            x, y = to_px(*p)
            d.append(f"{'L' if pen else 'M'}{_fmt(x)} {_fmt(y)}")
            pen = True
        if d:
            parts.append(
                f'<path d="{"".join(d)}" stroke="{stroke}" '
                f'stroke-width="1.5" fill="none"{dash}/>'
            )
    # frame and tick labels at the grid values
    xa, ya = to_px(u0, v1)
    xb, yb = to_px(u1, v0)
    parts.append(
        f'<rect x="{_fmt(xa)}" y="{_fmt(ya)}" width="{_fmt(xb - xa)}" '
        f'height="{_fmt(yb - ya)}" fill="none" stroke="#404040"/>'
    )
    for rho, u in zip(table.rho_grid, rhos):
        x, _ = to_px(u, v0)
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(yb + 16.0)}" font-size="11" '
            f'text-anchor="middle" fill="#202020">{rho:g}</text>'
        )
    for nu, v in zip(table.nu_grid, nus):
        _, y = to_px(u0, v)
        parts.append(
            f'<text x="{_fmt(xa - 6.0)}" y="{_fmt(y + 4.0)}" font-size="11" '
            f'text-anchor="end" fill="#202020">{nu:g}</text>'
        )
    parts.append(
        f'<text x="{_fmt(0.5 * (xa + xb))}" y="{_fmt(yb + 34.0)}" '
        f'font-size="12" text-anchor="middle" fill="#202020">density</text>'
    )
    parts.append(
        f'<text x="14" y="{_fmt(0.5 * (ya + yb))}" font-size="12" '
        f'text-anchor="middle" fill="#202020" '
        f'transform="rotate(-90 14 {_fmt(0.5 * (ya + yb))})">speed</text>'
    )
    parts.append("</svg>")
    with open(out, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")
