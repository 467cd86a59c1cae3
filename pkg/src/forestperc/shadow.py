"""Doomed-region (wake) construction for constant-speed flight.

A tree disk casts a left wake: the set of states from which every
feasible trajectory hits the disk.  It is the convex hull of the disk
and an apex one wake-length ``r / sin(alpha/2)`` upstream of the
center.  Two wakes whose facing boundaries cross pinch the funnel
between them and induce a new wake (a parallelogram spanned by the two
parent apexes and the boundary crossing), which can cascade further.
`build_shadow_set` runs that cascade to a fixed point, merges every
pair of overlapping wakes into components, and exposes the doomed-set
and blocking-width queries the experiments are built on.

Boundary segments are not the only way a funnel can close: two disks
that overlap or nearly touch can pinch it on their arcs, below the
segment ends, where the crossing rule above never fires.  For those
pairs the builder adds contact wakes: the intersections of the two
swept-disk strips (points whose steepest climb ray hits one disk and
whose steepest dive ray hits the other), cut off at the abscissa where
the gap between the disks' clearance envelopes reopens.  The strips'
front arcs are approximated by chords that deviate only inside the
disks themselves, so the polygons are exact modulo disk interiors.

The lateral extent bookkeeping takes the disk caps of primary wakes
(``center.y +- r``) and the parent apex ordinates of induced wakes;
an induced apex is expected to stay between its parents' ordinates and
the builder counts violations rather than assuming it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._accel import NUMBA_ENABLED, njit
from .forest import Forest
from .geometry import EPS, ConeParams, Disk, Point, SlopedSegment, cone_params

KIND_LEFT = 0
KIND_RIGHT = 1
KIND_INDUCED = 2
KIND_CONTACT = 3
_KIND_NAMES = {
    KIND_LEFT: "left_primary",
    KIND_RIGHT: "right_primary",
    KIND_INDUCED: "induced",
    KIND_CONTACT: "contact",
}

_MAX_ROUNDS = 4096
_ARC_CHORDS = 12


# ---------------------------------------------------------------------------
# single-wake constructors (the scalar, type-level view)


@dataclass(frozen=True)
class Shadow:
    """One wake: apex plus its two sloped boundary segments.

    ``disk`` is set for primary wakes (the casting tree), ``crossing``
    for induced ones (where the parent boundaries met).
    """

    kind: str
    apex: Point
    top: SlopedSegment
    bottom: SlopedSegment
    disk: Disk | None = None
    crossing: Point | None = None

    def contains(self, p: Point, tol: float = EPS) -> bool:
        """Closed-region membership (boundaries count as inside)."""
        if self.kind == "left_primary":
            d = self.disk
            if d.contains(p, tol):
                return True
            ax, ay = self.apex.x, self.apex.y
            if p.x < ax - tol or p.x > self.top.end.x + tol:
                return False
            nu = (self.top.end.x - ax) / max(self.top.end.y - ay, EPS)
            return abs(p.y - ay) <= (p.x - ax) / nu + tol
        if self.kind == "right_primary":
            d = self.disk
            if d.contains(p, tol):
                return True
            ax, ay = self.apex.x, self.apex.y
            if p.x > ax + tol or p.x < self.top.start.x - tol:
                return False
            nu = (ax - self.top.start.x) / max(self.top.start.y - ay, EPS)
            return abs(p.y - ay) <= (ax - p.x) / nu + tol
        ux, uy = self.top.end.x, self.top.end.y
        lx, ly = self.bottom.end.x, self.bottom.end.y
        ax = self.apex.x
        nu = (ux - ax) / max(uy - self.apex.y, EPS) if uy > self.apex.y else (
            (lx - ax) / max(self.apex.y - ly, EPS)
        )
        return (
            p.y <= uy + (p.x - ux) / nu + tol
            and p.y <= uy - (p.x - ux) / nu + tol
            and p.y >= ly + (p.x - lx) / nu - tol
            and p.y >= ly - (p.x - lx) / nu - tol
        )


def left_primary_shadow(d: Disk, cone: ConeParams) -> Shadow:
    """Wake upstream (left) of one disk for the given steering cone."""
    sh, ch = cone.sin_half, cone.cos_half
    r = d.radius
    cx, cy = d.center.x, d.center.y
    apex = Point(cx - r / sh, cy)
    top_end = Point(cx - r * sh, cy + r * ch)
    bot_end = Point(cx - r * sh, cy - r * ch)
    return Shadow(
        kind="left_primary",
        apex=apex,
        top=SlopedSegment(apex, top_end, +1),
        bottom=SlopedSegment(apex, bot_end, -1),
        disk=d,
    )


def right_primary_shadow(d: Disk, cone: ConeParams) -> Shadow:
    """Mirror twin of `left_primary_shadow` (wake downstream of the disk)."""
    sh, ch = cone.sin_half, cone.cos_half
    r = d.radius
    cx, cy = d.center.x, d.center.y
    apex = Point(cx + r / sh, cy)
    top_end = Point(cx + r * sh, cy + r * ch)
    bot_end = Point(cx + r * sh, cy - r * ch)
    return Shadow(
        kind="right_primary",
        apex=apex,
        top=SlopedSegment(top_end, apex, -1),
        bottom=SlopedSegment(bot_end, apex, +1),
        disk=d,
    )


def induced_shadow(a: Shadow, b: Shadow, cone: ConeParams) -> Shadow | None:
    """Wake induced by two left-facing wakes, or None when absent.

    The upper role goes to the wake with the greater apex ordinate; a
    wake exists only when the upper's descending boundary crosses the
    lower's ascending boundary within both segment extents, which pins
    the apex strictly left of both parents.  The operation is symmetric
    in its arguments.
    """
    if a.apex.y == b.apex.y:
        return None
    up, lo = (a, b) if a.apex.y > b.apex.y else (b, a)
    nu = cone.speed
    ux, uy = up.apex.x, up.apex.y
    lx, ly = lo.apex.x, lo.apex.y
    qx = 0.5 * (ux + lx + nu * (uy - ly))
    if qx < max(ux, lx) - EPS:
        return None
    if qx > up.bottom.end.x + EPS or qx > lo.top.end.x + EPS:
        return None
    ax = 0.5 * (ux + lx - nu * (uy - ly))
    if ax >= min(ux, lx) - EPS:
        return None
    ay = 0.5 * (uy + ly) + (lx - ux) / (2.0 * nu)
    apex = Point(ax, ay)
    qy = uy - (qx - ux) / nu
    return Shadow(
        kind="induced",
        apex=apex,
        top=SlopedSegment(apex, Point(ux, uy), +1),
        bottom=SlopedSegment(apex, Point(lx, ly), -1),
        crossing=Point(qx, qy),
    )


# ---------------------------------------------------------------------------
# box-overlap candidate search (compiled grid with a numpy fallback)


@njit(cache=True)
def _grid_pairs_kernel(
    ax0, ax1, ay0, ay1, bx0, bx1, by0, by1, ox, oy, cw, chh, ncx, ncy, eps,
    la, lb,
):
    na = ax0.size
    nb = bx0.size
    ncells = ncx * ncy
    counts = np.zeros(ncells + 1, dtype=np.int64)
    for a in range(na):
        ix0 = int((ax0[a] - ox) / cw)
        ix1 = int((ax1[a] - ox) / cw)
        iy0 = int((ay0[a] - oy) / chh)
        iy1 = int((ay1[a] - oy) / chh)
        if ix0 < 0:
            ix0 = 0
        if ix1 >= ncx:
            ix1 = ncx - 1
        if iy0 < 0:
            iy0 = 0
        if iy1 >= ncy:
            iy1 = ncy - 1
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                counts[ix * ncy + iy + 1] += 1
    offsets = np.cumsum(counts)
    items = np.empty(offsets[ncells], dtype=np.int64)
    cursor = offsets[:ncells].copy()
    for a in range(na):
        ix0 = int((ax0[a] - ox) / cw)
        ix1 = int((ax1[a] - ox) / cw)
        iy0 = int((ay0[a] - oy) / chh)
        iy1 = int((ay1[a] - oy) / chh)
        if ix0 < 0:
            ix0 = 0
        if ix1 >= ncx:
            ix1 = ncx - 1
        if iy0 < 0:
            iy0 = 0
        if iy1 >= ncy:
            iy1 = ncy - 1
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                c = ix * ncy + iy
                items[cursor[c]] = a
                cursor[c] += 1
    last_seen = np.full(na, -1, dtype=np.int64)
    out_b = np.empty(0, dtype=np.int64)
    out_a = np.empty(0, dtype=np.int64)
    for phase in range(2):
        total = 0
        for i in range(na):
            last_seen[i] = -1
        for b in range(nb):
            ix0 = int((bx0[b] - eps - ox) / cw)
            ix1 = int((bx1[b] + eps - ox) / cw)
            iy0 = int((by0[b] - eps - oy) / chh)
            iy1 = int((by1[b] + eps - oy) / chh)
            if ix0 < 0:
                ix0 = 0
            if ix1 >= ncx:
                ix1 = ncx - 1
            if iy0 < 0:
                iy0 = 0
            if iy1 >= ncy:
                iy1 = ncy - 1
            for ix in range(ix0, ix1 + 1):
                for iy in range(iy0, iy1 + 1):
                    c = ix * ncy + iy
                    for t in range(offsets[c], offsets[c + 1]):
                        a = items[t]
                        if last_seen[a] == b:
                            continue
                        last_seen[a] = b
                        if la[a] == lb[b]:
                            continue
                        if (
                            ax0[a] <= bx1[b] + eps
                            and ax1[a] >= bx0[b] - eps
                            and ay0[a] <= by1[b] + eps
                            and ay1[a] >= by0[b] - eps
                        ):
                            if phase == 1:
                                out_b[total] = b
                                out_a[total] = a
                            total += 1
        if phase == 0:
            out_b = np.empty(total, dtype=np.int64)
            out_a = np.empty(total, dtype=np.int64)
    return out_b, out_a


def _box_pairs_numpy(aboxes, bboxes, eps, la=None, lb=None):
    """Chunked all-pairs bounding-box overlap; vectorized fallback path."""
    na = aboxes.shape[0]
    nb = bboxes.shape[0]
    outs_b, outs_a = [], []
    chunk = max(1, int(4_000_000 // max(na, 1)))
    for s in range(0, nb, chunk):
        e = min(nb, s + chunk)
        m = (
            (aboxes[None, :, 0] <= bboxes[s:e, None, 1] + eps)
            & (aboxes[None, :, 1] >= bboxes[s:e, None, 0] - eps)
            & (aboxes[None, :, 2] <= bboxes[s:e, None, 3] + eps)
            & (aboxes[None, :, 3] >= bboxes[s:e, None, 2] - eps)
        )
        bi, ai = np.nonzero(m)
        if la is not None:
            keep = la[ai] != lb[bi + s]
            bi, ai = bi[keep], ai[keep]
        outs_b.append(bi + s)
        outs_a.append(ai)
    if not outs_b:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(outs_b), np.concatenate(outs_a)


def _box_pairs(aboxes, bboxes, eps, cell_hint, cell_hint_y=None, la=None, lb=None):
    """Candidate (probe, table) index pairs with overlapping boxes.

    ``cell_hint_y`` sets the lateral cell size separately (boxes here
    are mostly wake-length slivers, so lateral binning discriminates
    far better than longitudinal).  Optional ``la``/``lb`` labels
    suppress same-label pairs inside the kernel, before any pair is
    stored; that is what keeps the output small when one connected
    group holds most of the boxes.
    """
    if aboxes.shape[0] == 0 or bboxes.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if not NUMBA_ENABLED:
        return _box_pairs_numpy(aboxes, bboxes, eps, la, lb)
    if cell_hint_y is None:
        cell_hint_y = cell_hint
    if la is None:
        la = np.zeros(aboxes.shape[0], dtype=np.int64)
        lb = np.ones(bboxes.shape[0], dtype=np.int64)
    ox = min(aboxes[:, 0].min(), bboxes[:, 0].min()) - eps
    oy = min(aboxes[:, 2].min(), bboxes[:, 2].min()) - eps
    xr = max(aboxes[:, 1].max(), bboxes[:, 1].max()) - ox + 1.0
    yr = max(aboxes[:, 3].max(), bboxes[:, 3].max()) - oy + 1.0
    ncx = int(np.clip(xr / max(cell_hint, 1e-6), 1, 2048))
    ncy = int(np.clip(yr / max(cell_hint_y, 1e-6), 1, 2048))
    cw = xr / ncx
    chh = yr / ncy
    return _grid_pairs_kernel(
        np.ascontiguousarray(aboxes[:, 0]),
        np.ascontiguousarray(aboxes[:, 1]),
        np.ascontiguousarray(aboxes[:, 2]),
        np.ascontiguousarray(aboxes[:, 3]),
        np.ascontiguousarray(bboxes[:, 0]),
        np.ascontiguousarray(bboxes[:, 1]),
        np.ascontiguousarray(bboxes[:, 2]),
        np.ascontiguousarray(bboxes[:, 3]),
        ox, oy, cw, chh, ncx, ncy, eps,
        np.ascontiguousarray(la, dtype=np.int64),
        np.ascontiguousarray(lb, dtype=np.int64),
    )


@njit(cache=True)
def _coverage_kernel(
    kind, ax, ay, tx, ty, bx, by, auxx, auxy,
    rx0, rx1, ry0, ry1, cv, cn, contact_base,
    px, py, ox, oy, cw, chh, ncx, ncy,
    nu, r, clip_x, eps, out,
):
    """Mark points covered by any wake region.

    Regions are binned by bounding box on an anisotropic grid; each
    point then walks its own cell's list and stops at the first exact
    hit, so neither candidate pairs nor masks are ever materialized.
    Membership predicates mirror `ShadowSet._points_in_regions` exactly.
    """
    n = kind.size
    ncells = ncx * ncy
    counts = np.zeros(ncells + 1, dtype=np.int64)
    for a in range(n):
        ix0 = int((rx0[a] - eps - ox) / cw)
        ix1 = int((rx1[a] + eps - ox) / cw)
        iy0 = int((ry0[a] - eps - oy) / chh)
        iy1 = int((ry1[a] + eps - oy) / chh)
        if ix0 < 0:
            ix0 = 0
        if ix1 >= ncx:
            ix1 = ncx - 1
        if iy0 < 0:
            iy0 = 0
        if iy1 >= ncy:
            iy1 = ncy - 1
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                counts[ix * ncy + iy + 1] += 1
    offsets = np.cumsum(counts)
    items = np.empty(offsets[ncells], dtype=np.int64)
    cursor = offsets[:ncells].copy()
    for a in range(n):
        ix0 = int((rx0[a] - eps - ox) / cw)
        ix1 = int((rx1[a] + eps - ox) / cw)
        iy0 = int((ry0[a] - eps - oy) / chh)
        iy1 = int((ry1[a] + eps - oy) / chh)
        if ix0 < 0:
            ix0 = 0
        if ix1 >= ncx:
            ix1 = ncx - 1
        if iy0 < 0:
            iy0 = 0
        if iy1 >= ncy:
            iy1 = ncy - 1
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                c = ix * ncy + iy
                items[cursor[c]] = a
                cursor[c] += 1
    rsq = (r + eps) * (r + eps)
    for p in range(px.size):
        x = px[p]
        y = py[p]
        if x < clip_x - eps:
            continue
        ix = int((x - ox) / cw)
        iy = int((y - oy) / chh)
        if ix < 0 or ix >= ncx or iy < 0 or iy >= ncy:
            continue
        c = ix * ncy + iy
        for t in range(offsets[c], offsets[c + 1]):
            a = items[t]
            if (
                x < rx0[a] - eps or x > rx1[a] + eps
                or y < ry0[a] - eps or y > ry1[a] + eps
            ):
                continue
            hit = False
            k = kind[a]
            if k <= KIND_RIGHT:
                ddx = x - auxx[a]
                ddy = y - auxy[a]
                if ddx * ddx + ddy * ddy <= rsq:
                    hit = True
                elif (
                    x >= ax[a] - eps
                    and x <= tx[a] + eps
                    and abs(y - ay[a]) <= (x - ax[a]) / nu + eps
                ):
                    hit = True
            elif k == KIND_INDUCED:
                if (
                    y <= ty[a] + (x - tx[a]) / nu + eps
                    and y <= ty[a] - (x - tx[a]) / nu + eps
                    and y >= by[a] + (x - bx[a]) / nu - eps
                    and y >= by[a] - (x - bx[a]) / nu - eps
                ):
                    hit = True
            else:
                slot = a - contact_base
                pv = cn[slot]
                inside = True
                for e in range(pv):
                    x1 = cv[slot, e, 0]
                    y1 = cv[slot, e, 1]
                    e2 = e + 1 if e + 1 < pv else 0
                    x2 = cv[slot, e2, 0]
                    y2 = cv[slot, e2, 1]
                    ex = x2 - x1
                    ey = y2 - y1
                    cross = ex * (y - y1) - ey * (x - x1)
                    if cross < -eps * (np.sqrt(ex * ex + ey * ey) + 1.0):
                        inside = False
                        break
                hit = inside
            if hit:
                out[p] = True
                break


@njit(cache=True)
def _greedy_accept_kernel(px9, py9, cov9, cax, cux, cuy, clx, cly, cqx,
                          nu, clip_x, eps):
    """Leftmost-first novelty pass over one round's candidate wakes.

    A candidate is kept when some probe point escapes both the existing
    regions (``cov9``, precomputed) and every candidate accepted earlier
    in the pass; accepted funnels immediately shadow later candidates,
    which stops stacked near-duplicates from piling up within a round.
    """
    m = cax.size
    keep = np.zeros(m, dtype=np.bool_)
    acc = np.empty(m, dtype=np.int64)
    na = 0
    for i in range(m):
        novel = False
        for j in range(9):
            if cov9[j, i]:
                continue
            x = px9[j, i]
            y = py9[j, i]
            covered = False
            if x >= clip_x - eps:
                for t in range(na):
                    a = acc[t]
                    if x < cax[a] - eps or x > cqx[a] + eps:
                        continue
                    if (
                        y <= cuy[a] + (x - cux[a]) / nu + eps
                        and y <= cuy[a] - (x - cux[a]) / nu + eps
                        and y >= cly[a] + (x - clx[a]) / nu - eps
                        and y >= cly[a] - (x - clx[a]) / nu - eps
                    ):
                        covered = True
                        break
            if not covered:
                novel = True
                break
        if novel:
            keep[i] = True
            acc[na] = i
            na += 1
    return keep


def _greedy_accept_numpy(px9, py9, cov9, cax, cux, cuy, clx, cly, cqx,
                         nu, clip_x, eps):
    """Fallback twin of `_greedy_accept_kernel`; same pass, same predicates."""
    m = cax.size
    keep = np.zeros(m, dtype=bool)
    acc: list[int] = []
    for i in range(m):
        novel = False
        for j in range(9):
            if cov9[j, i]:
                continue
            x = px9[j, i]
            y = py9[j, i]
            covered = False
            if x >= clip_x - eps and acc:
                a = np.array(acc, dtype=np.int64)
                gate = (x >= cax[a] - eps) & (x <= cqx[a] + eps)
                inside = (
                    gate
                    & (y <= cuy[a] + (x - cux[a]) / nu + eps)
                    & (y <= cuy[a] - (x - cux[a]) / nu + eps)
                    & (y >= cly[a] + (x - clx[a]) / nu - eps)
                    & (y >= cly[a] - (x - clx[a]) / nu - eps)
                )
                covered = bool(inside.any())
            if not covered:
                novel = True
                break
        if novel:
            keep[i] = True
            acc.append(i)
    return keep


# ---------------------------------------------------------------------------
# contact wakes: funnels that pinch on disk arcs instead of segments


def _sweep_halfplanes(cx, cy, r, nu, sense):
    """Halfplanes covering the backward sweep of disks along -(nu, sense).

    The swept set collects every point whose extreme ray in that sense
    (steepest climb for sense +1, steepest dive for -1) hits the disk.
    Rows are (nx, ny, c) with the region on the ``n . p <= c`` side: two
    tangent lines plus a chorded front semicircle.  Chords cut only
    slivers interior to the disk, which primary wakes already cover.
    """
    m = cx.size
    sq = math.hypot(nu, 1.0)
    shh = 1.0 / sq
    chh = nu / sq
    out = np.empty((m, 2 + _ARC_CHORDS, 3))
    # strip: |perp(d) . (p - c)| <= r with perp(d) = (-sense, nu) / sq
    nx, ny = -sense / sq, nu / sq
    nc = nx * cx + ny * cy
    out[:, 0, 0] = nx
    out[:, 0, 1] = ny
    out[:, 0, 2] = nc + r
    out[:, 1, 0] = -nx
    out[:, 1, 1] = -ny
    out[:, 1, 2] = -nc + r
    # front semicircle between the tangency diameter endpoints
    th0 = math.atan2(chh, -sense * shh)
    th = th0 - np.linspace(0.0, math.pi, _ARC_CHORDS + 1)
    px = cx[:, None] + r * np.cos(th)[None, :]
    py = cy[:, None] + r * np.sin(th)[None, :]
    ex = px[:, 1:] - px[:, :-1]
    ey = py[:, 1:] - py[:, :-1]
    cnx, cny = ey, -ex
    cc = cnx * px[:, :-1] + cny * py[:, :-1]
    flip = cnx * cx[:, None] + cny * cy[:, None] > cc
    sign = np.where(flip, -1.0, 1.0)
    out[:, 2:, 0] = sign * cnx
    out[:, 2:, 1] = sign * cny
    out[:, 2:, 2] = sign * cc
    return out


def _envelope_gap(x, cxu, cyu, cxl, cyl, r, nu, sh, ch):
    """Clearance gap between a disk pair at abscissa ``x``.

    The upper disk's descending-clearance envelope (tangent line, then
    its lower arc) minus the lower disk's ascending one; negative means
    the corridor between the wakes is closed at that abscissa.
    """
    txu = cxu - r * sh
    au = np.clip(r * r - (x - cxu) ** 2, 0.0, None)
    e_up = np.where(x <= txu, (cyu - r * ch) - (x - txu) / nu, cyu - np.sqrt(au))
    e_up = np.where(x <= cxu + r, e_up, np.inf)
    txl = cxl - r * sh
    al = np.clip(r * r - (x - cxl) ** 2, 0.0, None)
    e_lo = np.where(x <= txl, (cyl + r * ch) + (x - txl) / nu, cyl + np.sqrt(al))
    e_lo = np.where(x <= cxl + r, e_lo, -np.inf)
    return e_up - e_lo


@njit(cache=True)
def _clip_polys_kernel(hps, box):
    """Clip one axis-aligned box per row by that row's halfplane list.

    Returns vertex buffers padded by repeating the last vertex, vertex
    counts, and signed areas.  Rows that clip away entirely get count 0.
    """
    m = hps.shape[0]
    nh = hps.shape[1]
    pv = 40
    out = np.zeros((m, pv, 2))
    nv = np.zeros(m, dtype=np.int64)
    areas = np.zeros(m)
    cur = np.empty((pv, 2))
    nxt = np.empty((pv, 2))
    for i in range(m):
        cur[0, 0] = box[i, 0]
        cur[0, 1] = box[i, 2]
        cur[1, 0] = box[i, 1]
        cur[1, 1] = box[i, 2]
        cur[2, 0] = box[i, 1]
        cur[2, 1] = box[i, 3]
        cur[3, 0] = box[i, 0]
        cur[3, 1] = box[i, 3]
        n = 4
        for h in range(nh):
            hx = hps[i, h, 0]
            hy = hps[i, h, 1]
            hc = hps[i, h, 2]
            if hx == 0.0 and hy == 0.0:
                continue
            k = 0
            for e in range(n):
                x1 = cur[e, 0]
                y1 = cur[e, 1]
                e2 = e + 1
                if e2 == n:
                    e2 = 0
                x2 = cur[e2, 0]
                y2 = cur[e2, 1]
                d1 = hx * x1 + hy * y1 - hc
                d2 = hx * x2 + hy * y2 - hc
                if d1 <= 0.0 and k < pv:
                    nxt[k, 0] = x1
                    nxt[k, 1] = y1
                    k += 1
                if (d1 < 0.0 < d2 or d2 < 0.0 < d1) and k < pv:
                    t = d1 / (d1 - d2)
                    nxt[k, 0] = x1 + t * (x2 - x1)
                    nxt[k, 1] = y1 + t * (y2 - y1)
                    k += 1
            for e in range(k):
                cur[e, 0] = nxt[e, 0]
                cur[e, 1] = nxt[e, 1]
            n = k
            if n < 3:
                n = 0
                break
        nv[i] = n
        if n == 0:
            continue
        a = 0.0
        for e in range(n):
            e2 = e + 1
            if e2 == n:
                e2 = 0
            a += cur[e, 0] * cur[e2, 1] - cur[e2, 0] * cur[e, 1]
        areas[i] = 0.5 * a
        for e in range(n):
            out[i, e, 0] = cur[e, 0]
            out[i, e, 1] = cur[e, 1]
        for e in range(n, pv):
            out[i, e, 0] = cur[n - 1, 0]
            out[i, e, 1] = cur[n - 1, 1]
    return out, nv, areas


# ---------------------------------------------------------------------------
# the wake set


class ShadowSet:
    """All wakes of one forest at one speed, with components and queries.

    Internals are struct-of-arrays; `shadows` materializes the scalar
    view on demand.  Component structure merges every pair of wakes with
    intersecting regions (parent-child pairs always touch and are merged
    outright).
    """

    def __init__(self, forest: Forest, nu: float, clip_x: float):
        self.forest = forest
        self.speed = float(nu)
        self.cone = cone_params(nu)
        self.clip_x = float(clip_x)
        n0 = forest.n_trees
        self.kind = np.zeros(n0, dtype=np.int8)
        self.apex_x = np.empty(n0, dtype=np.float64)
        self.apex_y = np.empty(n0, dtype=np.float64)
        self.top_x = np.empty(n0, dtype=np.float64)
        self.top_y = np.empty(n0, dtype=np.float64)
        self.bot_x = np.empty(n0, dtype=np.float64)
        self.bot_y = np.empty(n0, dtype=np.float64)
        self.aux_x = np.empty(n0, dtype=np.float64)
        self.aux_y = np.empty(n0, dtype=np.float64)
        self.parent_a = np.full(n0, -1, dtype=np.int64)
        self.parent_b = np.full(n0, -1, dtype=np.int64)
        self.component = np.empty(0, dtype=np.int64)
        self.rounds = 0
        self.apex_ordinate_violations = 0
        self._comp_widths: np.ndarray | None = None
        # contact wakes sit in one contiguous index block after primaries
        self._contact_base = n0
        self._cv = np.zeros((0, 40, 2))
        self._cn = np.zeros(0, dtype=np.int64)
        self._cbox = np.zeros((0, 4))

    # -- construction ------------------------------------------------------

    def _build(self) -> None:
        f = self.forest
        cone = self.cone
        r = f.tree_radius
        sh, ch = cone.sin_half, cone.cos_half
        cx = f.centers[:, 0]
        cy = f.centers[:, 1]
        self.apex_x[:] = cx - r / sh
        self.apex_y[:] = cy
        self.top_x[:] = cx - r * sh
        self.top_y[:] = cy + r * ch
        self.bot_x[:] = cx - r * sh
        self.bot_y[:] = cy - r * ch
        self.aux_x[:] = cx
        self.aux_y[:] = cy
        self.parent_a[:] = np.arange(f.n_trees)
        self._append_contacts()

        seen: set[tuple[int, int]] = set()
        active_start = 0
        rounds = 0
        while active_start < self.apex_x.size:
            rounds += 1
            if rounds > _MAX_ROUNDS:
                raise RuntimeError("wake cascade failed to settle")
            n = self.apex_x.size
            self._round_children(active_start, n, seen)
            active_start = n
        self.rounds = rounds
        self._merge_components()

    def _append_contacts(self) -> None:
        """Add contact wakes for disk pairs that pinch on their arcs.

        Pairs whose funnel closes within both boundary segments are left
        to the ordinary induced-wake rule; pairs with disjoint abscissa
        ranges cannot trap anything jointly and are skipped outright.
        """
        f = self.forest
        nu = self.speed
        r = f.tree_radius
        sh, ch = self.cone.sin_half, self.cone.cos_half
        cx = f.centers[:, 0]
        cy = f.centers[:, 1]
        if cx.size < 2:
            return
        # envelope bounds: closure needs |dy| < 2r, and both tangent lines
        # must undercut the facing arc within the domain, capping |dx|
        wx = 0.5 * r * (1.0 + sh + nu * (1.0 + ch)) + 2.0 * r
        boxes = np.column_stack((cx - wx, cx + wx, cy - r, cy + r))
        j, i = _box_pairs(boxes, boxes, EPS, max(4.0 * r, 0.5 * wx), 4.0 * r)
        keep = j < i
        a, b = i[keep], j[keep]
        if a.size == 0:
            return
        swap = (cy[b] > cy[a]) | ((cy[b] == cy[a]) & (cx[b] > cx[a]))
        u = np.where(swap, b, a)
        l = np.where(swap, a, b)
        axu = cx[u] - r / sh
        axl = cx[l] - r / sh
        dy = cy[u] - cy[l]
        qx = 0.5 * (axu + axl + nu * dy)
        cax = 0.5 * (axu + axl - nu * dy)
        fires = (
            (dy > 0)
            & (qx >= np.maximum(axu, axl) - EPS)
            & (qx <= cx[u] - r * sh + EPS)
            & (qx <= cx[l] - r * sh + EPS)
            & (cax < np.minimum(axu, axl) - EPS)
        )
        u, l = u[~fires], l[~fires]
        if u.size == 0:
            return
        cxu, cyu = cx[u], cy[u]
        cxl, cyl = cx[l], cy[l]
        txu = cxu - r * sh
        txl = cxl - r * sh
        xe = np.minimum(cxu, cxl) + r
        tol = 1e-12
        cand = np.full((u.size, 7), -np.inf)
        # arc-arc reopening: the disk intersection on the facing arcs
        ddx = cxl - cxu
        ddy = cyl - cyu
        d2 = ddx * ddx + ddy * ddy
        lens = (d2 <= 4.0 * r * r) & (d2 > tol)
        dd = np.sqrt(np.where(lens, d2, 1.0))
        hh = np.sqrt(np.clip(r * r - 0.25 * d2, 0.0, None))
        pnx, pny = -ddy / dd, ddx / dd
        mx, my = 0.5 * (cxu + cxl), 0.5 * (cyu + cyl)
        for s_, col in ((1.0, 0), (-1.0, 1)):
            px_ = mx + s_ * hh * pnx
            py_ = my + s_ * hh * pny
            ok = (
                lens
                & (py_ <= cyu + tol)
                & (py_ >= cyl - tol)
                & (px_ >= txu - tol)
                & (px_ >= txl - tol)
            )
            cand[:, col] = np.where(ok, px_, -np.inf)
        # upper tangent line against the lower disk's arc
        b0 = (cyu - r * ch) + txu / nu
        aq = 1.0 + 1.0 / nu**2
        bq = -2.0 * ((b0 - cyl) / nu + cxl)
        cq = (b0 - cyl) ** 2 + cxl**2 - r * r
        disc = bq * bq - 4.0 * aq * cq
        sd = np.sqrt(np.clip(disc, 0.0, None))
        for s_, col in ((1.0, 2), (-1.0, 3)):
            xr = (-bq + s_ * sd) / (2.0 * aq)
            yr = b0 - xr / nu
            ok = (
                (disc >= 0)
                & (xr <= txu + tol)
                & (xr >= txl - tol)
                & (xr <= cxl + r + tol)
                & (yr >= cyl - tol)
            )
            cand[:, col] = np.where(ok, xr, -np.inf)
        # lower tangent line against the upper disk's arc
        b1 = (cyl + r * ch) - txl / nu
        bq = 2.0 * ((b1 - cyu) / nu - cxu)
        cq = (b1 - cyu) ** 2 + cxu**2 - r * r
        disc = bq * bq - 4.0 * aq * cq
        sd = np.sqrt(np.clip(disc, 0.0, None))
        for s_, col in ((1.0, 4), (-1.0, 5)):
            xr = (-bq + s_ * sd) / (2.0 * aq)
            yr = b1 + xr / nu
            ok = (
                (disc >= 0)
                & (xr <= txl + tol)
                & (xr >= txu - tol)
                & (xr <= cxu + r + tol)
                & (yr <= cyu + tol)
            )
            cand[:, col] = np.where(ok, xr, -np.inf)
        cand = np.where(cand <= xe[:, None] + tol, cand, -np.inf)
        cand[:, 6] = xe
        # xw = rightmost reopening abscissa with the gap closed just left
        order = np.argsort(-cand, axis=1)
        xw = np.full(u.size, -np.inf)
        delta = 1e-5 * r
        for col in range(7):
            c_ = np.take_along_axis(cand, order[:, col : col + 1], axis=1)[:, 0]
            unset = ~np.isfinite(xw)
            okc = np.isfinite(c_)
            gv = _envelope_gap(
                np.where(okc, c_ - delta, 0.0), cxu, cyu, cxl, cyl, r, nu, sh, ch
            )
            pick = unset & okc & (gv < -tol)
            xw = np.where(pick, c_, xw)
        closed = np.isfinite(xw)
        if not np.any(closed):
            return
        u, l = u[closed], l[closed]
        cxu, cyu, cxl, cyl = cxu[closed], cyu[closed], cxl[closed], cyl[closed]
        xw = xw[closed]
        dy = cyu - cyl
        hp_up_climb = _sweep_halfplanes(cxu, cyu, r, nu, 1.0)
        hp_up_dive = _sweep_halfplanes(cxu, cyu, r, nu, -1.0)
        hp_lo_climb = _sweep_halfplanes(cxl, cyl, r, nu, 1.0)
        hp_lo_dive = _sweep_halfplanes(cxl, cyl, r, nu, -1.0)
        m = u.size
        cut = np.zeros((m, 2, 3))
        cut[:, 0, 0] = 1.0
        cut[:, 0, 2] = xw
        cut[:, 1, 0] = -1.0
        cut[:, 1, 2] = -self.clip_x
        hp1 = np.concatenate([hp_up_climb, hp_lo_dive, cut], axis=1)
        hp2 = np.concatenate([hp_lo_climb, hp_up_dive, cut], axis=1)
        xleft = np.minimum(cxu, cxl) - 3.0 * r / sh - 0.5 * nu * dy - 4.0 * r
        span = (xw - xleft) / nu
        ylo = np.minimum(cyl, cyu) - r - span
        yhi = np.maximum(cyl, cyu) + r + span
        box = np.column_stack((xleft, xw + r, ylo, yhi))
        pieces = []
        amin = 1e-9 * r * r
        # the swapped piece traps points whose only way out would dive under
        # the lower disk and climb back over the upper one; that route is
        # open when the disks are horizontally disjoint, so only emit the
        # piece for pairs sharing an abscissa
        xov = np.nonzero(np.abs(cxu - cxl) <= 2.0 * r + EPS)[0]
        for hp, rows_ in ((hp1, np.arange(m)), (hp2, xov)):
            if rows_.size == 0:
                continue
            verts, nvv, areas = _clip_polys_kernel(
                np.ascontiguousarray(hp[rows_]), np.ascontiguousarray(box[rows_])
            )
            sel = np.nonzero((nvv >= 3) & (areas > amin))[0]
            if sel.size:
                keep = rows_[sel]
                pieces.append((verts[sel], nvv[sel], u[keep], l[keep]))
        if not pieces:
            return
        cv = np.concatenate([p[0] for p in pieces])
        cn = np.concatenate([p[1] for p in pieces])
        pu = np.concatenate([p[2] for p in pieces])
        pl = np.concatenate([p[3] for p in pieces])
        mtot = cv.shape[0]
        vx, vy = cv[:, :, 0], cv[:, :, 1]
        i_left = np.argmin(vx, axis=1)
        i_right = np.argmax(vx, axis=1)
        rows = np.arange(mtot)
        # pairing proxies: from the apex the boundary follows the swept-strip
        # edges with slopes exactly +-1/nu; only those runs behave like wake
        # boundary segments, so walk them and stop at the first chord or cut
        su = 1.0 / nu
        stol = 1e-7 * r * (1.0 + su)
        tops = np.empty((mtot, 2))
        bots = np.empty((mtot, 2))
        for k in range(mtot):
            nvk = int(cn[k])
            V = cv[k, :nvk]
            ia = int(i_left[k])
            jb = ia
            for _ in range(nvk):
                jn = (jb + 1) % nvk
                ex = V[jn, 0] - V[jb, 0]
                ey = V[jn, 1] - V[jb, 1]
                if ex <= stol or abs(ey + su * ex) > stol:
                    break
                jb = jn
            jt = ia
            for _ in range(nvk):
                jp = (jt - 1) % nvk
                ex = V[jp, 0] - V[jt, 0]
                ey = V[jp, 1] - V[jt, 1]
                if ex <= stol or abs(ey - su * ex) > stol:
                    break
                jt = jp
            tops[k] = V[jt]
            bots[k] = V[jb]
        self.kind = np.concatenate(
            [self.kind, np.full(mtot, KIND_CONTACT, dtype=np.int8)]
        )
        self.apex_x = np.concatenate([self.apex_x, vx[rows, i_left]])
        self.apex_y = np.concatenate([self.apex_y, vy[rows, i_left]])
        self.top_x = np.concatenate([self.top_x, tops[:, 0]])
        self.top_y = np.concatenate([self.top_y, tops[:, 1]])
        self.bot_x = np.concatenate([self.bot_x, bots[:, 0]])
        self.bot_y = np.concatenate([self.bot_y, bots[:, 1]])
        self.aux_x = np.concatenate([self.aux_x, vx[rows, i_right]])
        self.aux_y = np.concatenate([self.aux_y, vy[rows, i_right]])
        self.parent_a = np.concatenate([self.parent_a, pu])
        self.parent_b = np.concatenate([self.parent_b, pl])
        self._cv = cv
        self._cn = cn
        self._cbox = np.column_stack(
            (vx.min(axis=1), vx.max(axis=1), vy.min(axis=1), vy.max(axis=1))
        )

    def _pairable(self) -> np.ndarray:
        # clipped wakes keep their region but stop the cascade
        return self.apex_x >= self.clip_x

    def _round_children(self, active_start: int, n: int, seen: set) -> int:
        """Generate, prune, and append one round's induced wakes.

        Candidates run deepest-first in batches: every batch is first
        classified against all wakes appended so far (previous rounds
        and earlier batches alike), then greedily filtered against its
        own survivors, and the keepers join the arrays before the next
        batch is looked at.  Returns the number of wakes appended.
        """
        nu = self.speed
        ax, ay = self.apex_x, self.apex_y
        pairable = self._pairable()
        act = np.arange(active_start, n)
        act = act[pairable[act]]
        if act.size == 0 and active_start > 0:
            return 0
        allowed = np.nonzero(pairable)[0]
        if allowed.size == 0:
            return 0
        # segment boxes: top runs apex -> top end, bottom apex -> bottom end
        top_boxes = np.column_stack(
            (ax[allowed], self.top_x[allowed], ay[allowed], self.top_y[allowed])
        )
        bot_boxes = np.column_stack(
            (ax[allowed], self.bot_x[allowed], self.bot_y[allowed], ay[allowed])
        )
        r = self.forest.tree_radius
        cell = 2.0 * r / max(self.cone.sin_half, 1e-6)
        pairs_u: list[np.ndarray] = []
        pairs_l: list[np.ndarray] = []
        act_mask_allowed = allowed >= active_start
        # pass 1: active bottoms probing all tops (active takes the upper role)
        bi, ti = _box_pairs(top_boxes, bot_boxes[act_mask_allowed], EPS, cell, 4.0 * r)
        if bi.size:
            pairs_u.append(allowed[act_mask_allowed][bi])
            pairs_l.append(allowed[ti])
        # pass 2: active tops probing old bottoms (active takes the lower role)
        old_mask = ~act_mask_allowed
        bi, ti = _box_pairs(bot_boxes[old_mask], top_boxes[act_mask_allowed], EPS, cell, 4.0 * r)
        if bi.size:
            pairs_u.append(allowed[old_mask][ti])
            pairs_l.append(allowed[act_mask_allowed][bi])
        if not pairs_u:
            return 0
        u = np.concatenate(pairs_u)
        l = np.concatenate(pairs_l)
        # exact crossing test, vectorized; upper must sit strictly higher
        keep = ay[u] > ay[l]
        u, l = u[keep], l[keep]
        if u.size == 0:
            return 0
        dyv = ay[u] - ay[l]
        qx = 0.5 * (ax[u] + ax[l] + nu * dyv)
        valid = (
            (qx >= ax[u] - EPS)
            & (qx >= ax[l] - EPS)
            & (qx <= self.bot_x[u] + EPS)
            & (qx <= self.top_x[l] + EPS)
        )
        child_ax = 0.5 * (ax[u] + ax[l] - nu * dyv)
        valid &= child_ax < np.minimum(ax[u], ax[l]) - EPS
        u, l, qx, child_ax = u[valid], l[valid], qx[valid], child_ax[valid]
        if u.size == 0:
            return 0
        fresh = np.ones(u.size, dtype=bool)
        for i in range(u.size):
            key = (int(u[i]), int(l[i]))
            if key in seen:
                fresh[i] = False
            else:
                seen.add(key)
        u, l, qx, child_ax = u[fresh], l[fresh], qx[fresh], child_ax[fresh]
        if u.size == 0:
            return 0
        child_ay = 0.5 * (ay[u] + ay[l]) + (ax[l] - ax[u]) / (2.0 * nu)
        qy = ay[u] - (qx - ax[u]) / nu
        # deepest candidates first: an accepted funnel then swallows the
        # shallower overlaps proposed in the same round
        order = np.lexsort((l, u, child_ay, child_ax))
        u, l = u[order], l[order]
        qx, qy = qx[order], qy[order]
        child_ax, child_ay = child_ax[order], child_ay[order]
        bad = (child_ay < ay[l] - EPS) | (child_ay > ay[u] + EPS)
        self.apex_ordinate_violations += int(bad.sum())
        # parent coordinates, materialized: the arrays behind ax and ay
        # grow as batches are appended below
        pux, puy = ax[u], ay[u]
        plx, ply = ax[l], ay[l]
        # drop children all but buried in the occupied set: firing is cheap
        # but stacked regions otherwise breed covered slivers without end.
        # probing a hair inside the quad forfeits only a ribbon that hugs
        # boundaries already present
        delta = 1e-3 * r
        accept = _greedy_accept_kernel if NUMBA_ENABLED else _greedy_accept_numpy
        added = 0
        batch = 4096
        for s in range(0, u.size, batch):
            e = min(u.size, s + batch)
            cax, cay = child_ax[s:e], child_ay[s:e]
            cqx, cqy = qx[s:e], qy[s:e]
            cux, cuy = pux[s:e], puy[s:e]
            clx, cly = plx[s:e], ply[s:e]
            vxs = np.stack([cax, cux, cqx, clx])
            vys = np.stack([cay, cuy, cqy, cly])
            ex = np.concatenate([vxs, 0.5 * (vxs + np.roll(vxs, -1, axis=0))])
            ey = np.concatenate([vys, 0.5 * (vys + np.roll(vys, -1, axis=0))])
            gx = vxs.mean(axis=0)
            gy = vys.mean(axis=0)
            dn = np.hypot(ex - gx, ey - gy)
            pull = np.minimum(delta / np.where(dn > 0, dn, 1.0), 1.0)
            ex += (gx - ex) * pull
            ey += (gy - ey) * pull
            bat_x = np.concatenate([ex.ravel(), gx])
            bat_y = np.concatenate([ey.ravel(), gy])
            covered = self.classify_points(np.column_stack((bat_x, bat_y)))
            mb = cax.size
            cov9 = np.empty((9, mb), dtype=np.bool_)
            cov9[:8] = covered[: 8 * mb].reshape(8, mb)
            cov9[8] = covered[8 * mb :]
            px9 = np.ascontiguousarray(np.concatenate([ex, gx[None, :]], axis=0))
            py9 = np.ascontiguousarray(np.concatenate([ey, gy[None, :]], axis=0))
            novel = accept(
                px9, py9, cov9, cax, cux, cuy, clx, cly, cqx,
                nu, self.clip_x, EPS,
            )
            idx = np.nonzero(novel)[0]
            if idx.size:
                self._append(
                    (u[s:e][idx], l[s:e][idx], cax[idx], cay[idx],
                     cqx[idx], cqy[idx])
                )
                added += idx.size
        return added

    def _append(self, children) -> None:
        u, l, cax, cay, qx, qy = children
        self.kind = np.concatenate([self.kind, np.full(u.size, KIND_INDUCED, dtype=np.int8)])
        self.apex_x = np.concatenate([self.apex_x, cax])
        self.apex_y = np.concatenate([self.apex_y, cay])
        self.top_x = np.concatenate([self.top_x, self.apex_x[u]])
        self.top_y = np.concatenate([self.top_y, self.apex_y[u]])
        self.bot_x = np.concatenate([self.bot_x, self.apex_x[l]])
        self.bot_y = np.concatenate([self.bot_y, self.apex_y[l]])
        self.aux_x = np.concatenate([self.aux_x, qx])
        self.aux_y = np.concatenate([self.aux_y, qy])
        self.parent_a = np.concatenate([self.parent_a, u])
        self.parent_b = np.concatenate([self.parent_b, l])

    # -- regions -----------------------------------------------------------

    def _region_boxes(self) -> np.ndarray:
        n = self.apex_x.size
        boxes = np.empty((n, 4), dtype=np.float64)
        prim = self.kind <= KIND_RIGHT
        ind = self.kind == KIND_INDUCED
        con = self.kind == KIND_CONTACT
        r = self.forest.tree_radius
        boxes[prim, 0] = self.apex_x[prim]
        boxes[prim, 1] = self.aux_x[prim] + r
        boxes[prim, 2] = self.aux_y[prim] - r
        boxes[prim, 3] = self.aux_y[prim] + r
        boxes[ind, 0] = self.apex_x[ind]
        boxes[ind, 1] = self.aux_x[ind]
        boxes[ind, 2] = np.minimum(self.bot_y[ind], self.apex_y[ind])
        boxes[ind, 3] = np.maximum(self.top_y[ind], self.apex_y[ind])
        if np.any(con):
            boxes[con] = self._cbox[np.nonzero(con)[0] - self._contact_base]
        boxes[:, 0] = np.maximum(boxes[:, 0], self.clip_x)
        return boxes

    def _regions_intersect(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Exact closed-region overlap for wake index pairs (vectorized)."""
        nu = self.speed
        r = self.forest.tree_radius
        vx, vy, nv = _polygon_vertices(self, i)
        wx, wy, nw = _polygon_vertices(self, j)
        out = np.ones(i.size, dtype=bool)
        # separating axes: all edges have slope +-1/nu or are vertical
        for axx, axy in ((1.0, 0.0), (1.0, -nu), (1.0, nu)):
            pv = axx * vx + axy * vy
            pw = axx * wx + axy * wy
            pv_lo, pv_hi = _masked_minmax(pv, nv)
            pw_lo, pw_hi = _masked_minmax(pw, nw)
            out &= (pv_hi >= pw_lo - EPS) & (pw_hi >= pv_lo - EPS)
        prim_i = self.kind[i] <= KIND_RIGHT
        prim_j = self.kind[j] <= KIND_RIGHT
        if np.any(prim_i):
            d = _disk_poly_dist(self.aux_x[i], self.aux_y[i], wx, wy, nw)
            out |= prim_i & (d <= r + EPS)
        if np.any(prim_j):
            d = _disk_poly_dist(self.aux_x[j], self.aux_y[j], vx, vy, nv)
            out |= prim_j & (d <= r + EPS)
        both = prim_i & prim_j
        if np.any(both):
            dd = np.hypot(self.aux_x[i] - self.aux_x[j], self.aux_y[i] - self.aux_y[j])
            out |= both & (dd <= 2.0 * r + EPS)
        return out

    def _extent_lo_hi(self) -> tuple[np.ndarray, np.ndarray]:
        # per-region vertical extents; contact proxies are pairing segments,
        # not extremes, so read those off the stored polygon boxes
        r = self.forest.tree_radius
        prim = self.kind <= KIND_RIGHT
        lo = np.where(prim, self.aux_y - r, self.bot_y)
        hi = np.where(prim, self.aux_y + r, self.top_y)
        con = np.nonzero(self.kind == KIND_CONTACT)[0]
        if con.size:
            slots = con - self._contact_base
            lo[con] = self._cbox[slots, 2]
            hi[con] = self._cbox[slots, 3]
        return lo, hi

    def _merge_components(self) -> None:
        n = self.apex_x.size
        if n == 0:
            self.component = np.empty(0, dtype=np.int64)
            self._comp_widths = np.empty(0, dtype=np.float64)
            return
        boxes = self._region_boxes()
        cell = 2.0 * self.forest.tree_radius / max(self.cone.sin_half, 1e-6)
        # wakes always touch their parents, so label those unions first
        # and spend geometry tests only on pairs that would merge two
        # different groups; blocked pairing keeps the candidate arrays
        # bounded on dense sets
        ind = np.nonzero(self.kind >= KIND_INDUCED)[0]
        pre = coo_matrix(
            (
                np.ones(2 * ind.size, dtype=np.int8),
                (
                    np.concatenate([ind, ind]),
                    np.concatenate([self.parent_a[ind], self.parent_b[ind]]),
                ),
            ),
            shape=(n, n),
        )
        _, prelab = connected_components(pre, directed=False)
        hits_src: list[np.ndarray] = []
        hits_dst: list[np.ndarray] = []
        blk = 16384
        for s in range(0, n, blk):
            bi, ai = _box_pairs(
                boxes, boxes[s:s + blk], EPS, cell,
                4.0 * self.forest.tree_radius,
                la=prelab, lb=prelab[s:s + blk],
            )
            bi = bi + s
            keep = bi < ai
            bi, ai = bi[keep], ai[keep]
            for cs in range(0, bi.size, 65536):
                ce = min(bi.size, cs + 65536)
                hit = self._regions_intersect(bi[cs:ce], ai[cs:ce])
                hits_src.append(bi[cs:ce][hit])
                hits_dst.append(ai[cs:ce][hit])
        src = np.concatenate(hits_src + [ind, ind]) if hits_src else np.concatenate([ind, ind])
        dst = (
            np.concatenate(hits_dst + [self.parent_a[ind], self.parent_b[ind]])
            if hits_dst
            else np.concatenate([self.parent_a[ind], self.parent_b[ind]])
        )
        graph = coo_matrix(
            (np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n)
        )
        _, labels = connected_components(graph, directed=False)
        # canonical ids in order of first appearance
        _, first = np.unique(labels, return_index=True)
        remap = np.empty(labels.max() + 1, dtype=np.int64)
        remap[labels[np.sort(first)]] = np.arange(first.size)
        self.component = remap[labels]
        lo, hi = self._extent_lo_hi()
        ncomp = first.size
        comp_lo = np.full(ncomp, np.inf)
        comp_hi = np.full(ncomp, -np.inf)
        np.minimum.at(comp_lo, self.component, lo)
        np.maximum.at(comp_hi, self.component, hi)
        self._comp_widths = comp_hi - comp_lo

    # -- queries -----------------------------------------------------------

    @property
    def n_shadows(self) -> int:
        return int(self.apex_x.size)

    @property
    def n_primary(self) -> int:
        return int(np.sum(self.kind <= KIND_RIGHT))

    @property
    def n_induced(self) -> int:
        return int(np.sum(self.kind == KIND_INDUCED))

    @property
    def n_contact(self) -> int:
        return int(np.sum(self.kind == KIND_CONTACT))

    def is_doomed(self, p: Point) -> bool:
        """True when ``p`` lies in some wake (collision is unavoidable)."""
        return bool(self.classify_points(np.array([[p.x, p.y]]))[0])

    def classify_points(self, points) -> np.ndarray:
        """Vectorized `is_doomed` over an (m, 2) array of points."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if pts.size == 0 or self.n_shadows == 0:
            return np.zeros(pts.shape[0], dtype=bool)
        boxes = self._region_boxes()
        if NUMBA_ENABLED:
            return self._classify_grid(pts, boxes)
        return self._classify_blocks(pts, boxes)

    def _classify_grid(self, pts: np.ndarray, boxes: np.ndarray) -> np.ndarray:
        px = np.ascontiguousarray(pts[:, 0])
        py = np.ascontiguousarray(pts[:, 1])
        # anisotropic cells: region boxes are wake-length slivers, so the
        # lateral direction carries the discriminating power
        r = self.forest.tree_radius
        cell_x = 2.0 * r / max(self.cone.sin_half, 1e-6)
        cell_y = 4.0 * r
        ox = boxes[:, 0].min() - EPS
        oy = boxes[:, 2].min() - EPS
        xr = boxes[:, 1].max() - ox + 1.0
        yr = boxes[:, 3].max() - oy + 1.0
        ncx = int(np.clip(xr / max(cell_x, 1e-6), 1, 2048))
        ncy = int(np.clip(yr / max(cell_y, 1e-6), 1, 2048))
        cw = xr / ncx
        chh = yr / ncy
        out = np.zeros(px.size, dtype=np.bool_)
        _coverage_kernel(
            self.kind, self.apex_x, self.apex_y, self.top_x, self.top_y,
            self.bot_x, self.bot_y, self.aux_x, self.aux_y,
            np.ascontiguousarray(boxes[:, 0]), np.ascontiguousarray(boxes[:, 1]),
            np.ascontiguousarray(boxes[:, 2]), np.ascontiguousarray(boxes[:, 3]),
            self._cv, self._cn, self._contact_base,
            px, py, ox, oy, cw, chh, ncx, ncy,
            self.speed, r, self.clip_x, EPS, out,
        )
        return out

    def _classify_blocks(self, pts: np.ndarray, boxes: np.ndarray) -> np.ndarray:
        # fallback path: fixed-size point/region blocks keep the pair
        # masks bounded, and points drop out as soon as one region hits
        n = boxes.shape[0]
        m = pts.shape[0]
        doomed = np.zeros(m, dtype=bool)
        for s in range(0, m, 65536):
            e = min(m, s + 65536)
            active = np.arange(s, e)
            for rs in range(0, n, 512):
                if active.size == 0:
                    break
                re_ = min(n, rs + 512)
                sub = boxes[rs:re_]
                pxa = pts[active, 0][:, None]
                pya = pts[active, 1][:, None]
                mask = (
                    (pxa >= sub[None, :, 0] - EPS)
                    & (pxa <= sub[None, :, 1] + EPS)
                    & (pya >= sub[None, :, 2] - EPS)
                    & (pya <= sub[None, :, 3] + EPS)
                )
                pi, si = np.nonzero(mask)
                if pi.size == 0:
                    continue
                inside = self._points_in_regions(
                    pts[active[pi], 0], pts[active[pi], 1], si + rs
                )
                hit = np.zeros(active.size, dtype=bool)
                np.logical_or.at(hit, pi, inside)
                doomed[active[hit]] = True
                active = active[~hit]
        return doomed

    def _points_in_regions(self, px, py, s) -> np.ndarray:
        nu = self.speed
        r = self.forest.tree_radius
        ax, ay = self.apex_x[s], self.apex_y[s]
        out = np.zeros(px.size, dtype=bool)
        prim = self.kind[s] <= KIND_RIGHT
        if np.any(prim):
            ddx = px - self.aux_x[s]
            ddy = py - self.aux_y[s]
            in_disk = ddx * ddx + ddy * ddy <= (r + EPS) * (r + EPS)
            in_tri = (
                (px >= ax - EPS)
                & (px <= self.top_x[s] + EPS)
                & (np.abs(py - ay) <= (px - ax) / nu + EPS)
            )
            out |= prim & (in_disk | in_tri)
        ind = self.kind[s] == KIND_INDUCED
        if np.any(ind):
            ux, uy = self.top_x[s], self.top_y[s]
            lx, ly = self.bot_x[s], self.bot_y[s]
            in_par = (
                (py <= uy + (px - ux) / nu + EPS)
                & (py <= uy - (px - ux) / nu + EPS)
                & (py >= ly + (px - lx) / nu - EPS)
                & (py >= ly - (px - lx) / nu - EPS)
            )
            out |= ind & in_par
        con = np.nonzero(self.kind[s] == KIND_CONTACT)[0]
        if con.size:
            verts = self._cv[s[con] - self._contact_base]
            pcx, pcy = px[con], py[con]
            inside = np.ones(con.size, dtype=bool)
            pv = verts.shape[1]
            for e in range(pv):
                x1, y1 = verts[:, e, 0], verts[:, e, 1]
                x2, y2 = verts[:, (e + 1) % pv, 0], verts[:, (e + 1) % pv, 1]
                ex, ey = x2 - x1, y2 - y1
                cross = ex * (pcy - y1) - ey * (pcx - x1)
                # counterclockwise polygons; tolerance scales with edge length
                inside &= cross >= -EPS * (np.sqrt(ex * ex + ey * ey) + 1.0)
            out[con] |= inside
        out &= px >= self.clip_x - EPS
        return out

    def occupied_components(self) -> list["Component"]:
        """Connected groups of overlapping wakes with their extents."""
        comps = []
        boxes = self._region_boxes()
        lo, hi = self._extent_lo_hi()
        for c in range(len(self._comp_widths)):
            members = np.nonzero(self.component == c)[0]
            comps.append(
                Component(
                    members=members,
                    y_min=float(lo[members].min()),
                    y_max=float(hi[members].max()),
                    x_min=float(boxes[members, 0].min()),
                    x_max=float(boxes[members, 1].max()),
                )
            )
        return comps

    def max_normalized_width(self) -> float:
        """Largest component lateral extent over the window width."""
        if self._comp_widths is None or self._comp_widths.size == 0:
            return 0.0
        return float(self._comp_widths.max() / self.forest.window.width)

    def crossing_exists(self) -> bool:
        """True when some corridor can still traverse the window."""
        return self.max_normalized_width() < 1.0

    # -- views -------------------------------------------------------------

    def shadow(self, i: int) -> Shadow:
        if self.kind[i] <= KIND_RIGHT:
            d = Disk(Point(self.aux_x[i], self.aux_y[i]), self.forest.tree_radius)
            return left_primary_shadow(d, self.cone)
        # contact wakes surface through the same induced-style view; the
        # authoritative polygon lives in the set's vertex buffers
        apex = Point(self.apex_x[i], self.apex_y[i])
        tx = max(self.top_x[i], apex.x + 2 * EPS)
        bx = max(self.bot_x[i], apex.x + 2 * EPS)
        return Shadow(
            kind="induced",
            apex=apex,
            top=SlopedSegment(apex, Point(tx, self.top_y[i]), +1),
            bottom=SlopedSegment(apex, Point(bx, self.bot_y[i]), -1),
            crossing=Point(self.aux_x[i], self.aux_y[i]),
        )

    @property
    def shadows(self) -> list[Shadow]:
        return [self.shadow(i) for i in range(self.n_shadows)]

    def to_json(self) -> str:
        recs = []
        for i in range(self.n_shadows):
            if self.kind[i] <= KIND_RIGHT:
                parents = [int(self.parent_a[i])]
            else:
                parents = [int(self.parent_a[i]), int(self.parent_b[i])]
            recs.append(
                {
                    "kind": _KIND_NAMES[int(self.kind[i])],
                    "apex": [self.apex_x[i], self.apex_y[i]],
                    "top_end": [self.top_x[i], self.top_y[i]],
                    "bottom_end": [self.bot_x[i], self.bot_y[i]],
                    "parents": parents,
                    "component_id": int(self.component[i]),
                }
            )
        return json.dumps(recs, indent=None, separators=(",", ":"))


@dataclass(frozen=True)
class Component:
    members: np.ndarray
    y_min: float
    y_max: float
    x_min: float
    x_max: float

    @property
    def lateral_extent(self) -> float:
        return self.y_max - self.y_min

    @property
    def longitudinal_extent(self) -> float:
        return self.x_max - self.x_min


def _polygon_vertices(ss: ShadowSet, idx: np.ndarray):
    """Vertex arrays (k, 4) for the polygon part of each wake; nv marks 3 or 4."""
    k = idx.size
    vx = np.empty((k, 4), dtype=np.float64)
    vy = np.empty((k, 4), dtype=np.float64)
    nv = np.where(ss.kind[idx] >= KIND_INDUCED, 4, 3)
    vx[:, 0] = ss.apex_x[idx]
    vy[:, 0] = ss.apex_y[idx]
    vx[:, 1] = ss.top_x[idx]
    vy[:, 1] = ss.top_y[idx]
    vx[:, 3] = ss.bot_x[idx]
    vy[:, 3] = ss.bot_y[idx]
    # induced: crossing point closes the parallelogram; primary: unused slot
    vx[:, 2] = np.where(nv == 4, ss.aux_x[idx], ss.top_x[idx])
    vy[:, 2] = np.where(nv == 4, ss.aux_y[idx], ss.top_y[idx])
    con = np.nonzero(ss.kind[idx] == KIND_CONTACT)[0]
    if con.size:
        # contact wakes overlap-test through their bounding boxes, which
        # errs toward merging; their exact hull is in the vertex buffers
        bb = ss._cbox[idx[con] - ss._contact_base]
        vx[con, 0] = bb[:, 0]
        vy[con, 0] = bb[:, 2]
        vx[con, 1] = bb[:, 0]
        vy[con, 1] = bb[:, 3]
        vx[con, 2] = bb[:, 1]
        vy[con, 2] = bb[:, 3]
        vx[con, 3] = bb[:, 1]
        vy[con, 3] = bb[:, 2]
    return vx, vy, nv


def _masked_minmax(p: np.ndarray, nv: np.ndarray):
    lo3 = np.minimum.reduce([p[:, 0], p[:, 1], p[:, 3]])
    hi3 = np.maximum.reduce([p[:, 0], p[:, 1], p[:, 3]])
    lo = np.where(nv == 4, np.minimum(lo3, p[:, 2]), lo3)
    hi = np.where(nv == 4, np.maximum(hi3, p[:, 2]), hi3)
    return lo, hi


def _disk_poly_dist(cx, cy, vx, vy, nv) -> np.ndarray:
    """Distance from centers to convex polygons (0 when inside)."""
    k = cx.size
    dist = np.full(k, np.inf)
    inside = np.ones(k, dtype=bool)
    for e in range(4):
        active = (nv == 4) | (e != 2)
        x1 = vx[:, e]
        y1 = vy[:, e]
        nxt = (e + 1) % 4
        # triangles skip slot 2: edge from 1 jumps to 3
        if e == 1:
            x2 = np.where(nv == 4, vx[:, 2], vx[:, 3])
            y2 = np.where(nv == 4, vy[:, 2], vy[:, 3])
        else:
            x2 = vx[:, nxt]
            y2 = vy[:, nxt]
        ex = x2 - x1
        ey = y2 - y1
        # clockwise vertex order: inside means cross products stay nonpositive
        cross = ex * (cy - y1) - ey * (cx - x1)
        inside &= np.where(active, cross <= EPS, True)
        L2 = ex * ex + ey * ey
        t = np.clip(((cx - x1) * ex + (cy - y1) * ey) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
        d = np.hypot(cx - (x1 + t * ex), cy - (y1 + t * ey))
        dist = np.where(active, np.minimum(dist, d), dist)
    return np.where(inside, 0.0, dist)


def build_shadow_set(f: Forest, nu: float, clip_x: float | None = None) -> ShadowSet:
    """Run the wake cascade on a forest to its fixed point.

    ``clip_x`` stops the leftward recursion: wakes whose apex falls left
    of it are kept (clipped at that line) but pair no further.  The
    default sits one wake length left of the window, far enough that
    in-window queries are unaffected.
    """
    cone = cone_params(nu)
    if clip_x is None:
        clip_x = -f.tree_radius / cone.sin_half
    ss = ShadowSet(f, nu, clip_x)
    ss._build()
    return ss
