"""Interval-sweep oracle for doomed-set and survival queries.

This module answers reachability questions about the constant-speed
model by direct discretization, independent of the geometric wake
construction in `forestperc.shadow`: it propagates a set of safe (or
reachable) lateral intervals along the longitudinal axis in steps of
``dx``, dilating by ``dx / nu`` per step (the lateral slope bound) and
subtracting tree cross-sections.  It is deliberately simple and serves
as the ground truth the wake construction is checked against; accuracy
is first order in ``dx``.

A backward sweep computes safety: ``S(x)`` is the set of lateral
positions from which the vehicle can continue to ``x_from`` without
collision, so ``S(x - dx) = dilate(S(x), dx/nu)`` minus the tree
cross-sections at ``x - dx``.  A forward sweep computes reachability
from a start point and yields survival depths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .forest import Forest
from .geometry import Point

# ---------------------------------------------------------------------------
# interval-set value type (public, numpy-backed)


class IntervalSet:
    """Finite union of disjoint closed intervals, kept sorted and merged.

    Construction normalizes: intervals are sorted by lower end and
    overlapping or touching pairs are merged, so representations are
    canonical and comparisons are meaningful.
    """

    __slots__ = ("_arr",)

    def __init__(self, pairs=()):
        arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
        if arr.size:
            if not np.all(np.isfinite(arr)):
                raise ValueError("interval ends must be finite")
            if np.any(arr[:, 1] < arr[:, 0]):
                raise ValueError("interval upper end below lower end")
            arr = arr[np.argsort(arr[:, 0], kind="stable")]
            merged = [list(arr[0])]
            for lo, hi in arr[1:]:
                if lo <= merged[-1][1]:
                    merged[-1][1] = max(merged[-1][1], hi)
                else:
                    merged.append([lo, hi])
            arr = np.array(merged, dtype=np.float64)
        self._arr = arr
        self._arr.setflags(write=False)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    @classmethod
    def full(cls, lo: float, hi: float) -> "IntervalSet":
        return cls([(lo, hi)])

    @property
    def pairs(self) -> np.ndarray:
        return self._arr

    @property
    def n_intervals(self) -> int:
        return self._arr.shape[0]

    @property
    def is_empty(self) -> bool:
        return self._arr.shape[0] == 0

    @property
    def measure(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.sum(self._arr[:, 1] - self._arr[:, 0]))

    def contains(self, y: float, tol: float = 0.0) -> bool:
        a = self._arr
        if not a.size:
            return False
        i = int(np.searchsorted(a[:, 0], y + tol, side="right")) - 1
        return i >= 0 and y >= a[i, 0] - tol and y <= a[i, 1] + tol

    def dilate(self, delta: float) -> "IntervalSet":
        """Grow every interval by ``delta`` on both sides (merging as needed)."""
        if delta < 0:
            raise ValueError(f"dilation must be nonnegative, got {delta}")
        if self.is_empty:
            return IntervalSet.empty()
        grown = np.column_stack((self._arr[:, 0] - delta, self._arr[:, 1] + delta))
        return IntervalSet(grown)

    def subtract(self, other: "IntervalSet") -> "IntervalSet":
        """Set difference; the removed intervals are treated as open covers,
        so shared endpoints survive as degenerate closed points only when
        an interval is split exactly at its boundary."""
        if self.is_empty or other.is_empty:
            return IntervalSet(self._arr)
        out = []
        for lo, hi in self._arr:
            cur = lo
            for olo, ohi in other._arr:
                if ohi < cur or olo > hi:
                    continue
                if olo > cur:
                    out.append((cur, min(olo, hi)))
                cur = max(cur, ohi)
                if cur >= hi:
                    break
            if cur < hi:
                out.append((cur, hi))
        return IntervalSet(out)

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        a = self._arr
        if not a.size:
            return IntervalSet.empty()
        clipped = np.clip(a, lo, hi)
        keep = clipped[:, 1] > clipped[:, 0]
        # keep degenerate full-window edge case: clip of nonempty overlap
        keep |= (a[:, 0] <= hi) & (a[:, 1] >= lo) & (clipped[:, 1] == clipped[:, 0])
        return IntervalSet(clipped[keep])

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._arr.shape == other._arr.shape and bool(
            np.allclose(self._arr, other._arr, rtol=0.0, atol=1e-12)
        )

    def __repr__(self) -> str:
        return f"IntervalSet({self._arr.tolist()!r})"


# ---------------------------------------------------------------------------
# compiled sweep core
#
# Interval sets are (lo[], hi[], count) triples over preallocated scratch.
# All helpers keep them sorted and disjoint.


@njit(cache=True)
def _dilate_merge(los, his, m, d):
    if m == 0:
        return 0
    for i in range(m):
        los[i] -= d
        his[i] += d
    w = 0
    for i in range(1, m):
        if los[i] <= his[w]:
            if his[i] > his[w]:
                his[w] = his[i]
        else:
            w += 1
            los[w] = los[i]
            his[w] = his[i]
    return w + 1


@njit(cache=True)
def _clip_set(los, his, m, ylo, yhi):
    w = 0
    for i in range(m):
        lo = los[i] if los[i] > ylo else ylo
        hi = his[i] if his[i] < yhi else yhi
        if hi >= lo:
            los[w] = lo
            his[w] = hi
            w += 1
    return w


@njit(cache=True)
def _obstacles_at(x, tx, ty, r, i0, i1, ob_lo, ob_hi):
    """Cross-section intervals of trees i0..i1-1 at longitudinal x, sorted+merged."""
    mo = 0
    r2 = r * r
    for i in range(i0, i1):
        dxc = tx[i] - x
        h2 = r2 - dxc * dxc
        if h2 >= 0.0:
            h = math.sqrt(h2)
            ob_lo[mo] = ty[i] - h
            ob_hi[mo] = ty[i] + h
            mo += 1
    # insertion sort by lower end (active sets are small)
    for i in range(1, mo):
        lo = ob_lo[i]
        hi = ob_hi[i]
        j = i - 1
        while j >= 0 and ob_lo[j] > lo:
            ob_lo[j + 1] = ob_lo[j]
            ob_hi[j + 1] = ob_hi[j]
            j -= 1
        ob_lo[j + 1] = lo
        ob_hi[j + 1] = hi
    w = 0
    for i in range(1, mo):
        if ob_lo[i] <= ob_hi[w]:
            if ob_hi[i] > ob_hi[w]:
                ob_hi[w] = ob_hi[i]
        else:
            w += 1
            ob_lo[w] = ob_lo[i]
            ob_hi[w] = ob_hi[i]
    return w + 1 if mo > 0 else 0


@njit(cache=True)
def _subtract_sorted(los, his, m, ob_lo, ob_hi, mo, sc_lo, sc_hi):
    """los/his minus the merged obstacle set; result written back, count returned."""
    if m == 0 or mo == 0:
        return m
    w = 0
    for i in range(m):
        cur = los[i]
        hi = his[i]
        for jj in range(mo):
            if ob_hi[jj] < cur or ob_lo[jj] > hi:
                continue
            if ob_lo[jj] > cur:
                sc_lo[w] = cur
                sc_hi[w] = ob_lo[jj] if ob_lo[jj] < hi else hi
                w += 1
            if ob_hi[jj] > cur:
                cur = ob_hi[jj]
            if cur >= hi:
                break
        if cur < hi:
            sc_lo[w] = cur
            sc_hi[w] = hi
            w += 1
    for i in range(w):
        los[i] = sc_lo[i]
        his[i] = sc_hi[i]
    return w


@njit(cache=True)
def _backward_sweep(
    tx, ty, r, nu, dx, x_from, n_steps, y_lo, y_hi,
    snap_k, snap_lo, snap_hi, snap_count, max_iv,
):
    """Backward safety sweep with snapshots at the requested step indices.

    ``tx`` must be sorted ascending.  ``snap_k`` is sorted ascending;
    snapshot s of the safe set at step snap_k[s] is written into
    snap_lo/snap_hi[s, :snap_count[s]].
    """
    n = tx.size
    los = np.empty(max_iv, dtype=np.float64)
    his = np.empty(max_iv, dtype=np.float64)
    sc_lo = np.empty(max_iv, dtype=np.float64)
    sc_hi = np.empty(max_iv, dtype=np.float64)
    ob_lo = np.empty(n + 1, dtype=np.float64)
    ob_hi = np.empty(n + 1, dtype=np.float64)
    d = dx / nu

    los[0] = y_lo
    his[0] = y_hi
    m = 1
    # active tree index window [i0, i1): trees with |tx - x| <= r
    x = x_from
    i1 = np.searchsorted(tx, x + r, side="right")
    i0 = np.searchsorted(tx, x - r, side="left")
    mo = _obstacles_at(x, tx, ty, r, i0, i1, ob_lo, ob_hi)
    m = _subtract_sorted(los, his, m, ob_lo, ob_hi, mo, sc_lo, sc_hi)

    # snapshots requested at step 0
    sj = 0
    while sj < snap_k.size and snap_k[sj] == 0:
        snap_count[sj] = m
        for t in range(m):
            snap_lo[sj, t] = los[t]
            snap_hi[sj, t] = his[t]
        sj += 1

    for k in range(1, n_steps + 1):
        x = x_from - k * dx
        if m > 0:
            m = _dilate_merge(los, his, m, d)
            m = _clip_set(los, his, m, y_lo, y_hi)
        while i1 > 0 and tx[i1 - 1] > x + r:
            i1 -= 1
        while i0 > 0 and tx[i0 - 1] >= x - r:
            i0 -= 1
        mo = _obstacles_at(x, tx, ty, r, i0, i1, ob_lo, ob_hi)
        if m > 0 and mo > 0:
            m = _subtract_sorted(los, his, m, ob_lo, ob_hi, mo, sc_lo, sc_hi)
        while sj < snap_k.size and snap_k[sj] == k:
            snap_count[sj] = m
            for t in range(m):
                snap_lo[sj, t] = los[t]
                snap_hi[sj, t] = his[t]
            sj += 1
        if sj >= snap_k.size and m == 0:
            # nothing left to record and the safe set can only stay empty
            break
    return sj


@njit(cache=True)
def _forward_survival(tx, ty, r, nu, dx, start_x, x_max, y0s, depths):
    """Forward reachability per start; depth = advance until the set dies."""
    n = tx.size
    max_iv = n + 2
    los = np.empty(max_iv, dtype=np.float64)
    his = np.empty(max_iv, dtype=np.float64)
    sc_lo = np.empty(max_iv, dtype=np.float64)
    sc_hi = np.empty(max_iv, dtype=np.float64)
    ob_lo = np.empty(n + 1, dtype=np.float64)
    ob_hi = np.empty(n + 1, dtype=np.float64)
    d = dx / nu
    n_steps = int(math.ceil((x_max - start_x) / dx - 1e-12))

    for q in range(y0s.size):
        los[0] = y0s[q]
        his[0] = y0s[q]
        m = 1
        x = start_x
        i0 = np.searchsorted(tx, x - r, side="left")
        i1 = np.searchsorted(tx, x + r, side="right")
        mo = _obstacles_at(x, tx, ty, r, i0, i1, ob_lo, ob_hi)
        m = _subtract_sorted(los, his, m, ob_lo, ob_hi, mo, sc_lo, sc_hi)
        if m == 0:
            depths[q] = 0.0
            continue
        depth = 0.0
        for k in range(1, n_steps + 1):
            x = start_x + k * dx
            m = _dilate_merge(los, his, m, d)
            while i1 < n and tx[i1] <= x + r:
                i1 += 1
            while i0 < n and tx[i0] < x - r:
                i0 += 1
            mo = _obstacles_at(x, tx, ty, r, i0, i1, ob_lo, ob_hi)
            if mo > 0:
                m = _subtract_sorted(los, his, m, ob_lo, ob_hi, mo, sc_lo, sc_hi)
            if m == 0:
                break
            depth = x - start_x
        depths[q] = depth


@njit(cache=True)
def _classify_points(snap_lo, snap_hi, snap_count, snap_of_point, qy, doomed):
    for i in range(qy.size):
        s = snap_of_point[i]
        safe = False
        for t in range(snap_count[s]):
            if snap_lo[s, t] <= qy[i] <= snap_hi[s, t]:
                safe = True
                break
        doomed[i] = not safe


# ---------------------------------------------------------------------------
# public API


def default_dx(f: Forest, nu: float) -> float:
    """Step resolving both the disk scale and the cone slope."""
    if not math.isfinite(nu) or nu <= 0:
        raise ValueError(f"speed must be positive, got {nu!r}")
    return min(f.tree_radius, 1.0 / nu) / 100.0


def _sorted_trees(f: Forest):
    tx = np.ascontiguousarray(f.centers[:, 0])
    ty = np.ascontiguousarray(f.centers[:, 1])
    order = np.argsort(tx, kind="stable")
    return tx[order], ty[order]


def _check_sweep_args(nu: float, dx: float) -> None:
    if not math.isfinite(nu) or nu <= 0:
        raise ValueError(f"speed must be positive, got {nu!r}")
    if not math.isfinite(dx) or dx <= 0:
        raise ValueError(f"dx must be positive, got {dx!r}")


@dataclass(frozen=True)
class SweepResult:
    """Safe sets sampled on the sweep grid; index with `at`."""

    x_from: float
    dx: float
    sample_xs: np.ndarray
    sets: tuple

    def at(self, x: float) -> IntervalSet:
        i = int(np.argmin(np.abs(self.sample_xs - x)))
        if abs(self.sample_xs[i] - x) > 0.5 * self.dx + 1e-12:
            raise ValueError(f"x={x} not on the sampled grid")
        return self.sets[i]

    def __call__(self, x: float) -> IntervalSet:
        return self.at(x)


def _run_backward(f, nu, dx, x_from, x_to, y_lo, y_hi, sample_xs):
    tx, ty = _sorted_trees(f)
    n_steps = max(0, int(math.ceil((x_from - x_to) / dx - 1e-12)))
    ks = np.round((x_from - np.asarray(sample_xs, dtype=np.float64)) / dx).astype(np.int64)
    if np.any(ks < 0) or np.any(ks > n_steps):
        raise ValueError("sample positions fall outside the sweep range")
    order = np.argsort(ks, kind="stable")
    ks_sorted = ks[order]
    max_iv = f.n_trees + 2
    snap_lo = np.empty((len(ks_sorted), max_iv), dtype=np.float64)
    snap_hi = np.empty((len(ks_sorted), max_iv), dtype=np.float64)
    snap_count = np.zeros(len(ks_sorted), dtype=np.int64)
    _backward_sweep(
        tx, ty, float(f.tree_radius), float(nu), float(dx), float(x_from),
        n_steps, float(y_lo), float(y_hi),
        ks_sorted, snap_lo, snap_hi, snap_count, max_iv,
    )
    return order, ks_sorted, snap_lo, snap_hi, snap_count


def sweep_safe(
    f: Forest,
    nu: float,
    x_from: float,
    x_to: float,
    dx: float | None = None,
    lateral: tuple[float, float] | None = None,
    sample_xs=None,
) -> SweepResult:
    """Backward safety sweep from ``x_from`` down to ``x_to``.

    Returns the safe set sampled at ``sample_xs`` (default: every grid
    step).  ``lateral`` bounds the domain; the default pads the window
    by one width on each side, which emulates an unbounded corridor for
    in-window queries.
    """
    if dx is None:
        dx = default_dx(f, nu)
    _check_sweep_args(nu, dx)
    if x_to > x_from:
        raise ValueError(f"x_to={x_to} must not exceed x_from={x_from}")
    w = f.window.width
    y_lo, y_hi = lateral if lateral is not None else (-w, 2.0 * w)
    if sample_xs is None:
        n_steps = max(0, int(math.ceil((x_from - x_to) / dx - 1e-12)))
        sample_xs = x_from - dx * np.arange(n_steps + 1)
    sample_xs = np.asarray(sample_xs, dtype=np.float64)
    order, ks_sorted, snap_lo, snap_hi, snap_count = _run_backward(
        f, nu, dx, x_from, x_to, y_lo, y_hi, sample_xs
    )
    sets: list[IntervalSet | None] = [None] * len(sample_xs)
    for pos, oi in enumerate(order):
        c = int(snap_count[pos])
        sets[oi] = IntervalSet(np.column_stack((snap_lo[pos, :c], snap_hi[pos, :c])))
    return SweepResult(x_from=float(x_from), dx=float(dx), sample_xs=sample_xs, sets=tuple(sets))


def _classification_range(f: Forest, extra_x: float) -> float:
    hi = f.window.length
    if f.n_trees:
        hi = max(hi, float(f.centers[:, 0].max()) + f.tree_radius)
    return max(hi, extra_x)


def oracle_classify(points, f: Forest, nu: float, dx: float | None = None) -> np.ndarray:
    """Doomed flags for an (m, 2) array of query points, one shared sweep."""
    if dx is None:
        dx = default_dx(f, nu)
    _check_sweep_args(nu, dx)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.size == 0:
        return np.zeros(0, dtype=bool)
    w = f.window.width
    x_from = _classification_range(f, float(pts[:, 0].max())) + dx
    x_to = float(pts[:, 0].min())
    order, ks_sorted, snap_lo, snap_hi, snap_count = _run_backward(
        f, nu, dx, x_from, x_to, -w, 2.0 * w, pts[:, 0]
    )
    snap_of_point = np.empty(len(pts), dtype=np.int64)
    snap_of_point[order] = np.arange(len(pts))
    doomed = np.zeros(len(pts), dtype=np.bool_)
    _classify_points(snap_lo, snap_hi, snap_count, snap_of_point, np.ascontiguousarray(pts[:, 1]), doomed)
    return doomed


def oracle_is_doomed(p: Point, f: Forest, nu: float, dx: float | None = None) -> bool:
    """True when no feasible trajectory from ``p`` avoids every tree."""
    return bool(oracle_classify([(p.x, p.y)], f, nu, dx)[0])


def oracle_crossing(f: Forest, nu: float, dx: float | None = None) -> bool:
    """Corridor check: can the window be traversed left edge to right edge.

    The lateral domain is walled at the window edges, which matches the
    blocked criterion of the wake model (a wake chain as wide as the
    window is exactly what removes every corridor).
    """
    if dx is None:
        dx = default_dx(f, nu)
    _check_sweep_args(nu, dx)
    x_from = _classification_range(f, f.window.length)
    res = sweep_safe(
        f, nu, x_from=x_from, x_to=0.0, dx=dx,
        lateral=(0.0, f.window.width), sample_xs=[0.0],
    )
    return not res.at(0.0).is_empty


def survival_depths(
    f: Forest,
    nu: float,
    y0s,
    start_x: float = 0.0,
    dx: float | None = None,
    x_max: float | None = None,
) -> np.ndarray:
    """Forward survival depth for each lateral start position.

    Depth is the longitudinal advance at which the reachable set dies,
    capped at ``x_max - start_x`` (censored runs keep the cap value).
    """
    if dx is None:
        dx = default_dx(f, nu)
    _check_sweep_args(nu, dx)
    if x_max is None:
        x_max = f.window.length
    if x_max <= start_x:
        raise ValueError(f"x_max={x_max} must exceed start_x={start_x}")
    tx, ty = _sorted_trees(f)
    y0s = np.ascontiguousarray(np.asarray(y0s, dtype=np.float64).ravel())
    depths = np.empty(y0s.size, dtype=np.float64)
    _forward_survival(
        tx, ty, float(f.tree_radius), float(nu), float(dx),
        float(start_x), float(x_max), y0s, depths,
    )
    return depths


def survival_depth(
    f: Forest,
    nu: float,
    start_x: float = 0.0,
    dx: float | None = None,
    x_max: float | None = None,
):
    """Callable ``y0 -> depth`` wrapper over `survival_depths`."""

    def depth(y0: float) -> float:
        return float(survival_depths(f, nu, [y0], start_x=start_x, dx=dx, x_max=x_max)[0])

    return depth
