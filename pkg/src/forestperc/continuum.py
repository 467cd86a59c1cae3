"""Continuum percolation of congruent shapes on a rectangular window.

Disks, axis-aligned squares, or axis-aligned rectangles are centered on
the points of a Poisson process; overlapping shapes merge into occupied
components and the question is whether the vacant region still connects
the window's left and right edges.  On a finite window that reduces to
a spanning test: the vacant crossing exists exactly when no occupied
component's lateral footprint covers the full window width.

Counts are drawn by inverse transform from a dedicated substream, so
realizations of the same seed at two intensities are nested (the denser
one contains the sparser one plus extra points).  Occupancy is then
pointwise monotone in the intensity, which gives the degree estimator a
monotone empirical crossing curve to bisect on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree
from scipy.stats import poisson

from .forest import Window
from .geometry import cone_params
from .rng import substream

_SHAPES = ("disk", "square", "rectangle")


@dataclass(frozen=True)
class GilbertSpec:
    """Shape family, Poisson intensity, and window of one model.

    ``size`` is the disk radius, the square side, or an ``(a, b)`` pair
    of rectangle side lengths.  Two disks of radius s connect when their
    centers lie closer than 2s; squares of side s when both coordinate
    differences are below s; rectangles a x b when ``|dx| < a`` and
    ``|dy| < b``.  Touching boundaries are a measure-zero event and are
    counted as connected.
    """

    shape: str
    intensity: float
    window: Window
    size: float | tuple

    def __post_init__(self) -> None:
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}, got {self.shape!r}")
        lam = self.intensity
        if not (isinstance(lam, (int, float)) and math.isfinite(lam)) or lam < 0:
            raise ValueError(f"intensity must be nonnegative, got {lam!r}")
        if self.shape == "rectangle":
            try:
                a, b = self.size
            except (TypeError, ValueError):
                raise ValueError(
                    f"rectangle size must be an (a, b) pair, got {self.size!r}"
                ) from None
            for v in (a, b):
                if not (isinstance(v, (int, float)) and math.isfinite(v)) or v <= 0:
                    raise ValueError(f"rectangle sides must be positive, got {self.size!r}")
            object.__setattr__(self, "size", (float(a), float(b)))
        else:
            v = self.size
            if not (isinstance(v, (int, float)) and math.isfinite(v)) or v <= 0:
                raise ValueError(f"size must be positive, got {v!r}")
            object.__setattr__(self, "size", float(v))

    @property
    def footprint_half_extents(self) -> tuple[float, float]:
        """Half extent of one shape along x and y (disk: radius both ways)."""
        if self.shape == "disk":
            return (self.size, self.size)
        if self.shape == "square":
            return (0.5 * self.size, 0.5 * self.size)
        a, b = self.size
        return (0.5 * a, 0.5 * b)

    @property
    def connection_kernel_area(self) -> float:
        """Area of the difference kernel: expected neighbors = intensity * this.

        Disks of radius s connect within center distance 2s, so the
        kernel is a disk of radius 2s; squares of side s connect within
        coordinate offset s each way, a 2s x 2s square; rectangles
        likewise 2a x 2b.
        """
        if self.shape == "disk":
            return math.pi * (2.0 * self.size) ** 2
        if self.shape == "square":
            return 4.0 * self.size * self.size
        a, b = self.size
        return 4.0 * a * b

    @property
    def mean_degree(self) -> float:
        return self.intensity * self.connection_kernel_area


@dataclass(frozen=True)
class OccupiedComponents:
    """Connected occupied components of one realization.

    ``labels[i]`` is the component id of point i; ``extents`` rows are
    footprint bounding boxes ``(x_lo, x_hi, y_lo, y_hi)`` including the
    shape half extents; ``spanning`` flags components whose lateral
    footprint covers the window's full width.
    """

    points: np.ndarray
    labels: np.ndarray
    extents: np.ndarray
    spanning: np.ndarray

    @property
    def count(self) -> int:
        return self.extents.shape[0]


def sample_gilbert_points(spec: GilbertSpec, seed: int) -> np.ndarray:
    """Poisson centers on the window, nested across intensities.

    The count comes from inverting a single uniform against the Poisson
    law, and positions are read as a prefix of a dedicated position
    stream, so raising the intensity at a fixed seed only appends
    points.
    """
    mean = spec.intensity * spec.window.area
    if mean <= 0:
        return np.zeros((0, 2))
    u = substream(seed, "gilbert-count").random()
    n = int(poisson.ppf(u, mean))
    pts = substream(seed, "gilbert-points").random((n, 2))
    pts[:, 0] *= spec.window.length
    pts[:, 1] *= spec.window.width
    return pts


def _component_labels(spec: GilbertSpec, pts: np.ndarray) -> tuple[np.ndarray, int]:
    n = pts.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0
    if spec.shape == "disk":
        pairs = cKDTree(pts).query_pairs(2.0 * spec.size, output_type="ndarray")
    else:
        a, b = (spec.size, spec.size) if spec.shape == "square" else spec.size
        scaled = pts / np.array([a, b])
        pairs = cKDTree(scaled).query_pairs(1.0, p=np.inf, output_type="ndarray")
    graph = sparse.coo_matrix(
        (np.ones(pairs.shape[0], dtype=np.int8), (pairs[:, 0], pairs[:, 1])),
        shape=(n, n),
    )
    count, labels = csgraph.connected_components(graph, directed=False)
    return labels.astype(np.int64), count


def occupied_components(spec: GilbertSpec, seed: int) -> OccupiedComponents:
    """Sample one realization and merge overlapping shapes."""
    pts = sample_gilbert_points(spec, seed)
    return components_of_points(spec, pts)


def components_of_points(spec: GilbertSpec, pts: np.ndarray) -> OccupiedComponents:
    """Component analysis of externally supplied centers (tests, replays)."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    labels, count = _component_labels(spec, pts)
    hx, hy = spec.footprint_half_extents
    extents = np.empty((count, 4))
    if count:
        extents[:, 0] = np.full(count, np.inf)
        extents[:, 1] = np.full(count, -np.inf)
        extents[:, 2] = np.full(count, np.inf)
        extents[:, 3] = np.full(count, -np.inf)
        np.minimum.at(extents[:, 0], labels, pts[:, 0] - hx)
        np.maximum.at(extents[:, 1], labels, pts[:, 0] + hx)
        np.minimum.at(extents[:, 2], labels, pts[:, 1] - hy)
        np.maximum.at(extents[:, 3], labels, pts[:, 1] + hy)
    spanning = (extents[:, 2] <= 0.0) & (extents[:, 3] >= spec.window.width)
    return OccupiedComponents(points=pts, labels=labels, extents=extents, spanning=spanning)


def vacant_crossing(spec: GilbertSpec, seed: int) -> bool:
    """True when the vacant region joins the left and right window edges.

    Equivalent to no occupied component spanning the window laterally: a
    spanning component walls the window off, and absent one the vacancy
    percolates around every component.
    """
    return not occupied_components(spec, seed).spanning.any()


@dataclass(frozen=True)
class DegreeEstimate:
    """Critical-degree bisection output with its context."""

    shape: str
    window_multiple: float
    trials: int
    seed: int
    estimate: float
    half_width: float
    evaluations: tuple
    converged: bool


def estimate_critical_degree(
    shape: str,
    window_multiple: float = 40.0,
    trials: int = 1000,
    tol: float = 0.05,
    seed: int = 0,
    degree_max: float = 8.0,
    max_steps: int = 30,
) -> DegreeEstimate:
    """Estimate the critical mean degree by bisection.

    Works at unit connection range (disk radius 1/2, square side 1) on a
    square window of ``window_multiple`` connection diameters, bisecting
    the degree until the occupied-spanning frequency straddles 1/2.
    Nested sampling (see `sample_gilbert_points`) makes the per-trial
    blocking indicator monotone in the degree, so the empirical curve is
    a step function and bisection converges on its median crossing.
    """
    if shape not in ("disk", "square"):
        raise ValueError(f"shape must be 'disk' or 'square', got {shape!r}")
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if window_multiple <= 0:
        raise ValueError(f"window_multiple must be positive, got {window_multiple}")
    size = 0.5 if shape == "disk" else 1.0
    side = float(window_multiple)
    window = Window(width=side, length=side)
    kernel = GilbertSpec(shape, 1.0, window, size).connection_kernel_area
    evals: list[tuple[float, float]] = []

    def blocked_fraction(degree: float) -> float:
        spec = GilbertSpec(shape, degree / kernel, window, size)
        blocked = sum(
            occupied_components(spec, _trial_seed(seed, t)).spanning.any()
            for t in range(trials)
        )
        f = blocked / trials
        evals.append((degree, f))
        return f

    lo, hi = 0.0, float(degree_max)
    steps = 0
    while hi - lo > 2.0 * tol and steps < max_steps:
        mid = 0.5 * (lo + hi)
        if blocked_fraction(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
        steps += 1
    estimate = 0.5 * (lo + hi)
    converged = hi - lo <= 2.0 * tol
    delta = max(hi - lo, 0.05)
    d_lo = max(0.0, estimate - delta)
    d_hi = estimate + delta
    slope = (blocked_fraction(d_hi) - blocked_fraction(d_lo)) / (d_hi - d_lo)
    se_fraction = 0.5 / math.sqrt(trials)
    se_degree = se_fraction / slope if slope > 0 else delta
    half_width = max(tol, 0.5 * (hi - lo), se_degree)
    return DegreeEstimate(
        shape=shape,
        window_multiple=float(window_multiple),
        trials=trials,
        seed=seed,
        estimate=estimate,
        half_width=half_width,
        evaluations=tuple(evals),
        converged=converged,
    )


def _trial_seed(seed: int, trial: int) -> int:
    """Distinct integer seed per trial, stable across runs."""
    return int(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(trial,)).generate_state(1)[0]
    )


def shadow_rectangle_model(
    rho: float, r: float, nu: float, window: Window, seed: int
) -> bool:
    """Vacant crossing of the rectangle stand-in for primary shadows.

    Each tree contributes a rectangle ``r/sin(alpha/2)`` long and
    ``r/cos(alpha/2)`` wide that fits inside its shadow wedge, so a
    blocked rectangle model certifies a blocked shadow model.  Scaling
    coordinates by ``(sin(alpha/2)/r, cos(alpha/2)/r)`` maps this onto
    the unit-square model at intensity ``2 rho r^2 / sin(alpha)``, which
    is how the critical degree of the square model transfers to speed
    bounds.
    """
    if not (isinstance(rho, (int, float)) and math.isfinite(rho)) or rho < 0:
        raise ValueError(f"density must be nonnegative, got {rho!r}")
    if not (isinstance(r, (int, float)) and math.isfinite(r)) or r <= 0:
        raise ValueError(f"tree radius must be positive, got {r!r}")
    cone = cone_params(nu)
    dims = (r / cone.sin_half, r / cone.cos_half)
    spec = GilbertSpec("rectangle", rho, window, dims)
    return vacant_crossing(spec, seed)
