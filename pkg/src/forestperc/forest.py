"""Random forests: homogeneous Poisson tree fields on a rectangular window.

Coordinates follow the flight convention: x is longitudinal (along the
direction of travel, in ``[0, length]``), y is lateral (in
``[0, width]``).  Trees are disks of one common radius whose centers
form a Poisson point process of intensity ``density`` per unit area.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .rng import substream

_HEADER_RE = re.compile(
    r"#\s*forest\s+v1\s*,\s*w=(?P<w>[^,]+)\s*,\s*l=(?P<l>[^,]+)\s*,"
    r"\s*r=(?P<r>[^,]+)\s*,\s*rho=(?P<rho>[^,]+)\s*,\s*seed=(?P<seed>.+?)\s*$"
)


class ForestFormatError(ValueError):
    """Raised for malformed forest files; carries the offending line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Window:
    """Rectangular domain, ``width`` lateral (y) by ``length`` longitudinal (x)."""

    width: float
    length: float

    def __post_init__(self) -> None:
        for name, v in (("width", self.width), ("length", self.length)):
            if not (isinstance(v, (int, float)) and math.isfinite(v)) or v <= 0:
                raise ValueError(f"Window {name} must be positive and finite, got {v!r}")

    @property
    def area(self) -> float:
        return self.width * self.length


@dataclass(frozen=True)
class Forest:
    """One realization of a tree field.

    ``centers`` is an (n, 2) float64 array of (x, y) positions, frozen
    read-only.  ``density`` is the intensity the realization was drawn
    at (the realized count fluctuates around ``density * area``).
    ``mixed_branch`` records which branch a two-component mixture took
    (0 or 1) and stays None for plain Poisson draws.
    """

    window: Window
    tree_radius: float
    centers: np.ndarray
    density: float
    seed: int
    mixed_branch: int | None = field(default=None)

    def __post_init__(self) -> None:
        if not math.isfinite(self.tree_radius) or self.tree_radius <= 0:
            raise ValueError(f"tree_radius must be positive, got {self.tree_radius!r}")
        if not math.isfinite(self.density) or self.density < 0:
            raise ValueError(f"density must be nonnegative, got {self.density!r}")
        arr = np.array(self.centers, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"centers must have shape (n, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("centers must be finite")
        tol = 1e-9 * max(1.0, self.window.length, self.window.width)
        if arr.size and (
            arr[:, 0].min() < -tol
            or arr[:, 0].max() > self.window.length + tol
            or arr[:, 1].min() < -tol
            or arr[:, 1].max() > self.window.width + tol
        ):
            raise ValueError("centers must lie inside the window")
        arr.setflags(write=False)
        object.__setattr__(self, "centers", arr)

    @property
    def n_trees(self) -> int:
        return self.centers.shape[0]

    @property
    def expected_count(self) -> float:
        return self.density * self.window.area


def sample_poisson_forest(rho: float, window: Window, r: float, seed: int) -> Forest:
    """Draw one Poisson forest of intensity ``rho`` on ``window``.

    The count comes from the generator's built-in Poisson sampler
    (product-of-uniforms below mean 10, transformed rejection above) and
    positions are uniform on the window; both read the dedicated
    "forest" substream of ``seed``, so a seed pins the realization
    exactly.
    """
    if not math.isfinite(rho) or rho < 0:
        raise ValueError(f"density must be nonnegative, got {rho!r}")
    rng = substream(seed, "forest")
    n = int(rng.poisson(rho * window.area))
    pos = rng.random((n, 2))
    pos[:, 0] *= window.length
    pos[:, 1] *= window.width
    return Forest(window=window, tree_radius=r, centers=pos, density=rho, seed=seed)


def sample_mixed_forest(
    rho1: float, rho2: float, q: float, window: Window, r: float, seed: int
) -> Forest:
    """Two-component mixture: intensity ``rho1`` with probability ``q``, else ``rho2``.

    The branch indicator reads its own substream, so the forest drawn on
    a given branch equals `sample_poisson_forest` of that intensity with
    the same seed.  The chosen branch is recorded on the result (0 for
    ``rho1``, 1 for ``rho2``).  The mixture is a canonical non-ergodic
    field: each realization looks homogeneous, yet ensemble averages mix
    the two intensities.
    """
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"mixture weight must be in [0, 1], got {q!r}")
    branch = 0 if substream(seed, "mixed-branch").random() < q else 1
    rho = rho1 if branch == 0 else rho2
    f = sample_poisson_forest(rho, window, r, seed)
    return Forest(
        window=f.window,
        tree_radius=f.tree_radius,
        centers=f.centers,
        density=f.density,
        seed=f.seed,
        mixed_branch=branch,
    )


def scale_forest(f: Forest, scale_x: float, scale_y: float) -> Forest:
    """Stretch a realization by ``scale_x`` longitudinally, ``scale_y`` laterally.

    Stretching a Poisson process of intensity ``rho`` yields a Poisson
    process of intensity ``rho / (scale_x * scale_y)`` on the stretched
    window; the tree radius is left untouched.
    """
    for name, s in (("scale_x", scale_x), ("scale_y", scale_y)):
        if not math.isfinite(s) or s <= 0:
            raise ValueError(f"{name} must be positive, got {s!r}")
    pos = np.array(f.centers, copy=True)
    pos[:, 0] *= scale_x
    pos[:, 1] *= scale_y
    return Forest(
        window=Window(width=f.window.width * scale_y, length=f.window.length * scale_x),
        tree_radius=f.tree_radius,
        centers=pos,
        density=f.density / (scale_x * scale_y),
        seed=f.seed,
        mixed_branch=f.mixed_branch,
    )


def save_forest(f: Forest, path: str) -> None:
    """Write a forest as CSV: one header line, then an ``x,y`` row per tree.

    Floats are emitted with 17 significant digits, which round-trips
    IEEE doubles exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "# forest v1, w=%s, l=%s, r=%s, rho=%s, seed=%d\n"
            % (
                format(f.window.width, ".17g"),
                format(f.window.length, ".17g"),
                format(f.tree_radius, ".17g"),
                format(f.density, ".17g"),
                f.seed,
            )
        )
        for x, y in f.centers:
            fh.write("%s,%s\n" % (format(x, ".17g"), format(y, ".17g")))


def load_forest(path: str) -> Forest:
    """Read a forest written by `save_forest`; bit-exact round trip."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ForestFormatError(path, 1, "empty file, expected header")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ForestFormatError(path, 1, f"bad header: {lines[0]!r}")
    try:
        w = float(m.group("w"))
        length = float(m.group("l"))
        r = float(m.group("r"))
        rho = float(m.group("rho"))
        seed = int(m.group("seed"))
    except ValueError as exc:
        raise ForestFormatError(path, 1, f"bad header value: {exc}") from None
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ForestFormatError(path, i, f"expected 'x,y', got {line!r}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ForestFormatError(path, i, f"bad coordinate in {line!r}") from None
    centers = np.array(rows, dtype=np.float64).reshape(len(rows), 2)
    try:
        return Forest(
            window=Window(width=w, length=length),
            tree_radius=r,
            centers=centers,
            density=rho,
            seed=seed,
        )
    except ValueError as exc:
        raise ForestFormatError(path, 1, str(exc)) from None
