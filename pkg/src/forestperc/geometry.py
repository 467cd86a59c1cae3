"""Planar primitives for the constant-speed obstacle model.

A vehicle moving with fixed longitudinal speed ``nu`` and lateral speed
bounded by 1 can only steer within a cone of aperture
``alpha = 2 * atan(1 / nu)`` about the longitudinal axis, so every
reachable-set boundary in this package is a line of slope ``+1/nu`` or
``-1/nu``.  All comparisons use the absolute tolerance `EPS`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 1e-9


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        _require_finite("Point coordinate", self.x, self.y)


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float

    def __post_init__(self) -> None:
        _require_finite("Disk radius", self.radius)
        if self.radius <= 0:
            raise ValueError(f"Disk radius must be positive, got {self.radius}")

    def contains(self, p: Point, tol: float = EPS) -> bool:
        return math.hypot(p.x - self.center.x, p.y - self.center.y) <= self.radius + tol


@dataclass(frozen=True)
class SlopedSegment:
    """Directed segment along a steering-cone boundary.

    ``slope_sign`` is +1 for an ascending boundary (slope ``+1/nu``) and
    -1 for a descending one.  The segment always runs left to right, so
    ``end.x > start.x`` and the sign of ``end.y - start.y`` must match.
    Degenerate (zero-length) segments are rejected.
    """

    start: Point
    end: Point
    slope_sign: int

    def __post_init__(self) -> None:
        if self.slope_sign not in (-1, 1):
            raise ValueError(f"slope_sign must be +1 or -1, got {self.slope_sign}")
        dx = self.end.x - self.start.x
        dy = self.end.y - self.start.y
        if dx <= EPS:
            raise ValueError("segment must run left to right with positive extent")
        if self.slope_sign * dy <= -EPS:
            raise ValueError("segment direction contradicts slope_sign")

    @property
    def slope(self) -> float:
        return (self.end.y - self.start.y) / (self.end.x - self.start.x)


@dataclass(frozen=True)
class ConeParams:
    """Steering cone of a vehicle with longitudinal speed ``speed``."""

    speed: float
    half_angle: float
    sin_alpha: float

    def __post_init__(self) -> None:
        if not (0.0 < self.half_angle < 0.5 * math.pi):
            raise ValueError(f"half_angle out of range: {self.half_angle}")
        if not (0.0 < self.sin_alpha <= 1.0):
            raise ValueError(f"sin_alpha out of range: {self.sin_alpha}")

    @property
    def sin_half(self) -> float:
        # sin(atan(1/nu)) in closed form; exact at both small and large nu
        return 1.0 / math.sqrt(1.0 + self.speed * self.speed)

    @property
    def cos_half(self) -> float:
        return self.speed / math.sqrt(1.0 + self.speed * self.speed)


def cone_params(nu: float) -> ConeParams:
    """Steering-cone parameters for longitudinal speed ``nu`` > 0.

    The aperture is ``alpha = 2 * atan(1 / nu)``; the lateral-speed bound
    is 1, so boundary slopes are ``+-1/nu`` and
    ``sin(alpha) = 2 nu / (1 + nu^2)``.
    """
    if not (isinstance(nu, (int, float)) and math.isfinite(nu)) or nu <= 0:
        raise ValueError(f"speed must be a positive finite number, got {nu!r}")
    nu = float(nu)
    return ConeParams(
        speed=nu,
        half_angle=math.atan2(1.0, nu),
        sin_alpha=2.0 * nu / (1.0 + nu * nu),
    )


def segment_intersection(a: SlopedSegment, b: SlopedSegment) -> Point | None:
    """Intersection of two cone-boundary segments, or None.

    Segments of equal slope sign are treated as parallel and never
    intersect, even when collinear (use `collinear_overlap` to detect
    that case).  For opposite signs the crossing point of the two support
    lines is computed in closed form and accepted only if it lies within
    both x-extents, inclusive up to `EPS`.
    """
    if a.slope_sign == b.slope_sign:
        return None
    up = a if a.slope_sign > 0 else b
    dn = b if a.slope_sign > 0 else a
    # y = up.start.y + su*(x - up.start.x);  y = dn.start.y + sd*(x - dn.start.x)
    su = up.slope
    sd = dn.slope
    denom = su - sd
    if abs(denom) <= EPS:
        return None
    qx = (dn.start.y - up.start.y + su * up.start.x - sd * dn.start.x) / denom
    qy = up.start.y + su * (qx - up.start.x)
    for seg in (a, b):
        if qx < seg.start.x - EPS or qx > seg.end.x + EPS:
            return None
    return Point(qx, qy)


def collinear_overlap(a: SlopedSegment, b: SlopedSegment) -> bool:
    """True when two same-sign segments lie on one line and overlap in x."""
    if a.slope_sign != b.slope_sign:
        return False
    if abs(a.slope - b.slope) > EPS:
        return False
    # same support line: b.start must satisfy a's line equation
    if abs(a.start.y + a.slope * (b.start.x - a.start.x) - b.start.y) > EPS:
        return False
    lo = max(a.start.x, b.start.x)
    hi = min(a.end.x, b.end.x)
    return hi - lo >= -EPS


def tangent_point(d: Disk, cone: ConeParams, slope_sign: int, side: str) -> Point:
    """Point where a cone-boundary line of ``slope_sign`` touches disk ``d``.

    ``side`` selects the upper or lower tangent line.  The combination
    identifies which wake the line bounds: an upper ascending line and a
    lower descending line belong to the left wake of the disk, the
    mirrored pair to the right wake.  The returned point is the foot of
    the perpendicular from the center onto the chosen line and lies at
    distance ``d.radius`` from the center.
    """
    if slope_sign not in (-1, 1):
        raise ValueError(f"slope_sign must be +1 or -1, got {slope_sign}")
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    side_sign = 1.0 if side == "upper" else -1.0
    sh = cone.sin_half
    ch = cone.cos_half
    r = d.radius
    return Point(
        d.center.x - slope_sign * side_sign * r * sh,
        d.center.y + side_sign * r * ch,
    )
