"""Closed-form speed bounds from the two percolation embeddings.

Both embeddings reduce to the same dimensionless exponent
``X = rho r^2 / sin(alpha) = rho r^2 (1 + nu^2) / (2 nu)``: the
steering-lattice cells have area ``2 r^2 / sin(alpha)``, so their open
probability is ``exp(-2X)``, and the rectangle stand-ins for shadows
scale onto the unit-square continuum model at intensity ``2X``.  Flight
is certified feasible while ``X`` stays below the budget
``log(1/sqrt(p_hex_site))`` and certified blocked once ``2X`` exceeds
the unit-square critical degree.  Solving either comparison for ``nu``
gives a quadratic in ``nu`` whose larger root is the reported bound;
the smaller root belongs to the slow-flight regime where the zigzag
construction degrades, not to any physical infeasibility, and is
dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import cone_params

# Empirical directed-hexagonal site threshold from
# estimate_threshold("hexagonal", True, "site", depth=256, trials=2000);
# no sharper published value exists.  Known analytic upper bounds for
# the hexagonal lattice are (1+sqrt(33))/8 ~ 0.8431 for bond and
# sqrt(3)/2 ~ 0.8660 for site percolation, both consistent.
DEFAULT_P_HEX_SITE = 0.8398

# Critical mean degree of the unit-square continuum model (literature
# brackets 4.392..4.398; also reproduced by estimate_critical_degree).
DEFAULT_D_CRIT_SQUARE = 4.395


@dataclass(frozen=True)
class BoundConfig:
    """Threshold constants the bounds are evaluated against."""

    p_hex_site: float = DEFAULT_P_HEX_SITE
    d_crit_square: float = DEFAULT_D_CRIT_SQUARE

    def __post_init__(self) -> None:
        p = self.p_hex_site
        if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
            raise ValueError(f"p_hex_site must be in (0, 1), got {p!r}")
        d = self.d_crit_square
        if not (isinstance(d, (int, float)) and math.isfinite(d)) or d <= 0:
            raise ValueError(f"d_crit_square must be positive, got {d!r}")
        # a config violating this could declare one (rho, nu) both
        # feasible and blocked; reject it outright
        if self.sub_limit >= 0.5 * d:
            raise ValueError(
                "inconsistent thresholds: log(1/sqrt(p_hex_site)) = "
                f"{self.sub_limit:.6g} must stay below d_crit_square/2 = {0.5 * d:.6g}"
            )

    @property
    def sub_limit(self) -> float:
        """Cell-occupancy budget ``log(1/sqrt(p_hex_site))``."""
        return 0.5 * math.log(1.0 / self.p_hex_site)


def occupancy_exponent(rho: float, r: float, nu: float) -> float:
    """``rho r^2 / sin(alpha)``, the exponent both conditions compare.

    Equals the expected tree count in one steering-lattice cell halved,
    and half the intensity of the scaled unit-square rectangle model.
    """
    if not (isinstance(rho, (int, float)) and math.isfinite(rho)) or rho < 0:
        raise ValueError(f"density must be nonnegative, got {rho!r}")
    if not (isinstance(r, (int, float)) and math.isfinite(r)) or r <= 0:
        raise ValueError(f"tree radius must be positive, got {r!r}")
    return rho * r * r / cone_params(nu).sin_alpha


def sub_critical_condition(
    rho: float, r: float, nu: float, config: BoundConfig | None = None
) -> bool:
    """True when the steering lattice certifies safe flight at ``nu``.

    The induced site model percolates, and an infinite collision-free
    trajectory exists almost surely, when the cell exponent stays below
    ``log(1/sqrt(p_hex_site))``.
    """
    cfg = config if config is not None else BoundConfig()
    return occupancy_exponent(rho, r, nu) < cfg.sub_limit


def super_critical_condition(
    rho: float, r: float, nu: float, config: BoundConfig | None = None
) -> bool:
    """True when the rectangle model certifies blocked flight at ``nu``.

    The scaled unit-square model exceeds its critical degree, a spanning
    occupied component appears, and no infinite collision-free
    trajectory survives.
    """
    cfg = config if config is not None else BoundConfig()
    return 2.0 * occupancy_exponent(rho, r, nu) > cfg.d_crit_square


@dataclass(frozen=True)
class SpeedBounds:
    """Certified-feasible and certified-blocked speed bounds.

    ``nu_lower`` is None when even the slowest flight fails the
    sub-critical test (the certificate is vacuous); ``nu_upper`` is 0
    when every speed is blocked.
    """

    nu_lower: float | None
    nu_upper: float


def _upper_root(c: float) -> float:
    """Larger root of ``sin(alpha(nu)) = c``: ``(1 + sqrt(1-c^2))/c``."""
    return (1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / c


def speed_bounds(rho: float, r: float, config: BoundConfig | None = None) -> SpeedBounds:
    """Solve both conditions for the speed at fixed density and radius.

    ``sin(alpha) = 2 nu/(1+nu^2)`` peaks at 1 for ``nu = 1``, so the
    comparisons ``sin(alpha) > C`` (sub) and ``sin(alpha) < C'`` (super)
    are quadratics in ``nu``; the larger roots bound the speeds for
    which each certificate holds.  ``nu_lower <= nu_upper`` whenever
    both are defined, because the config keeps ``C > C'``.
    """
    cfg = config if config is not None else BoundConfig()
    x = occupancy_exponent(rho, r, 1.0)  # sin(alpha)=1: x = rho r^2
    c_sub = x / cfg.sub_limit
    c_sup = 2.0 * x / cfg.d_crit_square
    nu_lower = _upper_root(c_sub) if c_sub < 1.0 else None
    nu_upper = _upper_root(c_sup) if c_sup < 1.0 else 0.0
    return SpeedBounds(nu_lower=nu_lower, nu_upper=nu_upper)


def phase_boundary_table(
    rho_min: float,
    rho_max: float,
    r: float = 1.0,
    config: BoundConfig | None = None,
    samples: int = 64,
) -> list[tuple[float, float | None, float]]:
    """Both bound curves on a log-spaced density grid.

    Rows are ``(rho, nu_lower, nu_upper)`` with ``nu_lower`` None where
    the sub-critical certificate is vacuous.  Both curves decrease in
    ``rho``.
    """
    if not (0.0 < rho_min < rho_max) or not math.isfinite(rho_max):
        raise ValueError(f"need 0 < rho_min < rho_max, got {rho_min!r}, {rho_max!r}")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    cfg = config if config is not None else BoundConfig()
    lo = math.log(rho_min)
    hi = math.log(rho_max)
    rows = []
    for i in range(samples):
        rho = math.exp(lo + (hi - lo) * i / (samples - 1))
        b = speed_bounds(rho, r, cfg)
        rows.append((rho, b.nu_lower, b.nu_upper))
    return rows


def phase_boundary_csv(rows) -> str:
    """Serialize a phase-boundary table; undefined cells stay empty."""
    out = ["rho,nu_lower,nu_upper"]
    for rho, nu_lo, nu_hi in rows:
        lo = "" if nu_lo is None else format(nu_lo, ".10g")
        out.append(f"{format(rho, '.10g')},{lo},{format(nu_hi, '.10g')}")
    return "\n".join(out) + "\n"
