"""Monte-Carlo phase-diagram harness over forest/wake realizations.

The observable is the normalized maximum width: build the wake-shadow
set of a sampled forest, take the largest lateral extent over occupied
shadow components, divide by the window width.  Values near 0 mean
isolated wakes, values near 1 mean a component as wide as the window
(no crossing corridor survives).  A phase point fixes (density, speed)
and repeats the measurement over seeded trials; a phase table sweeps a
density-by-speed grid.

Determinism contract: every sample is a pure function of the scalar
trial seed, which is derived from (master seed, density, speed, trial
index) alone.  Aggregation is in trial order, so worker counts and
checkpoint resumes never change the resulting table, byte for byte.

Window shape: the longitudinal length is tied to the density through
``length = expected_trees / (density * width)``, keeping the expected
tree count constant across a density sweep.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from zlib import crc32

import numpy as np

from .bounds import BoundConfig
from .forest import Window, sample_poisson_forest
from .shadow import build_shadow_set

log = logging.getLogger(__name__)

CONFIG_VERSION = 1
PHASE_CSV_HEADER = "rho,nu,trials,mean,p10,p90"


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep parameters: window, trials, grids, seed, bound constants.

    ``width`` is the lateral window size; the longitudinal length per
    density follows from ``expected_trees`` (see module docstring).
    Grids must be strictly increasing so that rows and columns of the
    table are well-ordered for interpolation and plotting.
    """

    width: float
    expected_trees: float
    trials: int
    rho_grid: tuple[float, ...]
    nu_grid: tuple[float, ...]
    tree_radius: float = 1.0
    master_seed: int = 0
    bounds: BoundConfig = field(default_factory=BoundConfig)

    def __post_init__(self) -> None:
        for name in ("width", "expected_trees", "tree_radius"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)) or v <= 0:
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if not (isinstance(self.master_seed, int) and self.master_seed >= 0):
            raise ValueError(f"master_seed must be a non-negative integer, got {self.master_seed!r}")
        for name in ("rho_grid", "nu_grid"):
            grid = getattr(self, name)
            object.__setattr__(self, name, tuple(float(g) for g in grid))
            grid = getattr(self, name)
            if len(grid) == 0:
                raise ValueError(f"{name} must be non-empty")
            if not all(math.isfinite(g) and g > 0 for g in grid):
                raise ValueError(f"{name} entries must be positive and finite, got {grid!r}")
            if not all(a < b for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} must be strictly increasing, got {grid!r}")

    def window_for(self, rho: float) -> Window:
        """Window at density ``rho``; length keeps the expected count fixed."""
        return Window(self.width, self.expected_trees / (rho * self.width))

    def to_json(self) -> str:
        payload = {
            "version": CONFIG_VERSION,
            "width": self.width,
            "expected_trees": self.expected_trees,
            "trials": self.trials,
            "rho_grid": list(self.rho_grid),
            "nu_grid": list(self.nu_grid),
            "tree_radius": self.tree_radius,
            "master_seed": self.master_seed,
            "bounds": {
                "p_hex_site": self.bounds.p_hex_site,
                "d_crit_square": self.bounds.d_crit_square,
            },
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"config is not valid JSON: {e}") from e
        if not isinstance(payload, dict):
            raise ValueError("config must be a JSON object")
        version = payload.get("version")
        if version != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {version!r}, expected {CONFIG_VERSION}")
        known = {
            "version", "width", "expected_trees", "trials", "rho_grid",
            "nu_grid", "tree_radius", "master_seed", "bounds",
        }
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for key in ("width", "expected_trees", "trials", "rho_grid", "nu_grid",
                    "tree_radius", "master_seed"):
            if key in payload:
                kwargs[key] = payload[key]
        for key in ("rho_grid", "nu_grid"):
            if key in kwargs:
                if not isinstance(kwargs[key], list):
                    raise ValueError(f"{key} must be a JSON array")
                kwargs[key] = tuple(kwargs[key])
        if "bounds" in payload:
            b = payload["bounds"]
            if not isinstance(b, dict) or set(b) - {"p_hex_site", "d_crit_square"}:
                raise ValueError(f"bounds must be an object with p_hex_site/d_crit_square, got {b!r}")
            kwargs["bounds"] = BoundConfig(**b)
        missing = {"width", "expected_trees", "trials", "rho_grid", "nu_grid"} - set(kwargs)
        if missing:
            raise ValueError(f"config is missing required keys: {', '.join(sorted(missing))}")
        return cls(**kwargs)


def desk_config(**overrides) -> ExperimentConfig:
    """Small sweep sized for interactive runs: 200-wide window, 8k trees.

    The speed grid brackets the width transition of every density row:
    row crossings sit near speed ~ 0.6 / density, so the grid spans a
    factor of ~14 around the middle row's transition.
    """
    base = dict(
        width=200.0,
        expected_trees=8000.0,
        trials=50,
        rho_grid=(0.003, 0.01, 0.017),
        nu_grid=(12.0, 16.0, 20.0, 25.0, 30.0, 35.0, 42.0, 60.0, 85.0, 120.0, 170.0),
        tree_radius=1.0,
        master_seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def paper_config(**overrides) -> ExperimentConfig:
    """Full-size sweep: 500-wide window, 50k trees, 200 trials per point."""
    base = dict(
        width=500.0,
        expected_trees=50000.0,
        trials=200,
        rho_grid=(0.003, 0.0045, 0.0065, 0.01, 0.013, 0.017),
        nu_grid=(10.0, 13.0, 17.0, 22.0, 29.0, 38.0, 50.0, 65.0, 85.0, 110.0, 145.0, 190.0, 250.0),
        tree_radius=1.0,
        master_seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_json(fh.read())


def save_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json())


@dataclass(frozen=True)
class PhasePoint:
    """Samples and summary statistics at one (density, speed) pair."""

    rho: float
    nu: float
    trials: int
    samples: tuple[float, ...]
    mean: float
    p10: float
    p90: float

    def __post_init__(self) -> None:
        if len(self.samples) != self.trials:
            raise ValueError(
                f"sample count {len(self.samples)} does not match trials {self.trials}"
            )
        if any(s < 0 for s in self.samples):
            raise ValueError("samples must be non-negative")
        if self.p10 > self.p90:
            raise ValueError(f"p10 {self.p10} exceeds p90 {self.p90}")

    @property
    def std_error(self) -> float:
        """Standard error of the mean (sample standard deviation / sqrt n)."""
        if self.trials < 2:
            return float("inf")
        return float(np.std(self.samples, ddof=1) / math.sqrt(self.trials))


def _make_point(rho: float, nu: float, samples) -> PhasePoint:
    arr = np.asarray(samples, dtype=np.float64)
    p10, p90 = np.percentile(arr, [10.0, 90.0])
    return PhasePoint(
        rho=float(rho),
        nu=float(nu),
        trials=int(arr.size),
        samples=tuple(float(s) for s in arr),
        mean=float(arr.mean()),
        p10=float(p10),
        p90=float(p90),
    )


@dataclass(frozen=True)
class PhaseTable:
    """Row-major grid of phase points: density rows, speed columns."""

    rho_grid: tuple[float, ...]
    nu_grid: tuple[float, ...]
    points: tuple[PhasePoint, ...]

    def __post_init__(self) -> None:
        if len(self.points) != len(self.rho_grid) * len(self.nu_grid):
            raise ValueError(
                f"expected {len(self.rho_grid) * len(self.nu_grid)} points, "
                f"got {len(self.points)}"
            )

    def point(self, rho: float, nu: float) -> PhasePoint:
        i = self.rho_grid.index(rho)
        j = self.nu_grid.index(nu)
        return self.points[i * len(self.nu_grid) + j]

    def row(self, rho: float) -> tuple[PhasePoint, ...]:
        i = self.rho_grid.index(rho)
        w = len(self.nu_grid)
        return self.points[i * w:(i + 1) * w]

    def mean_grid(self) -> np.ndarray:
        """Means as a (densities, speeds) array."""
        return np.array([p.mean for p in self.points]).reshape(
            len(self.rho_grid), len(self.nu_grid)
        )


def _float_key(x: float) -> int:
    # value-keyed (not grid-index-keyed) so a point's stream survives
    # grid edits and standalone run_phase_point calls match sweep runs
    return crc32(np.float64(x).tobytes())


def _trial_seed(master_seed: int, rho: float, nu: float, trial: int) -> int:
    ss = np.random.SeedSequence(
        entropy=master_seed,
        spawn_key=(crc32(b"phase"), _float_key(rho), _float_key(nu), trial),
    )
    hi, lo = ss.generate_state(2)
    return (int(hi) << 32) | int(lo)


def _phase_sample(width: float, length: float, rho: float, r: float,
                  nu: float, seed: int) -> float:
    f = sample_poisson_forest(rho, Window(width, length), r, seed)
    return build_shadow_set(f, nu).max_normalized_width()


_WARMED = False


def _warm_kernels() -> None:
    """Trigger jit compilation in the parent before forking workers."""
    global _WARMED
    if _WARMED:
        return
    _phase_sample(10.0, 10.0, 0.05, 1.0, 2.0, 0)
    _WARMED = True


def run_phase_point(cfg: ExperimentConfig, rho: float, nu: float,
                    threads: int = 1) -> PhasePoint:
    """Measure one grid point: ``cfg.trials`` independent forests at (rho, nu).

    ``threads`` > 1 fans trials out over forked worker processes;
    results are gathered in trial order, so the point is identical for
    any worker count.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    window = cfg.window_for(rho)
    args = [
        (window.width, window.length, rho, cfg.tree_radius, nu,
         _trial_seed(cfg.master_seed, rho, nu, t))
        for t in range(cfg.trials)
    ]
    if threads == 1 or cfg.trials == 1:
        samples = [_phase_sample(*a) for a in args]
    else:
        _warm_kernels()
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=min(threads, cfg.trials),
                                 mp_context=ctx) as pool:
            samples = list(pool.map(_phase_sample, *zip(*args)))
    return _make_point(rho, nu, samples)


def _point_digest(cfg: ExperimentConfig, rho: float, nu: float) -> str:
    # covers exactly the inputs a single point's samples depend on
    payload = json.dumps(
        {
            "v": 1,
            "width": cfg.width,
            "expected_trees": cfg.expected_trees,
            "trials": cfg.trials,
            "tree_radius": cfg.tree_radius,
            "master_seed": cfg.master_seed,
            "rho": float(rho),
            "nu": float(nu),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("ascii")).hexdigest()[:16]


def _checkpoint_path(checkpoint_dir: str, rho: float, nu: float) -> str:
    return os.path.join(checkpoint_dir, f"point-rho{rho:.10g}-nu{nu:.10g}.json")


def _load_checkpoint(path: str, digest: str, rho: float, nu: float):
    if not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        log.warning("unreadable checkpoint %s (%s); recomputing", path, e)
        return None
    if payload.get("digest") != digest or payload.get("rho") != rho or payload.get("nu") != nu:
        log.warning("checkpoint %s does not match the current configuration; recomputing", path)
        return None
    samples = payload.get("samples")
    if not isinstance(samples, list):
        log.warning("checkpoint %s has no sample list; recomputing", path)
        return None
    return samples


def _store_checkpoint(path: str, digest: str, point: PhasePoint) -> None:
    payload = {
        "digest": digest,
        "rho": point.rho,
        "nu": point.nu,
        "samples": list(point.samples),
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    os.replace(tmp, path)


def run_phase_diagram(cfg: ExperimentConfig, checkpoint_dir: str | None = None,
                      threads: int = 1) -> PhaseTable:
    """Sweep the config grid; resume finished points from ``checkpoint_dir``.

    Checkpoints store raw samples (round-tripping doubles exactly), so a
    resumed table equals an uninterrupted run byte for byte.  A stale
    checkpoint, one whose digest disagrees with the current config, is
    reported and recomputed in place.
    """
    if checkpoint_dir is not None:
        os.makedirs(checkpoint_dir, exist_ok=True)
    points = []
    total = len(cfg.rho_grid) * len(cfg.nu_grid)
    for i, rho in enumerate(cfg.rho_grid):
        for j, nu in enumerate(cfg.nu_grid):
            digest = _point_digest(cfg, rho, nu)
            point = None
            if checkpoint_dir is not None:
                path = _checkpoint_path(checkpoint_dir, rho, nu)
                samples = _load_checkpoint(path, digest, rho, nu)
                if samples is not None:
                    point = _make_point(rho, nu, samples)
            if point is None:
                point = run_phase_point(cfg, rho, nu, threads=threads)
                if checkpoint_dir is not None:
                    _store_checkpoint(path, digest, point)
            points.append(point)
            log.info(
                "phase point %d/%d rho=%g nu=%g mean=%.4f",
                i * len(cfg.nu_grid) + j + 1, total, rho, nu, point.mean,
            )
    return PhaseTable(cfg.rho_grid, cfg.nu_grid, tuple(points))


def phase_table_csv(table: PhaseTable) -> str:
    """Render a table as CSV with fixed float formatting (run-stable bytes)."""
    lines = [PHASE_CSV_HEADER]
    for p in table.points:
        lines.append(
            f"{p.rho:.10g},{p.nu:.10g},{p.trials},"
            f"{p.mean:.10g},{p.p10:.10g},{p.p90:.10g}"
        )
    return "\n".join(lines) + "\n"


def load_phase_csv(text: str) -> PhaseTable:
    """Parse `phase_table_csv` output back into a table (without samples).

    Sample tuples are not stored in the CSV; reconstructed points carry
    a degenerate sample list repeating the mean, which keeps the
    invariants satisfied for plotting-only consumers.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != PHASE_CSV_HEADER:
        raise ValueError(f"bad phase CSV header: {lines[0] if lines else ''!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise ValueError(f"bad phase CSV row: {ln!r}")
        rho, nu = float(parts[0]), float(parts[1])
        trials = int(parts[2])
        mean, p10, p90 = float(parts[3]), float(parts[4]), float(parts[5])
        rows.append((rho, nu, trials, mean, p10, p90))
    rho_grid = tuple(sorted({r[0] for r in rows}))
    nu_grid = tuple(sorted({r[1] for r in rows}))
    by_key = {(r[0], r[1]): r for r in rows}
    points = []
    for rho in rho_grid:
        for nu in nu_grid:
            if (rho, nu) not in by_key:
                raise ValueError(f"phase CSV is not a full grid: missing ({rho}, {nu})")
            _, _, trials, mean, p10, p90 = by_key[(rho, nu)]
            points.append(PhasePoint(rho, nu, trials, (mean,) * trials, mean, p10, p90))
    return PhaseTable(rho_grid, nu_grid, tuple(points))


def write_sample_files(table: PhaseTable, out_dir: str) -> list[str]:
    """One single-column CSV of raw samples per grid point."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for p in table.points:
        path = os.path.join(out_dir, f"samples-rho{p.rho:.10g}-nu{p.nu:.10g}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample\n")
            for s in p.samples:
                fh.write(f"{s:.17g}\n")
        paths.append(path)
    return paths


def crossing_speed(table: PhaseTable, rho: float, level: float = 0.5) -> float | None:
    """Speed at which a density row's mean first reaches ``level``.

    Linear interpolation between the bracketing grid speeds; None when
    the row starts at or above the level or never reaches it.
    """
    row = table.row(rho)
    means = [p.mean for p in row]
    if means[0] >= level:
        return None
    for j in range(1, len(means)):
        if means[j] >= level:
            lo, hi = table.nu_grid[j - 1], table.nu_grid[j]
            frac = (level - means[j - 1]) / (means[j] - means[j - 1])
            return float(lo + frac * (hi - lo))
    return None
