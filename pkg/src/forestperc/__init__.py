"""Percolation toolkit for constant-speed traversal of random disk forests.

A vehicle with fixed longitudinal speed and bounded lateral speed flies
through a Poisson field of disk obstacles.  The package constructs the
set of doomed start states exactly (wedge shadows behind trees plus the
induced funnels where shadows interact), checks it against a direct
interval-sweep oracle, estimates the discrete and continuum percolation
thresholds that bound the critical speed, and runs the Monte-Carlo
phase-diagram experiment tying everything together.
"""
from .bounds import (
    BoundConfig,
    SpeedBounds,
    phase_boundary_table,
    speed_bounds,
    sub_critical_condition,
    super_critical_condition,
)
from .continuum import DegreeEstimate, GilbertSpec, estimate_critical_degree
from .experiment import (
    ExperimentConfig,
    PhasePoint,
    PhaseTable,
    crossing_speed,
    desk_config,
    paper_config,
    phase_table_csv,
    run_phase_diagram,
    run_phase_point,
)
from .forest import (
    Forest,
    ForestFormatError,
    Window,
    load_forest,
    sample_mixed_forest,
    sample_poisson_forest,
    save_forest,
    scale_forest,
)
from .geometry import ConeParams, Disk, Point, cone_params
from .lattice import (
    LatticeSpec,
    ThresholdEstimate,
    estimate_threshold,
    induced_site_probability,
    percolate_trial,
)
from .render import render_phase_svg, render_shadow_svg
from .shadow import Shadow, ShadowSet, build_shadow_set
from .sweep_oracle import (
    IntervalSet,
    oracle_classify,
    oracle_crossing,
    oracle_is_doomed,
    survival_depth,
    survival_depths,
    sweep_safe,
)

__version__ = "0.1.0"

__all__ = [
    "BoundConfig",
    "ConeParams",
    "DegreeEstimate",
    "Disk",
    "ExperimentConfig",
    "Forest",
    "ForestFormatError",
    "GilbertSpec",
    "IntervalSet",
    "LatticeSpec",
    "PhasePoint",
    "PhaseTable",
    "Point",
    "Shadow",
    "ShadowSet",
    "SpeedBounds",
    "ThresholdEstimate",
    "Window",
    "build_shadow_set",
    "cone_params",
    "crossing_speed",
    "desk_config",
    "estimate_critical_degree",
    "estimate_threshold",
    "induced_site_probability",
    "load_forest",
    "oracle_classify",
    "oracle_crossing",
    "oracle_is_doomed",
    "paper_config",
    "percolate_trial",
    "phase_boundary_table",
    "phase_table_csv",
    "render_phase_svg",
    "render_shadow_svg",
    "run_phase_diagram",
    "run_phase_point",
    "sample_mixed_forest",
    "sample_poisson_forest",
    "save_forest",
    "scale_forest",
    "speed_bounds",
    "sub_critical_condition",
    "super_critical_condition",
    "survival_depth",
    "survival_depths",
    "sweep_safe",
]
