"""Command-line interface binding the toolkit together.

Two-level subcommands over the library modules: forest sampling and
inspection, shadow construction and rendering, the sweep oracle,
lattice and continuum threshold estimators, analytic speed bounds, and
the phase-diagram harness.  Reports that carry structure are printed as
JSON; tables as CSV; pictures as SVG.

Exit codes: 0 on success, 1 on validation errors (bad arguments or
malformed inputs), 2 on I/O failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import continuum as continuum_mod
from . import experiment as experiment_mod
from . import lattice as lattice_mod
from . import render as render_mod
from . import sweep_oracle as oracle_mod
from .forest import (
    Forest,
    Window,
    load_forest,
    sample_mixed_forest,
    sample_poisson_forest,
    save_forest,
)
from .geometry import Point
from .shadow import build_shadow_set

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json_report(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2), out)


def _forest_from_args(ns) -> Forest:
    if ns.forest:
        return load_forest(ns.forest)
    if ns.rho is None:
        raise ValueError("either --forest or --rho is required")
    window = Window(width=ns.width, length=ns.length)
    if ns.rho2 is not None:
        return sample_mixed_forest(ns.rho, ns.rho2, ns.q, window, ns.r, ns.seed)
    return sample_poisson_forest(ns.rho, window, ns.r, ns.seed)


def _add_forest_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--forest", metavar="PATH", help="load a saved forest file")
    p.add_argument("--rho", type=float, help="tree density for a fresh sample")
    p.add_argument("--rho2", type=float, help="second mixture density")
    p.add_argument("--q", type=float, default=0.5, help="mixture weight of --rho")
    p.add_argument("--width", type=float, default=40.0, help="window width")
    p.add_argument("--length", type=float, default=40.0, help="window length")
    p.add_argument("--r", type=float, default=1.0, help="tree radius")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--config", metavar="PATH", help="experiment config file")
    p.add_argument("--out", metavar="PATH", help="output path (default stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")


# ---------------------------------------------------------------------------
# handlers


def _cmd_forest_gen(ns) -> int:
    f = _forest_from_args(ns)
    if ns.out:
        save_forest(f, ns.out)
    else:
        save_forest(f, "/dev/stdout")
    return EXIT_OK


def _cmd_forest_show(ns) -> int:
    f = load_forest(ns.path)
    report = {
        "n_trees": f.n_trees,
        "window": {"width": f.window.width, "length": f.window.length},
        "tree_radius": f.tree_radius,
        "density": f.density,
        "seed": f.seed,
        "mixed_branch": f.mixed_branch,
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_shadow_build(ns) -> int:
    f = _forest_from_args(ns)
    s = build_shadow_set(f, ns.nu)
    if ns.out:
        _emit(s.to_json(), ns.out)
    report = {
        "n_shadows": s.n_shadows,
        "n_primary": s.n_primary,
        "n_induced": s.n_induced + s.n_contact,
        "n_components": int(np.unique(s.component).size),
        "max_normalized_width": s.max_normalized_width(),
        "crossing_exists": s.crossing_exists(),
    }
    _json_report(report, None)
    return EXIT_OK


def _cmd_shadow_render(ns) -> int:
    f = _forest_from_args(ns)
    out = ns.out or "shadow.svg"
    render_mod.render_shadow_svg(f, ns.nu, out)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_shadow_query(ns) -> int:
    f = _forest_from_args(ns)
    s = build_shadow_set(f, ns.nu)
    doomed = s.is_doomed(Point(ns.x, ns.y))
    _json_report({"x": ns.x, "y": ns.y, "doomed": doomed}, ns.out)
    return EXIT_OK


def _cmd_oracle_compare(ns) -> int:
    window = Window(width=ns.width, length=ns.length)
    rho = ns.trees / window.area
    rng = np.random.default_rng(ns.seed)
    agreements = []
    crossing_matches = 0
    for t in range(ns.trials):
        f = sample_poisson_forest(rho, window, ns.r, seed=ns.seed + t)
        s = build_shadow_set(f, ns.nu)
        pts = np.column_stack(
            [
                rng.uniform(-0.25 * window.length, window.length, ns.points),
                rng.uniform(0.0, window.width, ns.points),
            ]
        )
        geo = s.classify_points(pts)
        orc = oracle_mod.oracle_classify(pts, f, ns.nu, dx=ns.dx)
        agreements.append(float(np.mean(geo == orc)))
        crossing_matches += s.crossing_exists() == oracle_mod.oracle_crossing(f, ns.nu)
    report = {
        "trials": ns.trials,
        "points_per_trial": ns.points,
        "mean_agreement": float(np.mean(agreements)),
        "min_agreement": float(np.min(agreements)),
        "crossing_match_fraction": crossing_matches / ns.trials,
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_oracle_survival(ns) -> int:
    f = _forest_from_args(ns)
    y0s = np.linspace(0.0, f.window.width, ns.starts)
    depths = oracle_mod.survival_depths(f, ns.nu, y0s, dx=ns.dx)
    report = {
        "starts": ns.starts,
        "mean_depth": float(np.mean(depths)),
        "median_depth": float(np.median(depths)),
        "max_depth": float(np.max(depths)),
        "censored_fraction": float(np.mean(depths >= f.window.length)),
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_lattice_estimate(ns) -> int:
    est = lattice_mod.estimate_threshold(
        ns.graph,
        ns.directed,
        ns.mode,
        depth=ns.depth,
        trials=ns.trials,
        tol=ns.tol,
        seed=ns.seed,
    )
    report = {
        "graph": est.graph,
        "directed": est.directed,
        "mode": est.mode,
        "depth": est.depth,
        "width": est.width,
        "trials": est.trials,
        "estimate": est.estimate,
        "half_width": est.half_width,
        "converged": est.converged,
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_lattice_trial(ns) -> int:
    spec = lattice_mod.LatticeSpec(ns.graph, ns.directed, ns.mode, ns.depth, ns.p)
    res = lattice_mod.percolate_trial(spec, ns.seed, trial=ns.trial)
    report = {
        "crossed": res.crossed,
        "cluster_size": res.cluster_size,
        "path_length": None if res.path is None else len(res.path),
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_continuum_estimate(ns) -> int:
    est = continuum_mod.estimate_critical_degree(
        ns.shape,
        window_multiple=ns.window_multiple,
        trials=ns.trials,
        tol=ns.tol,
        seed=ns.seed,
    )
    report = {
        "shape": est.shape,
        "window_multiple": est.window_multiple,
        "trials": est.trials,
        "estimate": est.estimate,
        "half_width": est.half_width,
        "converged": est.converged,
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_continuum_trial(ns) -> int:
    side = ns.window_multiple
    size = 0.5 if ns.shape == "disk" else 1.0
    spec = continuum_mod.GilbertSpec(
        ns.shape,
        ns.degree / continuum_mod.GilbertSpec(
            ns.shape, 1.0, Window(side, side), size
        ).connection_kernel_area,
        Window(side, side),
        size,
    )
    comps = continuum_mod.occupied_components(spec, ns.seed)
    report = {
        "degree": ns.degree,
        "n_points": int(comps.labels.size),
        "n_components": comps.count,
        "spanning": bool(comps.spanning.any()),
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _cmd_bounds_table(ns) -> int:
    cfg = bounds_mod.BoundConfig(p_hex_site=ns.p_hex_site, d_crit_square=ns.d_crit)
    rows = bounds_mod.phase_boundary_table(
        ns.rho_min, ns.rho_max, r=ns.r, config=cfg, samples=ns.samples
    )
    _emit(bounds_mod.phase_boundary_csv(rows), ns.out)
    return EXIT_OK


def _cmd_bounds_eval(ns) -> int:
    cfg = bounds_mod.BoundConfig(p_hex_site=ns.p_hex_site, d_crit_square=ns.d_crit)
    sub = bounds_mod.sub_critical_condition(ns.rho, ns.r, ns.nu, cfg)
    sup = bounds_mod.super_critical_condition(ns.rho, ns.r, ns.nu, cfg)
    if sub:
        verdict = "sub-critical: infinite collision-free flight certified"
    elif sup:
        verdict = "super-critical: blocked flight certified"
    else:
        verdict = "neither certificate applies"
    b = bounds_mod.speed_bounds(ns.rho, ns.r, cfg)
    report = {
        "rho": ns.rho,
        "r": ns.r,
        "nu": ns.nu,
        "sub_critical": sub,
        "super_critical": sup,
        "verdict": verdict,
        "nu_lower": b.nu_lower,
        "nu_upper": b.nu_upper,
    }
    _json_report(report, ns.out)
    return EXIT_OK


def _phase_config(ns) -> experiment_mod.ExperimentConfig:
    if ns.config:
        return experiment_mod.load_config(ns.config)
    if ns.preset == "paper":
        return experiment_mod.paper_config(master_seed=ns.seed)
    return experiment_mod.desk_config(master_seed=ns.seed)


def _cmd_phase_run(ns) -> int:
    cfg = _phase_config(ns)
    table = experiment_mod.run_phase_diagram(
        cfg, checkpoint_dir=ns.checkpoint_dir, threads=ns.threads
    )
    _emit(experiment_mod.phase_table_csv(table), ns.out)
    if ns.full:
        out_dir = os.path.dirname(ns.out) if ns.out else "."
        written = experiment_mod.write_sample_files(table, out_dir)
        print(f"wrote {len(written)} sample files to {out_dir}", file=sys.stderr)
    return EXIT_OK


def _cmd_phase_plot(ns) -> int:
    with open(ns.table, "r", encoding="utf-8") as fh:
        table = experiment_mod.load_phase_csv(fh.read())
    out = ns.out or "phase.svg"
    render_mod.render_phase_svg(table, out=out)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="forestperc", description=__doc__.splitlines()[0])
    top = root.add_subparsers(dest="group", metavar="GROUP")

    def leaf(group, name, func, help_text):
        p = group.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        _add_common(p)
        return p

    forest = top.add_parser("forest", help="sample and inspect tree fields")
    fsub = forest.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(fsub, "gen", _cmd_forest_gen, "sample a forest and write it as CSV")
    _add_forest_source(p)
    p = leaf(fsub, "show", _cmd_forest_show, "summarize a saved forest file")
    p.add_argument("path", help="forest file")

    shadow = top.add_parser("shadow", help="wake construction and queries")
    ssub = shadow.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(ssub, "build", _cmd_shadow_build, "build the shadow set, print stats")
    _add_forest_source(p)
    p.add_argument("--nu", type=float, required=True, help="vehicle speed")
    p = leaf(ssub, "render", _cmd_shadow_render, "draw forest and shadows as SVG")
    _add_forest_source(p)
    p.add_argument("--nu", type=float, required=True, help="vehicle speed")
    p = leaf(ssub, "query", _cmd_shadow_query, "classify one start point")
    _add_forest_source(p)
    p.add_argument("--nu", type=float, required=True, help="vehicle speed")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)

    oracle = top.add_parser("oracle", help="interval-sweep ground truth")
    osub = oracle.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(osub, "compare", _cmd_oracle_compare, "agreement with the shadow set")
    p.add_argument("--trees", type=int, default=20, help="expected trees per window")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--points", type=int, default=1000, help="query points per trial")
    p.add_argument("--width", type=float, default=40.0)
    p.add_argument("--length", type=float, default=40.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--dx", type=float, default=None, help="sweep step")
    p = leaf(osub, "survival", _cmd_oracle_survival, "left-edge survival depths")
    _add_forest_source(p)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--dx", type=float, default=None)

    lattice = top.add_parser("lattice", help="discrete percolation estimators")
    lsub = lattice.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(lsub, "estimate", _cmd_lattice_estimate, "bisect for the threshold")
    p.add_argument("--graph", choices=("square", "hexagonal"), default="square")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--mode", choices=("site", "bond"), default="site")
    p.add_argument("--depth", type=int, default=256)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--tol", type=float, default=0.005)
    p = leaf(lsub, "trial", _cmd_lattice_trial, "run one seeded trial")
    p.add_argument("--graph", choices=("square", "hexagonal"), default="square")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--mode", choices=("site", "bond"), default="site")
    p.add_argument("--depth", type=int, default=256)
    p.add_argument("--p", type=float, required=True, help="open probability")
    p.add_argument("--trial", type=int, default=0)

    continuum = top.add_parser("continuum", help="Gilbert-model estimators")
    csub = continuum.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(csub, "estimate", _cmd_continuum_estimate, "bisect for the critical degree")
    p.add_argument("--shape", choices=("disk", "square"), default="disk")
    p.add_argument("--window-multiple", type=float, default=40.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--tol", type=float, default=0.05)
    p = leaf(csub, "trial", _cmd_continuum_trial, "one seeded realization")
    p.add_argument("--shape", choices=("disk", "square"), default="disk")
    p.add_argument("--degree", type=float, required=True, help="mean degree")
    p.add_argument("--window-multiple", type=float, default=40.0)

    bounds = top.add_parser("bounds", help="analytic speed bounds")
    bsub = bounds.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(bsub, "table", _cmd_bounds_table, "bound curves on a density range")
    p.add_argument("--rho-min", type=float, default=0.001)
    p.add_argument("--rho-max", type=float, default=0.02)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--p-hex-site", type=float, default=bounds_mod.DEFAULT_P_HEX_SITE)
    p.add_argument("--d-crit", type=float, default=bounds_mod.DEFAULT_D_CRIT_SQUARE)
    p = leaf(bsub, "eval", _cmd_bounds_eval, "which certificate holds at (rho, r, nu)")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--p-hex-site", type=float, default=bounds_mod.DEFAULT_P_HEX_SITE)
    p.add_argument("--d-crit", type=float, default=bounds_mod.DEFAULT_D_CRIT_SQUARE)

    phase = top.add_parser("phase", help="phase-diagram harness")
    psub = phase.add_subparsers(dest="cmd", metavar="CMD")
    p = leaf(psub, "run", _cmd_phase_run, "run the grid, write the CSV")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p.add_argument("--checkpoint-dir", metavar="DIR", help="resumable point cache")
    p.add_argument("--full", action="store_true", help="also write per-point samples")
    p = leaf(psub, "plot", _cmd_phase_plot, "render a phase CSV as SVG")
    p.add_argument("table", help="phase CSV file")

    return root


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if not hasattr(ns, "func"):
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        return ns.func(ns)
    except (ValueError, KeyError) as exc:
        print(f"forestperc: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"forestperc: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
