"""Timing and equivalence harness for the accelerated kernels.

Runs the shadow construction and point classification twice in child
processes, once with the compiled kernels and once with the pure-numpy
fallback (FORESTPERC_NUMBA=0), then reports wall times and checks that
both paths produced bit-identical wake sets and labels.  Compilation
happens on a small warm-up case so the timed sections measure steady
state.

Usage: python benchmarks/bench_kernels.py [--quick]
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

CASES = [
    # name, rho, nu, width, length
    ("sparse-slow", 0.0125, 2.0, 40.0, 40.0),
    ("sparse-fast", 0.0125, 30.0, 40.0, 40.0),
    ("dense-mid", 0.01, 30.0, 100.0, 400.0),
    ("dense-fast", 0.017, 60.0, 100.0, 400.0),
]
QUICK = {"sparse-slow", "sparse-fast"}


def run_cases(quick: bool) -> dict:
    import numpy as np

    from forestperc.forest import Window, sample_poisson_forest
    from forestperc.shadow import build_shadow_set

    # warm-up triggers compilation outside the timed region
    warm = sample_poisson_forest(0.01, Window(10.0, 10.0), 1.0, seed=1)
    build_shadow_set(warm, 30.0).max_normalized_width()

    out = {}
    rng = np.random.default_rng(7)
    for name, rho, nu, w, length in CASES:
        if quick and name not in QUICK:
            continue
        f = sample_poisson_forest(rho, Window(w, length), 1.0, seed=11)
        t0 = time.perf_counter()
        s = build_shadow_set(f, nu)
        t_build = time.perf_counter() - t0
        pts = np.column_stack(
            [rng.uniform(-50.0, length, 20000), rng.uniform(0.0, w, 20000)]
        )
        t0 = time.perf_counter()
        labels = s.classify_points(pts)
        t_classify = time.perf_counter() - t0
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(s.apex_x).tobytes())
        digest.update(np.ascontiguousarray(s.apex_y).tobytes())
        digest.update(np.ascontiguousarray(s.component).tobytes())
        digest.update(np.ascontiguousarray(labels).tobytes())
        out[name] = {
            "wakes": int(s.apex_x.size),
            "build_s": t_build,
            "classify_s": t_classify,
            "digest": digest.hexdigest()[:16],
        }
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small cases only")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    ns = ap.parse_args()

    if ns.worker:
        json.dump(run_cases(ns.quick), sys.stdout)
        return 0

    results = {}
    for label, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, FORESTPERC_NUMBA=flag)
        cmd = [sys.executable, os.path.abspath(__file__), "--worker"]
        if ns.quick:
            cmd.append("--quick")
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            return 1
        results[label] = json.loads(proc.stdout)

    ok = True
    header = f"{'case':<12} {'wakes':>6} {'numba build':>12} {'numpy build':>12} {'speedup':>8}  {'classify x':>10}"
    print(header)
    print("-" * len(header))
    for name in results["numba"]:
        a, b = results["numba"][name], results["numpy"][name]
        same = a["digest"] == b["digest"] and a["wakes"] == b["wakes"]
        ok &= same
        sp = b["build_s"] / a["build_s"] if a["build_s"] > 0 else float("inf")
        spc = b["classify_s"] / a["classify_s"] if a["classify_s"] > 0 else float("inf")
        mark = "" if same else "  MISMATCH"
        print(
            f"{name:<12} {a['wakes']:>6} {a['build_s']:>11.3f}s {b['build_s']:>11.3f}s "
            f"{sp:>7.1f}x {spc:>9.1f}x{mark}"
        )
    print(f"paths agree bit for bit: {ok}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
