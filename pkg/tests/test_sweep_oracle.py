import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forestperc.forest import Forest, Window
from forestperc.geometry import Point
from forestperc.sweep_oracle import (
    IntervalSet,
    default_dx,
    oracle_classify,
    oracle_crossing,
    oracle_is_doomed,
    survival_depth,
    survival_depths,
    sweep_safe,
)

# bounded float pairs for interval endpoints
_coord = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)


def _pairs_strategy():
    return st.lists(st.tuples(_coord, _coord), max_size=8).map(
        lambda ps: [(min(a, b), max(a, b)) for a, b in ps if a != b]
    )


class TestIntervalSet:
    def test_empty(self):
        s = IntervalSet.empty()
        assert s.is_empty and s.measure == 0.0
        assert not s.contains(0.0)

    def test_full(self):
        s = IntervalSet.full(-1.0, 3.0)
        assert s.measure == pytest.approx(4.0)
        assert s.contains(0.0) and not s.contains(3.5)

    def test_merge_on_build(self):
        s = IntervalSet([(0.0, 1.0), (0.5, 2.0), (3.0, 4.0)])
        assert s.n_intervals == 2
        assert s.measure == pytest.approx(3.0)

    @given(_pairs_strategy())
    @settings(max_examples=60, deadline=None)
    def test_invariants(self, pairs):
        s = IntervalSet(pairs)
        p = s.pairs
        # disjoint, sorted, strictly increasing endpoints
        assert np.all(p[:, 1] > p[:, 0])
        if len(p) > 1:
            assert np.all(p[1:, 0] > p[:-1, 1])
        assert s.measure <= sum(b - a for a, b in pairs) + 1e-9

    @given(_pairs_strategy(), st.floats(0.0, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_dilate_grows_measure(self, pairs, d):
        s = IntervalSet(pairs)
        g = s.dilate(d)
        assert g.measure >= s.measure - 1e-9
        assert g.measure <= s.measure + 2.0 * d * max(s.n_intervals, 1) + 1e-9

    @given(_pairs_strategy(), _pairs_strategy())
    @settings(max_examples=60, deadline=None)
    def test_subtract_disjoint_from_other(self, pa, pb):
        a, b = IntervalSet(pa), IntervalSet(pb)
        c = a.subtract(b)
        assert c.measure <= a.measure + 1e-9
        for lo, hi in c.pairs:
            mid = 0.5 * (lo + hi)
            assert a.contains(mid)
            assert not b.contains(mid)

    def test_subtract_example(self):
        a = IntervalSet([(0.0, 10.0)])
        b = IntervalSet([(2.0, 3.0), (5.0, 6.0)])
        c = a.subtract(b)
        assert c.pairs.tolist() == [[0.0, 2.0], [3.0, 5.0], [6.0, 10.0]]

    def test_clip(self):
        s = IntervalSet([(0.0, 4.0), (6.0, 9.0)]).clip(1.0, 7.0)
        assert s.pairs.tolist() == [[1.0, 4.0], [6.0, 7.0]]

    def test_dilate_merges_neighbors(self):
        s = IntervalSet([(0.0, 1.0), (1.5, 2.5)]).dilate(0.3)
        assert s.n_intervals == 1
        assert s.measure == pytest.approx(3.1)


class TestSweep:
    def test_empty_forest_everything_safe(self):
        f = Forest(Window(10.0, 10.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        res = sweep_safe(f, 2.0, x_from=10.0, x_to=0.0, sample_xs=[0.0, 5.0])
        for x in (0.0, 5.0):
            s = res.at(x)
            assert s.n_intervals == 1
            # default lateral pad: one window width each side
            assert s.measure == pytest.approx(30.0, rel=1e-6)

    def test_rejects_bad_arguments(self):
        f = Forest(Window(10.0, 10.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        with pytest.raises(ValueError):
            sweep_safe(f, 0.0, x_from=1.0, x_to=0.0)
        with pytest.raises(ValueError):
            sweep_safe(f, 1.0, x_from=0.0, x_to=1.0)
        with pytest.raises(ValueError):
            sweep_safe(f, 1.0, x_from=1.0, x_to=0.0, dx=0.0)

    def test_single_tree_shadow_width(self):
        # unsafe set just left of the disk shrinks linearly to the apex;
        # compare measured widths at two stations against the wedge law
        f = Forest(Window(40.0, 40.0), 1.0, np.array([[20.0, 20.0]]), 1e-3, 0)
        nu = 2.0
        dx = 1e-3
        xs = [16.5, 18.0, 18.5]
        res = sweep_safe(f, nu, x_from=40.0, x_to=10.0, dx=dx, sample_xs=xs)
        apex = 20.0 - math.sqrt(5.0)
        for x in (18.0, 18.5):
            safe = res.at(x)
            dom = IntervalSet.full(*map(float, (safe.pairs[0, 0], safe.pairs[-1, 1])))
            unsafe = dom.subtract(safe)
            assert unsafe.n_intervals == 1
            assert unsafe.measure == pytest.approx(
                2.0 * (x - apex) / nu, abs=20 * dx
            )
        # left of the apex the hole is gone
        assert res.at(16.5).n_intervals == 1

    def test_refinement_converges(self):
        f = Forest(Window(40.0, 40.0), 1.0, np.array([[20.0, 20.0]]), 1e-3, 0)
        apex = 20.0 - math.sqrt(5.0)
        errs = []
        for dx in (0.04, 0.01):
            got = oracle_classify(
                np.array([[apex + 0.5, 20.0]]), f, 2.0, dx=dx
            )
            assert bool(got[0])
            # probe the boundary location by bisecting on x
            lo, hi = apex - 0.5, apex + 0.5
            for _ in range(16):
                mid = 0.5 * (lo + hi)
                if oracle_classify(np.array([[mid, 20.0]]), f, 2.0, dx=dx)[0]:
                    hi = mid
                else:
                    lo = mid
            errs.append(abs(0.5 * (lo + hi) - apex))
        assert errs[1] <= errs[0] + 1e-6
        assert errs[1] < 0.05


class TestOracleClassify:
    def test_inside_disk_doomed(self):
        f = Forest(Window(40.0, 40.0), 1.0, np.array([[20.0, 20.0]]), 1e-3, 0)
        assert oracle_is_doomed(Point(20.0, 20.0), f, 1.0)
        assert oracle_is_doomed(Point(19.5, 20.3), f, 1.0)

    def test_far_field_safe(self):
        f = Forest(Window(40.0, 40.0), 1.0, np.array([[20.0, 20.0]]), 1e-3, 0)
        assert not oracle_is_doomed(Point(5.0, 5.0), f, 1.0)
        assert not oracle_is_doomed(Point(25.0, 20.0), f, 1.0)

    def test_empty_points(self):
        f = Forest(Window(10.0, 10.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        assert oracle_classify(np.zeros((0, 2)), f, 1.0).shape == (0,)

    def test_monotone_in_speed(self, small_forest):
        rng = np.random.default_rng(3)
        pts = rng.uniform([0, 0], [40, 40], size=(200, 2))
        slow = oracle_classify(pts, small_forest, 1.0, dx=0.01)
        fast = oracle_classify(pts, small_forest, 3.0, dx=0.01)
        assert not np.any(slow & ~fast)

    def test_crossing_flags(self):
        f = Forest(Window(10.0, 10.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        assert oracle_crossing(f, 1.0)
        # a vertical picket of overlapping disks walls off the window
        ys = np.arange(0.5, 10.0, 1.0)
        centers = np.column_stack((np.full_like(ys, 5.0), ys))
        g = Forest(Window(10.0, 10.0), 1.0, centers, 0.1, 0)
        assert not oracle_crossing(g, 1.0)


class TestSurvival:
    def test_empty_forest_censored(self):
        f = Forest(Window(10.0, 100.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        d = survival_depths(f, 1.0, [5.0], x_max=30.0)
        assert d[0] == pytest.approx(30.0, abs=0.1)

    def test_start_inside_wedge_dies_fast(self):
        # start deep in a two-tree funnel: the reachable set collapses
        # once both wakes close, well before the disks
        centers = np.array([[10.0, 21.2], [10.0, 20.0]])
        f = Forest(Window(40.0, 40.0), 1.0, centers, 0.00125, 0)
        d = survival_depth(f, 1.0, start_x=8.2, x_max=40.0)
        assert d(20.6) < 2.0
        assert d(30.0) > 20.0

    def test_vector_matches_scalar(self):
        centers = np.array([[10.0, 21.2], [10.0, 20.0]])
        f = Forest(Window(40.0, 40.0), 1.0, centers, 0.00125, 0)
        ys = [18.0, 20.6, 24.0]
        vec = survival_depths(f, 1.0, ys, start_x=8.2, x_max=30.0)
        dep = survival_depth(f, 1.0, start_x=8.2, x_max=30.0)
        for y, v in zip(ys, vec):
            assert dep(y) == pytest.approx(float(v), abs=1e-9)


class TestDefaults:
    def test_default_dx_scales(self):
        f = Forest(Window(10.0, 10.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        assert default_dx(f, 1.0) == pytest.approx(0.01)
        assert default_dx(f, 50.0) == pytest.approx(1.0 / 5000.0)
        g = Forest(Window(10.0, 10.0), 0.5, np.zeros((0, 2)), 0.0, 0)
        assert default_dx(g, 1.0) == pytest.approx(0.005)
