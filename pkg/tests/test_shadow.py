import json
import math

import numpy as np
import pytest

from forestperc.forest import Forest, Window
from forestperc.geometry import ConeParams, Disk, Point, cone_params
from forestperc.shadow import (
    ShadowSet,
    build_shadow_set,
    induced_shadow,
    left_primary_shadow,
    right_primary_shadow,
)
from forestperc.sweep_oracle import oracle_classify

SQRT2 = math.sqrt(2.0)


class TestPrimaryShadows:
    def test_left_apex_speed_one(self):
        # apex sits one hypotenuse left of the center: r / sin(alpha/2)
        # with sin(alpha/2) = 1/sqrt(2) at speed 1
        s = left_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone_params(1.0))
        assert s.apex.x == pytest.approx(-SQRT2, abs=1e-12)
        assert s.apex.y == 0.0

    def test_left_apex_speed_two(self):
        # sin(alpha/2) = 1/sqrt(5) at speed 2
        s = left_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone_params(2.0))
        assert s.apex.x == pytest.approx(-math.sqrt(5.0), abs=1e-12)

    def test_right_apex_mirrors_left(self):
        s = right_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone_params(1.0))
        assert s.apex.x == pytest.approx(SQRT2, abs=1e-12)

    def test_tangency_ends(self):
        # boundary segments end where the wake edges graze the disk:
        # (cx - r*sh, cy +/- r*ch)
        s = left_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone_params(1.0))
        assert s.top.end.x == pytest.approx(-1.0 / SQRT2, abs=1e-12)
        assert s.top.end.y == pytest.approx(1.0 / SQRT2, abs=1e-12)
        assert s.bottom.end.y == pytest.approx(-1.0 / SQRT2, abs=1e-12)

    def test_translation_equivariance(self):
        cone = cone_params(3.0)
        a = left_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone)
        b = left_primary_shadow(Disk(Point(5.0, -2.0), 1.0), cone)
        assert b.apex.x - a.apex.x == pytest.approx(5.0, abs=1e-12)
        assert b.apex.y - a.apex.y == pytest.approx(-2.0, abs=1e-12)

    def test_contains(self):
        s = left_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone_params(1.0))
        assert s.contains(Point(0.0, 0.0))
        assert s.contains(Point(s.apex.x + 0.01, 0.0))
        assert not s.contains(Point(s.apex.x - 0.01, 0.0))
        assert not s.contains(Point(-1.0, 1.0))
        # wedge edge has slope 1/nu = 1 here
        assert s.contains(Point(-1.0, 0.3))

    def test_mirror_membership(self):
        cone = cone_params(2.0)
        left = left_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone)
        right = right_primary_shadow(Disk(Point(0.0, 0.0), 1.0), cone)
        for x, y in [(-1.8, 0.1), (-0.4, 0.5), (-2.0, 0.3), (-0.9, 0.95)]:
            assert left.contains(Point(x, y)) == right.contains(Point(-x, y))


class TestInducedShadow:
    @staticmethod
    def _pair(dy: float, r: float = 2.0, nu: float = 1.0):
        # disks placed so the parent apexes land at (0, dy) and (0, 0)
        cone = cone_params(nu)
        off = r / cone.sin_half
        up = left_primary_shadow(Disk(Point(off, dy), r), cone)
        lo = left_primary_shadow(Disk(Point(off, 0.0), r), cone)
        return up, lo, cone

    def test_example_apex_and_crossing(self):
        # apexes (0, 2) and (0, 0) at speed 1: the descending edge of the
        # upper and ascending edge of the lower meet at (1, 1), and the
        # induced apex opens one half-gap upstream at (-1, 1)
        up, lo, cone = self._pair(2.0)
        s = induced_shadow(up, lo, cone)
        assert s is not None
        assert s.apex.x == pytest.approx(-1.0, abs=1e-12)
        assert s.apex.y == pytest.approx(1.0, abs=1e-12)
        assert s.crossing.x == pytest.approx(1.0, abs=1e-12)
        assert s.crossing.y == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_in_arguments(self):
        up, lo, cone = self._pair(1.5)
        a = induced_shadow(up, lo, cone)
        b = induced_shadow(lo, up, cone)
        assert a.apex == b.apex and a.crossing == b.crossing

    def test_none_when_level(self):
        up, lo, cone = self._pair(0.0)
        assert induced_shadow(up, lo, cone) is None

    def test_none_when_gap_too_wide(self):
        # crossing would land beyond the tangency ends of both parents
        up, lo, cone = self._pair(2.4, r=1.0)
        assert induced_shadow(up, lo, cone) is None

    def test_apex_on_parent_edges(self):
        up, lo, cone = self._pair(1.2)
        s = induced_shadow(up, lo, cone)
        nu = cone.speed
        assert up.apex.y - s.apex.y == pytest.approx(
            (up.apex.x - s.apex.x) / nu, abs=1e-12
        )
        assert s.apex.y - lo.apex.y == pytest.approx(
            (lo.apex.x - s.apex.x) / nu, abs=1e-12
        )


class TestBuildTwoTree:
    def test_counts_and_apex(self, two_tree_forest):
        ss = build_shadow_set(two_tree_forest, 1.0)
        assert ss.n_primary == 2
        assert ss.n_induced == 1
        assert ss.n_contact == 0
        # parent apexes at x = 10 - sqrt(2); gap 1.2 pulls the child apex
        # a further nu*dy/2 = 0.6 upstream
        i = int(np.nonzero(ss.kind == 2)[0][0])
        assert ss.apex_x[i] == pytest.approx(10.0 - SQRT2 - 0.6, abs=1e-9)
        assert ss.apex_y[i] == pytest.approx(20.6, abs=1e-12)

    def test_probes_match_oracle(self, two_tree_forest):
        ss = build_shadow_set(two_tree_forest, 1.0)
        ax = 10.0 - SQRT2 - 0.6
        probes = np.array([[ax + 0.05, 20.6], [ax - 0.05, 20.6]])
        got = ss.classify_points(probes)
        assert got.tolist() == [True, False]
        orc = oracle_classify(probes, two_tree_forest, 1.0)
        assert np.array_equal(got, orc)

    def test_clip_suppresses_pairing(self, two_tree_forest):
        # primaries whose apex (x = 8.586) falls left of the clip are kept
        # but excluded from further rounds, so no induced wake appears
        ss = build_shadow_set(two_tree_forest, 1.0, clip_x=9.5)
        assert ss.n_shadows == 2

    def test_single_component(self, two_tree_forest):
        ss = build_shadow_set(two_tree_forest, 1.0)
        assert len(set(ss.component.tolist())) == 1


class TestBuildCascade:
    def test_frozen_wake_table(self, cascade_forest):
        ss = build_shadow_set(cascade_forest, 5.0)
        assert ss.n_primary == 3
        assert ss.n_induced == 2
        assert ss.n_contact == 1
        assert len(set(ss.component.tolist())) == 1
        # child apexes from the pairwise funnel rule
        # 0.5*(ax_u + ax_l - nu*dy), with primary apexes at cx - sqrt(26)
        h = math.sqrt(26.0)
        rows = {
            (float(ss.apex_x[i]), float(ss.apex_y[i])): (
                int(ss.kind[i]),
                int(ss.parent_a[i]),
                int(ss.parent_b[i]),
            )
            for i in range(3, ss.n_shadows)
        }
        expect = {
            (0.5 * (18.0 - h + 20.0 - h - 5.0), 20.7): (2, 2, 1),
            (0.5 * (24.0 - h + 20.0 - h - 4.5), 20.05): (2, 0, 1),
            (0.5 * (18.0 - h + 24.0 - h - 0.5), 21.55): (3, 2, 0),
        }
        for (ex, ey), meta in expect.items():
            match = [
                rows[k]
                for k in rows
                if abs(k[0] - ex) < 1e-9 and abs(k[1] - ey) < 1e-9
            ]
            assert match == [meta]

    def test_probes_match_oracle(self, cascade_forest):
        ss = build_shadow_set(cascade_forest, 5.0)
        h = math.sqrt(26.0)
        a1 = 0.5 * (38.0 - 2 * h - 5.0)
        a2 = 0.5 * (44.0 - 2 * h - 4.5)
        probes = np.array(
            [
                [a1 + 0.03, 20.7],
                [a1 - 0.03, 20.7],
                [a2 + 0.03, 20.05],
                [a2 - 0.03, 20.05],
            ]
        )
        got = ss.classify_points(probes)
        assert got.tolist() == [True, False, True, False]
        orc = oracle_classify(probes, cascade_forest, 5.0)
        assert np.array_equal(got, orc)

    def test_no_ordinate_violations(self, cascade_forest):
        ss = build_shadow_set(cascade_forest, 5.0)
        assert ss.apex_ordinate_violations == 0
        assert ss.rounds >= 2


class TestContactWakes:
    def test_arc_pinched_pair(self):
        # three trees whose tangent funnels close against a facing arc
        # rather than at a segment crossing
        centers = np.array([[5.523, 7.039], [8.954, 8.345], [3.32, 9.994]])
        f = Forest(Window(20.0, 20.0), 1.0, centers, 0.0075, 0)
        ss = build_shadow_set(f, 5.0)
        assert ss.n_primary == 3
        assert ss.n_contact == 1
        assert ss.n_induced == 0


class TestInducedInvariants:
    def test_apex_on_parent_lines(self, small_forest):
        ss = build_shadow_set(small_forest, 4.0)
        nu = 4.0
        ind = np.nonzero(ss.kind >= 2)[0]
        assert ind.size > 0
        for i in ind:
            if ss.kind[i] == 3:
                continue
            dx_u = ss.top_x[i] - ss.apex_x[i]
            dy_u = ss.top_y[i] - ss.apex_y[i]
            assert abs(dy_u - dx_u / nu) < 1e-9
            dx_l = ss.bot_x[i] - ss.apex_x[i]
            dy_l = ss.apex_y[i] - ss.bot_y[i]
            assert abs(dy_l - dx_l / nu) < 1e-9

    def test_children_left_of_parents(self, small_forest):
        ss = build_shadow_set(small_forest, 4.0)
        for i in np.nonzero(ss.kind == 2)[0]:
            assert ss.apex_x[i] < ss.top_x[i]
            assert ss.apex_x[i] < ss.bot_x[i]


class TestComponents:
    @staticmethod
    def _pair_forest(dy: float) -> Forest:
        centers = np.array([[10.0, 20.0 + dy], [10.0, 20.0]])
        return Forest(Window(40.0, 40.0), 1.0, centers, 0.00125, 0)

    def test_touching_disks_merge(self):
        ss = build_shadow_set(self._pair_forest(2.0), 1.0)
        comps = ss.occupied_components()
        assert len(comps) == 1
        assert comps[0].lateral_extent == pytest.approx(4.0, abs=1e-9)

    def test_separated_disks_split(self):
        ss = build_shadow_set(self._pair_forest(2.4), 1.0)
        comps = ss.occupied_components()
        assert len(comps) == 2
        for c in comps:
            assert c.lateral_extent == pytest.approx(2.0, abs=1e-9)

    def test_width_empty(self):
        f = Forest(Window(40.0, 40.0), 1.0, np.zeros((0, 2)), 0.0, 0)
        ss = build_shadow_set(f, 2.0)
        assert ss.max_normalized_width() == 0.0
        assert ss.crossing_exists()

    def test_width_single_tree(self):
        f = Forest(Window(500.0, 40.0), 1.0, np.array([[20.0, 250.0]]), 1e-4, 0)
        ss = build_shadow_set(f, 2.0)
        assert ss.max_normalized_width() == pytest.approx(2.0 / 500.0, abs=1e-12)

    def test_crossing_is_width_test(self, small_forest):
        for nu in (1.0, 5.0):
            ss = build_shadow_set(small_forest, nu)
            assert ss.crossing_exists() == (ss.max_normalized_width() < 1.0)


class TestMonotonicity:
    def test_doomed_sets_nested_in_speed(self, small_forest):
        rng = np.random.default_rng(0)
        pts = rng.uniform([0, 0], [40, 40], size=(400, 2))
        prev = None
        for nu in (1.0, 2.0, 5.0):
            cur = build_shadow_set(small_forest, nu).classify_points(pts)
            if prev is not None:
                assert not np.any(prev & ~cur)
            prev = cur

    def test_scaling_leaves_crossing_invariant(self, small_forest):
        # doubling all lengths (radius included) is a pure change of units
        f = small_forest
        ss1 = build_shadow_set(f, 3.0)
        g = Forest(
            Window(f.window.width * 2, f.window.length * 2),
            2.0,
            f.centers * 2.0,
            f.density / 4.0,
            f.seed,
        )
        ss2 = build_shadow_set(g, 3.0)
        assert ss1.crossing_exists() == ss2.crossing_exists()
        assert ss2.max_normalized_width() == pytest.approx(
            ss1.max_normalized_width(), abs=1e-9
        )


class TestClassifyPaths:
    def test_blocked_equals_grid(self, small_forest):
        ss = build_shadow_set(small_forest, 5.0)
        rng = np.random.default_rng(1)
        pts = rng.uniform([0, 0], [40, 40], size=(3000, 2))
        boxes = ss._region_boxes()
        a = ss._classify_blocks(pts, boxes)
        from forestperc.shadow import NUMBA_ENABLED

        if NUMBA_ENABLED:
            b = ss._classify_grid(pts, boxes)
            assert np.array_equal(a, b)

    def test_is_doomed_matches_vector_path(self, two_tree_forest):
        ss = build_shadow_set(two_tree_forest, 1.0)
        assert ss.is_doomed(Point(10.0, 20.0))
        assert ss.is_doomed(Point(10.0 - SQRT2 + 0.01, 21.2))
        assert not ss.is_doomed(Point(5.0, 20.6))


class TestSerialization:
    def test_json_records(self, cascade_forest):
        ss = build_shadow_set(cascade_forest, 5.0)
        recs = json.loads(ss.to_json())
        assert len(recs) == ss.n_shadows
        kinds = {r["kind"] for r in recs}
        assert kinds == {"left_primary", "induced", "contact"}
        for r in recs:
            assert set(r) == {
                "kind",
                "apex",
                "top_end",
                "bottom_end",
                "parents",
                "component_id",
            }
            if r["kind"] == "left_primary":
                assert len(r["parents"]) == 1
            else:
                assert len(r["parents"]) == 2
