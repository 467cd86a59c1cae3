import math

import pytest
from hypothesis import given, strategies as st

from forestperc.geometry import (
    ConeParams,
    Disk,
    Point,
    SlopedSegment,
    collinear_overlap,
    cone_params,
    segment_intersection,
    tangent_point,
)


class TestConeParams:
    def test_unit_speed(self):
        c = cone_params(1.0)
        assert c.half_angle == pytest.approx(math.pi / 4, abs=1e-12)
        assert c.sin_alpha == pytest.approx(1.0, abs=1e-12)

    def test_speed_two(self):
        # 2*2/(1+4)
        assert cone_params(2.0).sin_alpha == pytest.approx(0.8, abs=1e-12)

    def test_speed_ten(self):
        # 2*10/(1+100)
        assert cone_params(10.0).sin_alpha == pytest.approx(20.0 / 101.0, abs=1e-12)

    def test_half_components_consistent(self):
        c = cone_params(3.7)
        assert c.sin_half**2 + c.cos_half**2 == pytest.approx(1.0, abs=1e-12)
        assert 2.0 * c.sin_half * c.cos_half == pytest.approx(c.sin_alpha, abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan, "3"])
    def test_rejects_bad_speed(self, bad):
        with pytest.raises(ValueError):
            cone_params(bad)

    @given(st.floats(min_value=1e-3, max_value=1e6))
    def test_sin_alpha_in_unit_interval(self, nu):
        s = cone_params(nu).sin_alpha
        assert 0.0 < s <= 1.0

    @given(st.floats(min_value=1.0, max_value=1e5), st.floats(min_value=1.001, max_value=8.0))
    def test_sin_alpha_decreasing_above_one(self, nu, factor):
        assert cone_params(nu * factor).sin_alpha < cone_params(nu).sin_alpha

    def test_maximized_at_one(self):
        best = cone_params(1.0).sin_alpha
        for nu in (0.3, 0.9, 1.1, 4.0, 50.0):
            assert cone_params(nu).sin_alpha < best


class TestSlopedSegment:
    def test_rejects_right_to_left(self):
        with pytest.raises(ValueError):
            SlopedSegment(Point(1.0, 0.0), Point(0.0, 1.0), 1)

    def test_rejects_contradicting_sign(self):
        with pytest.raises(ValueError):
            SlopedSegment(Point(0.0, 0.0), Point(1.0, 1.0), -1)

    def test_slope_value(self):
        s = SlopedSegment(Point(0.0, 0.0), Point(4.0, 1.0), 1)
        assert s.slope == pytest.approx(0.25)


class TestSegmentIntersection:
    def test_crossing_pair(self):
        a = SlopedSegment(Point(0.0, 0.0), Point(4.0, 4.0), 1)
        b = SlopedSegment(Point(0.0, 2.0), Point(4.0, -2.0), -1)
        q = segment_intersection(a, b)
        # solve y = x against y = 2 - x
        assert (q.x, q.y) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_parallel_is_none(self):
        a = SlopedSegment(Point(0.0, 0.0), Point(4.0, 4.0), 1)
        b = SlopedSegment(Point(0.0, 1.0), Point(4.0, 5.0), 1)
        assert segment_intersection(a, b) is None

    def test_collinear_same_sign_is_none_but_flagged(self):
        a = SlopedSegment(Point(0.0, 0.0), Point(4.0, 4.0), 1)
        b = SlopedSegment(Point(2.0, 2.0), Point(6.0, 6.0), 1)
        assert segment_intersection(a, b) is None
        assert collinear_overlap(a, b)
        c = SlopedSegment(Point(5.0, 5.0), Point(7.0, 7.0), 1)
        assert not collinear_overlap(a, c)

    def test_outside_extent_is_none(self):
        a = SlopedSegment(Point(0.0, 0.0), Point(1.0, 1.0), 1)
        # support lines meet at x=4, beyond a's extent
        b = SlopedSegment(Point(3.0, 5.0), Point(4.0, 4.0), -1)
        assert segment_intersection(a, b) is None

    @given(
        st.floats(-50.0, 50.0),
        st.floats(-50.0, 50.0),
        st.floats(0.5, 20.0),
        st.floats(-50.0, 50.0),
        st.floats(-50.0, 50.0),
        st.floats(0.5, 20.0),
        st.floats(0.3, 5.0),
    )
    def test_symmetric_and_on_both(self, ax, ay, alen, bx, by, blen, nu):
        a = SlopedSegment(Point(ax, ay), Point(ax + alen, ay + alen / nu), 1)
        b = SlopedSegment(Point(bx, by), Point(bx + blen, by - blen / nu), -1)
        q1 = segment_intersection(a, b)
        q2 = segment_intersection(b, a)
        assert (q1 is None) == (q2 is None)
        if q1 is not None:
            assert q1.x == pytest.approx(q2.x, abs=1e-9)
            for seg in (a, b):
                want = seg.start.y + seg.slope * (q1.x - seg.start.x)
                assert q1.y == pytest.approx(want, abs=1e-6)


class TestTangentPoint:
    def test_unit_disk_upper(self):
        d = Disk(Point(0.0, 0.0), 1.0)
        p = tangent_point(d, cone_params(1.0), 1, "upper")
        assert p.x == pytest.approx(-math.sqrt(0.5), abs=1e-9)
        assert p.y == pytest.approx(math.sqrt(0.5), abs=1e-9)

    def test_unit_disk_lower_mirrors(self):
        d = Disk(Point(0.0, 0.0), 1.0)
        up = tangent_point(d, cone_params(1.0), 1, "upper")
        lo = tangent_point(d, cone_params(1.0), -1, "lower")
        assert lo.x == pytest.approx(up.x, abs=1e-12)
        assert lo.y == pytest.approx(-up.y, abs=1e-12)

    def test_tiny_radius_approaches_center(self):
        d = Disk(Point(3.0, 4.0), 1e-9)
        p = tangent_point(d, cone_params(2.0), 1, "upper")
        assert math.hypot(p.x - 3.0, p.y - 4.0) <= 2e-9

    @given(
        st.floats(-100.0, 100.0),
        st.floats(-100.0, 100.0),
        st.floats(1e-3, 50.0),
        st.floats(0.1, 40.0),
        st.sampled_from([1, -1]),
        st.sampled_from(["upper", "lower"]),
    )
    def test_distance_equals_radius(self, cx, cy, r, nu, sign, side):
        d = Disk(Point(cx, cy), r)
        p = tangent_point(d, cone_params(nu), sign, side)
        assert math.hypot(p.x - cx, p.y - cy) == pytest.approx(r, rel=1e-9)

    def test_rejects_bad_arguments(self):
        d = Disk(Point(0.0, 0.0), 1.0)
        with pytest.raises(ValueError):
            tangent_point(d, cone_params(1.0), 0, "upper")
        with pytest.raises(ValueError):
            tangent_point(d, cone_params(1.0), 1, "middle")


class TestValueGuards:
    def test_point_rejects_nan(self):
        with pytest.raises(ValueError):
            Point(math.nan, 0.0)

    def test_disk_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            Disk(Point(0.0, 0.0), 0.0)
