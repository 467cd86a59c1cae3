import math

import numpy as np
import pytest

from forestperc.lattice import (
    ClusterResult,
    LatticeSpec,
    crossing_fraction,
    default_width,
    estimate_threshold,
    induced_site_probability,
    lattice_path_to_trajectory,
    percolate_trial,
)

_ALL_MODELS = [
    ("square", False, "bond"),
    ("square", False, "site"),
    ("square", True, "bond"),
    ("square", True, "site"),
    ("hexagonal", True, "site"),
]


class TestSpec:
    def test_rejects_unknown_graph(self):
        with pytest.raises(ValueError):
            LatticeSpec("triangular", True, "site", 8, 0.5)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError):
            LatticeSpec("square", True, "face", 8, 0.5)

    @pytest.mark.parametrize("depth", [0, -1, 2.5])
    def test_rejects_bad_depth(self, depth):
        with pytest.raises(ValueError):
            LatticeSpec("square", True, "site", depth, 0.5)

    @pytest.mark.parametrize("p", [-0.1, 1.1, math.nan])
    def test_rejects_bad_probability(self, p):
        with pytest.raises(ValueError):
            LatticeSpec("square", True, "site", 8, p)


class TestTrivialProbabilities:
    @pytest.mark.parametrize("graph,directed,mode", _ALL_MODELS)
    def test_p_one_always_crosses(self, graph, directed, mode):
        spec = LatticeSpec(graph, directed, mode, 8, 1.0)
        assert crossing_fraction(spec, 20, seed=0) == 1.0

    @pytest.mark.parametrize("graph,directed,mode", _ALL_MODELS)
    def test_p_zero_never_crosses(self, graph, directed, mode):
        spec = LatticeSpec(graph, directed, mode, 8, 0.0)
        assert crossing_fraction(spec, 20, seed=0) == 0.0


class TestSubcritical:
    def test_directed_site_half_rarely_crosses(self):
        # threshold near 0.705, so p = 0.5 at depth 64 is deep in the
        # dying phase
        spec = LatticeSpec("square", True, "site", 64, 0.5)
        assert crossing_fraction(spec, 200, seed=5) < 0.05

    def test_undirected_bond_high_p_always_crosses(self):
        spec = LatticeSpec("square", False, "bond", 32, 0.8)
        assert crossing_fraction(spec, 100, seed=5) > 0.95


class TestCoupling:
    def test_fraction_monotone_in_p(self):
        # shared uniforms across p make the empirical curve monotone
        # trial by trial, not just in expectation
        fracs = [
            crossing_fraction(LatticeSpec("square", True, "site", 32, p), 150, seed=9)
            for p in (0.3, 0.55, 0.7, 0.85, 1.0)
        ]
        assert fracs == sorted(fracs)
        assert fracs[-1] == 1.0

    def test_trial_reproduces_batch(self):
        spec = LatticeSpec("square", True, "site", 16, 0.7)
        singles = [percolate_trial(spec, seed=3, trial=t).crossed for t in range(60)]
        assert np.mean(singles) == crossing_fraction(spec, 60, seed=3)


class TestPaths:
    @staticmethod
    def _crossed_result(spec: LatticeSpec, max_tries: int = 200) -> ClusterResult:
        for t in range(max_tries):
            res = percolate_trial(spec, seed=11, trial=t)
            if res.crossed:
                return res
        raise AssertionError("no crossing found")

    def test_no_path_when_not_crossed(self):
        spec = LatticeSpec("square", True, "site", 32, 0.3)
        for t in range(10):
            res = percolate_trial(spec, seed=2, trial=t)
            assert not res.crossed and res.path is None

    def test_directed_path_spans_layers(self):
        spec = LatticeSpec("hexagonal", True, "site", 16, 0.9)
        res = self._crossed_result(spec)
        path = np.asarray(res.path)
        assert path[0, 0] == 0 and path[-1, 0] == spec.depth
        assert np.all(np.diff(path[:, 0]) == 1)
        # even layers branch (keep or raise), odd layers shift down
        dm = np.diff(path[:, 1])
        even = path[:-1, 0] % 2 == 0
        assert np.all(np.where(even, (dm == 0) | (dm == 1), dm == -1))

    def test_cluster_size_positive_when_crossed(self):
        spec = LatticeSpec("square", True, "site", 16, 0.9)
        res = self._crossed_result(spec)
        assert res.cluster_size >= spec.depth + 1


class TestDefaultWidth:
    def test_undirected_square_array(self):
        assert default_width("square", False, 64) == 65

    def test_directed_tracks_spread(self):
        w64 = default_width("square", True, 64)
        w256 = default_width("square", True, 256)
        assert 4 <= w64 <= w256
        # lateral growth is sublinear in depth
        assert w256 < 256

    def test_hexagonal_narrower_than_square(self):
        assert default_width("hexagonal", True, 256) <= default_width(
            "square", True, 256
        )


class TestEstimate:
    def test_smoke_small(self):
        est = estimate_threshold(
            "square", True, "site", depth=16, trials=120, tol=0.02, seed=1
        )
        assert 0.5 < est.estimate < 0.9
        assert est.converged
        assert est.half_width >= 0.02
        # every evaluation is a (p, fraction) pair on the coupled curve
        ps = [p for p, _ in est.evaluations]
        fs = {p: f for p, f in est.evaluations}
        for a in ps:
            for b in ps:
                if a < b:
                    assert fs[a] <= fs[b]

    def test_rejects_tiny_trials(self):
        with pytest.raises(ValueError):
            estimate_threshold("square", True, "site", depth=8, trials=10)


class TestInducedSiteProbability:
    def test_example_speed_ten(self):
        # sin(alpha) = 2*10/101 at speed 10, so the cell area exponent is
        # 2*0.01*101/20 = 0.101
        assert induced_site_probability(0.01, 1.0, 10.0) == pytest.approx(
            math.exp(-0.101), abs=1e-12
        )

    def test_empty_forest_open(self):
        assert induced_site_probability(0.0, 1.0, 3.0) == 1.0

    def test_half_at_log_two(self):
        # sin(alpha) = 1 at speed 1: exponent 2*rho, so rho = ln(2)/2
        assert induced_site_probability(math.log(2.0) / 2.0, 1.0, 1.0) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_decreasing_in_density(self):
        ps = [induced_site_probability(rho, 1.0, 5.0) for rho in (0.0, 0.01, 0.02)]
        assert ps == sorted(ps, reverse=True)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            induced_site_probability(-0.1, 1.0, 1.0)
        with pytest.raises(ValueError):
            induced_site_probability(0.1, 0.0, 1.0)
        with pytest.raises(ValueError):
            induced_site_probability(0.1, 1.0, 0.0)


class TestTrajectory:
    def test_step_lengths_speed_two(self):
        # longitudinal leg r/sin(alpha/2) = sqrt(5), lateral sqrt(5)/2
        path = [(0, 0), (1, 1), (2, 0)]
        out = lattice_path_to_trajectory(np.array(path), 1.0, 2.0)
        assert out.shape == (3, 2)
        s5 = math.sqrt(5.0)
        assert out[1, 0] == pytest.approx(s5, abs=1e-12)
        assert out[1, 1] == pytest.approx(s5 / 2.0, abs=1e-12)
        assert out[2, 1] == pytest.approx(0.0, abs=1e-12)

    def test_step_lengths_speed_one(self):
        out = lattice_path_to_trajectory(np.array([(0, 0), (1, 0)]), 1.0, 1.0)
        assert out[1, 0] == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert out[1, 1] == pytest.approx(-math.sqrt(2.0), abs=1e-12)

    def test_slopes_exact(self):
        path = np.array([(0, 0), (1, 1), (2, 0), (3, 0), (4, -1)])
        out = lattice_path_to_trajectory(path, 1.0, 3.0)
        d = np.diff(out, axis=0)
        assert np.allclose(np.abs(d[:, 1] / d[:, 0]), 1.0 / 3.0, atol=1e-12)

    def test_empty_path(self):
        assert lattice_path_to_trajectory([], 1.0, 2.0).shape == (0, 2)

    def test_rejects_layer_jump(self):
        with pytest.raises(ValueError):
            lattice_path_to_trajectory(np.array([(0, 0), (2, 0)]), 1.0, 2.0)

    def test_rejects_bad_adjacency(self):
        with pytest.raises(ValueError):
            lattice_path_to_trajectory(np.array([(0, 0), (1, 2)]), 1.0, 2.0)
        with pytest.raises(ValueError):
            lattice_path_to_trajectory(np.array([(1, 0), (2, 1)]), 1.0, 2.0)

    def test_crossing_path_converts(self):
        spec = LatticeSpec("hexagonal", True, "site", 12, 0.92)
        for t in range(100):
            res = percolate_trial(spec, seed=4, trial=t)
            if res.crossed:
                out = lattice_path_to_trajectory(np.array(res.path), 1.0, 4.0)
                assert out.shape == (13, 2)
                return
        raise AssertionError("no crossing found")
