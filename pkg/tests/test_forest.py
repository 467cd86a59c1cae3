import math

import numpy as np
import pytest
from scipy import stats

from forestperc.forest import (
    Forest,
    ForestFormatError,
    Window,
    load_forest,
    sample_mixed_forest,
    sample_poisson_forest,
    save_forest,
    scale_forest,
)


class TestWindow:
    def test_area(self):
        assert Window(200.0, 4000.0).area == pytest.approx(800000.0)

    @pytest.mark.parametrize("w,l", [(0.0, 1.0), (1.0, -2.0), (math.inf, 1.0)])
    def test_rejects_degenerate(self, w, l):
        with pytest.raises(ValueError):
            Window(w, l)


class TestSampling:
    def test_zero_density_empty(self):
        f = sample_poisson_forest(0.0, Window(10.0, 10.0), 1.0, seed=0)
        assert f.n_trees == 0

    def test_negative_density_rejected(self):
        with pytest.raises(ValueError):
            sample_poisson_forest(-0.1, Window(10.0, 10.0), 1.0, seed=0)

    def test_determinism(self):
        a = sample_poisson_forest(0.05, Window(30.0, 30.0), 1.0, seed=42)
        b = sample_poisson_forest(0.05, Window(30.0, 30.0), 1.0, seed=42)
        assert np.array_equal(a.centers, b.centers)
        c = sample_poisson_forest(0.05, Window(30.0, 30.0), 1.0, seed=43)
        assert not np.array_equal(a.centers, c.centers)

    def test_centers_inside_window(self):
        f = sample_poisson_forest(0.1, Window(25.0, 50.0), 1.0, seed=7)
        assert f.centers[:, 0].min() >= 0.0 and f.centers[:, 0].max() <= 50.0
        assert f.centers[:, 1].min() >= 0.0 and f.centers[:, 1].max() <= 25.0

    def test_expected_count_scale(self):
        # paper-scale parameters: mean count rho*w*l = 50,000
        f = sample_poisson_forest(0.01, Window(500.0, 10000.0), 1.0, seed=1)
        assert abs(f.n_trees - 50000) < 5 * math.sqrt(50000)

    def test_count_statistics(self):
        # mean-100 counts over many seeds stay inside a 3-sigma band on
        # the sample mean
        counts = [
            sample_poisson_forest(1.0, Window(10.0, 10.0), 0.1, seed=s).n_trees
            for s in range(1000)
        ]
        mean = float(np.mean(counts))
        assert abs(mean - 100.0) < 3.0 * math.sqrt(100.0 / 1000.0) * 10.0
        assert abs(mean - 100.0) < 3.0 * 10.0 / math.sqrt(1000.0)

    def test_spatial_uniformity(self):
        # chi-square on a 10 x 10 partition, counts aggregated over seeds
        grid = np.zeros((10, 10))
        for s in range(40):
            f = sample_poisson_forest(0.5, Window(10.0, 10.0), 0.1, seed=100 + s)
            h, _, _ = np.histogram2d(
                f.centers[:, 0], f.centers[:, 1], bins=10, range=[[0, 10], [0, 10]]
            )
            grid += h
        _, p = stats.chisquare(grid.ravel())
        assert p > 0.001


class TestMixture:
    def test_degenerate_weights(self):
        w = Window(20.0, 20.0)
        for seed in range(5):
            a = sample_mixed_forest(0.02, 0.2, 1.0, w, 1.0, seed)
            assert a.mixed_branch == 0 and a.density == 0.02
            b = sample_mixed_forest(0.02, 0.2, 0.0, w, 1.0, seed)
            assert b.mixed_branch == 1 and b.density == 0.2

    def test_invalid_weight(self):
        with pytest.raises(ValueError):
            sample_mixed_forest(0.01, 0.1, 1.5, Window(10.0, 10.0), 1.0, 0)

    def test_branch_frequency(self):
        picks = [
            sample_mixed_forest(0.002, 0.05, 0.5, Window(8.0, 8.0), 1.0, s).mixed_branch
            for s in range(1000)
        ]
        assert abs(np.mean(picks) - 0.5) < 0.05

    def test_branch_matches_plain_poisson(self):
        # conditioned on the branch, the draw equals the plain sampler
        w = Window(15.0, 15.0)
        f = sample_mixed_forest(0.03, 0.3, 0.5, w, 1.0, seed=11)
        rho = 0.03 if f.mixed_branch == 0 else 0.3
        g = sample_poisson_forest(rho, w, 1.0, seed=11)
        assert np.array_equal(f.centers, g.centers)


class TestScaling:
    def test_identity(self):
        f = sample_poisson_forest(0.05, Window(20.0, 20.0), 1.0, seed=2)
        g = scale_forest(f, 1.0, 1.0)
        assert np.array_equal(f.centers, g.centers)
        assert g.density == f.density

    def test_density_transforms(self):
        f = sample_poisson_forest(0.01, Window(20.0, 20.0), 1.0, seed=2)
        g = scale_forest(f, 2.0, 2.0)
        assert g.density == pytest.approx(0.0025)
        assert g.window.width == pytest.approx(40.0)
        assert g.window.length == pytest.approx(40.0)

    def test_rejects_nonpositive(self):
        f = sample_poisson_forest(0.01, Window(20.0, 20.0), 1.0, seed=2)
        with pytest.raises(ValueError):
            scale_forest(f, 0.0, 1.0)

    def test_cell_counts_transported(self):
        # the count pattern over a congruent partition is unchanged
        f = sample_poisson_forest(0.3, Window(10.0, 10.0), 0.2, seed=5)
        g = scale_forest(f, 3.0, 2.0)
        hf, _, _ = np.histogram2d(
            f.centers[:, 0], f.centers[:, 1], bins=10, range=[[0, 10], [0, 10]]
        )
        hg, _, _ = np.histogram2d(
            g.centers[:, 0], g.centers[:, 1], bins=10, range=[[0, 30], [0, 20]]
        )
        assert np.array_equal(hf, hg)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        f = sample_poisson_forest(0.05, Window(30.0, 30.0), 1.0, seed=9)
        p = str(tmp_path / "f.csv")
        save_forest(f, p)
        g = load_forest(p)
        assert np.array_equal(f.centers, g.centers)
        assert g.window == f.window
        assert g.tree_radius == f.tree_radius
        assert g.density == f.density
        assert g.seed == f.seed

    def test_empty_round_trip(self, tmp_path):
        f = sample_poisson_forest(0.0, Window(10.0, 10.0), 1.0, seed=0)
        p = str(tmp_path / "empty.csv")
        save_forest(f, p)
        assert load_forest(p).n_trees == 0

    def test_negative_radius_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# forest v1, w=10, l=10, r=-1, rho=0.1, seed=0\n1,1\n")
        with pytest.raises(ForestFormatError):
            load_forest(str(p))

    def test_bad_header_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("not a forest\n")
        with pytest.raises(ForestFormatError) as err:
            load_forest(str(p))
        assert err.value.line == 1

    def test_bad_row_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# forest v1, w=10, l=10, r=1, rho=0.1, seed=0\n1,1\nx,2\n")
        with pytest.raises(ForestFormatError) as err:
            load_forest(str(p))
        assert err.value.line == 3


class TestForestValue:
    def test_rejects_outside_center(self):
        with pytest.raises(ValueError):
            Forest(Window(10.0, 10.0), 1.0, np.array([[11.0, 5.0]]), 0.1, 0)

    def test_centers_frozen(self):
        f = sample_poisson_forest(0.05, Window(10.0, 10.0), 1.0, seed=1)
        with pytest.raises(ValueError):
            f.centers[0, 0] = 0.0
