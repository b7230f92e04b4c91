import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from udn_meanfield import geometry
from udn_meanfield.errors import NoBaseStationError, ParameterError
from udn_meanfield.geometry import DensityConfig


class TestSamplePPP:
    def test_zero_density_is_empty(self):
        pts = geometry.sample_ppp(0.0, 1.0, np.random.default_rng(0))
        assert pts.shape == (0, 2)

    @pytest.mark.parametrize("density, radius", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_rejects_bad_arguments(self, density, radius):
        with pytest.raises(ParameterError):
            geometry.sample_ppp(density, radius, np.random.default_rng(0))

    @pytest.mark.parametrize("density, radius", [(1.0, 1.0), (10.0, 2.0)])
    def test_count_mean_and_variance(self, density, radius):
        rng = np.random.default_rng(7)
        n = 20_000
        counts = np.array([len(geometry.sample_ppp(density, radius, rng)) for _ in range(n)])
        lam = density * math.pi * radius ** 2
        assert abs(counts.mean() - lam) < 4 * math.sqrt(lam / n)
        # sample variance of a Poisson count has sd ~ lam sqrt(2/n) + lam/sqrt(n)
        assert abs(counts.var(ddof=1) - lam) < 4 * math.sqrt((lam + 2 * lam ** 2) / n)

    def test_points_lie_in_disk(self):
        pts = geometry.sample_ppp(50.0, 3.0, np.random.default_rng(1))
        assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 3.0)

    def test_radial_cdf(self):
        rng = np.random.default_rng(3)
        r = np.concatenate([np.hypot(*geometry.sample_ppp(5.0, 2.0, rng).T) for _ in range(200)])
        assert stats.kstest(r, lambda x: (x / 2.0) ** 2).pvalue > 0.01


class TestNearestBS:
    def test_closest(self):
        assert geometry.nearest_bs((0, 0), [(1, 0), (0, 2)]) == (0, 1.0)

    def test_tie_takes_lowest_index(self):
        assert geometry.nearest_bs((0, 0), [(1, 0), (-1, 0)]) == (0, 1.0)

    def test_single(self):
        assert geometry.nearest_bs((0, 0), [(3, 4)]) == (0, 5.0)

    def test_empty_raises(self):
        with pytest.raises(NoBaseStationError):
            geometry.nearest_bs((0, 0), np.empty((0, 2)))

    @pytest.mark.parametrize("n", [10, 500])
    def test_associate_matches_brute_force(self, n):
        rng = np.random.default_rng(n)
        bs = rng.uniform(-1, 1, (n, 2))
        users = rng.uniform(-1, 1, (300, 2))
        d = np.hypot(users[:, None, 0] - bs[None, :, 0], users[:, None, 1] - bs[None, :, 1])
        np.testing.assert_array_equal(geometry.associate(users, bs), np.argmin(d, axis=1))

    def test_associate_ties_on_lattice(self):
        # user equidistant from four lattice BSs picks the lowest index
        bs = np.array([(x, y) for x in range(-5, 6) for y in range(-5, 6)], dtype=float)
        bs = np.vstack([bs] * 7)  # many exact duplicates push the tree path
        idx = geometry.associate(np.array([[0.5, 0.5]]), bs)
        d = np.hypot(bs[:, 0] - 0.5, bs[:, 1] - 0.5)
        assert idx[0] == int(np.flatnonzero(d == d.min())[0])


class TestActiveFlags:
    def test_no_users(self):
        flags = geometry.compute_active_flags(np.random.default_rng(0).uniform(size=(5, 2)), np.empty((0, 2)))
        assert not flags.any()

    def test_one_user_one_flag(self):
        rng = np.random.default_rng(1)
        flags = geometry.compute_active_flags(rng.uniform(size=(40, 2)), rng.uniform(size=(1, 2)))
        assert flags.sum() == 1

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), lb=st.floats(0.5, 20), lu=st.floats(0.1, 5))
    def test_typical_user_serving_bs_active(self, seed, lb, lu):
        for mode in ("voronoi", "thinning"):
            snap = geometry.generate_snapshot(DensityConfig(lb, lu, 2.0), np.random.default_rng(seed), mode)
            if snap.serving_index is not None:
                assert snap.active[snap.serving_index]
                assert snap.serving_index not in snap.interferer_indices()


class TestClosedForms:
    def test_coverage_zero_density(self):
        assert geometry.coverage_probability(DensityConfig(0.0, 1.0, 5.0)) == 0.0

    def test_coverage_large_radius(self):
        assert geometry.coverage_probability(DensityConfig(1.0, 1.0, 100.0)) == pytest.approx(1.0)

    def test_coverage_value(self):
        assert geometry.coverage_probability(DensityConfig(0.1, 1.0, 1.0)) == pytest.approx(
            1 - math.exp(-0.1 * math.pi), rel=1e-12)
        assert geometry.coverage_probability(DensityConfig(0.1, 1.0, 1.0)) == pytest.approx(0.2696, abs=1e-4)

    def test_coverage_empirical(self):
        rng = np.random.default_rng(11)
        hits = np.mean([len(geometry.sample_ppp(0.1, 1.0, rng)) > 0 for _ in range(20_000)])
        p = 1 - math.exp(-0.1 * math.pi)
        assert abs(hits - p) < 4 * math.sqrt(p * (1 - p) / 20_000)

    def test_active_probability_values(self):
        assert geometry.active_probability(1.0, 0.0) == 0.0
        assert geometry.active_probability(1.0, 1.0) == pytest.approx(1 - (1 + 1 / 3.5) ** -3.5)
        assert geometry.active_probability(1.0, 1.0) == pytest.approx(0.585, abs=1e-3)

    def test_active_probability_zero_bs(self):
        with pytest.raises(ParameterError):
            geometry.active_probability(0.0, 1.0)

    def test_active_probability_sparse_users_asymptote(self):
        ratios = [geometry.active_probability(lb, 1.0) / (1.0 / lb) for lb in (1e2, 1e4, 1e6)]
        assert abs(ratios[-1] - 1) < 1e-5
        assert abs(ratios[0] - 1) > abs(ratios[1] - 1) > abs(ratios[2] - 1)

    def test_truncation_radius_tail_fraction(self):
        # with unit density, interference beyond W is 2 pi W^(2-a)/(a-2) of pi(1 + 2/(a-2))
        for alpha in (3.0, 4.0, 5.0):
            w = geometry.truncation_radius(alpha, 1e-3)
            tail = 2 * math.pi * w ** (2 - alpha) / (alpha - 2)
            total = math.pi * (1 + 2 / (alpha - 2))
            assert tail / total == pytest.approx(1e-3, rel=1e-9)

    def test_density_config_rejects_negative(self):
        with pytest.raises(ParameterError):
            DensityConfig(-1.0, 1.0, 1.0)
        with pytest.raises(ParameterError):
            DensityConfig(1.0, 1.0, 0.0)


def test_unknown_activity_mode():
    with pytest.raises(ParameterError):
        geometry.generate_snapshot(DensityConfig(1.0, 1.0, 1.0), np.random.default_rng(0), "random")
