import math

import numpy as np
import pytest

from udn_meanfield import channel, ee, geometry, meanfield, montecarlo
from udn_meanfield.channel import FadingParams, RicianMarginal
from udn_meanfield.errors import InsufficientDataError, ParameterError
from udn_meanfield.meanfield import NetworkConfig
from udn_meanfield.montecarlo import SimConfig

STATIONARY = FadingParams.from_norm(math.sqrt(2), 1.0)
UNIT_FADING = FadingParams.from_norm(1.0, 0.0)  # |g| = 1 at stationarity
FIG1 = NetworkConfig(1.0, 0.001, n_antennas=10, alpha=4.0, R=10.0, noise=1e-3, asymptotic=True)


class TestSimConfig:
    @pytest.mark.parametrize("kw", [{"trials": 0}, {"dt": 0.0}, {"horizon": 0.01, "dt": 0.05},
                                    {"activity_mode": "x"}, {"rate_metric": "x"}, {"workers": 0}])
    def test_rejects(self, kw):
        with pytest.raises(ParameterError):
            SimConfig(**kw)


class TestSnapshotSINR:
    def test_interference_free_unit_fading(self):
        # lambda_u = 0 gives p_a = 0: only the serving BS transmits; R = 1 keeps d0 <= 1
        cfg = NetworkConfig(5.0, 0.0, n_antennas=4, R=1.0, noise=1e-3)
        sim = SimConfig(activity_mode="thinning")
        for seed in range(20):
            s = montecarlo.simulate_snapshot_sinr(cfg, sim, 1.0, math.inf, np.random.default_rng(seed), UNIT_FADING)
            if not s.outage:
                assert s.n_interferers == 0
                assert s.sinr == pytest.approx(4 / 1e-3, rel=1e-12)

    def test_omni_interference_is_plain_sum(self):
        cfg = NetworkConfig(3.0, 1.0, n_antennas=1, R=3.0, noise=0.0)
        sim = SimConfig(activity_mode="thinning")
        rng = np.random.default_rng(4)
        s = montecarlo.simulate_snapshot_sinr(cfg, sim, 1.0, math.inf, rng, UNIT_FADING)
        # replay the same draws: snapshot first, then gains of 1 for every interferer
        snap = geometry.generate_snapshot(geometry.DensityConfig(3.0, 1.0, 3.0), np.random.default_rng(4), "thinning")
        idx = snap.interferer_indices()
        total = channel.path_loss(np.hypot(*snap.bs_points[idx].T), 4.0).sum()
        assert s.normalized_interference == pytest.approx(total / 9.0, rel=1e-12)

    @pytest.mark.xfail(strict=True, reason="bounded serving path loss saturates the simulated rate; "
                                           "the mean-field rate keeps growing with density")
    def test_rate_near_mean_field_at_high_density(self):
        cfg = FIG1.replace(lambda_b=1.0)
        sim = SimConfig(trials=1000, activity_mode="thinning")
        est = montecarlo.estimate_average_rate(cfg, sim, STATIONARY)
        m = channel.fading_marginal(math.inf, STATIONARY)
        ana = meanfield.mf_rate(cfg, meanfield.mf_interference(cfg, 1.0, 4.0), m, 1.0)
        assert abs(est.mean / ana - 1) < 0.02


class TestEstimators:
    def test_min_trials(self):
        with pytest.raises(ParameterError):
            montecarlo.estimate_average_rate(FIG1, SimConfig(trials=50), STATIONARY)

    def test_zero_variance_case(self):
        cfg = NetworkConfig(5.0, 0.0, n_antennas=4, R=1.0, noise=1e-3)
        est = montecarlo.estimate_average_rate(cfg, SimConfig(trials=200, activity_mode="thinning"), UNIT_FADING)
        assert est.mean == pytest.approx(math.log1p(4 / 1e-3), abs=1e-12)
        assert est.std_error == pytest.approx(0.0, abs=1e-12)

    def test_all_outage(self):
        cfg = NetworkConfig(0.0, 1.0, R=1.0)
        with pytest.raises(InsufficientDataError):
            montecarlo.estimate_average_rate(cfg, SimConfig(trials=100), STATIONARY)

    def test_sample_conservation(self):
        cfg = NetworkConfig(0.3, 0.1, R=1.5)
        est = montecarlo.estimate_average_rate(cfg, SimConfig(trials=400), STATIONARY)
        assert est.trials_used + est.outages == 400 and est.outages > 0

    def test_std_error_scaling(self):
        cfg = NetworkConfig(2.0, 0.2, R=3.0)
        a = montecarlo.estimate_average_rate(cfg, SimConfig(trials=2000, master_seed=1), STATIONARY)
        b = montecarlo.estimate_average_rate(cfg, SimConfig(trials=4000, master_seed=2), STATIONARY)
        assert b.std_error / a.std_error == pytest.approx(1 / math.sqrt(2), rel=0.1)

    def test_outage_matches_coverage(self):
        cfg = NetworkConfig(0.1, 0.01, R=2.0)
        sim = SimConfig(trials=4000, activity_mode="thinning")
        est = montecarlo.estimate_outage(cfg, sim)
        target = 1 - geometry.coverage_probability(geometry.DensityConfig(0.1, 0.01, 2.0))
        assert abs(est.mean - target) < 3 * math.sqrt(target * (1 - target) / sim.trials)

    def test_literal_metric(self):
        cfg = NetworkConfig(5.0, 0.0, n_antennas=1, R=1.0, noise=0.5)
        sim = SimConfig(trials=100, activity_mode="thinning", rate_metric="literal")
        assert montecarlo.estimate_average_rate(cfg, sim, UNIT_FADING).mean == pytest.approx(3.0)


class TestDeterminism:
    def test_repeatable(self):
        cfg = NetworkConfig(2.0, 0.5, R=3.0)
        sim = SimConfig(trials=300, master_seed=99)
        a = montecarlo.estimate_average_rate(cfg, sim, STATIONARY)
        b = montecarlo.estimate_average_rate(cfg, sim, STATIONARY)
        assert a == b

    def test_worker_count_invariant(self):
        cfg = NetworkConfig(2.0, 0.5, R=3.0)
        a = montecarlo.estimate_average_rate(cfg, SimConfig(trials=300, workers=1), STATIONARY)
        b = montecarlo.estimate_average_rate(cfg, SimConfig(trials=300, workers=3), STATIONARY)
        assert a == b

    def test_streams_differ(self):
        x = montecarlo.trial_rng(1, montecarlo.STREAM_RATE, 0).random()
        y = montecarlo.trial_rng(1, montecarlo.STREAM_INTERFERENCE, 0).random()
        z = montecarlo.trial_rng(1, montecarlo.STREAM_RATE, 1).random()
        assert len({x, y, z}) == 3


class TestInterference:
    def test_matches_exact_mean(self):
        cfg = NetworkConfig(30.0, 1.0, n_antennas=4, R=5.0)
        sim = SimConfig(trials=2000, activity_mode="thinning")
        est = montecarlo.estimate_normalized_interference(cfg, sim, STATIONARY)
        target = meanfield.mf_interference(cfg, 1.0, 4.0, "campbell").value
        assert abs(est.mean - target) < 3 * est.std_error

    @pytest.mark.xfail(strict=True, reason="normalised interference fluctuates far beyond a 5% band across snapshots")
    def test_kantorovich_concentration(self):
        cfg = FIG1.replace(lambda_b=1.0)
        _, samples = montecarlo.estimate_normalized_interference(
            cfg, SimConfig(trials=2000, activity_mode="thinning"), STATIONARY, return_samples=True)
        assert meanfield.kantorovich_gap(samples[samples > 0]) <= 1.05


class TestActivity:
    def test_no_users(self):
        res = montecarlo.validate_active_probability(NetworkConfig(1.0, 0.0), SimConfig(trials=10))
        assert res.empirical == 0 and res.analytical == 0

    def test_dense_ratio(self):
        res = montecarlo.validate_active_probability(NetworkConfig(10.0, 1.0), SimConfig(trials=1500))
        assert res.relative_gap < 0.02

    def test_sparse_regime_reports_gap(self):
        res = montecarlo.validate_active_probability(NetworkConfig(1.0, 10.0), SimConfig(trials=100))
        assert 0 <= res.relative_gap < 1 and res.n_bs > 0


class TestTrajectory:
    def test_shapes(self):
        res = montecarlo.simulate_trajectory(NetworkConfig(10, 1, asymptotic=True), SimConfig(horizon=2.0), STATIONARY)
        n = len(res.times)
        assert n == 40 and np.all(np.diff(res.times) > 0)
        assert all(len(x) == n for x in (res.ee_proposed, res.ee_fixed, res.ee_full_search, res.power_trace))

    def test_noise_free_fixed_policy_is_monotone(self):
        res = montecarlo.simulate_trajectory(NetworkConfig(10, 1, asymptotic=True), SimConfig(horizon=20.0),
                                             FadingParams.from_norm(math.sqrt(2), 0.0))
        d = np.diff(res.ee_fixed)
        assert np.all(d >= 0) or np.all(d <= 0)
        stationary = ee.baseline_fixed_power(ee.make_ee_params(NetworkConfig(10, 1, asymptotic=True),
                                                                RicianMarginal(math.sqrt(2), 0.0)))
        assert res.ee_fixed[-1] == pytest.approx(stationary, rel=1e-6)

    def test_proposed_not_below_full_search_grid(self):
        cfg = NetworkConfig(100, 1, asymptotic=True)
        res = montecarlo.simulate_trajectory(cfg, SimConfig(horizon=2.0), STATIONARY, fading_source="marginal")
        assert np.all(res.ee_proposed >= res.ee_full_search - 1e-6)

    def test_bad_source(self):
        with pytest.raises(ParameterError):
            montecarlo.simulate_trajectory(FIG1, SimConfig(horizon=1.0), STATIONARY, fading_source="x")


class TestSweep:
    def test_single_cell(self):
        base = NetworkConfig(1.0, 1.0, asymptotic=True)
        table = montecarlo.stationary_ee_sweep(base, [4], [30.0], STATIONARY)
        direct = ee.optimal_power_fixed_point(ee.make_ee_params(base.replace(n_antennas=4, lambda_b=30.0),
                                                                RicianMarginal(math.sqrt(2), 1.0)))
        assert table.ee[0, 0] == direct.ee_value and table.power[0, 0] == direct.power

    def test_errors_recorded(self):
        table = montecarlo.stationary_ee_sweep(NetworkConfig(1.0, 1.0), [1], [0.0, 10.0], STATIONARY)
        assert (1, 0.0) in table.errors and math.isnan(table.ee[0, 0]) and math.isfinite(table.ee[0, 1])

    def test_empty(self):
        with pytest.raises(ParameterError):
            montecarlo.stationary_ee_sweep(FIG1, [], [1.0], STATIONARY)

    def test_trends(self):
        base = NetworkConfig(1.0, 1.0, R=10.0, noise=1e-3, asymptotic=True)
        t = montecarlo.stationary_ee_sweep(base, [1, 4, 16, 64], [1, 3, 10, 30, 100], FadingParams((1, 1), 1.0))
        assert np.all(np.diff(t.ee, axis=0) >= 0) and np.all(np.diff(t.ee, axis=1) >= 0)


def test_simulation_window():
    sim = SimConfig()
    assert montecarlo.simulation_window(NetworkConfig(1, 1, R=3.0), sim) == 3.0
    assert montecarlo.simulation_window(NetworkConfig(1, 1, R=3.0, asymptotic=True), sim) == pytest.approx(
        geometry.truncation_radius(4.0, 1e-3))
