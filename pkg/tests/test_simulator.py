import math

import numpy as np
import pytest

from iasim import (CORRELATION_PRESETS, CorrelationSpec, CsiSpec, PERFECT_CSI,
                   NetworkConfig, SimulationSpec, cdf_percentile,
                   design_beamformers, draw_channel_set, plan_antennas,
                   planned_config, run, sweep, sweep_grid, trial_rate)
from conftest import benchmark_config

NO_CORR = CorrelationSpec()


def single_stream_config():
    """One stream from BS 1 to user 1; minimum antennas via the planner."""
    demand = ((1, 0, 0), (0, 0, 0), (0, 0, 0))
    return planned_config(plan_antennas(demand), demand)


def base_spec(**overrides):
    defaults = dict(config=benchmark_config(), corr=NO_CORR, csi=PERFECT_CSI,
                    snr_points_db=(30.0,), trials=50, master_seed=msd)
    defaults.update(overrides)
    return SimulationSpec(**defaults)


msd = 20_240_601


class TestTrialRate:
    def test_scalar_link_reduces_to_shannon(self):
        cfg = single_stream_config()
        rng = np.random.default_rng(4)
        links = draw_channel_set(cfg, NO_CORR, 0.0, rng)
        bf = design_beamformers(links, cfg, rng)
        snr = 100.0
        res = trial_rate(bf, links, cfg, snr, 1.0)
        h_eff = (bf.u[0].conj().T @ links.known(1, 1) @ bf.full_blocks[(1, 1)])
        expected = math.log2(1.0 + snr * abs(complex(h_eff[0, 0])) ** 2)
        assert res.per_user_rate[0] == pytest.approx(expected, rel=1e-12)
        assert res.per_user_rate[1] == 0.0
        assert res.per_user_rate[2] == 0.0
        assert res.sum_rate == pytest.approx(expected, rel=1e-12)

    def test_noise_dominated_limit(self, benchmark):
        rng = np.random.default_rng(5)
        links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
        bf = design_beamformers(links, benchmark, rng)
        res = trial_rate(bf, links, benchmark, snr_linear=1e-9)
        assert res.sum_rate <= 1e-6

    def test_rates_nonnegative_and_additive(self, benchmark):
        rng = np.random.default_rng(6)
        links = draw_channel_set(benchmark, NO_CORR, 0.1, rng)
        bf = design_beamformers(links, benchmark, rng)
        res = trial_rate(bf, links, benchmark, 1000.0)
        assert all(r >= 0 for r in res.per_user_rate)
        assert res.sum_rate == pytest.approx(sum(res.per_user_rate))


class TestRun:
    def test_deterministic_summaries(self):
        spec = base_spec(trials=30)
        first = run(spec)
        second = run(spec)
        for a, b in zip(first, second):
            assert a.mean_sum_rate == b.mean_sum_rate
            assert np.array_equal(a.samples, b.samples)
            assert a.dof_estimate == b.dof_estimate

    def test_single_trial_summary_matches_trial(self):
        spec = base_spec(trials=1)
        summary = run(spec)[0]
        assert summary.samples.shape == (1,)
        assert summary.mean_sum_rate == pytest.approx(3 * summary.samples[0])
        assert summary.excluded_trials == 0

    def test_mean_sum_rate_monotone_in_snr(self):
        spec = base_spec(snr_points_db=(10.0, 20.0, 30.0), trials=1000)
        means = [s.mean_sum_rate for s in run(spec)]
        assert means[0] < means[1] < means[2]

    def test_monotone_in_snr_with_feedback_mismatch(self):
        spec = base_spec(snr_points_db=(10.0, 20.0, 30.0), trials=400,
                         csi=CsiSpec.mismatch(alpha=1.0, beta=1.0))
        means = [s.mean_sum_rate for s in run(spec)]
        assert means[0] < means[1] < means[2]

    def test_dof_estimate_definition(self):
        summary = run(base_spec(trials=40))[0]
        assert summary.dof_estimate == pytest.approx(
            summary.mean_sum_rate / math.log2(1000.0))

    def test_raw_collection_shape(self):
        spec = base_spec(trials=25)
        summary = run(spec, collect_raw=True)[0]
        assert summary.per_user_rates.shape == (25, 3)
        averages = summary.per_user_rates.sum(axis=1) / 3
        assert np.allclose(np.sort(averages), summary.samples)

    def test_invalid_config_rejected(self):
        bad = NetworkConfig(cells=3, overlap=2, m_tx=(10, 10, 10),
                            n_rx=(3, 4, 5),
                            demand=((1, 1, 1), (0, 2, 1), (1, 0, 3)))
        with pytest.raises(ValueError):
            run(base_spec(config=bad))


class TestSweep:
    def test_single_value_matches_run(self):
        spec = base_spec(trials=20)
        direct = run(spec)[0]
        point = sweep(spec, "snr", [30.0])[0]
        assert point.summaries[0].mean_sum_rate == direct.mean_sum_rate

    def test_infeasible_point_marked_not_fatal(self):
        spec = base_spec(trials=10)
        points = sweep(spec, "tx_antennas", [5, 10])
        assert points[0].summaries is None
        assert points[0].error
        assert points[1].summaries is not None

    def test_rx_coefficient_requires_model(self):
        spec = base_spec(trials=5)
        points = sweep(spec, "rx_corr_coeff", [0.5])
        assert points[0].summaries is None

    def test_grid_covers_cartesian_product(self):
        spec = base_spec(trials=5, corr=CORRELATION_PRESETS["high"])
        grid = sweep_grid(spec, [10, 12], [0.0, 0.5])
        assert [(p.tx_antennas, p.rx_coeff) for p in grid] == [
            (10, 0.0), (10, 0.5), (12, 0.0), (12, 0.5)]
        assert all(p.summaries is not None for p in grid)

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError):
            sweep(base_spec(trials=5), "bandwidth", [1.0])


class TestCdfPercentile:
    def test_median_of_integers(self):
        assert cdf_percentile([1, 2, 3, 4, 5], 0.5) == 3.0

    def test_extremes(self):
        data = [3.0, 1.0, 2.0]
        assert cdf_percentile(data, 0.0) == 1.0
        assert cdf_percentile(data, 1.0) == 3.0

    def test_standard_normal_upper_decile(self):
        samples = np.random.default_rng(123).standard_normal(10_000)
        assert cdf_percentile(samples, 0.9) == pytest.approx(1.2816, abs=0.05)

    def test_rejects_empty_and_out_of_range(self):
        with pytest.raises(ValueError):
            cdf_percentile([], 0.5)
        with pytest.raises(ValueError):
            cdf_percentile([1.0], 1.5)


class TestSpecValidation:
    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            base_spec(trials=0)

    def test_rejects_empty_snr(self):
        with pytest.raises(ValueError):
            base_spec(snr_points_db=())

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            base_spec(master_seed=-1)
