import dataclasses

import numpy as np
import pytest

from iasim import (CORRELATION_PRESETS, CorrelationSpec, InfeasibleAlignment,
                   NetworkConfig, design_beamformers, design_ici,
                   draw_channel_set, derive, effective_channels, rank_of,
                   verify_alignment)
from conftest import benchmark_config

NO_CORR = CorrelationSpec()


def perfect_draw(config, seed, corr=NO_CORR):
    rng = np.random.default_rng(seed)
    links = draw_channel_set(config, corr, 0.0, rng)
    return links, design_beamformers(links, config, rng)


class TestDesignIci:
    def test_benchmark_column_counts(self, benchmark, rng):
        links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
        ici = design_ici(links, benchmark)
        assert [v.shape for v in ici] == [(10, 5), (10, 7), (10, 6)]

    def test_victim_channels_are_nulled(self, benchmark, rng):
        links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
        ici = design_ici(links, benchmark)
        for i, prev in ((1, 3), (2, 1), (3, 2)):
            assert np.abs(links.known(prev, i) @ ici[i - 1]).max() <= 1e-10

    def test_orthonormal_columns(self, benchmark, rng):
        links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
        for v in design_ici(links, benchmark):
            gram = v.conj().T @ v
            assert np.abs(gram - np.eye(v.shape[1])).max() <= 1e-12

    def test_no_spare_dimensions_yields_empty_stage(self, rng):
        cfg = NetworkConfig(cells=3, overlap=2, m_tx=(5, 10, 10),
                            n_rx=(3, 4, 5),
                            demand=((0, 0, 0), (0, 1, 1), (1, 0, 1)))
        links = draw_channel_set(cfg, NO_CORR, 0.0, rng)
        ici = design_ici(links, cfg)
        assert ici[0].shape == (5, 0)


class TestEffectiveChannels:
    def test_benchmark_shapes(self, benchmark, rng):
        links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
        ici = design_ici(links, benchmark)
        eff = effective_channels(links, ici, benchmark)
        assert eff[(1, 1)].shape == (3, 5)
        assert eff[(1, 3)].shape == (3, 6)
        assert set(eff) == {(1, 1), (1, 3), (2, 1), (2, 2), (3, 2), (3, 3)}

    def test_identity_stage_recovers_known(self, benchmark, rng):
        links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
        ident = tuple(np.eye(10, dtype=complex) for _ in range(3))
        eff = effective_channels(links, ident, benchmark)
        assert np.array_equal(eff[(2, 1)], links.known(2, 1))

    def test_generic_full_rank(self, benchmark):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            links = draw_channel_set(benchmark, NO_CORR, 0.0, rng)
            ici = design_ici(links, benchmark)
            eff = effective_channels(links, ici, benchmark)
            for (j, _), mat in eff.items():
                assert rank_of(mat) == min(mat.shape)


class TestDesignXci:
    def test_pairwise_cancellation_and_nulling(self, benchmark):
        links, bf = perfect_draw(benchmark, seed=5)
        eff = effective_channels(links, bf.v_ici, benchmark)
        # user 1: one aligned pair, two transmit-nulled excess columns
        pair = eff[(1, 3)] @ bf.v_xci[(3, 3)][:, :1] \
            + eff[(1, 1)] @ bf.v_xci[(1, 2)][:, :1]
        assert np.abs(pair).max() <= 1e-10
        nulled = eff[(1, 3)] @ bf.v_xci[(3, 3)][:, 1:]
        assert np.abs(nulled).max() <= 1e-10

    def test_block_widths_match_demands(self, benchmark):
        _, bf = perfect_draw(benchmark, seed=6)
        for (bs, user), block in bf.v_xci.items():
            assert block.shape == (derive(benchmark).q[bs - 1],
                                   benchmark.demand_between(bs, user))

    def test_equal_interferers_fully_paired(self):
        demand = ((1, 1, 0), (0, 1, 1), (1, 0, 1))
        cfg = NetworkConfig(cells=3, overlap=2, m_tx=(6, 6, 6),
                            n_rx=(3, 3, 3), demand=demand)
        links, bf = perfect_draw(cfg, seed=7)
        report = verify_alignment(links, bf, cfg)
        assert report.passed

    def test_single_interferer_pure_nulling(self):
        # no cross messages: every interferer is transmit-nulled outright
        demand = ((2, 0, 0), (0, 2, 0), (0, 0, 2))
        cfg = NetworkConfig(cells=3, overlap=2, m_tx=(6, 6, 6),
                            n_rx=(2, 2, 2), demand=demand)
        links, bf = perfect_draw(cfg, seed=8)
        report = verify_alignment(links, bf, cfg)
        assert report.passed
        assert report.xci_residual <= 1e-10


class TestCombinerAndComposition:
    def test_benchmark_combiner_shapes(self, benchmark):
        _, bf = perfect_draw(benchmark, seed=9)
        assert [u.shape for u in bf.u] == [(3, 2), (4, 3), (5, 4)]

    def test_combiner_orthonormal(self, benchmark):
        _, bf = perfect_draw(benchmark, seed=10)
        for u in bf.u:
            gram = u.conj().T @ u
            assert np.abs(gram - np.eye(u.shape[1])).max() <= 1e-12

    def test_unit_trace_power(self, benchmark):
        _, bf = perfect_draw(benchmark, seed=11)
        for v in bf.v_full:
            assert abs(np.trace(v @ v.conj().T).real - 1.0) <= 1e-12

    def test_dimension_accounting(self, benchmark):
        _, bf = perfect_draw(benchmark, seed=12)
        dq = derive(benchmark)
        for i in (1, 2, 3):
            assert bf.v_full[i - 1].shape == (10, dq.d_tx[i - 1])
            assert rank_of(bf.v_full[i - 1]) == dq.d_tx[i - 1]


class TestVerifyAlignment:
    def test_perfect_csi_passes_on_known(self, benchmark):
        for seed in range(20):
            links, bf = perfect_draw(benchmark, seed=seed)
            report = verify_alignment(links, bf, benchmark, channel="known")
            assert report.passed, str(report)
            assert report.ici_residual <= 1e-9
            assert report.xci_residual <= 1e-9
            assert report.desired_rank == (2, 3, 4)

    def test_alignment_holds_under_any_correlation(self, benchmark):
        for name, corr in CORRELATION_PRESETS.items():
            links, bf = perfect_draw(benchmark, seed=13, corr=corr)
            report = verify_alignment(links, bf, benchmark, channel="known")
            assert report.passed, f"{name}: {report}"
            assert max(report.ici_residual, report.xci_residual) <= 1e-8

    def test_mismatch_leaks_monotonically(self, benchmark):
        residuals = []
        for tau in (0.01, 0.1, 1.0):
            rng = np.random.default_rng(77)
            links = draw_channel_set(benchmark, NO_CORR, tau, rng)
            bf = design_beamformers(links, benchmark, rng)
            report = verify_alignment(links, bf, benchmark, channel="true")
            assert not report.passed
            residuals.append(report.ici_residual)
        assert residuals[0] < residuals[1] < residuals[2]

    def test_infeasible_config_rejected(self, rng):
        cfg = dataclasses.replace(benchmark_config(), m_tx=(5, 10, 10))
        links = draw_channel_set(cfg, NO_CORR, 0.0, rng)
        with pytest.raises(InfeasibleAlignment):
            design_beamformers(links, cfg, rng)
