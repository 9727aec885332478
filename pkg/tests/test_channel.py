import numpy as np
import pytest

from iasim import (BadCoefficient, CORRELATION_PRESETS, CorrelationSpec,
                   CsiSpec, PERFECT_CSI, correlation_matrix, draw_channel_set,
                   draw_link, error_variance)
from conftest import benchmark_config


class TestCorrelationMatrix:
    def test_exponential_direct_values(self):
        r = correlation_matrix(3, "exponential", 0.9)
        expected = np.array([[1.0, 0.9, 0.81],
                             [0.9, 1.0, 0.9],
                             [0.81, 0.9, 1.0]])
        assert np.abs(r - expected).max() < 1e-15

    def test_exponential_zero_coefficient(self):
        assert np.allclose(correlation_matrix(4, "exponential", 0.0), np.eye(4))

    def test_uniform_direct_values(self):
        r = correlation_matrix(3, "uniform", 0.5)
        expected = np.full((3, 3), 0.5)
        np.fill_diagonal(expected, 1.0)
        assert np.abs(r - expected).max() < 1e-15

    def test_none_is_identity(self):
        assert np.allclose(correlation_matrix(5, "none", 0.0), np.eye(5))

    def test_complex_exponential_is_hermitian(self):
        r = correlation_matrix(4, "exponential", 0.6 * np.exp(1j * 0.7))
        assert np.abs(r - r.conj().T).max() < 1e-15

    @pytest.mark.parametrize("model,coeff", [("exponential", 1.0),
                                             ("uniform", 1.0),
                                             ("exponential", -1.2),
                                             ("uniform", -0.3),
                                             ("uniform", 0.5j)])
    def test_bad_coefficients_rejected(self, model, coeff):
        with pytest.raises(BadCoefficient):
            correlation_matrix(3, model, coeff)

    def test_hermitian_psd_across_valid_domain(self):
        for n in (2, 4, 8):
            for a in (0.0, 0.3, 0.9, 0.99):
                for model, coeffs in (("exponential",
                                       (a, -a, a * np.exp(1j * 1.1))),
                                      ("uniform", (a,))):
                    for r in coeffs:
                        mat = correlation_matrix(n, model, r)
                        assert np.abs(mat - mat.conj().T).max() < 1e-14
                        assert np.linalg.eigvalsh(mat).min() >= -1e-10


class TestCsi:
    def test_error_variance_snr_independent(self):
        csi = CsiSpec.mismatch(alpha=0.0, beta=0.05)
        for snr in (1.0, 10.0, 1000.0):
            assert error_variance(csi, snr) == pytest.approx(0.05)

    def test_error_variance_perfect(self):
        assert error_variance(PERFECT_CSI, 1000.0) == 0.0

    def test_error_variance_feedback_case(self):
        csi = CsiSpec.mismatch(alpha=1.5, beta=15.0)
        assert error_variance(csi, 1000.0) == pytest.approx(4.7434e-4, rel=1e-4)

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(ValueError):
            CsiSpec.mismatch(alpha=1.0, beta=0.0)

    def test_rejects_negative_alpha(self):
        with pytest.raises(ValueError):
            CsiSpec(alpha=-0.5, beta=1.0, perfect=False)


NO_CORR = CorrelationSpec()


class TestDrawLink:
    def test_perfect_csi_known_equals_true(self, rng):
        link = draw_link(3, 5, NO_CORR, 0.0, rng)
        assert np.array_equal(link.known_h, link.true_h)
        assert link.err_cov_scale == 0.0

    def test_conditional_error_variance(self, rng):
        tau = 0.1
        acc = 0.0
        draws = 10_000
        for _ in range(draws):
            link = draw_link(2, 2, NO_CORR, tau, rng)
            acc += np.mean(np.abs(link.error) ** 2)
        ratio = acc / draws / (tau / (1 + tau))
        assert 0.85 <= ratio <= 1.15

    def test_transmit_moment_matches_model(self, rng):
        corr = CorrelationSpec(tx_model="exponential", tx_coeff=0.9)
        r_t = correlation_matrix(3, "exponential", 0.9)
        n_rx, draws = 2, 10_000
        acc = np.zeros((3, 3), dtype=complex)
        for _ in range(draws):
            link = draw_link(n_rx, 3, corr, 0.0, rng)
            acc += link.true_h.conj().T @ link.true_h
        assert np.abs(acc / draws / n_rx - r_t).max() <= 0.05

    def test_receive_moment_matches_model(self, rng):
        corr = CorrelationSpec(rx_model="uniform", rx_coeff=0.7)
        r_r = correlation_matrix(2, "uniform", 0.7)
        m_tx, draws = 3, 10_000
        acc = np.zeros((2, 2), dtype=complex)
        for _ in range(draws):
            link = draw_link(2, m_tx, corr, 0.0, rng)
            acc += link.true_h @ link.true_h.conj().T
        assert np.abs(acc / draws / m_tx - r_r).max() <= 0.05

    def test_known_and_error_decorrelated(self, rng):
        tau = 0.3
        acc = 0.0
        draws = 10_000
        for _ in range(draws):
            link = draw_link(2, 2, NO_CORR, tau, rng)
            acc += np.mean(link.known_h * np.conj(link.error))
        assert abs(acc / draws) <= 0.02


class TestDrawChannelSet:
    def test_grid_shapes(self, rng):
        links = draw_channel_set(benchmark_config(), NO_CORR, 0.0, rng)
        assert links.cells == 3
        for j, n in zip((1, 2, 3), (3, 4, 5)):
            for i in (1, 2, 3):
                assert links.known(j, i).shape == (n, 10)
                assert links.true(j, i).shape == (n, 10)

    def test_same_seed_bit_identical(self):
        cfg = benchmark_config()
        a = draw_channel_set(cfg, NO_CORR, 0.2, np.random.default_rng(99))
        b = draw_channel_set(cfg, NO_CORR, 0.2, np.random.default_rng(99))
        for j in (1, 2, 3):
            for i in (1, 2, 3):
                assert np.array_equal(a.known(j, i), b.known(j, i))
                assert np.array_equal(a.true(j, i), b.true(j, i))

    def test_perfect_csi_propagates(self, rng):
        links = draw_channel_set(benchmark_config(),
                                 CORRELATION_PRESETS["high"], 0.0, rng)
        for j in (1, 2, 3):
            for i in (1, 2, 3):
                assert np.abs(links.error(j, i)).max() < 1e-14
