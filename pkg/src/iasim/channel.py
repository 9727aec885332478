"""Correlated MIMO link synthesis with a conditional CSI-mismatch model.

Each link is drawn as an i.i.d. complex Gaussian core plus an independent
measurement error; conditioning on the noisy estimate splits the true
channel into a designer-known part and a residual error, and both are then
colored by the transmit/receive correlation square roots.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_TOL, Tolerance, complex_gaussian, hermitian_sqrt

CORRELATION_MODELS = ("exponential", "uniform", "none")


class BadCoefficient(ValueError):
    """Correlation coefficient outside the model's valid domain."""


def _check_coeff(model: str, r: complex) -> complex:
    if model not in CORRELATION_MODELS:
        raise ValueError(f"unknown correlation model {model!r}")
    r = complex(r)
    if abs(r) >= 1.0:
        raise BadCoefficient(f"|r| must be < 1, got |{r}| = {abs(r):.4f}")
    if model == "uniform" and (r.imag != 0.0 or r.real < 0.0):
        # The uniform (worst-case) model is only PSD for real r in [0, 1).
        raise BadCoefficient(f"uniform model needs real r in [0, 1), got {r}")
    return r


@dataclass(frozen=True)
class CorrelationSpec:
    """Per-side correlation model and coefficient for every link."""

    tx_model: str = "none"
    rx_model: str = "none"
    tx_coeff: complex = 0.0
    rx_coeff: complex = 0.0

    def __post_init__(self) -> None:
        _check_coeff(self.tx_model, self.tx_coeff)
        _check_coeff(self.rx_model, self.rx_coeff)


# Named regimes: medium/high pair an exponential transmit side with the
# worst-case uniform receive side; low means uncorrelated antennas.
CORRELATION_PRESETS = {
    "low": CorrelationSpec(),
    "medium": CorrelationSpec(tx_model="exponential", tx_coeff=0.3,
                              rx_model="uniform", rx_coeff=0.9),
    "high": CorrelationSpec(tx_model="exponential", tx_coeff=0.9,
                            rx_model="uniform", rx_coeff=0.9),
}


@dataclass(frozen=True)
class CsiSpec:
    """Channel-knowledge quality: error variance tau = beta * snr**(-alpha),
    or exactly zero when `perfect` is set."""

    alpha: float = 0.0
    beta: float = 0.0
    perfect: bool = True

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not self.perfect and not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @classmethod
    def mismatch(cls, alpha: float, beta: float) -> "CsiSpec":
        return cls(alpha=alpha, beta=beta, perfect=False)


PERFECT_CSI = CsiSpec()


def error_variance(csi: CsiSpec, snr_linear: float) -> float:
    """Per-entry variance of the channel measurement error at the given SNR."""
    if not snr_linear > 0:
        raise ValueError(f"snr_linear must be positive, got {snr_linear}")
    if csi.perfect:
        return 0.0
    return csi.beta * snr_linear ** (-csi.alpha)


def correlation_matrix(n: int, model: str, r: complex) -> np.ndarray:
    """n-by-n antenna correlation matrix.

    exponential: entry [m, k] = r**|m-k| below the diagonal, conjugated
    above; uniform: unit diagonal, r everywhere else; none: identity.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    r = _check_coeff(model, r)
    if model == "none":
        return np.eye(n, dtype=complex)
    if model == "exponential":
        idx = np.arange(n)
        gap = np.subtract.outer(idx, idx)
        mat = np.power(r, np.abs(gap).astype(float))
        # conjugate above the diagonal keeps the matrix Hermitian for complex r
        mat = np.where(gap >= 0, mat, np.conj(mat))
    else:
        mat = np.full((n, n), r, dtype=complex)
        np.fill_diagonal(mat, 1.0)
    np.fill_diagonal(mat, np.real(np.diag(mat)))
    return mat


@functools.lru_cache(maxsize=256)
def _corr_sqrt(n: int, model: str, r: complex) -> np.ndarray:
    """Cached Hermitian square root of correlation_matrix(n, model, r)."""
    s = hermitian_sqrt(correlation_matrix(n, model, r))
    s.flags.writeable = False
    return s


@dataclass(frozen=True)
class LinkChannel:
    """One link's true channel, the designer-known channel, and the
    per-entry variance of the residual error before coloring."""

    true_h: np.ndarray
    known_h: np.ndarray
    err_cov_scale: float

    @property
    def error(self) -> np.ndarray:
        return self.true_h - self.known_h


def draw_link(n_rx: int, m_tx: int, corr: CorrelationSpec, tau: float,
              rng: np.random.Generator, tol: Tolerance = DEFAULT_TOL) -> LinkChannel:
    """Draw one correlated link with measurement-error variance `tau`.

    The i.i.d. core G ~ CN(0,1) and error E ~ CN(0,tau) give the noisy
    estimate G + E; conditioning on it leaves the known part (G+E)/(1+tau)
    and a residual with per-entry variance tau/(1+tau), independent of the
    known part. Both sides are then colored by the correlation roots, so
    true_h - known_h is exactly the colored residual.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    core = complex_gaussian(n_rx, m_tx, 1.0, rng)
    noise = complex_gaussian(n_rx, m_tx, tau, rng)
    known_core = (core + noise) / (1.0 + tau)

    if tol is DEFAULT_TOL:
        rx_sqrt = _corr_sqrt(n_rx, corr.rx_model, complex(corr.rx_coeff))
        tx_sqrt = _corr_sqrt(m_tx, corr.tx_model, complex(corr.tx_coeff))
    else:
        rx_sqrt = hermitian_sqrt(
            correlation_matrix(n_rx, corr.rx_model, corr.rx_coeff), tol)
        tx_sqrt = hermitian_sqrt(
            correlation_matrix(m_tx, corr.tx_model, corr.tx_coeff), tol)
    true_h = rx_sqrt @ core @ tx_sqrt
    known_h = rx_sqrt @ known_core @ tx_sqrt
    return LinkChannel(true_h=true_h, known_h=known_h,
                       err_cov_scale=tau / (1.0 + tau))


@dataclass(frozen=True)
class ChannelSet:
    """Complete grid of links; links[j][i] connects BS i+1 to user j+1."""

    links: tuple[tuple[LinkChannel, ...], ...]

    @property
    def cells(self) -> int:
        return len(self.links)

    def link(self, user: int, bs: int) -> LinkChannel:
        """Link from BS `bs` to user `user` (1-based cell labels)."""
        return self.links[user - 1][bs - 1]

    def known(self, user: int, bs: int) -> np.ndarray:
        return self.link(user, bs).known_h

    def true(self, user: int, bs: int) -> np.ndarray:
        return self.link(user, bs).true_h

    def error(self, user: int, bs: int) -> np.ndarray:
        return self.link(user, bs).error


def draw_channel_set(config, corr: CorrelationSpec, tau: float,
                     rng: np.random.Generator,
                     tol: Tolerance = DEFAULT_TOL) -> ChannelSet:
    """One independent draw of every (user, BS) link in the network.

    Links are drawn user-major in label order, so a fixed rng seed gives a
    bit-identical grid.
    """
    rows = []
    for j in range(config.cells):
        row = [draw_link(config.n_rx[j], config.m_tx[i], corr, tau, rng, tol)
               for i in range(config.cells)]
        rows.append(tuple(row))
    return ChannelSet(links=tuple(rows))
