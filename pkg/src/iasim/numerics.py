"""Dense complex-matrix kernels shared by the channel, beamformer and rate code."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NotHermitian(ValueError):
    """Matrix is asymmetric beyond the working tolerance."""


class NotPsd(ValueError):
    """Matrix has an eigenvalue below the negative tolerance."""


class NotPd(ValueError):
    """Matrix is not positive definite."""


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds: rank_eps is relative to the largest singular
    value, zero_eps is an absolute residual bound."""

    rank_eps: float = 1e-10
    zero_eps: float = 1e-10

    def __post_init__(self) -> None:
        if not 0.0 < self.rank_eps < 1.0:
            raise ValueError(f"rank_eps must be in (0, 1), got {self.rank_eps}")
        if not self.zero_eps > 0.0:
            raise ValueError(f"zero_eps must be positive, got {self.zero_eps}")


DEFAULT_TOL = Tolerance()


def _as_matrix(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix contains non-finite entries")
    return a


def complex_gaussian(rows: int, cols: int, variance: float,
                     rng: np.random.Generator) -> np.ndarray:
    """I.i.d. circularly-symmetric complex Gaussian matrix, per-entry variance
    `variance` (split evenly between real and imaginary parts)."""
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal((rows, cols))
                    + 1j * rng.standard_normal((rows, cols)))


def rank_of(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank: singular values above rank_eps times the largest."""
    a = _as_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_eps * s[0]))


def null_space(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the right null space of `a`.

    Returns an (n, nullity) matrix; nullity is decided by the rank_eps
    cutoff, so a full-rank matrix yields an (n, 0) result.
    """
    a = _as_matrix(a)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > tol.rank_eps * s[0]))
    return vh[rank:].conj().T


def hermitian_sqrt(r: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root S of `r` with S @ S == r.

    Eigenvalues in [-zero_eps, 0) are clamped to zero so nearly singular
    correlation matrices (uniform model near r = 1) stay usable.
    """
    r = _as_matrix(r)
    if r.shape[0] != r.shape[1]:
        raise ValueError(f"square matrix required, got shape {r.shape}")
    asym = np.abs(r - r.conj().T).max()
    if asym > tol.zero_eps:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds {tol.zero_eps:.3e}")
    w, v = np.linalg.eigh((r + r.conj().T) / 2.0)
    if w.min() < -tol.zero_eps:
        raise NotPsd(f"eigenvalue {w.min():.3e} below -{tol.zero_eps:.3e}")
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return (s + s.conj().T) / 2.0


def log_det_hermitian(a: np.ndarray) -> float:
    """Base-2 log-determinant of a Hermitian positive definite matrix."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPd("matrix is not positive definite") from exc
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))
