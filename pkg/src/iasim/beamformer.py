"""Two-stage transmit precoders and receive combiners for the three-cell
network, built from designer-known channels only.

Stage one nulls the single out-of-cluster interferer of each BS; stage two
works inside the surviving transmit dimensions: at every user the two
cross-interfering messages are pairwise aligned through the joint null
space of the concatenated effective channels, the excess streams of the
larger interferer are transmit-nulled, and the combiner projects onto the
orthogonal complement of the aligned directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channel import ChannelSet
from .network import (NetworkConfig, DerivedQuantities, check_feasibility,
                      circ, derive)
from .numerics import (DEFAULT_TOL, Tolerance, complex_gaussian, null_space,
                       rank_of)


class BeamformerError(RuntimeError):
    pass


class RankDeficient(BeamformerError):
    """A channel null space is smaller than its generic dimension."""


class InfeasibleAlignment(BeamformerError):
    """The antenna configuration cannot support the requested alignment."""


class CombinerRankLoss(BeamformerError):
    """A random draw collapsed the desired subspace; redraw."""


@dataclass(frozen=True)
class BeamformerSet:
    """Per-BS precoder stages and per-user combiners.

    v_ici[i]: orthonormal basis of BS i+1's interference-free transmit
    space; v_xci[(bs, user)]: per-message alignment block in that space;
    v_full[i]: composed unit-trace precoder; full_blocks[(bs, user)]: the
    per-message column slice of v_full; u[j]: orthonormal combiner.
    """

    v_ici: tuple[np.ndarray, ...]
    v_xci: Mapping[tuple[int, int], np.ndarray]
    v_full: tuple[np.ndarray, ...]
    full_blocks: Mapping[tuple[int, int], np.ndarray]
    u: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class AlignmentReport:
    """Relative leakage of the designed beamformers on a channel set."""

    ici_residual: float
    xci_residual: float
    desired_rank: tuple[int, ...]
    expected_rank: tuple[int, ...]
    threshold: float

    @property
    def passed(self) -> bool:
        return (self.ici_residual <= self.threshold
                and self.xci_residual <= self.threshold
                and self.desired_rank == self.expected_rank)

    def __str__(self) -> str:
        return (f"ici_residual={self.ici_residual:.3e} "
                f"xci_residual={self.xci_residual:.3e} "
                f"desired_rank={self.desired_rank} "
                f"expected={self.expected_rank} "
                f"passed={self.passed}")


def _require_three_cells(config: NetworkConfig) -> None:
    if config.cells != 3 or config.overlap != 2:
        raise ValueError("beamformer design covers the 3-cell, two-overlap "
                         "network only")


def design_ici(known: ChannelSet, config: NetworkConfig,
               tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, ...]:
    """First-stage precoders: BS i transmits in the null space of its known
    channel to the previous cell's user, the one receiver it must never
    reach. Column count is the free transmit dimension Q_i."""
    _require_three_cells(config)
    dq = derive(config)
    out = []
    for i in range(1, config.cells + 1):
        victim = circ(i - 1, config.cells)
        basis = null_space(known.known(victim, i), tol)
        q_i = dq.q[i - 1]
        if basis.shape[1] < q_i:
            raise RankDeficient(f"BS {i}: null space has {basis.shape[1]} "
                                f"columns, needs {q_i}")
        out.append(basis[:, :q_i])
    return tuple(out)


def effective_channels(known: ChannelSet, ici: tuple[np.ndarray, ...],
                       config: NetworkConfig) -> dict[tuple[int, int], np.ndarray]:
    """Known channels composed with the first stage, for each serving pair.
    Keyed by (user, bs); shape N_user x Q_bs."""
    eff = {}
    for j in range(1, config.cells + 1):
        for i in config.serving_bs(j):
            eff[(j, i)] = known.known(j, i) @ ici[i - 1]
    return eff


def _unit_columns(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=0)
    if mat.shape[1] and norms.min() < 1e-12:
        raise CombinerRankLoss("degenerate random combination drawn")
    return mat / norms


def design_xci(eff: dict[tuple[int, int], np.ndarray], config: NetworkConfig,
               dq: DerivedQuantities, rng: np.random.Generator,
               tol: Tolerance = DEFAULT_TOL) -> dict[tuple[int, int], np.ndarray]:
    """Second-stage per-message blocks, keyed by (bs, destination user).

    At user j the interferers are the previous BS's own-cell message and
    BS j's cross message. The k_j smallest-count pairs are split out of the
    joint null space of [H_prev | H_own] (top of each vector feeds the
    previous BS's block, the bottom feeds BS j's block, so the two
    contributions cancel along one shared direction); the w_j excess
    columns of the larger interferer come from that channel's own null
    space and arrive nowhere. Every message interferes at exactly one
    user, so this pins all six blocks; random combinations inside the null
    spaces keep the draw generic.
    """
    cells = config.cells
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for j in range(1, cells + 1):
        a_bs = circ(j - 1, cells)     # its own-cell message interferes here
        b_user = circ(j + 1, cells)   # BS j's cross message goes there
        d_a = config.demand_between(a_bs, a_bs)
        d_b = config.demand_between(j, b_user)
        k, w = dq.k[j - 1], dq.w[j - 1]
        h_a, h_b = eff[(j, a_bs)], eff[(j, j)]
        q_a, q_b = h_a.shape[1], h_b.shape[1]

        a_cols = np.zeros((q_a, 0), dtype=complex)
        b_cols = np.zeros((q_b, 0), dtype=complex)
        if k > 0:
            joint = null_space(np.concatenate([h_a, h_b], axis=1), tol)
            if joint.shape[1] < k:
                raise InfeasibleAlignment(
                    f"user {j}: joint null space dimension {joint.shape[1]} "
                    f"< k={k}")
            pairs = _unit_columns(joint @ complex_gaussian(joint.shape[1], k,
                                                           1.0, rng))
            a_cols = pairs[:q_a]
            b_cols = pairs[q_a:]
        if w > 0:
            x = dq.victim_bs[j - 1]
            solo = null_space(eff[(j, x)], tol)
            if solo.shape[1] < w:
                raise InfeasibleAlignment(
                    f"user {j}: null space of the victim channel has "
                    f"{solo.shape[1]} columns, needs w={w}")
            extras = _unit_columns(solo @ complex_gaussian(solo.shape[1], w,
                                                           1.0, rng))
            if x == a_bs:
                a_cols = np.concatenate([a_cols, extras], axis=1)
            else:
                b_cols = np.concatenate([b_cols, extras], axis=1)

        blocks[(a_bs, a_bs)] = a_cols
        blocks[(j, b_user)] = b_cols
        assert a_cols.shape[1] == d_a and b_cols.shape[1] == d_b
    return blocks


def design_combiner(eff: dict[tuple[int, int], np.ndarray],
                    xci: dict[tuple[int, int], np.ndarray],
                    config: NetworkConfig, dq: DerivedQuantities,
                    tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, ...]:
    """Per-user combiners: orthonormal bases of the complement of the
    aligned interference, oriented along the desired signal."""
    cells = config.cells
    out = []
    for j in range(1, cells + 1):
        prev = circ(j - 1, cells)
        n_j = config.n_rx[j - 1]
        d_j = dq.d_rx[j - 1]
        k = dq.k[j - 1]
        pair_dirs = eff[(j, prev)] @ xci[(prev, prev)][:, :k]
        if pair_dirs.shape[1] == 0:
            comp = np.eye(n_j, dtype=complex)
        else:
            comp = null_space(pair_dirs.conj().T, tol)
        if comp.shape[1] < d_j:
            raise InfeasibleAlignment(
                f"user {j}: {comp.shape[1]} interference-free dimensions "
                f"< d={d_j}")
        if d_j == 0:
            out.append(np.zeros((n_j, 0), dtype=complex))
            continue
        desired = np.concatenate([eff[(j, prev)] @ xci[(prev, j)],
                                  eff[(j, j)] @ xci[(j, j)]], axis=1)
        projected = comp.conj().T @ desired
        if rank_of(projected, tol) < d_j:
            raise CombinerRankLoss(f"user {j}: desired matrix lost rank "
                                   f"after combining")
        if comp.shape[1] == d_j:
            out.append(comp)
        else:
            wvec, _, _ = np.linalg.svd(projected, full_matrices=False)
            out.append(comp @ wvec[:, :d_j])
    return tuple(out)


def compose_precoders(ici: tuple[np.ndarray, ...],
                      xci: dict[tuple[int, int], np.ndarray],
                      config: NetworkConfig):
    """Unit-trace composed precoders and their per-message column slices;
    own-cell streams occupy the leading columns."""
    cells = config.cells
    v_full, full_blocks = [], {}
    for i in range(1, cells + 1):
        nxt = circ(i + 1, cells)
        own, cross = xci[(i, i)], xci[(i, nxt)]
        v = ici[i - 1] @ np.concatenate([own, cross], axis=1)
        if v.shape[1]:
            v = v / np.linalg.norm(v)
        v_full.append(v)
        full_blocks[(i, i)] = v[:, :own.shape[1]]
        full_blocks[(i, nxt)] = v[:, own.shape[1]:]
    return tuple(v_full), full_blocks


def design_beamformers(known: ChannelSet, config: NetworkConfig,
                       rng: np.random.Generator,
                       tol: Tolerance = DEFAULT_TOL,
                       max_redraws: int = 16) -> BeamformerSet:
    """Full design on known channels, redrawing the random null-space
    combinations until every user's combined desired matrix has full rank
    (generic, so retries are rare)."""
    _require_three_cells(config)
    report = check_feasibility(config)
    if not report.passed:
        raise InfeasibleAlignment(f"infeasible configuration:\n{report}")
    dq = derive(config)
    ici = design_ici(known, config, tol)
    eff = effective_channels(known, ici, config)
    last: CombinerRankLoss | None = None
    for _ in range(max_redraws):
        try:
            xci = design_xci(eff, config, dq, rng, tol)
            u = design_combiner(eff, xci, config, dq, tol)
        except CombinerRankLoss as exc:
            last = exc
            continue
        break
    else:
        raise CombinerRankLoss(f"no full-rank design after {max_redraws} "
                               f"redraws: {last}")
    v_full, full_blocks = compose_precoders(ici, xci, config)
    return BeamformerSet(v_ici=ici, v_xci=xci, v_full=v_full,
                         full_blocks=full_blocks, u=u)


def _spectral(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def verify_alignment(links: ChannelSet, bf: BeamformerSet,
                     config: NetworkConfig, tol: Tolerance = DEFAULT_TOL,
                     channel: str = "known") -> AlignmentReport:
    """Evaluate the alignment conditions on the chosen channel grid.

    Residuals are spectral norms of the interference surviving the
    combiner, relative to the unfiltered channel gain of the link(s)
    carrying it (the precoders are unit-trace, so that gain bounds every
    term before spatial filtering); desired_rank counts the streams each
    user can still resolve.
    """
    if channel not in ("known", "true"):
        raise ValueError(f"channel must be 'known' or 'true', got {channel!r}")
    pick = links.known if channel == "known" else links.true
    dq = derive(config)
    cells = config.cells

    ici_res = 0.0
    xci_res = 0.0
    ranks = []
    for j in range(1, cells + 1):
        u_j = bf.u[j - 1]
        serving = config.serving_bs(j)
        for l in range(1, cells + 1):
            if l in serving or bf.v_full[l - 1].shape[1] == 0:
                continue
            term = pick(j, l) @ bf.v_full[l - 1]
            denom = _spectral(pick(j, l))
            if denom > 0.0:
                ici_res = max(ici_res, _spectral(u_j.conj().T @ term) / denom)

        undesired = [pick(j, i) @ bf.full_blocks[(i, dest)]
                     for i in serving
                     for dest in config.served_users(i) if dest != j]
        undesired = [t for t in undesired if t.shape[1]]
        if undesired:
            stack = np.concatenate(undesired, axis=1)
            denom = _spectral(np.concatenate([pick(j, i) for i in serving],
                                             axis=1))
            if denom > 0.0:
                xci_res = max(xci_res, _spectral(u_j.conj().T @ stack) / denom)

        desired = [pick(j, i) @ bf.full_blocks[(i, j)] for i in serving]
        desired = [t for t in desired if t.shape[1]]
        if desired:
            combined = u_j.conj().T @ np.concatenate(desired, axis=1)
            ranks.append(rank_of(combined, tol) if combined.size else 0)
        else:
            ranks.append(0)

    return AlignmentReport(ici_residual=ici_res, xci_residual=xci_res,
                           desired_rank=tuple(ranks),
                           expected_rank=tuple(dq.d_rx),
                           threshold=tol.zero_eps)
