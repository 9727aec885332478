"""Degrees-of-freedom analysis: closed-form bound, brute-force oracle, and
minimum antenna planning for the three-cell network."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import NetworkConfig, circ, derive, stream_stats


class BoundTooSmall(RuntimeError):
    """The search box clipped the maximizer; rerun with a larger bound."""


@dataclass(frozen=True)
class DofProblem:
    """Outer-bound instance: post-nulling transmit dimensions and receive
    antenna counts per cell."""

    q: tuple[int, ...]
    n_rx: tuple[int, ...]
    cells: int = 3
    overlap: int = 2

    def __post_init__(self) -> None:
        if self.cells != 3 or self.overlap != 2:
            raise ValueError("the DoF analysis covers the 3-cell, "
                             "two-overlap network only")
        if len(self.q) != 3 or len(self.n_rx) != 3:
            raise ValueError("q and n_rx need one entry per cell")
        if any(v < 0 for v in self.q) or any(v < 0 for v in self.n_rx):
            raise ValueError("q and n_rx must be nonnegative")


@dataclass(frozen=True)
class DofSolution:
    total: int
    allocation: tuple[tuple[int, ...], ...]
    binding: tuple[str, ...]
    capacity_notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlanUpdate:
    stage: str
    user: int
    target_bs: int
    q_bar: int
    previous: int


@dataclass(frozen=True)
class AntennaPlan:
    q_final: tuple[int, ...]
    n_rx: tuple[int, ...]
    m_tx: tuple[int, ...]
    trace: tuple[PlanUpdate, ...]


def closed_form_bound_terms(q, n) -> tuple[tuple[str, float], ...]:
    """All 21 candidate upper bounds on the total stream count."""
    q1, q2, q3 = q
    n1, n2, n3 = n

    def mx(a, b):
        return max(a, b)

    terms = [
        ("Q1+Q2+Q3", q1 + q2 + q3),
        ("N1+N2+N3-3", n1 + n2 + n3 - 3),
        ("max(N1,Q1)+max(N3,Q2)", mx(n1, q1) + mx(n3, q2)),
        ("max(N1,Q3)+max(N2,Q2)", mx(n1, q3) + mx(n2, q2)),
        ("max(N2,Q1)+max(N3,Q3)", mx(n2, q1) + mx(n3, q3)),
        ("[max(N1,Q1)+max(N1,Q3)+max(N3,Q2)+max(N2,Q2)]/2",
         (mx(n1, q1) + mx(n1, q3) + mx(n3, q2) + mx(n2, q2)) / 2),
        ("[max(N1,Q3)+max(N2,Q1)+max(N3,Q3)+max(N2,Q2)]/2",
         (mx(n1, q3) + mx(n2, q1) + mx(n3, q3) + mx(n2, q2)) / 2),
        ("[max(N1,Q1)+max(N2,Q1)+max(N3,Q2)+max(N3,Q3)]/2",
         (mx(n1, q1) + mx(n2, q1) + mx(n3, q2) + mx(n3, q3)) / 2),
        ("[max(N1,Q1)+max(N1,Q3)+Q2+N2+N3]/2-1",
         (mx(n1, q1) + mx(n1, q3) + q2 + n2 + n3) / 2 - 1),
        ("[max(N1,Q1)+max(N2,Q1)+Q2+Q3+N3-1]/2",
         (mx(n1, q1) + mx(n2, q1) + q2 + q3 + n3 - 1) / 2),
        ("[max(N1,Q1)+max(N3,Q2)+Q1+Q2+Q3]/2",
         (mx(n1, q1) + mx(n3, q2) + q1 + q2 + q3) / 2),
        ("[max(N1,Q1)+max(N3,Q2)+N1+N2+N3-1]/2-1",
         (mx(n1, q1) + mx(n3, q2) + n1 + n2 + n3 - 1) / 2 - 1),
        ("[max(N1,Q3)+max(N2,Q2)+Q1+Q2+Q3]/2",
         (mx(n1, q3) + mx(n2, q2) + q1 + q2 + q3) / 2),
        ("[max(N1,Q3)+max(N2,Q2)+N1+N2+N3-1]/2-1",
         (mx(n1, q3) + mx(n2, q2) + n1 + n2 + n3 - 1) / 2 - 1),
        ("[max(N1,Q3)+max(N3,Q3)+Q1+Q2+N2-1]/2",
         (mx(n1, q3) + mx(n3, q3) + q1 + q2 + n2 - 1) / 2),
        ("[max(N2,Q1)+max(N2,Q2)+Q3+N1+N3]/2-1",
         (mx(n2, q1) + mx(n2, q2) + q3 + n1 + n3) / 2 - 1),
        ("[max(N2,Q1)+max(N3,Q3)+Q1+Q2+Q3]/2",
         (mx(n2, q1) + mx(n3, q3) + q1 + q2 + q3) / 2),
        ("[max(N2,Q1)+max(N3,Q3)+N1+N2+N3-1]/2-1",
         (mx(n2, q1) + mx(n3, q3) + n1 + n2 + n3 - 1) / 2 - 1),
        ("[max(N2,Q2)+max(N3,Q2)+Q1+Q3+N1-1]/2",
         (mx(n2, q2) + mx(n3, q2) + q1 + q3 + n1 - 1) / 2),
        ("[max(N3,Q2)+max(N3,Q3)+Q1+N1+N2]/2-1",
         (mx(n3, q2) + mx(n3, q3) + q1 + n1 + n2) / 2 - 1),
        ("[sum of all six max(N,Q) cross terms]/3",
         (mx(n1, q1) + mx(n1, q3) + mx(n2, q1)
          + mx(n2, q2) + mx(n3, q2) + mx(n3, q3)) / 3),
    ]
    return tuple(terms)


def closed_form_bound_value(q, n) -> float:
    """Continuous minimum over the 21 closed-form terms."""
    return min(v for _, v in closed_form_bound_terms(q, n))


def closed_form_bound(q, n) -> int:
    """Total achievable stream count: floor of the closed-form minimum,
    clipped at zero (stream counts are integers)."""
    if any(v < 0 for v in q) or any(v < 0 for v in n):
        raise ValueError("q and n must be nonnegative")
    return max(0, math.floor(closed_form_bound_value(q, n) + 1e-12))


def _bs_pairs(q_i: int, bound: int) -> np.ndarray:
    """Feasible (own, cross) stream pairs for one BS, in ascending
    lexicographic order."""
    pairs = [(own, cross)
             for own in range(min(q_i, bound) + 1)
             for cross in range(min(q_i - own, bound) + 1)]
    return np.array(pairs, dtype=np.int64)


def _min_interference_dims(a, b, n_j: int, q_a: int, q_b: int) -> np.ndarray:
    """Smallest interference dimension a receiver can be left with.

    a, b: arrays of the two interfering stream counts. Each aligned pair
    collapses two streams onto one dimension and needs a joint null-space
    vector (capacity (q_a + q_b - n_j)^+); transmit-nulled streams need a
    per-link null-space vector (capacity (q - n_j)^+) and cost nothing;
    every remaining stream occupies one dimension.
    """
    cap_pair = max(0, q_a + q_b - n_j)
    cap_za = max(0, q_a - n_j)
    cap_zb = max(0, q_b - n_j)
    k = np.minimum(a, b)
    p_max = min(int(k.max(initial=0)), cap_pair)
    best = np.zeros_like(a)
    for p in range(p_max + 1):
        ok = k >= p
        za = np.minimum(a - p, cap_za)
        zb = np.minimum(b - p, cap_zb)
        red = np.where(ok, p + za + zb, -1)
        best = np.maximum(best, red)
    return a + b - best


def enumerate_outer(problem: DofProblem, bound: int | None = None,
                    max_states: int = 50_000_000) -> DofSolution:
    """Exhaustive integer search over the outer-bound region.

    Ground-truth oracle for the constraint interpretation: per BS the
    streams fit the post-nulling dimensions; per user the antennas cover
    the desired streams plus at least one residual interference dimension,
    with the interference reduced by the best mix of pairwise alignment
    and transmit nulling. On minimally-provisioned receivers this is
    exactly the pair-k/null-w feasibility the beamformer needs. Returns
    the lexicographically smallest maximizer.
    """
    q, n = problem.q, problem.n_rx
    if bound is None:
        bound = max(q) + 1
    if bound < max(q):
        raise ValueError(f"bound {bound} does not cover max Q {max(q)}")

    pairs = [_bs_pairs(q[i], bound) for i in range(3)]
    sizes = [len(p) for p in pairs]
    states = sizes[0] * sizes[1] * sizes[2]
    if states > max_states:
        raise ValueError(f"search space of {states} states exceeds "
                         f"max_states={max_states}")

    ia, ib, ic = np.meshgrid(np.arange(sizes[0]), np.arange(sizes[1]),
                             np.arange(sizes[2]), indexing="ij")
    ia, ib, ic = ia.ravel(), ib.ravel(), ic.ravel()
    d11, d12 = pairs[0][ia, 0], pairs[0][ia, 1]
    d22, d23 = pairs[1][ib, 0], pairs[1][ib, 1]
    d33, d31 = pairs[2][ic, 0], pairs[2][ic, 1]

    d_rx = (d11 + d31, d12 + d22, d23 + d33)
    # interferers seen by each user: previous BS's own message, own BS's cross
    interferers = ((d33, d12, q[2], q[0]),
                   (d11, d23, q[0], q[1]),
                   (d22, d31, q[1], q[2]))
    mask = np.ones(states, dtype=bool)
    for j in range(3):
        a, b, q_a, q_b = interferers[j]
        dims = _min_interference_dims(a, b, n[j], q_a, q_b)
        # every receiver is charged at least one interference dimension,
        # idle or not; that floor is what makes the closed-form terms bounds
        mask &= d_rx[j] + np.maximum(1, dims) <= n[j]

    totals = d11 + d12 + d22 + d23 + d33 + d31
    totals = np.where(mask, totals, -1)
    best = int(totals.max())
    if best < 0:
        zero = ((0, 0, 0), (0, 0, 0), (0, 0, 0))
        return DofSolution(total=0, allocation=zero,
                           binding=("empty outer-bound region",))
    winner = int(np.argmax(totals))  # first occurrence = lexicographically smallest
    alloc6 = (int(d11[winner]), int(d12[winner]), int(d22[winner]),
              int(d23[winner]), int(d33[winner]), int(d31[winner]))
    if max(alloc6) >= bound:
        raise BoundTooSmall(f"maximizer {alloc6} touches the box bound {bound}")

    allocation = ((alloc6[0], alloc6[1], 0),
                  (0, alloc6[2], alloc6[3]),
                  (alloc6[5], 0, alloc6[4]))
    d_tx, d_rx_w, k, _, w, victim = stream_stats(allocation, 3)
    binding = []
    for i in range(3):
        if d_tx[i] == q[i]:
            binding.append(f"d_{i + 1}=Q_{i + 1}")
    for j in range(3):
        a, b, q_a, q_b = interferers[j]
        dims = _min_interference_dims(np.array([a[winner]]),
                                      np.array([b[winner]]), n[j], q_a, q_b)
        if d_rx_w[j] + max(1, int(dims[0])) == n[j]:
            binding.append(f"N_{j + 1}=d^[{j + 1}]+{max(1, int(dims[0]))}")
        if w[j] > 0 and victim[j] is not None:
            if q[victim[j] - 1] == w[j] + n[j]:
                binding.append(f"Q_{victim[j]}=w_{j + 1}+N_{j + 1}")
        if k[j] > 0:
            prev = circ(j, 3)  # previous cell of user j+1
            if q[prev - 1] + q[j] - n[j] == k[j]:
                binding.append(f"Q_{prev}+Q_{j + 1}-N_{j + 1}=k_{j + 1}")

    notes = []
    for i in range(1, 4):
        for u in (i, circ(i + 1, 3)):
            if d_rx_w[u - 1] > max(n[u - 1], q[i - 1]):
                notes.append(f"d^[{u}]={d_rx_w[u - 1]} exceeds "
                             f"max(N_{u}, Q_{i})={max(n[u - 1], q[i - 1])}")

    return DofSolution(total=best, allocation=allocation,
                       binding=tuple(binding), capacity_notes=tuple(notes))


def outer_bound_problem(config: NetworkConfig) -> DofProblem:
    """Build the outer-bound instance for an antenna configuration."""
    dq = derive(config)
    return DofProblem(q=dq.q, n_rx=tuple(config.n_rx))


def _check_demand(demand, cells: int) -> None:
    if len(demand) != cells or any(len(row) != cells for row in demand):
        raise ValueError(f"demand must be {cells}x{cells}")
    for i in range(cells):
        allowed = {circ(i + 1, cells), circ(i + 2, cells)}
        for j in range(cells):
            d = demand[i][j]
            if not (isinstance(d, (int, np.integer)) and d >= 0):
                raise ValueError(f"demand[{i + 1},{j + 1}] must be a "
                                 f"nonnegative integer, got {d!r}")
            if d > 0 and (j + 1) not in allowed:
                raise ValueError(f"demand[{i + 1},{j + 1}] = {d} is outside "
                                 f"the own/next-cell message pattern")


def plan_antennas(demand, cells: int = 3, overlap: int = 2) -> AntennaPlan:
    """Minimum antenna configuration for a demand matrix.

    Start from the tight transmit/receive dimensions (Q_i = per-BS streams,
    N_j = desired streams + aligned directions, at least one antenna), then
    sweep the users: wherever excess interference must be transmit-nulled,
    raise the victim BS's free dimensions to w_j + N_j. Updates propagate
    to later users. Finally M_i = Q_i + N_(i-1).
    """
    if cells != 3 or overlap != 2:
        raise ValueError("antenna planning covers the 3-cell, two-overlap "
                         "network only")
    demand = tuple(tuple(int(v) for v in row) for row in demand)
    _check_demand(demand, cells)
    d_tx, d_rx, k, _, w, victim = stream_stats(demand, cells)

    qs = list(d_tx)
    ns = [max(1, d_rx[j] + k[j]) for j in range(cells)]
    trace: list[PlanUpdate] = []

    # capacity pass: each served user's streams must fit the larger of the
    # receive side and the BS's precoder space (never binds after the N init)
    for i in range(1, cells + 1):
        for u in (i, circ(i + 1, cells)):
            if d_rx[u - 1] > max(ns[u - 1], qs[i - 1]):
                trace.append(PlanUpdate("capacity", u, i, d_rx[u - 1],
                                        qs[i - 1]))
                qs[i - 1] = d_rx[u - 1]

    for j in range(1, cells + 1):
        if w[j - 1] == 0:
            continue
        t = victim[j - 1]
        assert t == j or t == circ(j - 1, cells)
        q_bar = w[j - 1] + ns[j - 1]
        if q_bar > qs[t - 1]:
            trace.append(PlanUpdate("residual_nulling", j, t, q_bar,
                                    qs[t - 1]))
            qs[t - 1] = q_bar

    m_tx = tuple(qs[i] + ns[circ(i, cells) - 1] for i in range(cells))
    return AntennaPlan(q_final=tuple(qs), n_rx=tuple(ns), m_tx=m_tx,
                       trace=tuple(trace))


def planned_config(plan: AntennaPlan, demand) -> NetworkConfig:
    """NetworkConfig realizing an antenna plan for the given demand."""
    return NetworkConfig(cells=3, overlap=2, m_tx=plan.m_tx,
                         n_rx=plan.n_rx,
                         demand=tuple(tuple(int(v) for v in row)
                                      for row in demand))


def dof_estimate(sum_rate_bits: float, snr_linear: float) -> float:
    """High-SNR stream-count estimate: sum rate over log2 of the SNR."""
    if not snr_linear > 1:
        raise ValueError(f"snr_linear must exceed 1, got {snr_linear}")
    return sum_rate_bits / math.log2(snr_linear)
