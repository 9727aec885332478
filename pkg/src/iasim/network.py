"""Network configuration algebra: cell/antenna/stream bookkeeping.

Cell labels are 1-based throughout (circ() is the single wraparound rule);
tuples returned by derive() are positional, so q[0] belongs to cell 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def circ(l: int, big_l: int) -> int:
    """Circular cell label: maps any integer into 1..big_l."""
    if big_l < 1:
        raise ValueError(f"big_l must be >= 1, got {big_l}")
    m = l % big_l
    return big_l if m == 0 else m


@dataclass(frozen=True)
class NetworkConfig:
    """Cell count, per-node antenna counts and the stream-demand matrix.

    demand[i][j] is the number of streams BS i+1 sends to user j+1; with
    two-cell overlap only the own-cell and next-cell entries may be
    nonzero.
    """

    cells: int
    overlap: int
    m_tx: tuple[int, ...]
    n_rx: tuple[int, ...]
    demand: tuple[tuple[int, ...], ...]
    users_per_cell: int = 1

    def demand_between(self, bs: int, user: int) -> int:
        """Streams from BS `bs` to user `user` (1-based labels)."""
        return self.demand[bs - 1][user - 1]

    def served_users(self, bs: int) -> tuple[int, ...]:
        """Users BS `bs` transmits to: its own cell and the next one."""
        return tuple(circ(bs + o, self.cells) for o in range(self.overlap))

    def serving_bs(self, user: int) -> tuple[int, ...]:
        """BSs carrying messages for `user`: the previous cell and its own."""
        return tuple(circ(user - o, self.cells)
                     for o in reversed(range(self.overlap)))


def validate(config: NetworkConfig) -> list[str]:
    """Structural validation; returns a list of violations (empty = ok)."""
    bad: list[str] = []
    big_l, lap = config.cells, config.overlap
    if not 1 < lap < big_l:
        bad.append(f"overlap must satisfy 1 < overlap < cells, "
                   f"got overlap={lap}, cells={big_l}")
    if lap != 2:
        bad.append(f"only two-cell overlap is supported, got {lap}")
    if config.users_per_cell != 1:
        bad.append(f"one user per cell required, got {config.users_per_cell}")
    if len(config.m_tx) != big_l or len(config.n_rx) != big_l:
        bad.append("antenna count tuples must have one entry per cell")
    elif any(m < 1 for m in config.m_tx) or any(n < 1 for n in config.n_rx):
        bad.append("all antenna counts must be >= 1")
    if len(config.demand) != big_l or any(len(row) != big_l for row in config.demand):
        bad.append(f"demand must be a {big_l}x{big_l} matrix")
        return bad
    for i in range(big_l):
        allowed = {circ(i + 1, big_l), circ(i + 2, big_l)} if lap == 2 else set()
        for j in range(big_l):
            d = config.demand[i][j]
            if not (isinstance(d, (int, np.integer)) and d >= 0):
                bad.append(f"demand[{i + 1},{j + 1}] must be a nonnegative "
                           f"integer, got {d!r}")
            elif d > 0 and (j + 1) not in allowed:
                bad.append(f"demand[{i + 1},{j + 1}] = {d} is outside the "
                           f"own/next-cell message pattern")
    if not bad:
        dq = derive(config)
        assert sum(dq.d_tx) == sum(dq.d_rx)  # holds by construction
    return bad


@dataclass(frozen=True)
class DerivedQuantities:
    """Per-cell feasibility bookkeeping derived from a NetworkConfig.

    q: transmit dimensions left after interference nulling;
    d_tx/d_rx: per-BS and per-user stream totals; k/r/w: min, max and
    excess of the two interfering stream counts seen by each user;
    victim_bs: 1-based label of the BS whose excess streams must be
    transmit-nulled (None when w = 0).
    """

    q: tuple[int, ...]
    d_tx: tuple[int, ...]
    d_rx: tuple[int, ...]
    k: tuple[int, ...]
    r: tuple[int, ...]
    w: tuple[int, ...]
    victim_bs: tuple[int | None, ...]


def stream_stats(demand, cells: int):
    """Per-BS/user stream totals and per-user interferer statistics.

    Returns (d_tx, d_rx, k, r, w, victim_bs); the two interferers at user j
    are the previous BS's own-cell message and BS j's cross message.
    """
    d_tx = tuple(sum(row) for row in demand)
    d_rx = tuple(sum(demand[i][j] for i in range(cells)) for j in range(cells))
    k, r, w, victim = [], [], [], []
    for j in range(1, cells + 1):
        prev = circ(j - 1, cells)
        d_own_prev = demand[prev - 1][prev - 1]
        d_cross = demand[j - 1][circ(j + 1, cells) - 1]
        k.append(min(d_own_prev, d_cross))
        r.append(max(d_own_prev, d_cross))
        w.append(r[-1] - k[-1])
        if w[-1] == 0:
            victim.append(None)
        else:
            victim.append(prev if d_own_prev > d_cross else j)
    return d_tx, d_rx, tuple(k), tuple(r), tuple(w), tuple(victim)


def derive(config: NetworkConfig) -> DerivedQuantities:
    """Compute all derived quantities for a (structurally valid) config."""
    big_l = config.cells
    q = tuple(max(0, config.m_tx[i] - config.n_rx[circ(i, big_l) - 1])
              for i in range(big_l))
    d_tx, d_rx, k, r, w, victim = stream_stats(config.demand, big_l)
    return DerivedQuantities(q=q, d_tx=d_tx, d_rx=d_rx, k=k, r=r, w=w,
                             victim_bs=victim)


@dataclass(frozen=True)
class FeasibilityCondition:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class FeasibilityReport:
    conditions: tuple[FeasibilityCondition, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.conditions)

    def failures(self) -> tuple[FeasibilityCondition, ...]:
        return tuple(c for c in self.conditions if not c.ok)

    def __str__(self) -> str:
        lines = []
        for c in self.conditions:
            status = "ok" if c.ok else "FAIL"
            lines.append(f"  [{status}] {c.name}: {c.detail}")
        verdict = "feasible" if self.passed else "infeasible"
        return f"{verdict}\n" + "\n".join(lines)


def check_feasibility(config: NetworkConfig) -> FeasibilityReport:
    """Check the four alignment-feasibility conditions, reporting offenders.

    (a) each BS has enough free transmit dimensions for its streams;
    (b) each user has enough antennas for its streams plus the aligned
        interference directions; (c) the victim BS can transmit-null its
        excess streams toward the user; (d) the joint null space used for
        pairwise alignment is large enough.
    """
    dq = derive(config)
    big_l = config.cells
    conds = []

    bad = [f"BS {i + 1}: Q={dq.q[i]} < d={dq.d_tx[i]}"
           for i in range(big_l) if dq.q[i] < dq.d_tx[i]]
    conds.append(FeasibilityCondition(
        "tx_dimensions", not bad,
        "; ".join(bad) if bad else f"Q={dq.q} covers per-BS streams {dq.d_tx}"))

    bad = [f"user {j + 1}: N={config.n_rx[j]} < d+k={dq.d_rx[j] + dq.k[j]}"
           for j in range(big_l) if config.n_rx[j] < dq.d_rx[j] + dq.k[j]]
    conds.append(FeasibilityCondition(
        "rx_dimensions", not bad,
        "; ".join(bad) if bad else "N covers desired streams plus aligned directions"))

    bad = []
    for j in range(big_l):
        if dq.w[j] == 0:
            continue
        t = dq.victim_bs[j]
        if dq.q[t - 1] - config.n_rx[j] < dq.w[j]:
            bad.append(f"user {j + 1}: Q_{t}-N_{j + 1}="
                       f"{dq.q[t - 1] - config.n_rx[j]} < w={dq.w[j]}")
    conds.append(FeasibilityCondition(
        "residual_nulling", not bad,
        "; ".join(bad) if bad else "victim BSs can null all excess streams"))

    bad = []
    for j in range(1, big_l + 1):
        if dq.k[j - 1] == 0:
            continue
        prev = circ(j - 1, big_l)
        dim = dq.q[prev - 1] + dq.q[j - 1] - config.n_rx[j - 1]
        if dim < dq.k[j - 1]:
            bad.append(f"user {j}: Q_{prev}+Q_{j}-N_{j}={dim} < k={dq.k[j - 1]}")
    conds.append(FeasibilityCondition(
        "pair_alignment", not bad,
        "; ".join(bad) if bad else "joint null spaces cover all aligned pairs"))

    return FeasibilityReport(conditions=tuple(conds))
