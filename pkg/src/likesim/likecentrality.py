"""Directed like rates and the self-consistent like-centrality solver.

A rate r_ij is the rate at which actor j endows likes upon actor i; rates
exist for both directions of every friendship edge.  The like centrality
L_i of actor i is the fixed point of

    L_i = (sum_j F_ij r_ij L_j) / (sum_j F_ij L_j)

i.e. each actor's score is the L-weighted average of the like rates they
receive.  The all-zero solution is excluded by starting the iteration from
the all-ones vector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNodeError, InvalidParameterError
from .graph import Graph, is_connected
from .rng import SplitMix64

DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class RateMatrix:
    """Like rates keyed by ordered pair (receiver i, giver j), one per edge direction."""

    n: int
    entries: dict[tuple[int, int], float]

    def __getitem__(self, pair: tuple[int, int]) -> float:
        return self.entries[pair]

    def sorted_items(self) -> list[tuple[tuple[int, int], float]]:
        """Entries in lexicographic (i, j) order, the canonical on-disk order."""
        return sorted(self.entries.items())

    def to_dense(self) -> np.ndarray:
        """Dense n x n array with r[i, j] on edges, zeros elsewhere."""
        r = np.zeros((self.n, self.n))
        for (i, j), val in self.entries.items():
            r[i, j] = val
        return r

    def received(self, g: Graph, i: int) -> np.ndarray:
        """Rates node i receives, in neighbor order."""
        return np.array([self.entries[(i, j)] for j in g.neighbors[i]])

    def validate_against(self, g: Graph) -> None:
        """Check the domain is exactly both directions of g's edges, values in [0, 1]."""
        expected = set()
        for i, j in g.edges:
            expected.add((i, j))
            expected.add((j, i))
        if set(self.entries) != expected:
            raise InvalidParameterError(
                "rate domain does not match both directions of the edge set"
            )
        for pair, val in self.entries.items():
            if not 0.0 <= val <= 1.0:
                raise InvalidParameterError(f"rate {pair} = {val} outside [0, 1]")


@dataclass(frozen=True)
class LikeCentralityVector:
    """Solver output: per-node values plus convergence metadata."""

    values: np.ndarray
    converged: bool
    iterations: int
    residual_sup: float


@dataclass(frozen=True)
class DeviationStats:
    """Per-pair deviations from the mean-field picture, plus per-node flags.

    delta[(i, j)] = r_ij / L_i - 1  (dimensionless)
    epsilon[(i, j)] = r_ij - L_i    (rate units)
    agent_advantage[i] = L_i exceeds the plain mean of i's received rates
    dropped_pairs counts pairs skipped because L_i fell below 1e-12.
    """

    delta: dict[tuple[int, int], float]
    epsilon: dict[tuple[int, int], float]
    agent_advantage: np.ndarray
    dropped_pairs: int


def sample_rates(g: Graph, seed: int) -> RateMatrix:
    """Independent uniform [0, 1) draws for every ordered pair, lexicographic order."""
    pairs = []
    for i, j in g.edges:
        pairs.append((i, j))
        pairs.append((j, i))
    pairs.sort()
    rng = SplitMix64(seed)
    return RateMatrix(n=g.n, entries={p: rng.uniform() for p in pairs})


def solve_lc(
    g: Graph,
    r: RateMatrix,
    tol: float = 1e-10,
    max_iters: int = 10_000,
    damping: float = 1.0,
) -> LikeCentralityVector:
    """Solve the like-centrality fixed point by damped iteration from all ones.

    Convergence is judged on the cleared-denominator residual
    max_i |L_i * sum_j F_ij L_j - sum_j F_ij r_ij L_j| <= tol * n.
    If the residual grows for 10 consecutive steps the damping factor is
    halved (floor 0.125) and the iteration restarts from all ones.  Nodes
    whose received rates are all zero are pinned to L_i = 0 with a warning;
    a denominator underflow anywhere else raises DegenerateNodeError.

    Returns the last iterate with converged=False when max_iters runs out.
    """
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    if not 0.0 < damping <= 1.0:
        raise InvalidParameterError(f"damping must be in (0, 1], got {damping}")
    if any(len(nb) == 0 for nb in g.neighbors):
        raise InvalidParameterError("every node needs at least one neighbor")
    if not is_connected(g):
        raise InvalidParameterError("graph must be connected")
    r.validate_against(g)

    n = g.n
    f = g.adjacency_matrix
    rd = r.to_dense()
    rf = rd * f
    pinned = rf.max(axis=1) == 0.0  # all received rates exactly zero
    if pinned.any():
        warnings.warn(
            f"nodes {np.flatnonzero(pinned).tolist()} receive only zero rates; "
            "their like centrality is pinned to 0",
            stacklevel=2,
        )

    threshold = tol * n
    damp = damping
    grow_streak = 0
    prev_res = np.inf
    l_vec = np.ones(n)
    l_vec[pinned] = 0.0
    iterations = 0
    residual = np.inf
    while iterations < max_iters:
        iterations += 1
        den = f @ l_vec
        low = den < DENOMINATOR_FLOOR
        if low.any():
            bad = np.flatnonzero(low & ~pinned)
            if bad.size:
                raise DegenerateNodeError(int(bad[0]))
            den = np.where(low, 1.0, den)  # pinned 0/0 -> stays 0
        t = (rf @ l_vec) / den
        l_new = (1.0 - damp) * l_vec + damp * t
        l_new[pinned] = 0.0
        den_new = f @ l_new
        residual = float(np.abs(l_new * den_new - rf @ l_new).max())
        l_vec = l_new
        if residual <= threshold:
            return LikeCentralityVector(
                values=l_vec, converged=True, iterations=iterations,
                residual_sup=residual,
            )
        if residual > prev_res:
            grow_streak += 1
            if grow_streak >= 10:
                damp = max(damp / 2.0, 0.125)
                l_vec = np.ones(n)
                l_vec[pinned] = 0.0
                grow_streak = 0
                prev_res = np.inf
                continue
        else:
            grow_streak = 0
        prev_res = residual
    return LikeCentralityVector(
        values=l_vec, converged=False, iterations=iterations, residual_sup=residual
    )


def residual(
    g: Graph, r: RateMatrix, lc: LikeCentralityVector
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node residuals in two algebraically identical forms.

    The first is the cleared-denominator form |L_i sum F L - sum F r L|;
    the second substitutes epsilon_ij = r_ij - L_i and evaluates
    |sum_j F_ij epsilon_ij L_j|.  Computed independently as a cross-check.
    """
    f = g.adjacency_matrix
    rd = r.to_dense()
    l_vec = lc.values
    cleared = np.abs(l_vec * (f @ l_vec) - (rd * f) @ l_vec)
    mean_field = np.abs(np.einsum("ij,ij,j->i", f, rd - l_vec[:, None], l_vec))
    return cleared, mean_field


def prestige(lc: LikeCentralityVector) -> float:
    """Network prestige: the sum of all like centralities."""
    return float(lc.values.sum())


def deviations(g: Graph, r: RateMatrix, lc: LikeCentralityVector) -> DeviationStats:
    """Per-pair delta/epsilon deviations and per-node advantage flags."""
    l_vec = lc.values
    delta: dict[tuple[int, int], float] = {}
    epsilon: dict[tuple[int, int], float] = {}
    dropped = 0
    for (i, j), val in r.sorted_items():
        if l_vec[i] < 1e-12:
            dropped += 1
            continue
        delta[(i, j)] = val / l_vec[i] - 1.0
        epsilon[(i, j)] = val - l_vec[i]
    advantage = np.zeros(g.n, dtype=bool)
    for v in range(g.n):
        received = r.received(g, v)
        advantage[v] = l_vec[v] > received.mean()
    return DeviationStats(
        delta=delta, epsilon=epsilon, agent_advantage=advantage, dropped_pairs=dropped
    )


def give_rate(g: Graph, r: RateMatrix, j: int) -> float:
    """Total rate at which actor j gives likes across all friends' posts."""
    if not 0 <= j < g.n:
        raise InvalidParameterError(f"node {j} out of range for n={g.n}")
    return float(sum(r.entries[(i, j)] for i in g.neighbors[j]))


def receive_stats(g: Graph, r: RateMatrix, i: int) -> tuple[float, float, float]:
    """(mean, min, max) of the rates node i receives."""
    if not 0 <= i < g.n:
        raise InvalidParameterError(f"node {i} out of range for n={g.n}")
    if len(g.neighbors[i]) == 0:
        raise InvalidParameterError(f"node {i} has no neighbors")
    received = r.received(g, i)
    return float(received.mean()), float(received.min()), float(received.max())
