"""Undirected simple graphs: generation and classical structural metrics.

Graphs are immutable. Nodes are labeled 0..n-1 and edges are stored as a
sorted tuple of (i, j) pairs with i < j, which is also the on-disk order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DisconnectedGraphError, InvalidParameterError, PowerIterationError
from .rng import SplitMix64


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with a symmetric, hollow adjacency relation."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"node count must be >= 1, got {self.n}")
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise InvalidParameterError(f"edge ({i}, {j}) invalid for n={self.n}")
            if (i, j) in seen:
                raise InvalidParameterError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph from any iterable of node pairs, normalizing order."""
        canon = sorted((i, j) if i < j else (j, i) for i, j in edges)
        return cls(n=n, edges=tuple(canon))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        a.setflags(write=False)
        return a

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.neighbors)


@dataclass(frozen=True)
class CentralityReport:
    """Per-node structural metrics for one graph."""

    degree: np.ndarray
    betweenness: np.ndarray
    closeness: np.ndarray
    eigenvector: np.ndarray
    local_clustering: np.ndarray


def generate_ba(n: int, m: int, seed: int) -> Graph:
    """Grow a preferential-attachment graph with m edges per new node.

    The seed configuration is the complete graph on the first m+1 nodes, so
    every node ends with degree >= m and the graph is connected with exactly
    m(m+1)/2 + m(n-m-1) edges.  Each subsequent node picks m distinct targets
    with probability proportional to current degree (degrees snapshot taken
    before the node's own edges are added), re-drawing on collision.
    Deterministic for a fixed seed.
    """
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    if n <= m:
        raise InvalidParameterError(f"need n > m, got n={n}, m={m}")
    rng = SplitMix64(seed)
    edges: list[tuple[int, int]] = [
        (i, j) for i in range(m + 1) for j in range(i + 1, m + 1)
    ]
    # One entry per edge endpoint; sampling an entry uniformly is
    # degree-proportional sampling.
    endpoints: list[int] = []
    for i, j in edges:
        endpoints.append(i)
        endpoints.append(j)
    for v in range(m + 1, n):
        size = len(endpoints)
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(endpoints[rng.randbelow(size)])
        for t in sorted(targets):
            edges.append((t, v))
            endpoints.append(t)
            endpoints.append(v)
    return Graph(n=n, edges=tuple(sorted(edges)))


def degree(g: Graph, v: int) -> int:
    """Raw neighbor count of v."""
    if not 0 <= v < g.n:
        raise InvalidParameterError(f"node {v} out of range for n={g.n}")
    return len(g.neighbors[v])


def _bfs_distances(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u]
        for w in g.neighbors[u]:
            if dist[w] < 0:
                dist[w] = du + 1
                q.append(w)
    return dist


def is_connected(g: Graph) -> bool:
    return min(_bfs_distances(g, 0)) >= 0


def _require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise DisconnectedGraphError("graph is not connected")


def betweenness(g: Graph) -> np.ndarray:
    """Shortest-path betweenness, unnormalized, each unordered pair once.

    Brandes' accumulation over BFS trees; the undirected double-count is
    halved so a value is the plain sum over pairs s != t != v of
    sigma_st(v) / sigma_st.
    """
    _require_connected(g)
    n = g.n
    score = [0.0] * n
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0.0] * n
        sigma[s] = 1.0
        dist = [-1] * n
        dist[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            stack.append(u)
            du1 = dist[u] + 1
            for w in g.neighbors[u]:
                if dist[w] < 0:
                    dist[w] = du1
                    q.append(w)
                if dist[w] == du1:
                    sigma[w] += sigma[u]
                    preds[w].append(u)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for u in preds[w]:
                delta[u] += sigma[u] * coeff
            if w != s:
                score[w] += delta[w]
    return np.array(score) / 2.0


def closeness(g: Graph, v: int) -> float:
    """(n-1) / sum of BFS distances from v; 1.0 on complete graphs."""
    if not 0 <= v < g.n:
        raise InvalidParameterError(f"node {v} out of range for n={g.n}")
    dist = _bfs_distances(g, v)
    if min(dist) < 0:
        raise DisconnectedGraphError("closeness undefined on disconnected graphs")
    if g.n == 1:
        return 1.0
    return (g.n - 1) / float(sum(dist))


def eigenvector_centrality(
    g: Graph, tol: float = 1e-10, max_iters: int = 10_000
) -> np.ndarray:
    """Dominant eigenvector of the adjacency relation, unit Euclidean norm.

    Power iteration from the all-ones vector, renormalized each step,
    converged when successive iterates differ by less than tol in sup norm.
    The iteration matrix is shifted by +I so that bipartite graphs (where
    the spectrum is symmetric) converge too; the shift leaves eigenvectors
    unchanged.
    """
    _require_connected(g)
    a = g.adjacency_matrix
    x = np.ones(g.n) / np.sqrt(g.n)
    gap = np.inf
    for _ in range(max_iters):
        y = a @ x + x
        y /= np.linalg.norm(y)
        gap = np.abs(y - x).max()
        x = y
        if gap < tol:
            return x
    raise PowerIterationError(iterations=max_iters, last_gap=float(gap))


def local_clustering(g: Graph, v: int) -> float:
    """Fraction of v's neighbor pairs that are themselves connected; 0 below degree 2."""
    if not 0 <= v < g.n:
        raise InvalidParameterError(f"node {v} out of range for n={g.n}")
    nbrs = g.neighbors[v]
    d = len(nbrs)
    if d < 2:
        return 0.0
    links = 0
    for idx, u in enumerate(nbrs):
        u_nbrs = set(g.neighbors[u])
        for w in nbrs[idx + 1 :]:
            if w in u_nbrs:
                links += 1
    return links / (d * (d - 1) / 2)


def mean_clustering(g: Graph) -> float:
    """Arithmetic mean of local clustering over all nodes."""
    return float(np.mean([local_clustering(g, v) for v in range(g.n)]))


def diameter(g: Graph) -> int:
    """Maximum BFS distance over all node pairs."""
    _require_connected(g)
    best = 0
    for v in range(g.n):
        best = max(best, max(_bfs_distances(g, v)))
    return best


def centrality_report(
    g: Graph, tol: float = 1e-10, max_iters: int = 10_000
) -> CentralityReport:
    """All per-node metrics in one pass (connected graphs only)."""
    _require_connected(g)
    return CentralityReport(
        degree=np.array([degree(g, v) for v in range(g.n)], dtype=np.int64),
        betweenness=betweenness(g),
        closeness=np.array([closeness(g, v) for v in range(g.n)]),
        eigenvector=eigenvector_centrality(g, tol=tol, max_iters=max_iters),
        local_clustering=np.array([local_clustering(g, v) for v in range(g.n)]),
    )
