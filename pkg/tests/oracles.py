"""Independent reference implementations used to check the library.

Nothing here shares code paths with likesim: shortest-path quantities come
from explicit simple-path enumeration, clustering from direct pair
counting, and the 3-node like-centrality systems from polynomial
elimination (quartic root-solving plus Newton polish) or closed forms.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np


def all_connected_edge_sets(n: int):
    """Yield every labeled connected simple graph on n nodes as an edge list."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        adj = [[] for _ in range(n)]
        for i, j in edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) == n:
            yield edges


def _adjacency(n: int, edges) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    return adj


def _bfs(adj: list[list[int]], source: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _all_shortest_paths(adj, s, t, limit):
    """Every simple s-t path of length exactly `limit`, by bounded DFS."""
    paths = []

    def extend(path, node):
        if len(path) - 1 > limit:
            return
        if node == t:
            if len(path) - 1 == limit:
                paths.append(list(path))
            return
        for w in adj[node]:
            if w not in path:
                path.append(w)
                extend(path, w)
                path.pop()

    extend([s], s)
    return paths


def brute_force_metrics(n: int, edges):
    """(betweenness, closeness, diameter, local clustering) by enumeration."""
    adj = _adjacency(n, edges)
    dist = [_bfs(adj, v) for v in range(n)]
    assert all(min(row) >= 0 for row in dist), "oracle needs a connected graph"

    between = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        paths = _all_shortest_paths(adj, s, t, dist[s][t])
        sigma = len(paths)
        through = [0] * n
        for path in paths:
            for v in path[1:-1]:
                through[v] += 1
        for v in range(n):
            if v != s and v != t and sigma:
                between[v] += through[v] / sigma

    close = [(n - 1) / sum(dist[v]) if n > 1 else 1.0 for v in range(n)]
    diam = max(max(row) for row in dist)

    clustering = []
    for v in range(n):
        nbrs = adj[v]
        d = len(nbrs)
        if d < 2:
            clustering.append(0.0)
            continue
        links = sum(
            1
            for a, b in itertools.combinations(nbrs, 2)
            if b in adj[a]
        )
        clustering.append(links / (d * (d - 1) / 2))
    return np.array(between), np.array(close), diam, np.array(clustering)


# ---------------------------------------------------------------------------
# n = 3 like-centrality oracles
# ---------------------------------------------------------------------------


def _cleared_system(rates, L):
    """Cleared-denominator equations G_i(L) for a 3-node system."""
    a, b = rates[(0, 1)], rates[(0, 2)]
    c, d = rates[(1, 0)], rates[(1, 2)]
    e, f = rates[(2, 0)], rates[(2, 1)]
    x, y, z = L
    return np.array(
        [
            x * (y + z) - a * y - b * z,
            y * (x + z) - c * x - d * z,
            z * (x + y) - e * x - f * y,
        ]
    )


def _jacobian(rates, L):
    a, b = rates[(0, 1)], rates[(0, 2)]
    c, d = rates[(1, 0)], rates[(1, 2)]
    e, f = rates[(2, 0)], rates[(2, 1)]
    x, y, z = L
    return np.array(
        [
            [y + z, x - a, x - b],
            [y - c, x + z, y - d],
            [z - e, z - f, x + y],
        ]
    )


def solve_k3_oracle(rates: dict) -> np.ndarray:
    """Unique positive solution of the triangle system via elimination.

    Eliminating L0 and L1 from the cleared system leaves the quartic
    below in z = L2 (the zero solution factors out as z^2).  Real positive
    roots are back-substituted through the quadratic for L1, Newton-polished
    on the full system, then filtered by the convex-combination boxes.
    Raises if the number of surviving solutions differs from one.
    """
    a, b = rates[(0, 1)], rates[(0, 2)]
    c, d = rates[(1, 0)], rates[(1, 2)]
    e, f = rates[(2, 0)], rates[(2, 1)]
    c4 = -2 * (b + d)
    c3 = (
        -a * b - 3 * a * d - b * b - 3 * b * c + 2 * b * d + 3 * b * e + b * f
        - c * d - d * d + d * e + 3 * d * f
    )
    c2 = (
        -a * a * d - a * b * c + 2 * a * b * e - a * c * d + 4 * a * d * e
        + 2 * a * d * f + b * b * e + b * b * f - b * c * c + 2 * b * c * e
        + 4 * b * c * f - 2 * b * d * e - 2 * b * d * f - b * e * e - b * e * f
        + 2 * c * d * f + d * d * e + d * d * f - d * e * f - d * f * f
    )
    c1 = (
        2 * a * a * d * e + a * b * c * e + a * b * c * f - a * b * e * e
        + a * c * d * e + a * c * d * f - a * d * e * e - 2 * a * d * e * f
        - b * b * e * f + 2 * b * c * c * f - 2 * b * c * e * f - b * c * f * f
        + 2 * b * d * e * f - c * d * f * f - d * d * e * f
    )
    c0 = -(a * e + c * f) * (a * d * e + b * c * f)

    candidates = []
    for z in np.roots([c4, c3, c2, c1, c0]):
        if abs(z.imag) > 1e-9 or z.real <= 0:
            continue
        z = float(z.real)
        # L1 from the resultant of the first two equations (quadratic in y).
        qa = a + z
        qb = z * z + (b - d) * z - a * c
        qc = -z * (b * c + d * z)
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            continue
        for y in ((-qb + np.sqrt(disc)) / (2 * qa), (-qb - np.sqrt(disc)) / (2 * qa)):
            if y <= 0 or y + z == 0:
                continue
            x = (a * y + b * z) / (y + z)
            if x <= 0:
                continue
            sol = np.array([x, y, z])
            for _ in range(4):  # Newton polish on the full system
                step = np.linalg.solve(_jacobian(rates, sol), _cleared_system(rates, sol))
                sol = sol - step
            if np.abs(_cleared_system(rates, sol)).max() > 1e-10:
                continue
            boxes = [(min(a, b), max(a, b)), (min(c, d), max(c, d)), (min(e, f), max(e, f))]
            slack = 1e-9
            if all(lo - slack <= v <= hi + slack for v, (lo, hi) in zip(sol, boxes)):
                if not any(np.abs(sol - prev).max() < 1e-7 for prev in candidates):
                    candidates.append(sol)
    if len(candidates) != 1:
        raise AssertionError(
            f"expected a unique positive boxed solution, found {len(candidates)}"
        )
    return candidates[0]


def solve_p3_oracle(rates: dict) -> np.ndarray:
    """Closed form for the path 0-1-2: endpoints equal their received rate."""
    l0 = rates[(0, 1)]
    l2 = rates[(2, 1)]
    l1 = (rates[(1, 0)] * l0 + rates[(1, 2)] * l2) / (l0 + l2)
    return np.array([l0, l1, l2])
