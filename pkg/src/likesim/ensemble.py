"""Seeded Monte-Carlo ensembles: parallel execution, persistence, selection.

The runner is a deterministic map over sample ids.  Ids are grouped into
fixed-size chunks (independent of worker count); each chunk generates its
graphs and rates from per-sample seeds, solves all like-centrality systems
as one vectorized batch, and renders the canonical JSONL records.  Chunk
outputs are merged in id order, so samples.jsonl is byte-identical for any
worker count.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Iterator

import numpy as np

from . import graph as graphmod
from .errors import (
    ConvergenceHealthError,
    InsufficientDataError,
    InvalidParameterError,
    InvariantViolationError,
    MalformedRecordError,
)
from .fileio import atomic_open
from .graph import Graph, generate_ba
from .likecentrality import LikeCentralityVector, RateMatrix, sample_rates
from .rng import derive_sample_seed

CHUNK_SIZE = 1000  # fixed; chunking must not depend on worker count
WORKERS_ENV = "LIKESIM_THREADS"

# Sub-seed indices carved out of each sample seed.
GRAPH_SUBSEED = 0
RATES_SUBSEED = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one ensemble run."""

    count: int
    n: int = 10
    m: int = 2
    base_seed: int = 0
    tol: float = 1e-10
    max_iters: int = 10_000
    damping: float = 1.0
    quantile: float = 0.01
    workers: int = 0  # 0 = auto

    def validate(self) -> None:
        if self.count < 1:
            raise InvalidParameterError(f"count must be >= 1, got {self.count}")
        if not 0.0 < self.quantile < 1.0:
            raise InvalidParameterError(f"quantile must be in (0, 1), got {self.quantile}")
        if self.m < 1 or self.n <= self.m:
            raise InvalidParameterError(f"need n > m >= 1, got n={self.n}, m={self.m}")
        if self.tol <= 0:
            raise InvalidParameterError(f"tol must be positive, got {self.tol}")
        if not 0.0 < self.damping <= 1.0:
            raise InvalidParameterError(f"damping must be in (0, 1], got {self.damping}")
        if self.workers < 0:
            raise InvalidParameterError(f"workers must be >= 0, got {self.workers}")


@dataclass(frozen=True)
class NetworkSample:
    """One simulated network with its solution and provenance seed."""

    id: int
    seed: int
    graph: Graph
    rates: RateMatrix
    lc: LikeCentralityVector
    prestige: float
    mean_clustering: float
    diameter: int


@dataclass(frozen=True)
class EnsembleSummary:
    """Prestige population fit and the strategic selection."""

    count: int
    mu: float
    sigma2: float
    quantile: float
    threshold: float
    strategic_ids: tuple[int, ...]
    convergence_failures: int


def resolve_workers(requested: int) -> int:
    """Effective worker count: LIKESIM_THREADS env wins, 0 means cpu count."""
    env = os.environ.get(WORKERS_ENV)
    if env is not None and env.strip():
        requested = int(env)
    if requested < 0:
        raise InvalidParameterError(f"workers must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def gaussian_mle(prestiges) -> tuple[float, float]:
    """Gaussian maximum-likelihood fit: sample mean and divide-by-N variance."""
    values = np.asarray(prestiges, dtype=float)
    if values.size < 2:
        raise InsufficientDataError(f"need at least 2 values, got {values.size}")
    mu = float(values.mean())
    sigma2 = float(((values - mu) ** 2).mean())
    return mu, sigma2


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _select(
    ids: np.ndarray,
    prestiges: np.ndarray,
    converged: np.ndarray,
    total_count: int,
    quantile: float,
) -> tuple[list[int], float]:
    if not 0.0 < quantile < 1.0:
        raise InvalidParameterError(f"quantile must be in (0, 1), got {quantile}")
    k = _round_half_up(quantile * total_count)
    if k == 0:
        raise InvalidParameterError(
            f"empty selection: round({quantile} * {total_count}) = 0"
        )
    ids = ids[converged]
    prestiges = prestiges[converged]
    if k > ids.size:
        raise InsufficientDataError(
            f"selection of {k} exceeds {ids.size} converged samples"
        )
    # Highest prestige first; ties go to the lower id.
    order = np.lexsort((ids, -prestiges))[:k]
    chosen = ids[order]
    threshold = float(prestiges[order[-1]])
    return sorted(int(i) for i in chosen), threshold


def select_strategic(
    samples: Iterable[NetworkSample], quantile: float
) -> tuple[list[int], float]:
    """Ids of the top-quantile samples by prestige and the prestige cutoff.

    Only converged samples are eligible; the selection size is
    round(quantile * total sample count); ties break toward lower ids.
    """
    ids, prestiges, converged = [], [], []
    for s in samples:
        ids.append(s.id)
        prestiges.append(s.prestige)
        converged.append(s.lc.converged)
    return _select(
        np.array(ids, dtype=np.int64),
        np.array(prestiges),
        np.array(converged, dtype=bool),
        total_count=len(ids),
        quantile=quantile,
    )


# ---------------------------------------------------------------------------
# Batched chunk engine
# ---------------------------------------------------------------------------


def _solve_batch(
    f: np.ndarray,
    r: np.ndarray,
    tol: float,
    max_iters: int,
    damping: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized counterpart of solve_lc over a (B, n, n) batch.

    Same update rule, convergence test, and oscillation policy as the scalar
    solver; converged samples freeze so each result depends only on its own
    trajectory.  Returns (L, converged, iterations).
    """
    batch, n, _ = f.shape
    rf = r * f
    l_vec = np.ones((batch, n))
    frozen = np.zeros(batch, dtype=bool)
    iterations = np.full(batch, max_iters, dtype=np.int64)
    damp = np.full(batch, damping)
    streak = np.zeros(batch, dtype=np.int64)
    prev_res = np.full(batch, np.inf)
    threshold = tol * n
    step = 0
    while step < max_iters and not frozen.all():
        step += 1
        den = np.einsum("bij,bj->bi", f, l_vec)
        den = np.maximum(den, 1e-300)
        t = np.einsum("bij,bj->bi", rf, l_vec) / den
        d = damp[:, None]
        l_new = np.where(frozen[:, None], l_vec, (1.0 - d) * l_vec + d * t)
        den_new = np.einsum("bij,bj->bi", f, l_new)
        res = np.abs(l_new * den_new - np.einsum("bij,bj->bi", rf, l_new)).max(axis=1)
        newly = ~frozen & (res <= threshold)
        iterations[newly] = step
        grew = ~frozen & (res > prev_res)
        streak = np.where(grew, streak + 1, 0)
        restart = ~frozen & (streak >= 10)
        if restart.any():
            damp = np.where(restart, np.maximum(damp / 2.0, 0.125), damp)
            l_new[restart] = 1.0
            streak[restart] = 0
            res = np.where(restart, np.inf, res)
        prev_res = res
        l_vec = l_new
        frozen |= newly
    return l_vec, iterations < max_iters, iterations


def _batch_mean_clustering(f: np.ndarray) -> np.ndarray:
    a = f.astype(np.int64)
    a3 = np.matmul(a, np.matmul(a, a))
    triangles = np.einsum("bii->bi", a3) / 2.0
    deg = a.sum(axis=2).astype(float)
    pairs = deg * (deg - 1.0) / 2.0
    local = np.where(pairs > 0, triangles / np.maximum(pairs, 1.0), 0.0)
    return local.mean(axis=1)


def _batch_diameter(f: np.ndarray) -> np.ndarray:
    batch, n, _ = f.shape
    adj = f > 0
    idx = np.arange(n)
    dist = np.where(adj, 1, n + 1).astype(np.int64)
    dist[:, idx, idx] = 0
    reached = adj | np.eye(n, dtype=bool)
    frontier = adj
    step = 1
    while True:
        nxt = np.matmul(frontier.astype(np.int64), adj.astype(np.int64)) > 0
        new = nxt & ~reached
        if not new.any():
            break
        step += 1
        dist = np.where(new, step, dist)
        reached |= new
        frontier = nxt
    return dist.max(axis=(1, 2))


def _format_record(
    sample_id: int,
    seed: int,
    n: int,
    edges,
    rate_items,
    lc_values,
    prestige_value: float,
    converged: bool,
    iterations: int,
    mean_clustering_value: float,
    diameter_value: int,
) -> str:
    """Canonical JSONL record; rates carry 17 significant digits."""
    edges_s = ",".join(f"[{i},{j}]" for i, j in edges)
    rates_s = ",".join(f"[{i},{j},{format(v, '.17g')}]" for (i, j), v in rate_items)
    lc_s = ",".join(repr(float(x)) for x in lc_values)
    return (
        f'{{"id":{sample_id},"seed":"{seed}","n":{n},'
        f'"edges":[{edges_s}],"rates":[{rates_s}],"lc":[{lc_s}],'
        f'"prestige":{float(prestige_value)!r},'
        f'"converged":{"true" if converged else "false"},'
        f'"iterations":{int(iterations)},'
        f'"mean_clustering":{float(mean_clustering_value)!r},'
        f'"diameter":{int(diameter_value)}}}'
    )


def _run_chunk(cfg: ExperimentConfig, chunk_index: int):
    """Generate, solve, and render one chunk of sample ids."""
    start = chunk_index * CHUNK_SIZE
    stop = min(start + CHUNK_SIZE, cfg.count)
    batch = stop - start
    n = cfg.n
    f = np.zeros((batch, n, n))
    r = np.zeros((batch, n, n))
    graphs: list[Graph] = []
    rate_matrices: list[RateMatrix] = []
    seeds: list[int] = []
    for k, sample_id in enumerate(range(start, stop)):
        seed = derive_sample_seed(cfg.base_seed, sample_id)
        seeds.append(seed)
        g = generate_ba(cfg.n, cfg.m, derive_sample_seed(seed, GRAPH_SUBSEED))
        rates = sample_rates(g, derive_sample_seed(seed, RATES_SUBSEED))
        graphs.append(g)
        rate_matrices.append(rates)
        for i, j in g.edges:
            f[k, i, j] = 1.0
            f[k, j, i] = 1.0
        for (i, j), val in rates.entries.items():
            r[k, i, j] = val
    l_vec, converged, iterations = _solve_batch(
        f, r, cfg.tol, cfg.max_iters, cfg.damping
    )
    # Convex-combination bound, asserted on every converged sample.
    received_min = np.where(f > 0, r, np.inf).min(axis=2)
    received_max = np.where(f > 0, r, -np.inf).max(axis=2)
    ok = (l_vec >= received_min - 1e-6) & (l_vec <= received_max + 1e-6)
    bad = converged & ~ok.all(axis=1)
    if bad.any():
        raise InvariantViolationError(
            "lc", f"convexity bound violated for sample id {start + int(np.flatnonzero(bad)[0])}"
        )
    prestige_values = l_vec.sum(axis=1)
    clustering = _batch_mean_clustering(f)
    diameters = _batch_diameter(f)
    lines = []
    for k in range(batch):
        lines.append(
            _format_record(
                sample_id=start + k,
                seed=seeds[k],
                n=n,
                edges=graphs[k].edges,
                rate_items=rate_matrices[k].sorted_items(),
                lc_values=l_vec[k],
                prestige_value=prestige_values[k],
                converged=bool(converged[k]),
                iterations=int(iterations[k]),
                mean_clustering_value=clustering[k],
                diameter_value=int(diameters[k]),
            )
        )
    payload = ("\n".join(lines) + "\n").encode()
    return chunk_index, payload, prestige_values.tolist(), converged.tolist()


def _iter_chunk_payloads(cfg: ExperimentConfig, workers: int):
    n_chunks = (cfg.count + CHUNK_SIZE - 1) // CHUNK_SIZE
    if workers <= 1 or n_chunks == 1:
        for k in range(n_chunks):
            yield _run_chunk(cfg, k)
        return
    with multiprocessing.Pool(processes=min(workers, n_chunks)) as pool:
        yield from pool.imap(partial(_run_chunk, cfg), range(n_chunks))


def run_ensemble(
    cfg: ExperimentConfig,
    samples_path: str | os.PathLike | None = None,
    on_sample: Callable[[NetworkSample], None] | None = None,
) -> EnsembleSummary:
    """Run the full seeded ensemble and aggregate its summary.

    Samples stream out in id order: to `samples_path` as canonical JSONL
    (written atomically), and/or to the `on_sample` callback as
    NetworkSample values.  Failed solves are retained and flagged, counted,
    and excluded from the fit and the selection; the run aborts with
    ConvergenceHealthError if more than 0.1% of samples fail to converge.
    """
    cfg.validate()
    workers = resolve_workers(cfg.workers)
    prestiges = np.empty(cfg.count)
    converged = np.empty(cfg.count, dtype=bool)

    def consume(payload_iter):
        pos = 0
        for _, payload, chunk_prestiges, chunk_converged in payload_iter:
            size = len(chunk_prestiges)
            prestiges[pos : pos + size] = chunk_prestiges
            converged[pos : pos + size] = chunk_converged
            if on_sample is not None:
                for offset, line in enumerate(payload.decode().splitlines()):
                    on_sample(_parse_record(line, pos + offset + 1, deep=False))
            pos += size
            yield payload

    def check_failure_rate() -> int:
        failures = int(cfg.count - converged.sum())
        if failures / cfg.count > 0.001:
            raise ConvergenceHealthError(
                f"{failures} of {cfg.count} samples failed to converge; "
                "check tol/max_iters/damping"
            )
        return failures

    payloads = consume(_iter_chunk_payloads(cfg, workers))
    if samples_path is not None:
        # The health check runs inside the atomic block: an aborted run
        # leaves no samples file behind.
        with atomic_open(samples_path, "wb") as handle:
            for payload in payloads:
                handle.write(payload)
            failures = check_failure_rate()
    else:
        for _ in payloads:
            pass
        failures = check_failure_rate()
    good = prestiges[converged]
    if good.size >= 2:
        mu, sigma2 = gaussian_mle(good)
    else:
        mu, sigma2 = float(good[0]), 0.0
    ids = np.arange(cfg.count, dtype=np.int64)
    strategic_ids, threshold = _select(
        ids, prestiges, converged, total_count=cfg.count, quantile=cfg.quantile
    )
    return EnsembleSummary(
        count=cfg.count,
        mu=mu,
        sigma2=sigma2,
        quantile=cfg.quantile,
        threshold=threshold,
        strategic_ids=tuple(strategic_ids),
        convergence_failures=failures,
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = (
    "id", "seed", "n", "edges", "rates", "lc", "prestige",
    "converged", "iterations", "mean_clustering", "diameter",
)


def sample_to_line(sample: NetworkSample) -> str:
    return _format_record(
        sample_id=sample.id,
        seed=sample.seed,
        n=sample.graph.n,
        edges=sample.graph.edges,
        rate_items=sample.rates.sorted_items(),
        lc_values=sample.lc.values,
        prestige_value=sample.prestige,
        converged=sample.lc.converged,
        iterations=sample.lc.iterations,
        mean_clustering_value=sample.mean_clustering,
        diameter_value=sample.diameter,
    )


def _parse_record(line: str, line_number: int, deep: bool = True) -> NetworkSample:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(line_number, str(exc)) from None
    if not isinstance(obj, dict):
        raise MalformedRecordError(line_number, "record is not an object")
    missing = [k for k in _REQUIRED_KEYS if k not in obj]
    if missing:
        raise MalformedRecordError(line_number, f"missing keys {missing}")

    def violation(field: str, detail: str) -> InvariantViolationError:
        return InvariantViolationError(field, detail, line_number=line_number)

    sample_id = obj["id"]
    if not isinstance(sample_id, int) or sample_id < 0:
        raise violation("id", f"expected non-negative integer, got {sample_id!r}")
    try:
        seed = int(obj["seed"])
    except (TypeError, ValueError):
        raise violation("seed", f"expected integer string, got {obj['seed']!r}") from None
    if not 0 <= seed < 2**64:
        raise violation("seed", f"{seed} outside unsigned 64-bit range")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise violation("n", f"expected positive integer, got {n!r}")

    edges_raw = obj["edges"]
    if not isinstance(edges_raw, list):
        raise violation("edges", "expected a list")
    edges: list[tuple[int, int]] = []
    for item in edges_raw:
        if not (isinstance(item, list) and len(item) == 2):
            raise violation("edges", f"bad edge entry {item!r}")
        i, j = item
        if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < j < n):
            raise violation("edges", f"edge [{i}, {j}] invalid for n={n}")
        edges.append((i, j))
    if edges != sorted(set(edges)):
        raise violation("edges", "edges must be unique and sorted with i < j")
    try:
        g = Graph(n=n, edges=tuple(edges))
    except InvalidParameterError as exc:
        raise violation("edges", str(exc)) from None

    rates_raw = obj["rates"]
    if not isinstance(rates_raw, list):
        raise violation("rates", "expected a list")
    entries: dict[tuple[int, int], float] = {}
    prev = None
    for item in rates_raw:
        if not (isinstance(item, list) and len(item) == 3):
            raise violation("rates", f"bad rate entry {item!r}")
        i, j, val = item
        if not (isinstance(i, int) and isinstance(j, int)):
            raise violation("rates", f"bad rate pair ({i!r}, {j!r})")
        if not isinstance(val, (int, float)) or not 0.0 <= float(val) <= 1.0:
            raise violation("rates", f"rate ({i},{j}) = {val!r} outside [0, 1]")
        if prev is not None and (i, j) <= prev:
            raise violation("rates", "rate triples must be lexicographically sorted")
        prev = (i, j)
        entries[(i, j)] = float(val)
    rates = RateMatrix(n=n, entries=entries)
    try:
        rates.validate_against(g)
    except InvalidParameterError as exc:
        raise violation("rates", str(exc)) from None

    lc_raw = obj["lc"]
    if not (isinstance(lc_raw, list) and len(lc_raw) == n):
        raise violation("lc", f"expected {n} values")
    lc_values = np.array([float(x) for x in lc_raw])
    if not np.isfinite(lc_values).all():
        raise violation("lc", "non-finite value")

    prestige_value = obj["prestige"]
    if not isinstance(prestige_value, (int, float)):
        raise violation("prestige", f"expected number, got {prestige_value!r}")
    if abs(float(prestige_value) - float(lc_values.sum())) > 1e-9:
        raise violation("prestige", "prestige does not equal the sum of lc values")

    if not isinstance(obj["converged"], bool):
        raise violation("converged", "expected boolean")
    iterations = obj["iterations"]
    if not isinstance(iterations, int) or iterations < 0:
        raise violation("iterations", f"expected non-negative integer, got {iterations!r}")
    mc = obj["mean_clustering"]
    if not isinstance(mc, (int, float)) or not 0.0 <= float(mc) <= 1.0:
        raise violation("mean_clustering", f"{mc!r} outside [0, 1]")
    diam = obj["diameter"]
    if not isinstance(diam, int) or diam < 0:
        raise violation("diameter", f"expected non-negative integer, got {diam!r}")

    rd = rates.to_dense()
    fm = g.adjacency_matrix
    residual_sup = float(
        np.abs(lc_values * (fm @ lc_values) - (rd * fm) @ lc_values).max()
    )
    if deep:
        if abs(graphmod.mean_clustering(g) - float(mc)) > 1e-9:
            raise violation("mean_clustering", "inconsistent with the edge set")
        if graphmod.diameter(g) != diam:
            raise violation("diameter", "inconsistent with the edge set")
    lc = LikeCentralityVector(
        values=lc_values,
        converged=obj["converged"],
        iterations=iterations,
        residual_sup=residual_sup,
    )
    return NetworkSample(
        id=sample_id,
        seed=seed,
        graph=g,
        rates=rates,
        lc=lc,
        prestige=float(prestige_value),
        mean_clustering=float(mc),
        diameter=diam,
    )


def iter_samples(path: str | os.PathLike, deep: bool = True) -> Iterator[NetworkSample]:
    """Stream samples from a JSONL file, validating each record."""
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                if line.endswith("\n"):
                    continue
                raise MalformedRecordError(line_number, "blank trailing content")
            yield _parse_record(stripped, line_number, deep=deep)


def load_samples(path: str | os.PathLike) -> list[NetworkSample]:
    """Read a whole JSONL file into memory (small files; stream otherwise)."""
    return list(iter_samples(path))


def save_samples(samples: Iterable[NetworkSample], path: str | os.PathLike) -> None:
    """Write samples as canonical JSONL, atomically."""
    with atomic_open(path, "w") as handle:
        for sample in samples:
            handle.write(sample_to_line(sample))
            handle.write("\n")
