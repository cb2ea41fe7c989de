"""Descriptive statistics over persisted ensembles.

Everything here is a pure transformation of sample data: histograms and
their percent differences, least-squares fits, binned means, mode
detection, and the full comparative analysis of the strategic population
against its baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .ensemble import EnsembleSummary, NetworkSample
from .errors import (
    InsufficientDataError,
    InvalidParameterError,
    InvariantViolationError,
    MismatchedEdgesError,
    MissingSelectionError,
)
from .graph import centrality_report
from .likecentrality import deviations


@dataclass(frozen=True)
class Histogram:
    """Uniform-width histogram with right-open bins and out-of-range buckets."""

    edges: np.ndarray  # length B+1, strictly increasing
    counts: np.ndarray  # length B; raw counts, or densities when density=True
    density: bool
    underflow: int
    overflow: int

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def centers(self) -> np.ndarray:
        return (self.edges[:-1] + self.edges[1:]) / 2.0

    def to_density(self) -> "Histogram":
        """Normalize so the in-range area integrates to 1."""
        if self.density:
            return self
        total = int(self.counts.sum())
        if total == 0:
            raise InvalidParameterError("cannot normalize an empty histogram")
        width = float(self.edges[1] - self.edges[0])
        return Histogram(
            edges=self.edges,
            counts=self.counts / (total * width),
            density=True,
            underflow=self.underflow,
            overflow=self.overflow,
        )


@dataclass(frozen=True)
class RegressionResult:
    """Ordinary least-squares line fit."""

    slope: float
    intercept: float
    r_squared: float
    residuals: np.ndarray
    n_points: int


def histogram(values, lo: float, hi: float, bins: int) -> Histogram:
    """Count values into `bins` uniform right-open bins over [lo, hi).

    Values below lo and at or above hi land in the underflow/overflow
    buckets and do not contribute to the in-range counts.
    """
    if not lo < hi:
        raise InvalidParameterError(f"invalid range: lo={lo} must be < hi={hi}")
    if bins < 1:
        raise InvalidParameterError(f"bins must be >= 1, got {bins}")
    vals = np.asarray(values, dtype=float)
    edges = lo + (hi - lo) * np.arange(bins + 1) / bins
    in_range = (vals >= lo) & (vals < hi)
    idx = np.floor((vals[in_range] - lo) / (hi - lo) * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(
        edges=edges,
        counts=counts,
        density=False,
        underflow=int((vals < lo).sum()),
        overflow=int((vals >= hi).sum()),
    )


def percent_difference(strategic: Histogram, baseline: Histogram) -> list[Optional[float]]:
    """Per-bin 100 * (strategic - baseline) / baseline over two densities.

    Bins where the baseline density is zero yield None rather than a number.
    """
    if not (strategic.density and baseline.density):
        raise InvalidParameterError("both histograms must be densities")
    if strategic.edges.shape != baseline.edges.shape or not np.array_equal(
        strategic.edges, baseline.edges
    ):
        raise MismatchedEdgesError("histograms do not share bin edges")
    out: list[Optional[float]] = []
    for ds, db in zip(strategic.counts, baseline.counts):
        if db == 0.0:
            out.append(None)
        else:
            out.append(100.0 * (float(ds) - float(db)) / float(db))
    return out


def ols_fit(x, y) -> RegressionResult:
    """Least-squares line y = intercept + slope * x with R^2 and residuals."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise InvalidParameterError("x and y must have the same length")
    if xv.size < 2:
        raise InsufficientDataError(f"need at least 2 points, got {xv.size}")
    xm = xv.mean()
    ym = yv.mean()
    sxx = float(((xv - xm) ** 2).sum())
    if sxx == 0.0:
        raise InvalidParameterError("degenerate x: all values equal")
    slope = float(((xv - xm) * (yv - ym)).sum()) / sxx
    intercept = ym - slope * xm
    residuals = yv - (intercept + slope * xv)
    ss_res = float((residuals**2).sum())
    ss_tot = float(((yv - ym) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 and ss_res <= 1e-300 else 1.0 - ss_res / ss_tot
    return RegressionResult(
        slope=slope,
        intercept=float(intercept),
        r_squared=float(r_squared),
        residuals=residuals,
        n_points=int(xv.size),
    )


def binned_mean(x, y) -> list[tuple[float, float]]:
    """One (x, mean y) point per distinct x value, sorted by x."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise InvalidParameterError("x and y must have the same length")
    values, inverse = np.unique(xv, return_inverse=True)
    sums = np.bincount(inverse, weights=yv, minlength=values.size)
    counts = np.bincount(inverse, minlength=values.size)
    return [(float(v), float(s / c)) for v, s, c in zip(values, sums, counts)]


def _smooth3(values: np.ndarray) -> np.ndarray:
    """3-bin moving average; edge bins average the neighbors that exist."""
    out = np.empty_like(values, dtype=float)
    for k in range(values.size):
        lo = max(0, k - 1)
        hi = min(values.size, k + 2)
        out[k] = values[lo:hi].mean()
    return out


def detect_modes(h: Histogram) -> list[tuple[float, float]]:
    """Local maxima of the smoothed density, highest first.

    A bin (or plateau of equal bins) counts as a mode when it is strictly
    greater than both flanking smoothed values; a plateau reports its
    leftmost bin.  Boundary bins have only one flank and never qualify.
    Returns (bin center, smoothed density) pairs sorted by density
    descending.
    """
    if not h.density:
        raise InvalidParameterError("detect_modes expects a density histogram")
    sm = _smooth3(np.asarray(h.counts, dtype=float))
    centers = h.centers
    modes: list[tuple[float, float]] = []
    k = 0
    n = sm.size
    while k < n:
        j = k
        while j + 1 < n and sm[j + 1] == sm[k]:
            j += 1
        is_interior = k > 0 and j < n - 1
        if is_interior and sm[k] > sm[k - 1] and sm[k] > sm[j + 1]:
            modes.append((float(centers[k]), float(sm[k])))
        k = j + 1
    modes.sort(key=lambda cd: (-cd[1], cd[0]))
    return modes


# ---------------------------------------------------------------------------
# Full comparative analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyzeOptions:
    bins: int = 60
    baseline_mode: str = "full"  # "full" ensemble or "bottom" remainder
    eigen_tol: float = 1e-10
    eigen_max_iters: int = 10_000

    def validate(self) -> None:
        if self.bins < 1:
            raise InvalidParameterError(f"bins must be >= 1, got {self.bins}")
        if self.baseline_mode not in ("full", "bottom"):
            raise InvalidParameterError(
                f"baseline_mode must be 'full' or 'bottom', got {self.baseline_mode!r}"
            )


@dataclass(frozen=True)
class AgentTable:
    """Per-agent rows for one population; ids are sample_id * n + node."""

    ids: np.ndarray
    degree: np.ndarray
    give_rate: np.ndarray


@dataclass(frozen=True)
class AnalysisReport:
    """Everything needed to reproduce the comparative figures and tables."""

    n_samples: int
    n_converged: int
    n_strategic: int
    n: int
    baseline_mode: str

    give_hist_strategic: Histogram
    give_hist_baseline: Histogram
    give_mean_strategic: float
    give_mean_baseline: float
    give_mean_ratio: float

    # (predictor name, binned?, fit)
    regressions: list[tuple[str, bool, RegressionResult]]
    # predictor -> (bin x values, mean give rate per bin)
    binned_points: dict[str, tuple[np.ndarray, np.ndarray]]

    delta_hist: Histogram
    epsilon_hist: Histogram
    delta_modes: list[tuple[float, float]]
    epsilon_modes: list[tuple[float, float]]
    edge_negative_epsilon_fraction: float
    agent_advantage_fraction: float
    dropped_pairs: int

    clustering_hist_strategic: Histogram
    clustering_hist_baseline: Histogram
    clustering_percent_difference: list[Optional[float]]
    clustering_mean_strategic: float
    clustering_mean_baseline: float

    # (diameter, count, mean prestige, population stddev of prestige)
    diameter_table: list[tuple[int, int, float, float]]

    strategic_agents: AgentTable
    baseline_agents: AgentTable


def _uniform_binned_mean(x: np.ndarray, y: np.ndarray, bins: int):
    """Mean of y per uniform x bin; used for continuous predictors."""
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        raise InvalidParameterError("degenerate x: all values equal")
    idx = np.clip(((x - lo) / (hi - lo) * bins).astype(np.int64), 0, bins - 1)
    sums = np.bincount(idx, weights=y, minlength=bins)
    counts = np.bincount(idx, minlength=bins)
    centers = lo + (hi - lo) * (np.arange(bins) + 0.5) / bins
    mask = counts > 0
    return centers[mask], sums[mask] / counts[mask]


def analyze(
    samples: Iterable[NetworkSample],
    summary: EnsembleSummary,
    options: AnalyzeOptions = AnalyzeOptions(),
) -> AnalysisReport:
    """Build the full strategic-vs-baseline report from a persisted ensemble.

    One pass over `samples` (a list or a streaming iterator).  The baseline
    population is the full converged ensemble, or the converged
    non-strategic remainder when options.baseline_mode == "bottom".
    Non-converged samples are excluded from every statistic.
    """
    options.validate()
    strategic_set = set(summary.strategic_ids)
    if not strategic_set:
        raise MissingSelectionError("summary carries no strategic ids")

    count = summary.count
    first_n: int | None = None
    deg_all: np.ndarray | None = None
    give_all: np.ndarray | None = None
    conv_mask = np.zeros(count, dtype=bool)
    strat_mask = np.zeros(count, dtype=bool)
    clustering_all = np.empty(count)
    prestige_all = np.empty(count)
    diameter_all = np.empty(count, dtype=np.int64)

    strat_rows: dict[str, list[np.ndarray]] = {
        "degree": [], "betweenness": [], "closeness": [],
        "eigenvector": [], "give": [], "ids": [],
    }
    delta_values: list[np.ndarray] = []
    epsilon_values: list[np.ndarray] = []
    advantage_count = 0
    strat_agent_count = 0
    dropped_pairs = 0
    seen = 0

    for s in samples:
        if first_n is None:
            first_n = s.graph.n
            deg_all = np.zeros(count * first_n, dtype=np.int64)
            give_all = np.zeros(count * first_n)
        if s.graph.n != first_n:
            raise InvariantViolationError("n", "samples disagree on node count")
        if not 0 <= s.id < count:
            raise InvariantViolationError("id", f"sample id {s.id} outside [0, {count})")
        seen += 1
        n = first_n
        base = s.id * n
        give = np.zeros(n)
        for (_, j), val in s.rates.entries.items():
            give[j] += val
        give_all[base : base + n] = give
        deg_all[base : base + n] = [len(nb) for nb in s.graph.neighbors]
        conv_mask[s.id] = s.lc.converged
        clustering_all[s.id] = s.mean_clustering
        prestige_all[s.id] = s.prestige
        diameter_all[s.id] = s.diameter
        if not s.lc.converged:
            continue
        if s.id in strategic_set:
            strat_mask[s.id] = True
            report = centrality_report(
                s.graph, tol=options.eigen_tol, max_iters=options.eigen_max_iters
            )
            strat_rows["degree"].append(report.degree.astype(float))
            strat_rows["betweenness"].append(report.betweenness)
            strat_rows["closeness"].append(report.closeness)
            strat_rows["eigenvector"].append(report.eigenvector)
            strat_rows["give"].append(give)
            strat_rows["ids"].append(base + np.arange(n))
            dev = deviations(s.graph, s.rates, s.lc)
            delta_values.append(np.fromiter(dev.delta.values(), dtype=float))
            epsilon_values.append(np.fromiter(dev.epsilon.values(), dtype=float))
            advantage_count += int(dev.agent_advantage.sum())
            strat_agent_count += n
            dropped_pairs += dev.dropped_pairs

    if seen != count:
        raise InvariantViolationError(
            "count", f"summary says {count} samples, stream had {seen}"
        )
    if not strat_mask.any():
        raise MissingSelectionError("no strategic sample appeared in the stream")
    n = first_n

    if options.baseline_mode == "full":
        base_mask = conv_mask
    else:
        base_mask = conv_mask & ~strat_mask
    base_agents = np.repeat(base_mask, n)
    strat_agents_mask = np.repeat(strat_mask, n)
    agent_ids = np.arange(count * n, dtype=np.int64)

    give_strat = np.concatenate(strat_rows["give"])
    give_base = give_all[base_agents]
    bins = options.bins
    give_hist_s = histogram(give_strat, 0.0, float(n - 1), bins).to_density()
    give_hist_b = histogram(give_base, 0.0, float(n - 1), bins).to_density()
    mean_s = float(give_strat.mean())
    mean_b = float(give_base.mean())

    x_degree = np.concatenate(strat_rows["degree"])
    predictors = {
        "degree": x_degree,
        "degree_normalized": x_degree / (n - 1),
        "betweenness": np.concatenate(strat_rows["betweenness"]),
        "closeness": np.concatenate(strat_rows["closeness"]),
        "eigenvector": np.concatenate(strat_rows["eigenvector"]),
    }
    regressions: list[tuple[str, bool, RegressionResult]] = []
    binned_points: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for name, xs in predictors.items():
        regressions.append((name, False, ols_fit(xs, give_strat)))
        if name == "eigenvector":
            bx, by = _uniform_binned_mean(xs, give_strat, bins)
        else:
            pairs = binned_mean(xs, give_strat)
            bx = np.array([p[0] for p in pairs])
            by = np.array([p[1] for p in pairs])
        binned_points[name] = (bx, by)
        regressions.append((name, True, ols_fit(bx, by)))

    delta_all = np.concatenate(delta_values)
    epsilon_all = np.concatenate(epsilon_values)
    delta_hist = histogram(delta_all, -1.0, 3.0, bins).to_density()
    epsilon_hist = histogram(epsilon_all, -1.0, 1.0, bins).to_density()

    clust_hist_s = histogram(clustering_all[strat_mask], 0.0, 1.0, bins).to_density()
    clust_hist_b = histogram(clustering_all[base_mask], 0.0, 1.0, bins).to_density()

    diameter_table: list[tuple[int, int, float, float]] = []
    for d in sorted(set(diameter_all[conv_mask].tolist())):
        pick = conv_mask & (diameter_all == d)
        vals = prestige_all[pick]
        diameter_table.append(
            (int(d), int(pick.sum()), float(vals.mean()), float(vals.std()))
        )

    return AnalysisReport(
        n_samples=count,
        n_converged=int(conv_mask.sum()),
        n_strategic=int(strat_mask.sum()),
        n=n,
        baseline_mode=options.baseline_mode,
        give_hist_strategic=give_hist_s,
        give_hist_baseline=give_hist_b,
        give_mean_strategic=mean_s,
        give_mean_baseline=mean_b,
        give_mean_ratio=mean_s / mean_b,
        regressions=regressions,
        binned_points=binned_points,
        delta_hist=delta_hist,
        epsilon_hist=epsilon_hist,
        delta_modes=detect_modes(delta_hist),
        epsilon_modes=detect_modes(epsilon_hist),
        edge_negative_epsilon_fraction=float((epsilon_all < 0).mean()),
        agent_advantage_fraction=advantage_count / strat_agent_count,
        dropped_pairs=dropped_pairs,
        clustering_hist_strategic=clust_hist_s,
        clustering_hist_baseline=clust_hist_b,
        clustering_percent_difference=percent_difference(clust_hist_s, clust_hist_b),
        clustering_mean_strategic=float(clustering_all[strat_mask].mean()),
        clustering_mean_baseline=float(clustering_all[base_mask].mean()),
        diameter_table=diameter_table,
        strategic_agents=AgentTable(
            ids=np.concatenate(strat_rows["ids"]),
            degree=x_degree.astype(np.int64),
            give_rate=give_strat,
        ),
        baseline_agents=AgentTable(
            ids=agent_ids[base_agents],
            degree=deg_all[base_agents],
            give_rate=give_base,
        ),
    )


# ---------------------------------------------------------------------------
# CSV rendering
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def render_give_rates_csv(report: AnalysisReport) -> str:
    lines = ["population,agent_global_id,degree,give_rate"]
    for table, label in (
        (report.baseline_agents, "random"),
        (report.strategic_agents, "strategic"),
    ):
        for aid, deg, give in zip(table.ids, table.degree, table.give_rate):
            lines.append(f"{label},{int(aid)},{int(deg)},{_fmt(give)}")
    return "\n".join(lines) + "\n"


def render_regressions_csv(report: AnalysisReport) -> str:
    lines = ["predictor,binned,slope,intercept,r_squared,n_points"]
    for name, binned, fit in report.regressions:
        lines.append(
            f"{name},{'true' if binned else 'false'},{_fmt(fit.slope)},"
            f"{_fmt(fit.intercept)},{_fmt(fit.r_squared)},{fit.n_points}"
        )
    return "\n".join(lines) + "\n"


def render_hist_csv(h: Histogram, value_column: str) -> str:
    lines = [f"bin_lo,bin_hi,{value_column}"]
    for k in range(h.bins):
        lines.append(f"{_fmt(h.edges[k])},{_fmt(h.edges[k + 1])},{_fmt(h.counts[k])}")
    return "\n".join(lines) + "\n"


def render_clustering_diff_csv(report: AnalysisReport) -> str:
    lines = ["bin_lo,bin_hi,density_random,density_strategic,percent_difference"]
    hs = report.clustering_hist_strategic
    hb = report.clustering_hist_baseline
    for k in range(hs.bins):
        pd = report.clustering_percent_difference[k]
        pd_s = "undefined" if pd is None else _fmt(pd)
        lines.append(
            f"{_fmt(hs.edges[k])},{_fmt(hs.edges[k + 1])},"
            f"{_fmt(hb.counts[k])},{_fmt(hs.counts[k])},{pd_s}"
        )
    return "\n".join(lines) + "\n"


def render_diameter_csv(report: AnalysisReport) -> str:
    lines = ["diameter,count,mean_prestige,stddev_prestige"]
    for d, cnt, mean, std in report.diameter_table:
        lines.append(f"{d},{cnt},{_fmt(mean)},{_fmt(std)}")
    return "\n".join(lines) + "\n"


def render_modes_csv(report: AnalysisReport) -> str:
    lines = ["histogram,mode_center,mode_density"]
    for label, modes in (("delta", report.delta_modes), ("epsilon", report.epsilon_modes)):
        for center, density in modes:
            lines.append(f"{label},{_fmt(center)},{_fmt(density)}")
    return "\n".join(lines) + "\n"


CSV_RENDERERS = {
    "give_rates.csv": render_give_rates_csv,
    "regressions.csv": render_regressions_csv,
    "delta_hist.csv": lambda r: render_hist_csv(r.delta_hist, "density_strategic"),
    "epsilon_hist.csv": lambda r: render_hist_csv(r.epsilon_hist, "density_strategic"),
    "clustering_diff.csv": render_clustering_diff_csv,
    "diameter_prestige.csv": render_diameter_csv,
    "modes.csv": render_modes_csv,
}
