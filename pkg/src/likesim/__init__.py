"""likesim: self-consistent like centrality on random social graphs.

A small laboratory for the quadratic "like centrality" system: generate
preferential-attachment friendship graphs, assign directed like rates,
solve each network's self-consistent centrality, run large seeded
ensembles, select prestige-optimal networks, and compare the strategic
population against the random baseline.
"""

from .ensemble import (
    EnsembleSummary,
    ExperimentConfig,
    NetworkSample,
    gaussian_mle,
    iter_samples,
    load_samples,
    run_ensemble,
    sample_to_line,
    save_samples,
    select_strategic,
)
from .errors import (
    ConvergenceHealthError,
    DegenerateNodeError,
    DisconnectedGraphError,
    InsufficientDataError,
    InvalidParameterError,
    InvariantViolationError,
    LikesimError,
    MalformedRecordError,
    MismatchedEdgesError,
    MissingSelectionError,
    PowerIterationError,
)
from .graph import (
    CentralityReport,
    Graph,
    betweenness,
    centrality_report,
    closeness,
    degree,
    diameter,
    eigenvector_centrality,
    generate_ba,
    is_connected,
    local_clustering,
    mean_clustering,
)
from .likecentrality import (
    DeviationStats,
    LikeCentralityVector,
    RateMatrix,
    deviations,
    give_rate,
    prestige,
    receive_stats,
    residual,
    sample_rates,
    solve_lc,
)
from .rng import SplitMix64, derive_sample_seed, mix64
from .stats import (
    AnalysisReport,
    AnalyzeOptions,
    Histogram,
    RegressionResult,
    analyze,
    binned_mean,
    detect_modes,
    histogram,
    ols_fit,
    percent_difference,
)

__version__ = "0.1.0"
