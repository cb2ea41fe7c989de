"""Command-line front end: generate | solve | experiment | analyze.

Exit codes: 0 success, 1 usage or input error, 2 numerical/convergence
failure.  All primary outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .ensemble import (
    GRAPH_SUBSEED,
    RATES_SUBSEED,
    EnsembleSummary,
    ExperimentConfig,
    iter_samples,
    run_ensemble,
)
from .errors import ConvergenceHealthError, InvalidParameterError, LikesimError
from .fileio import atomic_write_text
from .graph import Graph, generate_ba
from .likecentrality import RateMatrix, prestige, sample_rates, solve_lc
from .rng import derive_sample_seed
from .stats import CSV_RENDERERS, AnalyzeOptions, analyze
from .svg import FIGURES


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise _UsageError(f"{message}\n{self.format_usage()}")


# Config file keys and their types; flags override file values.
_CONFIG_SCHEMA = {
    "count": int,
    "n": int,
    "m": int,
    "base_seed": int,
    "tol": float,
    "max_iters": int,
    "damping": float,
    "quantile": float,
    "workers": int,
    "out_dir": str,
    "bins": int,
    "emit_svg": bool,
    "baseline_mode": str,
}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise InvalidParameterError(f"not a boolean: {text!r}")


def parse_config_file(path: str) -> dict:
    """Flat `key = value` file; '#' starts a comment."""
    values: dict = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameterError(
                    f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}"
                )
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_SCHEMA:
                raise InvalidParameterError(f"{path}:{lineno}: unknown key {key!r}")
            kind = _CONFIG_SCHEMA[key]
            try:
                values[key] = _parse_bool(value) if kind is bool else kind(value)
            except ValueError:
                raise InvalidParameterError(
                    f"{path}:{lineno}: bad value for {key}: {value!r}"
                ) from None
    return values


def _generate_record(n: int, m: int, base_seed: int, sample_id: int) -> str:
    seed = derive_sample_seed(base_seed, sample_id)
    g = generate_ba(n, m, derive_sample_seed(seed, GRAPH_SUBSEED))
    rates = sample_rates(g, derive_sample_seed(seed, RATES_SUBSEED))
    edges_s = ",".join(f"[{i},{j}]" for i, j in g.edges)
    rates_s = ",".join(
        f"[{i},{j},{format(v, '.17g')}]" for (i, j), v in rates.sorted_items()
    )
    return (
        f'{{"id":{sample_id},"seed":"{seed}","n":{n},'
        f'"edges":[{edges_s}],"rates":[{rates_s}]}}'
    )


def cmd_generate(args) -> int:
    if args.n <= args.m:
        raise InvalidParameterError(f"need n > m, got n={args.n}, m={args.m}")
    if args.count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {args.count}")
    lines = [
        _generate_record(args.n, args.m, args.seed, sample_id)
        for sample_id in range(args.count)
    ]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _load_network_file(path: str) -> tuple[Graph, RateMatrix]:
    with open(path, encoding="utf-8") as handle:
        obj = json.load(handle)
    if not isinstance(obj, dict) or "edges" not in obj or "rates" not in obj:
        raise InvalidParameterError("input must be an object with 'edges' and 'rates'")
    edges = [tuple(e) for e in obj["edges"]]
    n = obj.get("n") or (max(max(e) for e in edges) + 1)
    g = Graph.from_edges(int(n), edges)
    entries = {}
    for item in obj["rates"]:
        i, j, val = item
        entries[(int(i), int(j))] = float(val)
    rates = RateMatrix(n=g.n, entries=entries)
    rates.validate_against(g)
    return g, rates


def cmd_solve(args) -> int:
    try:
        g, rates = _load_network_file(args.input)
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return 1
    lc = solve_lc(
        g, rates, tol=args.tol, max_iters=args.max_iters, damping=args.damping
    )
    out = {
        "lc": [float(v) for v in lc.values],
        "prestige": prestige(lc),
        "converged": lc.converged,
        "iterations": lc.iterations,
        "residual_sup": lc.residual_sup,
    }
    print(json.dumps(out))
    if not lc.converged:
        print(
            f"error: no convergence after {lc.iterations} iterations; "
            f"residual_sup={lc.residual_sup:.3e}",
            file=sys.stderr,
        )
        return 2
    return 0


def _experiment_config(args) -> tuple[ExperimentConfig, str]:
    values = dict(parse_config_file(args.config)) if args.config else {}
    overrides = {
        "count": args.count,
        "n": args.n,
        "m": args.m,
        "base_seed": args.seed,
        "tol": args.tol,
        "max_iters": args.max_iters,
        "damping": args.damping,
        "quantile": args.quantile,
        "workers": args.workers,
        "out_dir": args.out_dir,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    out_dir = values.pop("out_dir", None)
    if out_dir is None:
        raise _UsageError("an output directory is required (--out-dir or config out_dir)")
    if "count" not in values:
        raise _UsageError("a sample count is required (--count or config count)")
    values.pop("bins", None)
    values.pop("emit_svg", None)
    values.pop("baseline_mode", None)
    return ExperimentConfig(**values), str(out_dir)


def _summary_to_dict(summary: EnsembleSummary) -> dict:
    return {
        "count": summary.count,
        "mu": summary.mu,
        "sigma2": summary.sigma2,
        "quantile": summary.quantile,
        "threshold": summary.threshold,
        "strategic_ids": list(summary.strategic_ids),
        "convergence_failures": summary.convergence_failures,
    }


def cmd_experiment(args) -> int:
    cfg, out_dir = _experiment_config(args)
    os.makedirs(out_dir, exist_ok=True)
    samples_path = os.path.join(out_dir, "samples.jsonl")
    summary = run_ensemble(cfg, samples_path=samples_path)
    atomic_write_text(
        os.path.join(out_dir, "summary.json"),
        json.dumps(_summary_to_dict(summary)) + "\n",
    )
    print(
        f"count={summary.count} mu={summary.mu:.6f} "
        f"sigma2={summary.sigma2:.6f} failures={summary.convergence_failures}"
    )
    return 0


def _read_summary(path: str) -> EnsembleSummary:
    with open(path, encoding="utf-8") as handle:
        obj = json.load(handle)
    return EnsembleSummary(
        count=int(obj["count"]),
        mu=float(obj["mu"]),
        sigma2=float(obj["sigma2"]),
        quantile=float(obj["quantile"]),
        threshold=float(obj["threshold"]),
        strategic_ids=tuple(int(i) for i in obj["strategic_ids"]),
        convergence_failures=int(obj["convergence_failures"]),
    )


def cmd_analyze(args) -> int:
    samples_path = os.path.join(args.in_dir, "samples.jsonl")
    summary_path = os.path.join(args.in_dir, "summary.json")
    for path in (samples_path, summary_path):
        if not os.path.exists(path):
            print(f"error: missing input {path}", file=sys.stderr)
            return 1
    summary = _read_summary(summary_path)
    options = AnalyzeOptions(bins=args.bins, baseline_mode=args.baseline_mode)
    report = analyze(iter_samples(samples_path), summary, options)
    out_dir = args.out_dir or args.in_dir
    os.makedirs(out_dir, exist_ok=True)
    for name, renderer in CSV_RENDERERS.items():
        atomic_write_text(os.path.join(out_dir, name), renderer(report))
    if args.emit_svg:
        for name, builder in FIGURES.items():
            atomic_write_text(os.path.join(out_dir, name), builder(report))
    print(f"give_rate_ratio={report.give_mean_ratio:.4f}")
    modes_s = " ".join(f"({c:.4f},{d:.4f})" for c, d in report.epsilon_modes)
    print(f"epsilon_modes={modes_s or '(none)'}")
    print(
        f"agent_advantage_fraction={report.agent_advantage_fraction:.4f} "
        f"edge_negative_epsilon_fraction={report.edge_negative_epsilon_fraction:.4f}"
    )
    for d, cnt, mean, std in report.diameter_table:
        print(f"diameter={d} count={cnt} mean_prestige={mean:.4f} stddev={std:.4f}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="likesim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write unsolved graphs-with-rates JSONL")
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_solve = sub.add_parser("solve", help="solve one network from a JSON file")
    p_solve.add_argument("--input", required=True)
    p_solve.add_argument("--tol", type=float, default=1e-10)
    p_solve.add_argument("--max-iters", type=int, default=10_000)
    p_solve.add_argument("--damping", type=float, default=1.0)
    p_solve.set_defaults(func=cmd_solve)

    p_exp = sub.add_parser("experiment", help="run a seeded ensemble")
    p_exp.add_argument("--config", help="flat key = value settings file")
    p_exp.add_argument("--count", type=int)
    p_exp.add_argument("--n", type=int)
    p_exp.add_argument("--m", type=int)
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--tol", type=float)
    p_exp.add_argument("--max-iters", type=int)
    p_exp.add_argument("--damping", type=float)
    p_exp.add_argument("--quantile", type=float)
    p_exp.add_argument("--workers", type=int)
    p_exp.add_argument("--out-dir")
    p_exp.set_defaults(func=cmd_experiment)

    p_an = sub.add_parser("analyze", help="emit CSV/SVG reports from a persisted run")
    p_an.add_argument("--in-dir", required=True)
    p_an.add_argument("--out-dir", help="defaults to --in-dir")
    p_an.add_argument("--bins", type=int, default=60)
    p_an.add_argument("--emit-svg", action="store_true")
    p_an.add_argument(
        "--baseline-mode", choices=("full", "bottom"), default="full"
    )
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceHealthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LikesimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
