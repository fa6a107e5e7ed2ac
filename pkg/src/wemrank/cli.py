"""Command-line front end.

    wemrank rank        INPUT... [--algo wem,bt,...]
    wemrank robustness  INPUT... [--algo all]
    wemrank sir-eval    INPUT... [--runs 1000 --beta-multiplier 10 --seed 0]

Every option can also be set through a ``WEMRANK_<OPTION>`` environment
variable (``--beta-multiplier`` -> ``WEMRANK_BETA_MULTIPLIER``).  Flags beat
environment variables, which beat built-in defaults.  ``bundled:lesmis``
names the Les Miserables network shipped with the package.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Callable, Sequence

from . import baselines, epidemic, evaluation
from .graph import (
    GraphError,
    WeightedGraph,
    graph_stats,
    is_connected,
    largest_connected_component,
    read_edge_list,
)
from .ranking import ImportanceRanking, format_float
from .wem import CorrelationMode, ProbabilityDomainError, wem_rank_all

log = logging.getLogger("wemrank")

ALGORITHMS = ("wem", "bt", "cl", "ec", "wc", "hi")
ENV_PREFIX = "WEMRANK_"
BUNDLED = {"lesmis": "lesmis.edges"}

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    inputs: list[str]
    mode: CorrelationMode = CorrelationMode.POSITIVE
    algorithms: tuple[str, ...] = ALGORITHMS
    runs: int = 1000
    threshold_multiplier: float = 10.0
    recovery_prob: float = 1.0
    rng_seed: int = 0
    out_dir: Path = field(default_factory=lambda: Path("."))
    fmt: str = "csv"
    merge_policy: str = "error"
    use_lcc: bool = True
    workers: int = 1
    tau_a: bool = False
    dump_runs: bool = False

    def __post_init__(self):
        if not self.algorithms:
            raise UsageError("at least one algorithm must be selected")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise UsageError(f"unknown algorithm(s): {', '.join(sorted(unknown))}")
        if self.runs < 1:
            raise UsageError("--runs must be at least 1")
        if not self.threshold_multiplier > 0:
            raise UsageError("--beta-multiplier must be positive")
        if not 0 < self.recovery_prob <= 1:
            raise UsageError("--recovery-prob must lie in (0, 1]")
        if not 0 <= self.rng_seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.fmt not in ("csv", "json"):
            raise UsageError("--format must be csv or json")


def parse_algorithms(text: str) -> tuple[str, ...]:
    names = [a.strip().lower() for a in text.split(",") if a.strip()]
    if "all" in names:
        return ALGORITHMS
    # keep the canonical order so output is independent of how flags were typed
    return tuple(a for a in ALGORITHMS if a in names) + tuple(sorted(set(names) - set(ALGORITHMS)))


def resolve_input(source: str) -> Path:
    if source.startswith("bundled:"):
        name = source.split(":", 1)[1]
        if name not in BUNDLED:
            raise UsageError(f"no such input: unknown bundled dataset {name!r}")
        return Path(str(files("wemrank") / "data" / BUNDLED[name]))
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"no such input: {source}")
    return path


def dataset_name(source: str) -> str:
    return source.split(":", 1)[1] if source.startswith("bundled:") else Path(source).stem


def load_graph(source: str, cfg: RunConfig) -> WeightedGraph:
    path = resolve_input(source)
    try:
        g = read_edge_list(path, merge_policy=cfg.merge_policy)
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc}") from exc
    except GraphError as exc:
        raise UsageError(f"{source}: {exc}") from exc
    if cfg.use_lcc:
        g = largest_connected_component(g)
    return g


def run_algorithm(name: str, g: WeightedGraph, cfg: RunConfig) -> ImportanceRanking:
    algos: dict[str, Callable[[], ImportanceRanking]] = {
        "wem": lambda: wem_rank_all(g, cfg.mode, cfg.workers),
        "bt": lambda: baselines.betweenness(g, cfg.workers),
        "cl": lambda: baselines.closeness(g, cfg.workers),
        "ec": lambda: baselines.eigenvector(g),
        "wc": lambda: baselines.w_core(g),
        "hi": lambda: baselines.weighted_h_index(g),
    }
    return algos[name]()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def stats_text(g: WeightedGraph, fmt: str) -> str:
    st = graph_stats(g).as_dict()
    if fmt == "json":
        return _json(st)
    return _csv([list(st), [format_float(v) if isinstance(v, float) else v for v in st.values()]])


def ranking_text(r: ImportanceRanking, g: WeightedGraph, fmt: str, score_column: str = "score") -> str:
    if fmt == "json":
        return r.to_json(g.node_labels)
    return r.to_csv(g.node_labels, score_column)


def cmd_rank(cfg: RunConfig) -> list[Path]:
    written = []
    for source in cfg.inputs:
        g = load_graph(source, cfg)
        name = dataset_name(source)
        p = cfg.out_dir / f"{name}_stats.{cfg.fmt}"
        _write(p, stats_text(g, cfg.fmt))
        written.append(p)
        for algo in cfg.algorithms:
            r = run_algorithm(algo, g, cfg)
            p = cfg.out_dir / f"{name}_{algo}_ranking.{cfg.fmt}"
            _write(p, ranking_text(r, g, cfg.fmt))
            written.append(p)
    return written


def cmd_robustness(cfg: RunConfig) -> dict[str, dict[str, float]]:
    summary: dict[str, dict[str, float]] = {}
    for source in cfg.inputs:
        g = load_graph(source, cfg)
        if not is_connected(g):
            raise GraphError("robustness needs a connected graph; drop --no-lcc")
        name = dataset_name(source)
        row = {}
        for algo in cfg.algorithms:
            curve = evaluation.connectivity_curve(g, run_algorithm(algo, g, cfg))
            row[algo] = curve.R
            base = cfg.out_dir / f"{name}_{algo}_robustness"
            if cfg.fmt == "json":
                steps = [
                    {"step": k, "removed_node": g.node_labels[v], "r": r}
                    for k, (v, r) in enumerate(zip(curve.removed, curve.r), start=1)
                ]
                _write(base.with_suffix(".json"), _json({"algorithm": algo, "R": curve.R, "steps": steps}))
            else:
                _write(base.with_suffix(".csv"), curve.to_csv(g.node_labels))
        summary[name] = row
    if cfg.fmt == "json":
        _write(cfg.out_dir / "robustness_summary.json", _json({"R": summary}))
    else:
        rows = [["dataset", *cfg.algorithms]]
        rows += [[ds, *(format_float(v[a]) for a in cfg.algorithms)] for ds, v in summary.items()]
        _write(cfg.out_dir / "robustness_summary.csv", _csv(rows))
    return summary


def cmd_sir_eval(cfg: RunConfig) -> dict[str, dict[str, dict[str, float]]]:
    measures = {"tau_b": evaluation.kendall_tau_b}
    if cfg.tau_a:
        measures["tau_a"] = evaluation.kendall_tau_a
    report: dict[str, dict[str, dict[str, float]]] = {m: {} for m in measures}
    for source in cfg.inputs:
        g = load_graph(source, cfg)
        name = dataset_name(source)
        params = epidemic.SirParams.from_threshold(
            graph_stats(g),
            threshold_multiplier=cfg.threshold_multiplier,
            recovery_prob=cfg.recovery_prob,
            runs=cfg.runs,
            rng_seed=cfg.rng_seed,
        )
        log.info("%s: beta = %s", name, params.beta)
        outcomes = epidemic.sir_outcomes(g, params, cfg.workers)
        truth = epidemic.sir_ground_truth(g, params, outcomes=outcomes)
        _write(
            cfg.out_dir / f"{name}_wsir_scores.{cfg.fmt}",
            ranking_text(truth, g, cfg.fmt, score_column="mean_outbreak"),
        )
        if cfg.dump_runs:
            rows = [["node", "run", "size"]]
            for o in outcomes:
                rows += [[g.node_labels[o.seed_node], r, int(s)] for r, s in enumerate(o.outbreak_sizes)]
            _write(cfg.out_dir / f"{name}_wsir_runs.csv", _csv(rows))
        y = truth.scores_by_node()
        for algo in cfg.algorithms:
            x = run_algorithm(algo, g, cfg).scores_by_node()
            for m, fn in measures.items():
                report[m].setdefault(name, {})[algo] = fn(x, y)
    for m, table in report.items():
        table["Average value"] = {
            a: sum(table[ds][a] for ds in table) / len(table) for a in cfg.algorithms
        }
    if cfg.fmt == "json":
        _write(cfg.out_dir / "correlation_report.json", _json(report))
    else:
        for m, table in report.items():
            rows = [["dataset", *cfg.algorithms]]
            rows += [[ds, *(format_float(v[a]) for a in cfg.algorithms)] for ds, v in table.items()]
            _write(cfg.out_dir / f"correlation_{m}.csv", _csv(rows))
    return report


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name, default)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("inputs", nargs="+", metavar="INPUT", help="edge-list file(s) or bundled:lesmis")
    common.add_argument("--algo", default=_env("ALGO", "all"), help="comma-separated subset of wem,bt,cl,ec,wc,hi or 'all'")
    common.add_argument("--mode", default=_env("MODE", "positive"), choices=[m.value for m in CorrelationMode])
    common.add_argument("--runs", type=int, default=int(_env("RUNS", 1000)))
    common.add_argument("--beta-multiplier", type=float, default=float(_env("BETA_MULTIPLIER", 10.0)))
    common.add_argument("--recovery-prob", type=float, default=float(_env("RECOVERY_PROB", 1.0)))
    common.add_argument("--seed", type=int, default=int(_env("SEED", 0)))
    common.add_argument("--format", default=_env("FORMAT", "csv"), choices=["csv", "json"])
    common.add_argument("--out-dir", default=_env("OUT_DIR", "."))
    common.add_argument("--merge-policy", default=_env("MERGE_POLICY", "error"), choices=["error", "sum", "max", "first"])
    common.add_argument("--no-lcc", action="store_true", default=_env("NO_LCC", "") not in ("", "0", "false"))
    common.add_argument("--workers", type=int, default=int(_env("WORKERS", 1)))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wemrank", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rank", parents=[common], help="write one ranking file per algorithm plus graph stats")
    sub.add_parser("robustness", parents=[common], help="dismantle the graph in ranking order and report R")
    sir = sub.add_parser("sir-eval", parents=[common], help="Kendall correlation of each ranking with weighted SIR spreading")
    sir.add_argument("--tau-a", action="store_true", help="also report the tie-free tau-a variant")
    sir.add_argument("--dump-runs", action="store_true", help="write every run's outbreak size")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        inputs=list(args.inputs),
        mode=CorrelationMode(args.mode),
        algorithms=parse_algorithms(args.algo),
        runs=args.runs,
        threshold_multiplier=args.beta_multiplier,
        recovery_prob=args.recovery_prob,
        rng_seed=args.seed,
        out_dir=Path(args.out_dir),
        fmt=args.format,
        merge_policy=args.merge_policy,
        use_lcc=not args.no_lcc,
        workers=args.workers,
        tau_a=getattr(args, "tau_a", False),
        dump_runs=getattr(args, "dump_runs", False),
    )


COMMANDS = {"rank": cmd_rank, "robustness": cmd_robustness, "sir-eval": cmd_sir_eval}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ValueError as exc:  # malformed environment override
        print(f"wemrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"wemrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"wemrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, ProbabilityDomainError, baselines.ConvergenceError, epidemic.DegenerateThresholdError,
            evaluation.UndefinedCorrelationError, ValueError) as exc:
        print(f"wemrank: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
