"""Command-line interface: ``bang discover|simulate|benchmark|oracle-suite``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import checks
from .algorithm import run_bang
from .benchmark import (PRESETS, BenchmarkSetting, records_to_csv, replicate_rng,
                        run_benchmark, run_oracle_suite, summarize)
from .config import DiscoveryConfig
from .graph import MixedGraph, random_bap, relabel, validate
from .independence import SampleBackend
from .named_graphs import NAMED
from .sem import DEFAULT_K, FAMILIES, UnsupportedOracle, draw_parameters, sample_data

log = logging.getLogger("bang")

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION = 0, 2, 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a header row plus numeric rows; raises CliError(2) on bad input."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}", EXIT_INPUT)
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise CliError(f"{path}: need a header and at least one data row", EXIT_INPUT)
    header, body = rows[0], rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise CliError(f"{path}: line {i} has {len(r)} fields, expected {len(header)}",
                           EXIT_INPUT)
    try:
        Y = np.array(body, dtype=float)
    except ValueError as e:
        raise CliError(f"{path}: non-numeric value ({e})", EXIT_INPUT)
    if not np.all(np.isfinite(Y)):
        raise CliError(f"{path}: non-finite values", EXIT_INPUT)
    return [h.strip() for h in header], Y


def write_csv(path, Y: np.ndarray, one_indexed: bool = False) -> None:
    k = 1 if one_indexed else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(f"y{j + k}" for j in range(Y.shape[1])) + "\n")
        for row in Y:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _dump(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_config_file(path) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise CliError(f"cannot read config {path}: {e}", EXIT_INPUT)


def _merge(args, file_cfg: dict, keys: dict) -> dict:
    """CLI flag (when given) > config file > default."""
    out = {}
    for key, (attr, default) in keys.items():
        val = getattr(args, attr, None)
        if val is None:
            val = file_cfg.get(key, default)
        out[key] = val
    return out


def _load_graph(path) -> MixedGraph:
    try:
        g = MixedGraph.from_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CliError(f"invalid graph file {path}: {e}", EXIT_INPUT)
    problems = validate(g)
    if problems:
        raise CliError(f"invalid graph file {path}: " + "; ".join(problems), EXIT_INPUT)
    return g


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, choices=(3, 4), help="moment order K")
    p.add_argument("--alpha", type=float, help="test level for the EL test")
    p.add_argument("--eta", type=float, help="threshold for the threshold test")
    p.add_argument("--test", choices=("el", "threshold"))
    p.add_argument("--max-degree", type=int, dest="max_degree", help="cap J on subset size")
    p.add_argument("--one-direction", action="store_true", default=None, dest="one_direction",
                   help="test only E(gamma_c^{K-1} gamma_v)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--one-indexed", action="store_true", default=False)
    p.add_argument("--config", help="JSON config file (CLI flags take precedence)")


def _discovery_config(args, file_cfg, mode="sample", default_k=3) -> DiscoveryConfig:
    m = _merge(args, file_cfg, {
        "K": ("k", default_k),
        "alpha": ("alpha", 0.01),
        "eta": ("eta", None),
        "test": ("test", "el"),
        "max_degree": ("max_degree", None),
        "seed": ("seed", None),
    })
    both = file_cfg.get("both_directions", True)
    if getattr(args, "one_direction", None):
        both = False
    try:
        return DiscoveryConfig(mode=mode, both_directions=both, **m)
    except ValueError as e:
        raise CliError(str(e), EXIT_INPUT)


def cmd_discover(args) -> int:
    file_cfg = _load_config_file(args.config)
    cfg = _discovery_config(args, file_cfg)
    header, Y = read_csv(args.input)
    n, p = Y.shape
    if n <= p:
        raise CliError(f"need more observations than variables (n={n}, p={p})", EXIT_PRECONDITION)
    sd = Y.std(axis=0)
    if np.any(sd == 0):
        cols = [header[j] for j in np.flatnonzero(sd == 0)]
        raise CliError(f"degenerate data: constant column(s) {cols}", EXIT_PRECONDITION)
    res = run_bang(SampleBackend(Y), cfg)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    g = res.graph
    doc = g.to_dict(args.one_indexed)
    doc["labels"] = header
    _dump(out / "graph.json", doc)
    (out / "graph.dot").write_text(g.to_dot(args.one_indexed), encoding="utf-8")
    with open(out / "audit.jsonl", "w", encoding="utf-8") as fh:
        for rec in res.audit:
            fh.write(json.dumps(rec) + "\n")
    _dump(out / "config.json", cfg.to_dict())
    print(f"{len(g.directed)} directed, {len(g.bidirected)} bidirected edges; "
          f"{res.test_count} tests; written to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    file_cfg = _load_config_file(args.config)
    seed = args.seed if args.seed is not None else file_cfg.get("seed", 0)
    family = args.family or file_cfg.get("family", "gamma")
    n = args.n or file_cfg.get("n", 10000)
    rng = replicate_rng(seed, 0)
    if args.graph:
        g = _load_graph(args.graph)
    elif args.named:
        g = NAMED[args.named]
    else:
        d, b = PRESETS[args.preset]
        g = random_bap(args.p, d, b, args.ancestral, rng)
    if args.shuffle_labels:
        g = relabel(g, rng.permutation(g.p))
    params = draw_parameters(g, signed=not args.positive, rng=rng)
    Y = sample_data(params, family, n, rng)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "data.csv", Y, args.one_indexed)
    _dump(out / "truth.json", g.to_dict(args.one_indexed))
    _dump(out / "params.json", params.to_dict())
    _dump(out / "config.json", {"seed": seed, "family": family, "n": n,
                                "signed": not args.positive, "shuffle_labels": args.shuffle_labels})
    print(f"simulated n={n} p={g.p} ({family}) into {out}")
    return EXIT_OK


def _setting(args, file_cfg) -> BenchmarkSetting:
    preset = args.preset or file_cfg.get("name", "sparse")
    if preset not in PRESETS:
        raise CliError(f"unknown preset {preset!r}", EXIT_INPUT)
    family = args.family or file_cfg.get("family", "gamma")
    m = _merge(args, file_cfg, {
        "K": ("k", DEFAULT_K[family]),
        "alpha": ("alpha", 0.01),
        "eta": ("eta", None),
        "test": ("test", "el"),
        "max_degree": ("max_degree", None),
        "seed": ("seed", 0),
        "reps": ("reps", 200),
        "p": ("p", 6),
    })
    n_grid = tuple(args.n_grid) if args.n_grid else tuple(file_cfg.get("n_grid", (5000, 25000, 100000)))
    return BenchmarkSetting.preset(
        preset, family=family, n_grid=n_grid,
        ancestral=args.ancestral or file_cfg.get("ancestral", False),
        signed=not (args.positive or not file_cfg.get("signed", True)),
        **m,
    )


def cmd_benchmark(args) -> int:
    file_cfg = _load_config_file(args.config)
    setting = _setting(args, file_cfg)
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    records = run_benchmark(setting, workers)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(records_to_csv(records), encoding="utf-8")
    summary = {"setting": setting.setting_id, "by_n": summarize(records)}
    _dump(out / "summary.json", summary)
    _dump(out / "config.json", {k: (list(v) if isinstance(v, tuple) else v)
                                for k, v in setting.__dict__.items()})
    for n, row in summary["by_n"].items():
        print(f"n={n}: exact {row['exact_recovery']:.3f}  pairwise {row['pairwise_accuracy']:.3f}  "
              f"tests {row['mean_test_count']:.1f}")
    return EXIT_OK


def cmd_oracle_suite(args) -> int:
    file_cfg = _load_config_file(args.config)
    if (args.family or file_cfg.get("family")) == "lognormal":
        raise CliError("lognormal errors have no population oracle", EXIT_PRECONDITION)
    setting = _setting(args, file_cfg)
    graph = None
    if args.graph:
        graph = _load_graph(args.graph)
    elif args.named:
        graph = NAMED[args.named]
    if graph is not None:
        setting.p = graph.p
    try:
        report = run_oracle_suite(setting, graph)
    except UnsupportedOracle as e:
        raise CliError(str(e), EXIT_PRECONDITION)
    doc = report.as_dict(setting.p)
    if args.checks:
        rng = replicate_rng(setting.seed, 10**6)
        doc["checks"] = {
            "debiased_effect_max_error": max(checks.debiased_effect_instance(rng)
                                             for _ in range(args.checks)),
            "sufficiency_max_moment": max(checks.sufficiency_instance(rng, K=setting.moment_order,
                                                                      family=setting.family)
                                          for _ in range(args.checks)),
        }
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _dump(out / "oracle_report.json", doc)
    print(f"{setting.setting_id}: exact recovery {report.recovered}/{report.reps} "
          f"({report.rate:.3f})")
    if report.failing_seeds:
        print(f"failing replicates (seed={setting.seed}): {report.failing_seeds}")
    print(f"tests per run: mean {doc['mean_test_count']:.1f}, max {doc['max_test_count']}")
    if doc["fitted_budget_constant"] is not None:
        print(f"fitted c in count <= c p^(J+3): {doc['fitted_budget_constant']:.3g}")
    if "checks" in doc:
        for k, v in doc["checks"].items():
            print(f"{k}: {v:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bang", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="estimate a graph from CSV data")
    p.add_argument("input")
    _shared(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("simulate", help="simulate data from a graph")
    p.add_argument("--graph", help="graph JSON file")
    p.add_argument("--named", choices=sorted(NAMED))
    p.add_argument("--preset", choices=sorted(PRESETS), default="sparse")
    p.add_argument("--p", type=int, default=6)
    p.add_argument("--ancestral", action="store_true")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--positive", action="store_true", help="positive edge weights")
    p.add_argument("--shuffle-labels", action="store_true", dest="shuffle_labels")
    _shared(p)
    p.set_defaults(func=cmd_simulate)

    for name, func, help_ in (("benchmark", cmd_benchmark, "replicate simulation study"),
                              ("oracle-suite", cmd_oracle_suite, "population-moment recovery")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--p", type=int)
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--reps", type=int)
        p.add_argument("--ancestral", action="store_true")
        p.add_argument("--positive", action="store_true")
        p.add_argument("--n-grid", type=int, nargs="+", dest="n_grid")
        if name == "oracle-suite":
            p.add_argument("--graph", help="fixed graph JSON file")
            p.add_argument("--named", choices=sorted(NAMED), help="fixed named graph")
            p.add_argument("--checks", type=int, default=0,
                           help="also run this many random population-identity checks")
        _shared(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
