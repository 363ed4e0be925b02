"""``betrun`` command line: solve, grid, bench, compare, luby, validate.

Settings come from (lowest to highest priority) built-in defaults, a flat
``key = value`` config file (``--config``), ``BETRUN_<KEY>`` environment
variables and command-line flags. Keys are the long flag names with dashes
replaced by underscores.

Exit status: 0 success, 2 usage or configuration error (including infeasible
strategies), 3 no feasible result.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .experiment import (
    BenchPlan,
    Budget,
    ConfigError,
    best_cell,
    format_grid,
    grid_matrices,
    grid_strategies,
    run_bench,
)
from .orchestrator import (
    DEFAULT_QUALITY_PATTERN,
    AnytimeSolver,
    ExternalSolver,
    NoFeasibleRun,
    run_bet_and_run,
)
from .seeding import MASK64
from .stats import ExperimentTable, compare_strategies, rank_strategies
from .strategy import Strategy, StrategyError, catalog, format_percent, luby, luby_prefix_sum, parse_percent

log = logging.getLogger("betrun")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_RESULT = 3
ENV_PREFIX = "BETRUN_"

GRID_K_DEFAULT = "1-40"
GRID_X_DEFAULT = "0.25,1,2.5,4,10,25,100"


def _int(v: Any) -> int:
    return int(str(v).strip(), 0)


def _seed(v: Any) -> int:
    s = _int(v)
    if not 0 <= s <= MASK64:
        raise ValueError("master seed must be a 64-bit unsigned integer")
    return s


def _list(v: Any) -> list[str]:
    if isinstance(v, (list, tuple)):
        out: list[str] = []
        for item in v:
            out += _list(item)
        return out
    return [p for p in str(v).replace(",", " ").split() if p]


def _bool(v: Any) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# key -> (converter, default)
SETTINGS: dict[str, tuple[Callable[[Any], Any], Any]] = {
    "problem": (str, "tsp"),
    "instance": (_list, []),
    "graph_format": (str, None),
    "strategy": (str, None),
    "strategies": (str, "catalog"),
    "budget": (str, None),
    "repetitions": (_int, 100),
    "master_seed": (_seed, 1),
    "time_mode": (str, "virtual"),
    "workers": (_int, 1),
    "backend": (str, None),
    "neighbors": (_int, 10),
    "kick_window": (_int, 50),
    "bms": (_int, 50),
    "external_command": (str, None),
    "quality_pattern": (str, DEFAULT_QUALITY_PATTERN),
    "init_cost_us": (_int, None),
    "output": (str, None),
    "ranks": (str, None),
    "normalized": (str, None),
    "cells": (str, None),
    "solution": (str, None),
    "k_values": (str, GRID_K_DEFAULT),
    "x_values": (str, GRID_X_DEFAULT),
    "candidate": (str, "restarts:40:1"),
    "baseline": (str, "restarts:1:100"),
    "table": (str, None),
    "alpha": (float, 0.05),
    "no_run": (_bool, False),
}


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Flat ``key = value`` lines; lines starting with ``#`` are comments.

    Keys may use dashes or underscores. Values run to the end of the line.
    """
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in SETTINGS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value.strip()
    return out


def resolve_settings(flags: dict[str, Any], config_path: str | None,
                     environ: dict[str, str] | None = None) -> dict[str, Any]:
    env = os.environ if environ is None else environ
    merged: dict[str, Any] = {}
    if config_path:
        try:
            merged.update(read_config_file(config_path))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    for key in SETTINGS:
        v = env.get(ENV_PREFIX + key.upper())
        if v is not None and v != "":
            merged[key] = v
    for key, v in flags.items():
        if v is not None and key in SETTINGS:
            merged[key] = v
    out = {}
    for key, (conv, default) in SETTINGS.items():
        if key in merged:
            try:
                out[key] = conv(merged[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {merged[key]!r} ({exc})") from None
        else:
            out[key] = default
    if out["problem"] not in ("tsp", "mvc", "external"):
        raise ConfigError(f"unknown problem {out['problem']!r}")
    if out["time_mode"] not in ("virtual", "wallclock"):
        raise ConfigError(f"unknown time mode {out['time_mode']!r}")
    if out["workers"] < 1:
        raise ConfigError("workers must be positive")
    if out["repetitions"] < 1:
        raise ConfigError("repetitions must be positive")
    return out


# -- problem plumbing ------------------------------------------------------

def make_solver(s: dict[str, Any]) -> AnytimeSolver:
    problem = s["problem"]
    if problem == "external":
        if not s["external_command"]:
            raise ConfigError("external problems need external_command")
        if s["time_mode"] != "wallclock":
            raise ConfigError("external solvers run in wall-clock mode only (time_mode = wallclock)")
        return ExternalSolver(s["external_command"], s["quality_pattern"], s["init_cost_us"])
    if problem == "tsp":
        from .tsp import TspSolver

        return TspSolver(s["time_mode"], neighbors=s["neighbors"], kick_window=s["kick_window"],
                         backend=s["backend"])
    from .mvc import MvcSolver

    return MvcSolver(s["time_mode"], bms=s["bms"], backend=s["backend"])


def load_instance(problem: str, path: str, graph_format: str | None = None) -> tuple[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"instance file not found: {path}")
    if problem == "tsp":
        from .tsp import load_tsplib

        inst = load_tsplib(p)
        return p.stem, inst
    if problem == "mvc":
        from .mvc import load_graph

        return p.stem, load_graph(p, graph_format)
    return p.stem, str(p)


def load_instances(s: dict[str, Any]) -> list[tuple[str, Any]]:
    if not s["instance"]:
        raise ConfigError("no instance given (--instance)")
    out = [load_instance(s["problem"], p, s["graph_format"]) for p in s["instance"]]
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ConfigError("instance file names must have distinct stems")
    return out


def parse_strategies(spec: str) -> list[Strategy]:
    out: list[Strategy] = []
    for item in _list(spec):
        if item == "catalog":
            out += list(catalog().values())
        else:
            out.append(Strategy.parse(item))
    seen: dict[str, Strategy] = {}
    for st in out:
        seen.setdefault(str(st), st)
    return list(seen.values())


def parse_budgets(spec: str | None) -> list[Budget]:
    if not spec:
        raise ConfigError("no budget given (--budget)")
    return [Budget.parse(b) for b in _list(spec)]


def parse_k_values(spec: str) -> list[int]:
    ks: list[int] = []
    for part in _list(spec):
        if "-" in part:
            lo, hi = part.split("-", 1)
            ks += list(range(int(lo), int(hi) + 1))
        else:
            ks.append(int(part))
    if not ks or min(ks) < 1:
        raise ConfigError("k values must be positive")
    return sorted(set(ks))


def parse_x_values(spec: str) -> list[Fraction]:
    try:
        xs = sorted({parse_percent(p) for p in _list(spec)})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not xs:
        raise ConfigError("no x values")
    return xs


def _output_paths(base: str | None, budgets: Sequence[Budget], default: str) -> list[Path]:
    base = base or default
    if len(budgets) == 1:
        return [Path(base.replace("{budget}", str(budgets[0])))]
    if "{budget}" in base:
        return [Path(base.replace("{budget}", str(b))) for b in budgets]
    p = Path(base)
    return [p.with_name(f"{p.stem}_{b}{p.suffix or '.csv'}") for b in budgets]


def _with_suffix(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix or '.csv'}")


def _progress(enabled: bool) -> Callable[[int, int], None] | None:
    if not enabled:
        return None
    step = [0]

    def show(done: int, total: int) -> None:
        pct = done * 100 // total
        if pct >= step[0] or done == total:
            print(f"  {done}/{total} cells", file=sys.stderr)
            step[0] = pct + 10

    return show


# -- commands ----------------------------------------------------------------

def cmd_solve(s: dict[str, Any], out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if not s["strategy"]:
        raise ConfigError("no strategy given (--strategy)")
    strategy = Strategy.parse(s["strategy"])
    solver = make_solver(s)
    if len(s["instance"]) != 1:
        raise ConfigError("solve takes exactly one instance")
    name, inst = load_instance(s["problem"], s["instance"][0], s["graph_format"])
    budgets = parse_budgets(s["budget"])
    if len(budgets) != 1:
        raise ConfigError("solve takes exactly one budget")
    total = budgets[0].resolve(solver, inst)
    summary = err if not s["output"] or s["output"] == "-" else out
    print(f"master_seed: {s['master_seed']}", file=summary)
    try:
        res = run_bet_and_run(solver, inst, strategy, total, s["master_seed"])
    except NoFeasibleRun as exc:
        print(f"no feasible run: {exc}", file=err)
        return EXIT_NO_RESULT
    doc = res.to_dict()
    doc["instance"] = name
    doc["master_seed"] = s["master_seed"]
    doc["time_mode"] = solver.time_mode
    text = json.dumps(doc, indent=2) + "\n"
    if not s["output"] or s["output"] == "-":
        out.write(text)
    else:
        Path(s["output"]).write_text(text, encoding="utf-8")
    q = res.best_quality
    print(f"best_quality: {int(q) if float(q).is_integer() else q}", file=summary)
    print(f"accounted_time: {res.accounted_time}", file=summary)
    if s["solution"] and res.final.solution is not None:
        Path(s["solution"]).write_text(_format_solution(s["problem"], inst, res), encoding="utf-8")
    return EXIT_OK


def _format_solution(problem: str, inst: Any, res) -> str:
    if problem == "tsp":
        from .tsp import format_tour

        return format_tour(inst, res.final.solution, int(res.best_quality))
    if problem == "mvc":
        from .mvc import format_cover

        return format_cover(res.final.solution)
    return "\n".join(map(str, res.final.solution)) + "\n"


def cmd_bench(s: dict[str, Any], out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    solver = make_solver(s)
    plan = BenchPlan(solver, load_instances(s), parse_strategies(s["strategies"]),
                     parse_budgets(s["budget"]), s["repetitions"], s["master_seed"])
    outputs = _output_paths(s["output"], plan.budgets, "bench.csv")
    print(f"master_seed: {s['master_seed']}", file=out)
    tables = run_bench(plan, outputs, s["workers"], _progress(getattr(err, "isatty", bool)()))
    for b, path, table in zip(plan.budgets, outputs, tables):
        ranks_path = Path(s["ranks"].replace("{budget}", str(b))) if s["ranks"] and (
            "{budget}" in s["ranks"] or len(plan.budgets) == 1) else _with_suffix(path, "ranks")
        if len(table.strategies) >= 2:
            summary = rank_strategies(table)
            ranks_path.write_text(summary.to_csv(), encoding="utf-8")
            print(f"budget {b}: table {path}, ranks {ranks_path}", file=out)
            for st, r in summary.ordered():
                print(f"  {st:20s} {float(r):8.3f}", file=out)
        else:
            print(f"budget {b}: table {path}", file=out)
    return EXIT_OK


def cmd_grid(s: dict[str, Any], out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    solver = make_solver(s)
    ks = parse_k_values(s["k_values"])
    xs = parse_x_values(s["x_values"])
    strategies = grid_strategies(ks, xs)
    if not strategies:
        raise ConfigError("no grid cell satisfies k * x <= 100")
    instances = load_instances(s)
    if len(instances) != 1:
        raise ConfigError("grid takes exactly one instance")
    budgets = parse_budgets(s["budget"])[:1]
    plan = BenchPlan(solver, instances, strategies, budgets, s["repetitions"], s["master_seed"])
    raw_path = Path(s["output"] or "grid.csv")
    norm_path = Path(s["normalized"]) if s["normalized"] else _with_suffix(raw_path, "normalized")
    cells_path = Path(s["cells"]) if s["cells"] else _with_suffix(raw_path, "cells")
    print(f"master_seed: {s['master_seed']}", file=out)
    (table,) = run_bench(plan, [cells_path], s["workers"], _progress(False))
    name = instances[0][0]
    raw, norm = grid_matrices(table, name, ks, xs)
    raw_path.write_text(format_grid(raw, ks, xs), encoding="utf-8")
    norm_path.write_text(format_grid(norm, ks, xs), encoding="utf-8")
    k, x, v = best_cell(raw, ks, xs)
    print(f"grid {raw_path} (normalized {norm_path}, cells {cells_path})", file=out)
    print(f"best cell: k={k} x={format_percent(x)} mean={float(v):.6g}", file=out)
    return EXIT_OK


def cmd_compare(s: dict[str, Any], out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    cand = Strategy.parse(s["candidate"])
    base = Strategy.parse(s["baseline"])
    table: ExperimentTable | None = None
    if s["table"] and Path(s["table"]).exists():
        table = ExperimentTable.load(s["table"])
        missing = [st for st in (str(cand), str(base)) if st not in table.strategies]
        if missing:
            if s["no_run"]:
                raise ConfigError(f"table lacks strategies {missing} and --no-run is set")
            table = None
    elif s["no_run"]:
        raise ConfigError("--no-run needs an existing --table")
    if table is None:
        solver = make_solver(s)
        plan = BenchPlan(solver, load_instances(s), [cand, base] if str(cand) != str(base) else [cand],
                         parse_budgets(s["budget"])[:1], s["repetitions"], s["master_seed"])
        cells = Path(s["table"]) if s["table"] else Path(s["output"] or "compare.csv").with_suffix(".cells.csv")
        print(f"master_seed: {s['master_seed']}", file=out)
        (table,) = run_bench(plan, [cells], s["workers"])
    result = compare_strategies(table, str(cand), str(base), s["alpha"])
    text = result.to_csv()
    if s["output"] and s["output"] != "-":
        Path(s["output"]).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    counts = result.counts()
    print(f"{cand} vs {base} (alpha {s['alpha']}): "
          + ", ".join(f"{k}={v}" for k, v in counts.items()), file=out if s["output"] else err)
    return EXIT_OK


def cmd_luby(k: int, out=None) -> int:
    out = out or sys.stdout
    if k < 1:
        raise ConfigError("k must be at least 1")
    print(" ".join(str(luby(i)) for i in range(1, k + 1)), file=out)
    print(f"sum: {luby_prefix_sum(k)}", file=out)
    return EXIT_OK


def cmd_validate(paths: Sequence[str], problem: str | None, graph_format: str | None,
                 out=None) -> int:
    out = out or sys.stdout
    from .mvc import GraphFormatError, load_graph
    from .tsp import TsplibError, load_tsplib

    status = EXIT_OK
    for path in paths:
        kind = problem or ("tsp" if path.lower().endswith(".tsp") else "mvc")
        try:
            if kind == "tsp":
                inst = load_tsplib(path)
                print(f"{path}: ok TSP {inst.name} n={inst.n} {inst.edge_weight_type}", file=out)
            else:
                g = load_graph(path, graph_format)
                print(f"{path}: ok graph n={g.n} m={g.m}", file=out)
        except (TsplibError, GraphFormatError, ValueError, OSError) as exc:
            print(f"{path}: error: {exc}", file=out)
            status = EXIT_USAGE
    return status


# -- argument parsing -------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment")
    g.add_argument("--problem", choices=("tsp", "mvc", "external"))
    g.add_argument("--instance", action="append", metavar="PATH",
                   help="instance file (repeatable)")
    g.add_argument("--graph-format", choices=("dimacs", "edgelist", "mtx"))
    g.add_argument("--budget", help="<int>u, <float>s or <int>xinit (bench: comma list)")
    g.add_argument("--repetitions", "-R", type=int)
    g.add_argument("--master-seed")
    g.add_argument("--time-mode", choices=("virtual", "wallclock"))
    g.add_argument("--workers", "-j", type=int)
    g.add_argument("--backend", choices=("compiled", "python"))
    g.add_argument("--output", "-o")
    s = p.add_argument_group("solver")
    s.add_argument("--neighbors", type=int)
    s.add_argument("--kick-window", type=int)
    s.add_argument("--bms", type=int)
    s.add_argument("--external-command", help="template with {instance} {seed} {timelimit_s}")
    s.add_argument("--quality-pattern")
    s.add_argument("--init-cost-us", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="betrun", description="Bet-and-run restart strategies.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", "-c", help="flat key = value settings file")
    ap.add_argument("--verbose", "-v", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one bet-and-run execution")
    _add_common(p)
    p.add_argument("--strategy")
    p.add_argument("--solution", help="write the final tour (TSPLIB TOUR) or cover here")

    p = sub.add_parser("bench", help="instances x strategies x repetitions table and ranks")
    _add_common(p)
    p.add_argument("--strategies", help="'catalog' or comma list of strategies")
    p.add_argument("--ranks", help="rank CSV path ({budget} expands)")

    p = sub.add_parser("grid", help="mean-quality heatmap over restarts:k:x")
    _add_common(p)
    p.add_argument("--k-values", help=f"e.g. {GRID_K_DEFAULT}")
    p.add_argument("--x-values", help=f"e.g. {GRID_X_DEFAULT}")
    p.add_argument("--normalized")
    p.add_argument("--cells", help="per-repetition cell table (resumable)")

    p = sub.add_parser("compare", help="rank-sum comparison of two strategies per instance")
    _add_common(p)
    p.add_argument("--candidate")
    p.add_argument("--baseline")
    p.add_argument("--table", help="existing bench table CSV")
    p.add_argument("--alpha", type=float)
    p.add_argument("--no-run", action="store_const", const=True,
                   help="fail instead of running missing cells")

    p = sub.add_parser("luby", help="print the Luby sequence and its sum")
    p.add_argument("k", type=int)

    p = sub.add_parser("validate", help="parse and lint instance files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--problem", choices=("tsp", "mvc"))
    p.add_argument("--graph-format", choices=("dimacs", "edgelist", "mtx"))
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "luby":
            return cmd_luby(args.k)
        if args.command == "validate":
            return cmd_validate(args.paths, args.problem, args.graph_format)
        settings = resolve_settings(vars(args), args.config)
        handler = {"solve": cmd_solve, "bench": cmd_bench, "grid": cmd_grid,
                   "compare": cmd_compare}[args.command]
        return handler(settings)
    except (ConfigError, StrategyError) as exc:
        print(f"betrun: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"betrun: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
