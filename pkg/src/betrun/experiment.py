"""Experiment driver behind the ``bench``, ``grid`` and ``compare`` commands.

A cell is one (instance, strategy, repetition) triple. Its master seed mixes
the run's master seed with a stable hash of the triple, so results do not
depend on execution order, resumption or the number of workers. A cell may be
evaluated at several total budgets in one go; in virtual-time mode the runs of
the larger budgets are reused for the smaller ones through the anytime prefix
property, which gives the same qualities as solving each budget separately.
"""

from __future__ import annotations

import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence

from .orchestrator import INF, AnytimeSolver, NoFeasibleRun, RunRecord, measure_t_init, run_bet_and_run
from .seeding import cell_seed
from .stats import TABLE_HEADER, ExperimentTable, format_quality, parse_quality
from .strategy import Strategy, StrategyError, format_percent

log = logging.getLogger(__name__)

_BUDGET_RE = re.compile(r"^\s*(?:(\d+)\s*u|(\d+(?:\.\d*)?|\.\d+)\s*s|(\d+)\s*xinit)\s*$", re.IGNORECASE)


class ConfigError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


@dataclass(frozen=True)
class Budget:
    """``<int>u`` units, ``<float>s`` seconds or ``<int>xinit`` multiples of t_init."""

    kind: str  # "units" | "seconds" | "xinit"
    value: int | float

    @classmethod
    def parse(cls, text: str) -> "Budget":
        m = _BUDGET_RE.match(str(text))
        if not m:
            raise ConfigError(f"bad budget {text!r}: expected <int>u, <float>s or <int>xinit")
        if m.group(1):
            b = cls("units", int(m.group(1)))
        elif m.group(2):
            b = cls("seconds", float(m.group(2)))
        else:
            b = cls("xinit", int(m.group(3)))
        if b.value <= 0:
            raise ConfigError(f"budget must be positive: {text!r}")
        return b

    def __str__(self) -> str:
        if self.kind == "units":
            return f"{self.value}u"
        if self.kind == "seconds":
            return f"{self.value:g}s"
        return f"{self.value}xinit"

    def resolve(self, solver: AnytimeSolver, instance: Any, t_init: int | None = None) -> int:
        """Total budget in the solver's time units."""
        if self.kind == "units":
            if solver.time_mode != "virtual":
                raise ConfigError("unit budgets need virtual time; use seconds in wall-clock mode")
            return int(self.value)
        if self.kind == "seconds":
            if solver.time_mode != "wallclock":
                raise ConfigError("second budgets need wall-clock time mode")
            return max(1, int(round(self.value * 1e6)))
        if t_init is None:
            try:
                t_init = measure_t_init(solver, instance)
            except NotImplementedError as exc:
                raise ConfigError(f"xinit budgets need a construction cost: {exc}") from None
        return int(self.value) * t_init


class PrefixMemo(AnytimeSolver):
    """Answers solver calls from longer runs with the same seed.

    Only sound for deterministic anytime solvers in virtual time. Returned
    records carry no solution payload.
    """

    def __init__(self, solver: AnytimeSolver):
        if solver.time_mode != "virtual":
            raise ValueError("prefix reuse requires virtual time")
        self.solver = solver
        self.name = solver.name
        self.time_mode = solver.time_mode
        self._runs: dict[int, RunRecord] = {}
        self.hits = 0
        self.misses = 0

    def init_cost(self, instance: Any) -> int:
        return self.solver.init_cost(instance)

    def solve(self, instance: Any, seed: int, budget: int) -> RunRecord:
        known = self._runs.get(seed)
        if known is not None and known.budget >= budget:
            self.hits += 1
            if known.budget == budget:
                return known
            return RunRecord(seed, budget, budget, known.quality_at(budget), known.truncated(budget))
        self.misses += 1
        rec = self.solver.solve(instance, seed, budget).without_solution()
        self._runs[seed] = rec
        return rec


@dataclass(frozen=True)
class Cell:
    instance: str
    strategy: str
    repetition: int


def run_cell(solver: AnytimeSolver, instance: Any, instance_name: str, strategy: Strategy,
             repetition: int, totals: Sequence[int], master_seed: int) -> list[float]:
    """Final qualities of one cell for each total budget (inf on failure)."""
    seed = cell_seed(master_seed, instance_name, str(strategy), repetition)
    runner: AnytimeSolver = solver
    if solver.time_mode == "virtual" and len(totals) > 1:
        runner = PrefixMemo(solver)
    out: dict[int, float] = {}
    for total in sorted(set(totals), reverse=True):
        try:
            out[total] = run_bet_and_run(runner, instance, strategy, total, seed).best_quality
        except NoFeasibleRun as exc:
            log.info("%s rep %d: %s", instance_name, repetition, exc)
            out[total] = INF
        except StrategyError as exc:
            log.warning("%s %s at %d: %s", instance_name, strategy, total, exc)
            out[total] = INF
    return [out[t] for t in totals]


# -- CSV streaming ---------------------------------------------------------

def read_existing(path: Path) -> dict[tuple[str, str, int], float]:
    """Rows already present in a (possibly truncated) table CSV.

    A trailing partial line left by an interrupted run is cut off.
    """
    if not path.exists() or path.stat().st_size == 0:
        return {}
    data = path.read_bytes()
    if not data.endswith(b"\n"):
        cut = data.rfind(b"\n") + 1
        with open(path, "r+b") as fh:
            fh.truncate(cut)
        data = data[:cut]
    lines = data.decode("utf-8").splitlines()
    if not lines:
        return {}
    if tuple(lines[0].split(",")) != TABLE_HEADER:
        raise ConfigError(f"{path}: not a result table (bad header)")
    rows = {}
    for ln in lines[1:]:
        if not ln.strip():
            continue
        parts = ln.split(",")
        if len(parts) != 4:
            raise ConfigError(f"{path}: malformed row {ln!r}")
        rows[(parts[0], parts[1], int(parts[2]))] = parse_quality(parts[3])
    return rows


def _write_table(path: Path, rows: Iterable[tuple[str, str, int, float]]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(TABLE_HEADER) + "\n")
        for inst, strat, r, q in rows:
            fh.write(f"{inst},{strat},{r},{format_quality(q)}\n")
    os.replace(tmp, path)


@dataclass
class BenchPlan:
    solver: AnytimeSolver
    instances: list[tuple[str, Any]]
    strategies: list[Strategy]
    budgets: list[Budget]
    repetitions: int
    master_seed: int = 1

    def __post_init__(self) -> None:
        if not self.instances:
            raise ConfigError("no instances given")
        if not self.strategies:
            raise ConfigError("no strategies given")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be positive")
        names = [n for n, _ in self.instances]
        if len(set(names)) != len(names):
            raise ConfigError("instance names must be unique")
        for n in names:
            if "," in n or "\n" in n:
                raise ConfigError(f"instance name {n!r} contains a separator")
        self._totals: dict[str, list[int]] = {}

    def totals(self, name: str, instance: Any) -> list[int]:
        if name not in self._totals:
            t_init = None
            if any(b.kind == "xinit" for b in self.budgets):
                try:
                    t_init = measure_t_init(self.solver, instance)
                except NotImplementedError as exc:
                    raise ConfigError(f"xinit budgets need a construction cost: {exc}") from None
            self._totals[name] = [b.resolve(self.solver, instance, t_init) for b in self.budgets]
        return self._totals[name]

    def cells(self) -> Iterator[Cell]:
        for name, _ in self.instances:
            for s in self.strategies:
                for r in range(self.repetitions):
                    yield Cell(name, str(s), r)


def run_bench(plan: BenchPlan, outputs: Sequence[Path], workers: int = 1,
              progress: Callable[[int, int], None] | None = None) -> list[ExperimentTable]:
    """Fill one table CSV per budget, skipping rows that already exist.

    Rows are appended in canonical order (instance, strategy, repetition)
    as they complete; when the run ends every file is rewritten in canonical
    order, so the bytes do not depend on resumption or worker count.
    """
    if len(outputs) != len(plan.budgets):
        raise ConfigError("need one output path per budget")
    outputs = [Path(p) for p in outputs]
    existing = [read_existing(p) for p in outputs]
    by_name = dict(plan.instances)
    strat_by_name = {str(s): s for s in plan.strategies}

    todo: list[tuple[Cell, list[int]]] = []
    all_cells = list(plan.cells())
    for cell in all_cells:
        key = (cell.instance, cell.strategy, cell.repetition)
        missing = [j for j, ex in enumerate(existing) if key not in ex]
        if missing:
            todo.append((cell, missing))

    for p, ex in zip(outputs, existing):
        p.parent.mkdir(parents=True, exist_ok=True)
        if not ex and (not p.exists() or p.stat().st_size == 0):
            p.write_text(",".join(TABLE_HEADER) + "\n", encoding="utf-8")

    def work(item: tuple[Cell, list[int]]) -> list[float]:
        cell, missing = item
        inst = by_name[cell.instance]
        totals = plan.totals(cell.instance, inst)
        return run_cell(plan.solver, inst, cell.instance, strat_by_name[cell.strategy],
                        cell.repetition, [totals[j] for j in missing], plan.master_seed)

    # t_init is resolved up front so worker threads never race on it
    for name, inst in plan.instances:
        plan.totals(name, inst)

    handles = [open(p, "a", encoding="utf-8", newline="") for p in outputs]
    try:
        if workers > 1 and len(todo) > 1:
            pool = ThreadPoolExecutor(max_workers=workers)
            results: Iterable[list[float]] = pool.map(work, todo)
        else:
            pool = None
            results = map(work, todo)
        try:
            for done, ((cell, missing), qs) in enumerate(zip(todo, results), 1):
                key = (cell.instance, cell.strategy, cell.repetition)
                for j, q in zip(missing, qs):
                    existing[j][key] = q
                    handles[j].write(f"{cell.instance},{cell.strategy},{cell.repetition},"
                                     f"{format_quality(q)}\n")
                    handles[j].flush()
                if progress is not None:
                    progress(done, len(todo))
        finally:
            if pool is not None:
                pool.shutdown(wait=True, cancel_futures=True)
    finally:
        for h in handles:
            h.close()

    tables = []
    for p, ex in zip(outputs, existing):
        rows = [(c.instance, c.strategy, c.repetition,
                 ex[(c.instance, c.strategy, c.repetition)]) for c in all_cells]
        _write_table(p, rows)
        tables.append(ExperimentTable.from_rows(rows))
    return tables


def run_table(plan: BenchPlan, workers: int = 1) -> list[ExperimentTable]:
    """In-memory variant of :func:`run_bench` (one table per budget)."""
    by_name = dict(plan.instances)
    strat_by_name = {str(s): s for s in plan.strategies}
    cells = list(plan.cells())
    for name, inst in plan.instances:
        plan.totals(name, inst)

    def work(cell: Cell) -> list[float]:
        inst = by_name[cell.instance]
        return run_cell(plan.solver, inst, cell.instance, strat_by_name[cell.strategy],
                        cell.repetition, plan.totals(cell.instance, inst), plan.master_seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]
    tables = []
    for j in range(len(plan.budgets)):
        rows = [(c.instance, c.strategy, c.repetition, qs[j]) for c, qs in zip(cells, results)]
        tables.append(ExperimentTable.from_rows(rows))
    return tables


# -- grid --------------------------------------------------------------------

def grid_strategies(k_values: Sequence[int], x_values: Sequence[Fraction]) -> list[Strategy]:
    """Feasible ``restarts:k:x`` cells (k * x <= 100), x-major."""
    out = []
    for x in x_values:
        for k in k_values:
            if k * x <= 100:
                out.append(Strategy("fixed", k, Fraction(x)))
    return out


def grid_matrices(table: ExperimentTable, instance: str, k_values: Sequence[int],
                  x_values: Sequence[Fraction]) -> tuple[list[list[Any]], list[list[Any]]]:
    """Mean-quality matrix (rows x, columns k) and its distance to the best mean.

    Cells above the k * x = 100 diagonal are ``None``.
    """
    from .stats import mean_quality

    raw: list[list[Any]] = []
    for x in x_values:
        row = []
        for k in k_values:
            if k * x > 100:
                row.append(None)
            else:
                row.append(mean_quality(table, instance, str(Strategy("fixed", k, Fraction(x)))))
        raw.append(row)
    finite = [v for row in raw for v in row if v is not None and v != INF]
    if not finite:
        raise ConfigError("no grid cell produced a feasible result")
    best = min(finite)
    norm = [[None if v is None else (INF if v == INF else v - best) for v in row] for row in raw]
    return raw, norm


def format_grid(matrix: list[list[Any]], k_values: Sequence[int],
                x_values: Sequence[Fraction]) -> str:
    lines = ["x\\k," + ",".join(str(k) for k in k_values)]
    for x, row in zip(x_values, matrix):
        cells = [""] * len(row)
        for i, v in enumerate(row):
            if v is None:
                continue
            if v == INF:
                cells[i] = "inf"
            elif isinstance(v, Fraction):
                cells[i] = str(v.numerator) if v.denominator == 1 else repr(float(v))
            else:
                cells[i] = format_quality(v)
        lines.append(format_percent(Fraction(x)) + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> tuple[list[int], list[Fraction], list[list[float | None]]]:
    """Inverse of :func:`format_grid` (values as floats)."""
    from .strategy import parse_percent

    lines = [ln for ln in text.splitlines() if ln.strip()]
    ks = [int(v) for v in lines[0].split(",")[1:]]
    xs, rows = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        xs.append(parse_percent(parts[0]))
        rows.append([None if p == "" else (INF if p == "inf" else float(p)) for p in parts[1:]])
    return ks, xs, rows


def best_cell(matrix: list[list[Any]], k_values: Sequence[int],
              x_values: Sequence[Fraction]) -> tuple[int, Fraction, Any]:
    """``(k, x, mean)`` of the best cell; ties go to the first in x-major order."""
    best = None
    for x, row in zip(x_values, matrix):
        for k, v in zip(k_values, row):
            if v is None or v == INF:
                continue
            if best is None or v < best[2]:
                best = (k, Fraction(x), v)
    if best is None:
        raise ConfigError("no feasible cell")
    return best


def is_finite(q: float) -> bool:
    return q != INF and not (isinstance(q, float) and math.isnan(q))
