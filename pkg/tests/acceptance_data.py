"""Shared definitions and the cached result tables for the acceptance suite.

The qualitative checks need 14 strategies x 40 instances x 100 repetitions
at three budgets. That is hours of single-core work, so the tables are
computed once (resumably) into ``acceptance_runs/`` and reused afterwards.
Run ``python tests/acceptance_data.py`` to build or finish them.
"""

import os
import sys
import time
from pathlib import Path

from betrun import catalog
from betrun.corpus import mvc_corpus, tsp_corpus
from betrun.experiment import BenchPlan, Budget, run_bench
from betrun.mvc import MvcSolver
from betrun.stats import ExperimentTable
from betrun.tsp import TspSolver

ROOT = Path(__file__).resolve().parent.parent
CACHE = Path(os.environ.get("BETRUN_ACCEPTANCE_DIR", ROOT / "acceptance_runs"))
MULTIPLIERS = (100, 400, 1000)
REPETITIONS = 100
MASTER_SEED = 1
PROBLEMS = ("tsp", "mvc")


def solver(problem):
    return TspSolver() if problem == "tsp" else MvcSolver()


def instances(problem):
    corpus = tsp_corpus() if problem == "tsp" else mvc_corpus()
    return [(inst.name, inst) for inst in corpus]


def plan(problem, repetitions=REPETITIONS):
    return BenchPlan(solver(problem), instances(problem), list(catalog().values()),
                     [Budget("xinit", m) for m in MULTIPLIERS], repetitions, MASTER_SEED)


def paths(problem):
    return [CACHE / f"{problem}_{m}xinit.csv" for m in MULTIPLIERS]


def complete(problem):
    expected = 20 * 14 * REPETITIONS
    for p in paths(problem):
        if not p.exists():
            return False
        with open(p, encoding="utf-8") as fh:
            if sum(1 for _ in fh) - 1 != expected:
                return False
    return True


def ensure(problem, progress=None):
    """Tables for ``problem``, one per multiplier; computes missing rows."""
    if complete(problem):
        return [ExperimentTable.load(p) for p in paths(problem)]
    return run_bench(plan(problem), paths(problem), progress=progress)


def combined(multiplier):
    """Both problems' tables at one budget merged into a 40-instance table."""
    j = MULTIPLIERS.index(multiplier)
    parts = [ensure(p)[j] for p in PROBLEMS]
    rows = [row for t in parts for row in t.rows()]
    return ExperimentTable.from_rows(rows)


if __name__ == "__main__":
    for prob in sys.argv[1:] or PROBLEMS:
        start = time.time()

        def report(done, total, prob=prob, start=start):
            if done % 500 == 0 or done == total:
                print(f"{prob}: {done}/{total} cells, {time.time() - start:.0f}s", flush=True)

        ensure(prob, report)
