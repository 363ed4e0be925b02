"""Bet-and-run execution over any anytime solver.

Phase 1 runs ``k`` independently seeded solver calls, the run with the best
final quality (lowest index on ties) wins, and Phase 2 continues it by
replaying the winner from scratch with the same seed and budget
``t_b + t2``. The replayed prefix ``t_b`` is not charged to the budget.
"""

from __future__ import annotations

import abc
import logging
import math
import re
import shlex
import statistics
import subprocess
import threading
import time
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

from .seeding import derive_seed
from .strategy import Schedule, Strategy, resolve_schedule

log = logging.getLogger(__name__)

INF = math.inf
TIME_MODES = ("virtual", "wallclock")


class NoFeasibleRun(RuntimeError):
    """Every Phase-1 run ended without a feasible solution."""


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one solver call.

    ``best_quality`` is ``math.inf`` when no feasible solution was found.
    ``trajectory`` holds ``(elapsed, quality)`` improvement events.
    """

    seed: int
    budget: int
    budget_used: int
    best_quality: float
    trajectory: tuple[tuple[int, float], ...] = ()
    solution: tuple | None = field(default=None, compare=True)

    @property
    def feasible(self) -> bool:
        return self.best_quality != INF

    def quality_at(self, elapsed: int) -> float:
        """Best quality recorded up to and including ``elapsed``."""
        q = INF
        for t, v in self.trajectory:
            if t > elapsed:
                break
            q = v
        return q

    def truncated(self, elapsed: int) -> tuple[tuple[int, float], ...]:
        return tuple(ev for ev in self.trajectory if ev[0] <= elapsed)

    def without_solution(self) -> "RunRecord":
        return replace(self, solution=None) if self.solution is not None else self

    def to_dict(self, with_solution: bool = False) -> dict:
        d: dict[str, Any] = {
            "seed": self.seed,
            "budget": self.budget,
            "budget_used": self.budget_used,
            "best_quality": _json_quality(self.best_quality),
            "trajectory": [[t, _json_quality(q)] for t, q in self.trajectory],
        }
        if with_solution and self.solution is not None:
            d["solution"] = list(self.solution)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        sol = d.get("solution")
        return cls(
            seed=int(d["seed"]),
            budget=int(d["budget"]),
            budget_used=int(d["budget_used"]),
            best_quality=_parse_quality(d["best_quality"]),
            trajectory=tuple((int(t), _parse_quality(q)) for t, q in d["trajectory"]),
            solution=tuple(sol) if sol is not None else None,
        )


def _json_quality(q: float) -> Any:
    if q == INF:
        return "inf"
    if isinstance(q, float) and q.is_integer():
        return int(q)
    return q


def _parse_quality(v: Any) -> float:
    if isinstance(v, str):
        return INF if v.strip().lower() in ("inf", "+inf", "infinity") else float(v)
    return v


class AnytimeSolver(abc.ABC):
    """Contract for solvers driven by the orchestrator.

    ``solve`` must be deterministic in (instance, seed, budget) and anytime:
    with the same seed, the trajectory under a smaller budget is a prefix of
    the one under a larger budget. Budgets are integer time units: solver
    steps in virtual mode, microseconds in wall-clock mode.
    """

    name = "solver"
    time_mode = "virtual"

    @abc.abstractmethod
    def solve(self, instance: Any, seed: int, budget: int) -> RunRecord: ...

    @abc.abstractmethod
    def init_cost(self, instance: Any) -> int:
        """Construction cost ``t_init`` in time units (virtual mode)."""

    def construct(self, instance: Any, seed: int) -> None:
        """Perform the construction step only; used for wall-clock ``t_init``."""
        self.solve(instance, seed, 0)


@dataclass(frozen=True)
class BetAndRunResult:
    strategy: Strategy
    schedule: Schedule
    phase1: tuple[RunRecord, ...]
    winner_index: int
    final: RunRecord
    accounted_time: int
    raw_elapsed_us: int | None = None

    @property
    def best_quality(self) -> float:
        return self.final.best_quality

    def to_dict(self, with_solution: bool = False) -> dict:
        d = {
            "strategy": str(self.strategy),
            "schedule": self.schedule.to_dict(),
            "phase1": [r.to_dict() for r in self.phase1],
            "winner_index": self.winner_index,
            "final": self.final.to_dict(with_solution=with_solution),
            "accounted_time": self.accounted_time,
        }
        if self.raw_elapsed_us is not None:
            d["raw_elapsed_us"] = self.raw_elapsed_us
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BetAndRunResult":
        sched = d["schedule"]
        return cls(
            strategy=Strategy.parse(d["strategy"]),
            schedule=Schedule(tuple(sched["phase1"]), sched["phase2"], sched["total"]),
            phase1=tuple(RunRecord.from_dict(r) for r in d["phase1"]),
            winner_index=int(d["winner_index"]),
            final=RunRecord.from_dict(d["final"]),
            accounted_time=int(d["accounted_time"]),
            raw_elapsed_us=d.get("raw_elapsed_us"),
        )


def select_winner(records: Sequence[RunRecord]) -> int:
    """Index of the best final quality; the lowest index wins ties."""
    return min(range(len(records)), key=lambda i: (records[i].best_quality, i))


def continue_run(solver: AnytimeSolver, instance: Any, seed: int, t_b: int, t2: int) -> RunRecord:
    """Replay the run seeded ``seed`` from scratch for ``t_b + t2`` units."""
    if t_b < 1 or t2 < 0:
        raise ValueError("need t_b >= 1 and t2 >= 0")
    return solver.solve(instance, seed, t_b + t2)


def run_bet_and_run(
    solver: AnytimeSolver,
    instance: Any,
    strategy: Strategy,
    total: int,
    master_seed: int = 1,
    executor: Executor | None = None,
) -> BetAndRunResult:
    start = time.perf_counter()
    schedule = resolve_schedule(strategy, total)
    seeds = [derive_seed(master_seed, i) for i in range(len(schedule.phase1))]

    def one(i: int) -> RunRecord:
        return solver.solve(instance, seeds[i], schedule.phase1[i])

    indices = range(len(seeds))
    if executor is not None:
        phase1 = list(executor.map(one, indices))
    else:
        phase1 = [one(i) for i in indices]

    winner = select_winner(phase1)
    best = phase1[winner]
    if not best.feasible:
        raise NoFeasibleRun(
            f"{strategy}: none of {len(phase1)} Phase-1 runs produced a feasible solution"
        )
    phase1 = [r if i == winner else r.without_solution() for i, r in enumerate(phase1)]
    if schedule.phase2 == 0:
        final = best
    else:
        final = continue_run(solver, instance, best.seed, best.budget, schedule.phase2)
    accounted = sum(r.budget for r in phase1) + schedule.phase2
    raw = None
    if solver.time_mode == "wallclock":
        raw = int((time.perf_counter() - start) * 1e6)
    return BetAndRunResult(strategy, schedule, tuple(phase1), winner, final, accounted, raw)


def measure_t_init(solver: AnytimeSolver, instance: Any, repeats: int = 3) -> int:
    """``t_init`` in the solver's time units.

    Virtual mode returns the solver's declared construction cost; wall-clock
    mode the median of ``repeats`` timed constructions, in microseconds.
    Solvers that cannot time construction fall back to ``init_cost``.
    """
    if solver.time_mode == "virtual":
        return solver.init_cost(instance)
    times = []
    for r in range(repeats):
        t = time.perf_counter()
        try:
            solver.construct(instance, derive_seed(0, r))
        except NotImplementedError:
            # no separate construction step: fall back to a declared cost
            return solver.init_cost(instance)
        times.append(time.perf_counter() - t)
    return max(1, int(statistics.median(times) * 1e6))


DEFAULT_QUALITY_PATTERN = (
    r"^\s*(?:best|quality|cost|length|size)\s*[:=]?\s*"
    r"([-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)"
)


class ExternalSolver(AnytimeSolver):
    """Adapter that runs an external binary per solver call (wall-clock only).

    The command template may use ``{instance}``, ``{seed}`` and
    ``{timelimit_s}``. Every output line matching ``quality_pattern`` (first
    group = quality) counts as an improvement if it beats the best so far.
    The child is killed once the budget expires; its last parsed quality is
    kept. Spawn failures, a non-zero exit of its own accord, or no matching
    line yield an infeasible record.
    """

    name = "external"
    time_mode = "wallclock"

    def __init__(self, command_template: str, quality_pattern: str = DEFAULT_QUALITY_PATTERN,
                 init_cost_us: int | None = None, grace_s: float = 0.0):
        self.template = command_template
        self.args = shlex.split(command_template)
        self.pattern = re.compile(quality_pattern, re.IGNORECASE | re.MULTILINE)
        self.init_cost_us = init_cost_us
        self.grace_s = grace_s

    def init_cost(self, instance: Any) -> int:
        if self.init_cost_us is None:
            raise NotImplementedError("external solver has no declared construction cost")
        return self.init_cost_us

    def construct(self, instance: Any, seed: int) -> None:
        raise NotImplementedError("external solvers cannot time construction separately")

    def command(self, instance: Any, seed: int, budget: int) -> list[str]:
        fields = {
            "instance": str(instance),
            "seed": str(seed),
            "timelimit_s": f"{budget / 1e6:.6f}".rstrip("0").rstrip("."),
        }
        return [arg.format(**fields) for arg in self.args]

    def solve(self, instance: Any, seed: int, budget: int) -> RunRecord:
        argv = self.command(instance, seed, budget)
        events: list[tuple[int, float]] = []
        best = [INF]
        t0 = time.perf_counter()
        try:
            proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                                    text=True, bufsize=1)
        except OSError as exc:
            log.warning("external solver failed to start (%s): %s", argv[0], exc)
            return RunRecord(seed, budget, 0, INF)

        def reader() -> None:
            assert proc.stdout is not None
            for line in proc.stdout:
                m = self.pattern.search(line)
                if not m:
                    continue
                try:
                    q = float(m.group(1))
                except ValueError:
                    continue
                if q < best[0]:
                    best[0] = q
                    stamp = min(int((time.perf_counter() - t0) * 1e6), budget)
                    if events and stamp <= events[-1][0]:
                        stamp = events[-1][0] + 1
                    events.append((stamp, q))

        th = threading.Thread(target=reader, daemon=True)
        th.start()
        killed = False
        try:
            proc.wait(timeout=budget / 1e6 + self.grace_s)
        except subprocess.TimeoutExpired:
            killed = True
            proc.kill()
            proc.wait()
        th.join(timeout=5)
        used = min(int((time.perf_counter() - t0) * 1e6), budget)
        if not killed and proc.returncode != 0:
            log.warning("external solver exited with status %d: %s", proc.returncode, argv)
            return RunRecord(seed, budget, used, INF)
        if not events:
            log.warning("external solver printed no line matching %r", self.pattern.pattern)
            return RunRecord(seed, budget, used, INF)
        if all(v.is_integer() for _, v in events):
            events = [(t, int(v)) for t, v in events]
        return RunRecord(seed, budget, used, events[-1][1], tuple(events))


def external_solver(command_template: str, **kwargs: Any) -> ExternalSolver:
    return ExternalSolver(command_template, **kwargs)
