"""Bet-and-run restart strategies for anytime randomized solvers."""

from ._backend import compiled_available, default_backend
from .orchestrator import (
    AnytimeSolver,
    BetAndRunResult,
    ExternalSolver,
    NoFeasibleRun,
    RunRecord,
    continue_run,
    external_solver,
    measure_t_init,
    run_bet_and_run,
)
from .seeding import derive_seed
from .strategy import (
    BudgetTooSmall,
    InfeasibleStrategy,
    Schedule,
    Strategy,
    catalog,
    luby,
    luby_prefix_sum,
    resolve_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "AnytimeSolver",
    "BetAndRunResult",
    "BudgetTooSmall",
    "ExternalSolver",
    "InfeasibleStrategy",
    "NoFeasibleRun",
    "RunRecord",
    "Schedule",
    "Strategy",
    "catalog",
    "compiled_available",
    "continue_run",
    "default_backend",
    "derive_seed",
    "external_solver",
    "luby",
    "luby_prefix_sum",
    "measure_t_init",
    "resolve_schedule",
    "run_bet_and_run",
]
