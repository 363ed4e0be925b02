from .instance import (
    TspInstance,
    TsplibError,
    dist,
    format_tour,
    format_tsplib,
    load_tsplib,
    parse_tsplib,
    tour_cost,
    validate_tour,
)
from .solver import TspSolver, solve_tsp

__all__ = [
    "TspInstance",
    "TspSolver",
    "TsplibError",
    "dist",
    "format_tour",
    "format_tsplib",
    "load_tsplib",
    "parse_tsplib",
    "solve_tsp",
    "tour_cost",
    "validate_tour",
]
