from .graph import (
    FORMATS,
    Graph,
    GraphFormatError,
    format_cover,
    format_dimacs,
    is_cover,
    load_graph,
    parse_graph,
)
from .solver import MvcSolver, solve_mvc

__all__ = [
    "FORMATS",
    "Graph",
    "GraphFormatError",
    "MvcSolver",
    "format_cover",
    "format_dimacs",
    "is_cover",
    "load_graph",
    "parse_graph",
    "solve_mvc",
]
