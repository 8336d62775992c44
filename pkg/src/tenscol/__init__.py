"""Gradient descent weight learning for graph coloring and equitable coloring."""

from .graph import Coloring, Graph, Mode, ValidationReport, greedy_upper_bound, load_dimacs, parse_dimacs, validate
from .solver import SolveOutcome, SolverConfig, Status, k_sweep, solve_fixed_k

__version__ = "0.1.0"

__all__ = [
    "Coloring",
    "Graph",
    "Mode",
    "SolveOutcome",
    "SolverConfig",
    "Status",
    "ValidationReport",
    "greedy_upper_bound",
    "k_sweep",
    "load_dimacs",
    "parse_dimacs",
    "solve_fixed_k",
    "validate",
]
