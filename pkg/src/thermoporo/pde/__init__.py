"""Finite-volume building blocks shared by the cell and macro solvers."""

from .grid import Grid, GridField
from .cg import SolverReport, pcg
from . import operators
from .stokes import StokesResult, solve_stokes

__all__ = [
    "Grid",
    "GridField",
    "SolverReport",
    "pcg",
    "operators",
    "StokesResult",
    "solve_stokes",
]
