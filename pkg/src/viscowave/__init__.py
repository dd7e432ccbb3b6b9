"""Traveling waves for a viscous incompressible fluid layer with a free surface.

The package computes the per-frequency Fourier symbols of the linearized
traveling Stokes problem on a slab, solves the linear gravity-capillary and
Navier-type problems on a periodic horizontal grid, and iterates the fully
nonlinear flattened system with the linearization at rest as a frozen Jacobian.
"""

from .linear_solver import LinearSolver, solve_gravity_capillary, solve_navier
from .nonlinear_solver import ForcingSpec, IterationConfig, solve_traveling_wave
from .spectral_grid import HorizontalGrid, VerticalGrid
from .state import DataQuadruple, NavierData, SolutionTriple
from .symbols import WaveParams, eval_m, eval_rho, eval_symbols, eval_Y

__all__ = [
    "DataQuadruple",
    "ForcingSpec",
    "HorizontalGrid",
    "IterationConfig",
    "LinearSolver",
    "NavierData",
    "SolutionTriple",
    "VerticalGrid",
    "WaveParams",
    "eval_Y",
    "eval_m",
    "eval_rho",
    "eval_symbols",
    "solve_gravity_capillary",
    "solve_navier",
    "solve_traveling_wave",
]

__version__ = "0.1.0"
