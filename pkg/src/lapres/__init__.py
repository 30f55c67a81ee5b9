"""Numerical laboratory for the regularized degenerate problem
div((x*A + i*nu*T) grad u) = f on a rectangle with a sign-changing principal
coefficient, its vanishing-absorption limit, and the interface transmission
problem selecting that limit."""

__version__ = "0.1.0"

from .grid import GridSpec, build_grid, interface_dofs
from .coefficients import (
    TensorField,
    PlasmaParams,
    CoercivityReport,
    validate_coefficients,
    coercivity_probe,
    plasma_tensors,
)
from .assembly import SystemMatrix, assemble_system, assemble_rhs, assemble_subdomain
from .linsolve import SolveReport, SolverError, solve
from .interface import (
    InterfaceTrace,
    dirichlet_trace,
    conormal_trace,
    sobolev_norm,
    harmonic_lifting,
    weighted_norm,
    lowpass,
    highpass,
    bessel_potential,
)
from .decomposition import Decomposition, solve_harmonic, split, trace_of_regular, jump_residual
from .limiting import (
    SweepRecord,
    LimitingSolution,
    solve_absorption,
    lap_sweep,
    solve_limiting,
    green_check,
)
from .oned import OneDSolution, solve_1d, limit_1d
