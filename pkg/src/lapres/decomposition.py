"""Singular/regular splitting of discrete solutions: the piecewise harmonic
carrier of the conormal trace, the regular remainder, one-sided traces by
extrapolation, and the transmission jump residual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, interface_dofs
from .coefficients import TensorField
from .assembly import harmonic_system
from .linsolve import solve
from .interface import InterfaceTrace, sobolev_norm


@dataclass
class Decomposition:
    """Triple (u_h, u_reg, g) with u = u_h * logfactor + u_reg off the
    interface line.

    kind 'zero-absorption' uses log|x| (u_reg then carries the jump and is
    undefined on x = 0); kind 'absorbed' uses log(x + i sign |nu| r) on the
    principal branch (u_reg is then the continuous remainder).
    """

    grid: GridSpec
    u: np.ndarray
    u_h: np.ndarray
    u_reg: np.ndarray
    g: InterfaceTrace
    a11: np.ndarray
    nu: float = 0.0
    branch_sign: int = 1
    r: np.ndarray | None = None
    kind: str = "zero-absorption"
    # per-side interface values of the regular part, when known from one-sided
    # solves (limiting solver) rather than extrapolation
    sigma_p: np.ndarray | None = None
    sigma_n: np.ndarray | None = None

    def log_factor(self) -> np.ndarray:
        x = self.grid.x_nodes[:, None]
        if self.kind == "zero-absorption":
            with np.errstate(divide="ignore"):
                lf = np.log(np.abs(x)) * np.ones((1, self.grid.ny))
            lf[self.grid.ix_interface] = np.nan
            return lf
        r = np.ones((self.grid.n_xnodes, self.grid.ny)) if self.r is None \
            else np.asarray(self.r).reshape(self.grid.n_xnodes, self.grid.ny)
        return np.log(x + 1j * self.branch_sign * abs(self.nu) * r)


def solve_harmonic(g: InterfaceTrace | np.ndarray, A: TensorField, grid: GridSpec) -> np.ndarray:
    """Decoupled Dirichlet solves of div(A grad u_h) = 0 on both sides with
    trace a11^{-1} g on Sigma, zero on x = +-a, periodic in y."""
    gv = g.values if isinstance(g, InterfaceTrace) else np.asarray(g, dtype=complex)
    system = harmonic_system(grid, A)
    a11 = A.a11(grid)
    b = np.zeros(grid.n_dofs, dtype=complex)
    b[interface_dofs(grid)] = gv / a11
    u_h, _ = solve(system, b)
    return u_h


def split(grid: GridSpec, u: np.ndarray, g: InterfaceTrace, A: TensorField,
          nu: float = 0.0, r_field: np.ndarray | None = None,
          branch_sign: int = 1) -> Decomposition:
    """Subtract the singular carrier u_h * logfactor from u.

    With nu = 0 the factor is log|x| and the regular part stays undefined on
    the interface line; with nu != 0 the factor is log(x + i sign |nu| r)."""
    if branch_sign not in (1, -1):
        raise ValueError("branch_sign must be +1 or -1")
    uvec = np.asarray(u, dtype=complex).reshape(grid.n_dofs)
    u_h = solve_harmonic(g, A, grid)
    kind = "zero-absorption" if nu == 0.0 else "absorbed"
    dec = Decomposition(grid=grid, u=uvec, u_h=u_h, u_reg=np.empty(0), g=g,
                        a11=A.a11(grid), nu=nu, branch_sign=branch_sign,
                        r=r_field, kind=kind)
    lf = dec.log_factor().reshape(grid.n_dofs)
    u_reg = uvec - u_h * lf
    if kind == "zero-absorption":
        u_reg.reshape(grid.n_xnodes, grid.ny)[grid.ix_interface] = np.nan
    dec.u_reg = u_reg
    return dec


def _extrapolate(dec: Decomposition, side: str) -> np.ndarray:
    """Quadratic extrapolation of u_reg from x = +-h, +-2h, +-3h to 0."""
    grid = dec.grid
    if grid.nx_half < 3:
        raise ValueError("one-sided traces need nx_half >= 3")
    rows = dec.u_reg.reshape(grid.n_xnodes, grid.ny)
    i0 = grid.ix_interface
    step = 1 if side == "p" else -1
    u1, u2, u3 = (rows[i0 + k * step] for k in (1, 2, 3))
    return 3.0 * u1 - 3.0 * u2 + u3


def trace_of_regular(dec: Decomposition, side: str) -> InterfaceTrace:
    """One-sided trace of the regular part.

    For an absorbed-kind split the regular part of the vanishing-absorption
    limit differs from the continuous remainder by i pi u_h on the x < 0
    side (the limit of log(x + i nu r) - log|x| is taken in nu first); the n
    trace therefore acquires the analytic term i sign pi a11^{-1} g."""
    if side not in ("p", "n"):
        raise ValueError(f"side must be 'p' or 'n', got {side!r}")
    vals = _extrapolate(dec, side)
    if dec.kind == "absorbed" and side == "n":
        vals = vals + 1j * dec.branch_sign * np.pi * dec.g.values / dec.a11
    return InterfaceTrace(vals, dec.grid.ell)


def regular_side_values(dec: Decomposition, side: str) -> np.ndarray:
    """Interface nodal values of the regular part on one side: solver-provided
    when available, extrapolated otherwise."""
    known = dec.sigma_p if side == "p" else dec.sigma_n
    if known is not None:
        return known
    return trace_of_regular(dec, side).values


def jump_residual(dec: Decomposition) -> tuple[InterfaceTrace, float]:
    """Residual of the transmission condition: rho = [trace of regular part]
    + sign i pi a11^{-1} g, with the sign flipped on the negative-absorption
    branch; returns (rho, ||rho||_L2 / ||jump||_L2)."""
    tp = trace_of_regular(dec, "p")
    tn = trace_of_regular(dec, "n")
    jump = tp - tn
    rho = InterfaceTrace(
        jump.values + 1j * dec.branch_sign * np.pi * dec.g.values / dec.a11,
        dec.grid.ell)
    denom = sobolev_norm(jump, 0.0)
    numer = sobolev_norm(rho, 0.0)
    if denom > 0:
        rel = numer / denom
    else:
        rel = 0.0 if numer == 0.0 else float("inf")
    return rho, float(rel)


def extracted_jump(dec: Decomposition) -> InterfaceTrace:
    """Jump of the one-sided regular traces, [gamma_0 u] = trace_p - trace_n."""
    return trace_of_regular(dec, "p") - trace_of_regular(dec, "n")
