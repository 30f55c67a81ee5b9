"""Sparse complex linear solves: direct LU by default, optional restarted
GMRES with an ILU preconditioner for large grids."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DEFAULT_TOL = 1e-10


class SolverError(RuntimeError):
    pass


@dataclass
class SolveReport:
    residual: float
    method: str
    wall_time: float
    iterations: int = 0

    def check(self, tol: float) -> None:
        if not np.isfinite(self.residual) or self.residual > tol:
            raise SolverError(
                f"linear solve failed: relative residual {self.residual:.3e} > {tol:g}")


class Factorization:
    """Reusable LU factorization; immutable after construction, safe for
    repeated back-substitutions."""

    def __init__(self, matrix: sp.spmatrix):
        self.matrix = matrix.tocsc()
        try:
            self._lu = spla.splu(self.matrix.astype(complex))
        except RuntimeError as exc:             # singular factorization
            raise SolverError(f"factorization failed: {exc}") from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._lu.solve(np.asarray(rhs, dtype=complex))
        if not np.all(np.isfinite(x)):
            raise SolverError("factorization produced non-finite solution")
        return x


def _residual(matrix, x, rhs) -> float:
    nb = np.linalg.norm(rhs)
    if nb == 0.0:
        return float(np.linalg.norm(matrix @ x))
    return float(np.linalg.norm(matrix @ x - rhs) / nb)


def solve(matrix, rhs: np.ndarray, tol: float = DEFAULT_TOL,
          method: str = "direct") -> tuple[np.ndarray, SolveReport]:
    """Solve matrix x = rhs; accepts a SystemMatrix, sparse matrix or
    Factorization.  Guarantees relative residual <= tol or raises."""
    m = getattr(matrix, "matrix", matrix)
    rhs = np.asarray(rhs, dtype=complex)
    if m.shape[0] != m.shape[1] or rhs.shape[0] != m.shape[0]:
        raise ValueError("system shape mismatch")
    t0 = time.perf_counter()
    if method == "direct":
        if isinstance(matrix, Factorization):
            x = matrix.solve(rhs)
        else:
            x = Factorization(m).solve(rhs)
        report = SolveReport(residual=_residual(m, x, rhs), method="direct",
                             wall_time=time.perf_counter() - t0)
    elif method == "gmres":
        try:
            ilu = spla.spilu(m.tocsc().astype(complex), drop_tol=1e-6, fill_factor=20)
        except RuntimeError as exc:
            raise SolverError(f"ILU setup failed: {exc}") from exc
        prec = spla.LinearOperator(m.shape, ilu.solve)
        it = [0]

        def cb(_):
            it[0] += 1

        x, info = spla.gmres(m.astype(complex), rhs, rtol=tol / 10, atol=0.0,
                             restart=200, maxiter=50, M=prec, callback=cb)
        if info != 0:
            raise SolverError(f"GMRES stagnated (info={info})")
        report = SolveReport(residual=_residual(m, x, rhs), method="gmres",
                             wall_time=time.perf_counter() - t0, iterations=it[0])
    else:
        raise ValueError(f"unknown method {method!r}")
    report.check(tol)
    return x, report
