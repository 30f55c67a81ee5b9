"""Rectangle (-a,a) x (-ell,ell) split by the interface line x=0, with a
structured tensor-product mesh, periodic y indexing, and the interface on a
node line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor-product mesh of the rectangle.

    x nodes run i = 0 .. 2*nx_half with x = 0 exactly at i = nx_half; the ny
    distinct y dofs are y_j = -ell + j*h_y, j = 0 .. ny-1, with j and j+ny
    addressing the same dof (periodic).  Global dof index is i*ny + (j mod ny).
    """

    a: float
    ell: float
    nx_half: int
    ny: int

    @property
    def h_x(self) -> float:
        return self.a / self.nx_half

    @property
    def h_y(self) -> float:
        return 2.0 * self.ell / self.ny

    @property
    def n_xnodes(self) -> int:
        return 2 * self.nx_half + 1

    @property
    def n_dofs(self) -> int:
        return self.n_xnodes * self.ny

    @property
    def ix_interface(self) -> int:
        return self.nx_half

    @property
    def x_nodes(self) -> np.ndarray:
        # i/nx_half hits 0 and +-1 exactly, so the interface node is bitwise 0
        i = np.arange(-self.nx_half, self.nx_half + 1, dtype=float)
        return self.a * (i / self.nx_half)

    @property
    def y_nodes(self) -> np.ndarray:
        return -self.ell + self.h_y * np.arange(self.ny, dtype=float)

    def dof(self, i: int, j) -> int:
        return i * self.ny + (np.asarray(j) % self.ny)

    def dirichlet_dofs(self, side: str | None = None) -> np.ndarray:
        """Dofs on the lateral walls x = -a and/or x = +a."""
        j = np.arange(self.ny)
        left = self.dof(0, j)
        right = self.dof(2 * self.nx_half, j)
        if side == "p":
            return right
        if side == "n":
            return left
        return np.concatenate([left, right])


def build_grid(a: float, ell: float, nx_half: int, ny: int) -> GridSpec:
    """Construct a grid, validating sizes.

    ny must be even so that the y=0 symmetry line also sits on nodes and the
    Fourier mode range m = -ny/2 .. ny/2-1 is balanced.
    """
    if not (a > 0 and ell > 0):
        raise ValueError("domain half-sizes must be positive, got a=%r ell=%r" % (a, ell))
    if nx_half < 2:
        raise ValueError("nx_half must be >= 2, got %r" % (nx_half,))
    if ny < 4 or ny % 2 != 0:
        raise ValueError("ny must be even and >= 4, got %r" % (ny,))
    return GridSpec(a=float(a), ell=float(ell), nx_half=int(nx_half), ny=int(ny))


def interface_dofs(grid: GridSpec) -> np.ndarray:
    """Dofs lying on the interface x = 0, ordered by increasing y."""
    return grid.dof(grid.ix_interface, np.arange(grid.ny))
