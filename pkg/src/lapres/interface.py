"""Interface traces with periodic-Fourier fractional norms, trace extraction
(Dirichlet and variational conormal), explicit harmonic liftings, weighted
volume norms, and tangential frequency diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .grid import GridSpec, interface_dofs
from . import assembly
from .coefficients import TensorField


# ---------------------------------------------------------------------------
# periodic Fourier machinery on Sigma
# ---------------------------------------------------------------------------

def mode_numbers(ny: int) -> np.ndarray:
    """Signed mode numbers in FFT order: 0, 1, .., ny/2-1, -ny/2, .., -1."""
    return np.fft.fftfreq(ny, 1.0 / ny).astype(int)


def mode_lambdas(ny: int, ell: float) -> np.ndarray:
    """Square roots lambda_m = pi |m| / ell of the periodic 1D Laplacian
    eigenvalues on (-ell, ell), FFT order."""
    return np.pi * np.abs(mode_numbers(ny)) / ell


def _forward(values: np.ndarray, ell: float) -> np.ndarray:
    """Coefficients v_m = (v, phi_m) against the orthonormal eigenfunctions
    phi_m(y) = exp(i pi m y / ell)/sqrt(2 ell), by trapezoidal quadrature
    starting at y = -ell (exact discrete Parseval)."""
    ny = values.shape[-1]
    h = 2.0 * ell / ny
    phase = (-1.0) ** np.abs(mode_numbers(ny))
    return (h / np.sqrt(2.0 * ell)) * phase * np.fft.fft(values, axis=-1)


def _inverse(coeffs: np.ndarray, ell: float) -> np.ndarray:
    ny = coeffs.shape[-1]
    phase = (-1.0) ** np.abs(mode_numbers(ny))
    return (ny / np.sqrt(2.0 * ell)) * np.fft.ifft(coeffs * phase, axis=-1)


@dataclass
class InterfaceTrace:
    """Complex values on Sigma ordered by increasing y, with lazily computed
    periodic Fourier coefficients."""

    values: np.ndarray
    ell: float
    _coeffs: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = _forward(self.values, self.ell)
        return self._coeffs

    @property
    def lambdas(self) -> np.ndarray:
        return mode_lambdas(self.ny, self.ell)

    def with_coeffs(self, coeffs: np.ndarray) -> "InterfaceTrace":
        return InterfaceTrace(_inverse(coeffs, self.ell), self.ell, _coeffs=np.asarray(coeffs))

    def l2(self) -> float:
        return sobolev_norm(self, 0.0)

    def __add__(self, other):
        return InterfaceTrace(self.values + other.values, self.ell)

    def __sub__(self, other):
        return InterfaceTrace(self.values - other.values, self.ell)


def sobolev_norm(t: InterfaceTrace, s: float) -> float:
    """Fractional Sobolev norm (sum (1+lambda_m^2)^s |v_m|^2)^{1/2}."""
    if abs(s) > 2:
        raise ValueError("exponent s restricted to |s| <= 2")
    c = t.coeffs
    return float(np.sqrt(np.sum((1.0 + t.lambdas ** 2) ** s * np.abs(c) ** 2)))


def lowpass(t: InterfaceTrace, w: float) -> InterfaceTrace:
    """Keep modes with lambda_m < w."""
    if w <= 0:
        raise ValueError("cutoff w must be positive")
    return t.with_coeffs(np.where(t.lambdas < w, t.coeffs, 0.0))


def highpass(t: InterfaceTrace, w: float) -> InterfaceTrace:
    if w <= 0:
        raise ValueError("cutoff w must be positive")
    return t.with_coeffs(np.where(t.lambdas >= w, t.coeffs, 0.0))


# ---------------------------------------------------------------------------
# trace extraction
# ---------------------------------------------------------------------------

def dirichlet_trace(u: np.ndarray, grid: GridSpec, line: int | None = None) -> InterfaceTrace:
    """Nodal restriction of a field along the x-node line (default Sigma)."""
    line = grid.ix_interface if line is None else line
    if not 0 <= line < grid.n_xnodes:
        raise ValueError(f"x-node line {line} out of range")
    vals = np.asarray(u).reshape(grid.n_xnodes, grid.ny)[line]
    return InterfaceTrace(vals, grid.ell)


def conormal_trace(u: np.ndarray, f: np.ndarray, side: str, A: TensorField,
                   T: TensorField, nu: float, grid: GridSpec) -> InterfaceTrace:
    """Variational recovery of the conormal trace (x A + i nu T) grad u . n on
    Sigma from a one-sided discrete residual: the interface rows of the side
    operator applied to u, minus the side load, inverted through the 1D
    interface mass matrix.  The normal points from Omega_n into Omega_p."""
    system = assembly.assemble_system(grid, A, T, nu, side=side)
    if nu != 0.0:
        b = assembly.fitted_rhs(grid, f, A, T, nu, side=side)
    else:
        b = assembly.assemble_rhs(grid, f, side=side)
    uvec = np.asarray(u, dtype=complex).reshape(grid.n_dofs)
    resid = (system.raw @ uvec - b)[interface_dofs(grid)]
    if side == "p":
        resid = -resid
    g = spla.spsolve(assembly.interface_mass(grid).tocsc(), resid)
    return InterfaceTrace(g, grid.ell)


# ---------------------------------------------------------------------------
# harmonic lifting
# ---------------------------------------------------------------------------

def harmonic_lifting(t: InterfaceTrace, delta: float, grid: GridSpec) -> np.ndarray:
    """Explicit modewise lifting of interface data into Omega_p, vanishing for
    x >= delta: mode m decays as sinh(lambda_m (delta - x))/sinh(lambda_m
    delta), the mean mode linearly."""
    if not 0 < delta < grid.a:
        raise ValueError("lifting scale delta must lie in (0, a)")
    lam = t.lambdas
    x = grid.x_nodes[grid.ix_interface:]                      # 0 .. a
    xi = np.minimum(x, delta)
    # stable sinh ratio: exp(-lam x) (1 - exp(-2 lam (delta-x)))/(1 - exp(-2 lam delta))
    with np.errstate(over="ignore"):
        num = np.exp(-np.outer(xi, lam)) * (1.0 - np.exp(-2.0 * np.outer(delta - xi, lam)))
        den = 1.0 - np.exp(-2.0 * lam * delta)
    factor = np.where(lam[None, :] > 0, num / np.where(den == 0, 1.0, den)[None, :],
                      1.0 - xi[:, None] / delta)
    factor[x >= delta] = 0.0
    rows = _inverse(factor * t.coeffs[None, :], grid.ell)
    out = np.zeros((grid.n_xnodes, grid.ny), dtype=complex)
    out[grid.ix_interface:] = rows
    return out.reshape(grid.n_dofs)


# ---------------------------------------------------------------------------
# volume norms and tangential-frequency diagnostics
# ---------------------------------------------------------------------------

@dataclass
class WeightedNorm:
    l2: float
    grad: float

    @property
    def h1(self) -> float:
        return float(np.hypot(self.l2, self.grad))


def trapezoid_weights(grid: GridSpec, region: str | None = None) -> np.ndarray:
    """Nodal x-quadrature weights (trapezoid) restricted to a region."""
    w = np.full(grid.n_xnodes, grid.h_x)
    w[0] = w[-1] = 0.5 * grid.h_x
    i0 = grid.ix_interface
    if region in ("p", "omega_p"):
        w[:i0] = 0.0
        w[i0] = 0.5 * grid.h_x
    elif region in ("n", "omega_n"):
        w[i0 + 1:] = 0.0
        w[i0] = 0.5 * grid.h_x
    elif region not in (None, "omega"):
        raise ValueError(f"unknown region {region!r}")
    return w


def discrete_l2(u: np.ndarray, grid: GridSpec, region: str | None = None,
                exclude_interface: bool = False) -> float:
    """Trapezoid-in-x nodal L2 norm; optionally skips the x = 0 node line
    (fields of split solutions are undefined there)."""
    vals = np.asarray(u, dtype=complex).reshape(grid.n_xnodes, grid.ny)
    w = trapezoid_weights(grid, region).copy()
    if exclude_interface:
        w[grid.ix_interface] = 0.0
    finite = np.isfinite(vals)
    sq = np.where(finite, np.abs(np.where(finite, vals, 0.0)) ** 2, 0.0)
    return float(np.sqrt(np.sum(w[:, None] * grid.h_y * sq)))


def weighted_norm(u: np.ndarray, delta: float, grid: GridSpec,
                  region: str | None = None) -> WeightedNorm:
    """L2 part by trapezoidal nodal quadrature, |x|^{delta/2}-weighted gradient
    part by 2x2 Gauss per cell (Gauss points never sit on x = 0, so negative
    weights stay finite).  delta = 1 and 2 give the V_reg and V_sing
    seminorms."""
    if delta > 2:
        raise ValueError("weight exponent delta restricted to <= 2")
    l2 = discrete_l2(u, grid, region)
    gr = weighted_gradient(u, delta, grid, region)
    return WeightedNorm(l2=l2, grad=gr)


def weighted_gradient(u: np.ndarray, delta: float, grid: GridSpec,
                      region: str | None = None) -> float:
    mask = assembly.cell_mask(grid, {"omega_p": "p", "omega_n": "n", "p": "p",
                                     "n": "n"}.get(region))
    grads = assembly.gauss_gradients(grid, u)
    xg = assembly.gauss_x(grid)
    w = assembly.gauss_weight(grid)
    g2 = np.sum(np.abs(grads) ** 2, axis=2)
    finite = np.all(np.isfinite(g2), axis=1) & mask
    weight = np.abs(xg) ** delta if delta != 0.0 else np.ones_like(xg)
    total = np.sum(weight[finite] * g2[finite]) * w
    return float(np.sqrt(total))


def weighted_l2(u: np.ndarray, delta: float, grid: GridSpec,
                region: str | None = None) -> float:
    """Gauss-quadrature |x|^{delta/2}-weighted L2 norm of the field itself,
    used by the Hardy-inequality probe with delta = -1 + 2 eps."""
    mask = assembly.cell_mask(grid, {"omega_p": "p", "omega_n": "n", "p": "p",
                                     "n": "n"}.get(region))
    vals = assembly.gauss_interp(grid, u)
    xg = assembly.gauss_x(grid)
    w = assembly.gauss_weight(grid)
    v2 = np.abs(vals) ** 2
    finite = np.all(np.isfinite(v2), axis=1) & mask
    total = np.sum(np.abs(xg[finite]) ** delta * v2[finite]) * w
    return float(np.sqrt(total))


def field_modes(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Rowwise periodic Fourier coefficients of a field, (n_xnodes, ny)."""
    return _forward(np.asarray(u, dtype=complex).reshape(grid.n_xnodes, grid.ny), grid.ell)


def modes_to_field(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    return _inverse(coeffs, grid.ell).reshape(grid.n_dofs)


def bessel_potential(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Tangential Bessel potential: multiplication by (1 + lambda_m^2)^{1/4}
    in the y-Fourier transform, rowwise in x."""
    lam = mode_lambdas(grid.ny, grid.ell)
    return modes_to_field(field_modes(u, grid) * (1.0 + lam ** 2) ** 0.25, grid)


def spectral_dy(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Spectral tangential derivative (multiplier i pi m / ell)."""
    k = np.pi * mode_numbers(grid.ny) / grid.ell
    return modes_to_field(field_modes(u, grid) * (1j * k), grid)
