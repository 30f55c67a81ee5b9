"""Hermitian positive-definite tensor fields A, T on the grid, their
validation, and generation from cold-plasma parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec

HERMITIAN_RTOL = 1e-12


class CoefficientError(ValueError):
    pass


@dataclass
class TensorField:
    """Per-node 2x2 complex matrices, shape (n_xnodes, ny, 2, 2).

    Storing only ny rows in y makes the y-periodicity structural: the values
    at y = +ell are those at y = -ell by construction.
    """

    values: np.ndarray
    role: str = "A"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 4 or v.shape[2:] != (2, 2):
            raise CoefficientError("tensor field must have shape (n_xnodes, ny, 2, 2)")
        self.values = v

    @property
    def shape(self):
        return self.values.shape[:2]

    def on_interface(self, grid: GridSpec) -> np.ndarray:
        """Values restricted to the node line x = 0, shape (ny, 2, 2)."""
        return self.values[grid.ix_interface]

    def a11(self, grid: GridSpec) -> np.ndarray:
        """Real diagonal entry (.)_{11} on the interface."""
        return self.values[grid.ix_interface, :, 0, 0].real


@dataclass
class CoercivityReport:
    c_A: float
    c_T: float


def identity_field(grid: GridSpec, role: str = "A") -> TensorField:
    v = np.zeros((grid.n_xnodes, grid.ny, 2, 2), dtype=complex)
    v[..., 0, 0] = 1.0
    v[..., 1, 1] = 1.0
    return TensorField(v, role)


def constant_field(grid: GridSpec, matrix, role: str = "A") -> TensorField:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise CoefficientError("constant tensor must be 2x2")
    v = np.broadcast_to(m, (grid.n_xnodes, grid.ny, 2, 2)).copy()
    return TensorField(v, role)


def smooth_field(grid: GridSpec, amplitude: float = 0.3, role: str = "A") -> TensorField:
    """Smooth y-periodic Hermitian PD preset: diagonal modulation plus a small
    imaginary off-diagonal coupling.  Stays PD for amplitude < 1/2."""
    if not 0 <= amplitude < 0.5:
        raise CoefficientError("smooth preset requires amplitude in [0, 1/2)")
    x = grid.x_nodes[:, None]
    y = grid.y_nodes[None, :]
    v = np.zeros((grid.n_xnodes, grid.ny, 2, 2), dtype=complex)
    mod = amplitude * np.sin(np.pi * y / grid.ell) * np.cos(0.5 * np.pi * x / grid.a)
    off = 0.5 * amplitude * np.cos(np.pi * y / grid.ell)
    v[..., 0, 0] = 1.0 + mod
    v[..., 1, 1] = 1.0 - mod
    v[..., 0, 1] = 1j * off
    v[..., 1, 0] = -1j * off
    return TensorField(v, role)


def _min_eig_hermitian2(v: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of Hermitian 2x2 matrices, closed form."""
    tr = (v[..., 0, 0] + v[..., 1, 1]).real
    det = (v[..., 0, 0].real * v[..., 1, 1].real) - np.abs(v[..., 0, 1]) ** 2
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    return 0.5 * (tr - disc)


def _check_hermitian(tf: TensorField) -> None:
    v = tf.values
    herm_defect = np.abs(v - np.conj(np.swapaxes(v, -1, -2))).max(axis=(-1, -2))
    scale = np.abs(v).max(axis=(-1, -2))
    bad = herm_defect > HERMITIAN_RTOL * np.maximum(scale, 1.0)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise CoefficientError(
            f"tensor {tf.role!r} is not Hermitian at node ({i},{j}): defect "
            f"{herm_defect[i, j]:.3e} exceeds {HERMITIAN_RTOL:g} relative"
        )


def validate_coefficients(A: TensorField, T: TensorField) -> CoercivityReport:
    """Check both fields are Hermitian PD on a common grid; return the
    coercivity constants (minimum eigenvalue over all nodes)."""
    if A.shape != T.shape:
        raise CoefficientError(f"fields sampled on different grids: {A.shape} vs {T.shape}")
    consts = []
    for tf in (A, T):
        _check_hermitian(tf)
        lam = _min_eig_hermitian2(tf.values)
        if not (lam > 0).all():
            i, j = np.argwhere(lam <= 0)[0]
            raise CoefficientError(
                f"tensor {tf.role!r} not positive definite at node ({i},{j}): "
                f"min eigenvalue {lam[i, j]:.3e}"
            )
        consts.append(float(lam.min()))
    return CoercivityReport(c_A=consts[0], c_T=consts[1])


def coercivity_probe(A: TensorField, T: TensorField, nu: float, sample_vectors,
                     grid: GridSpec | None = None) -> dict:
    """Evaluate the margins Im(M_nu p . conj p)/(nu |p|^2) and, over nodes with
    x != 0, Re(M_nu p . conj p)/(x A p . conj p), for M_nu = x A + i nu T.

    The first margin equals the Rayleigh quotient of T and must stay >= c_T;
    the second is identically 1 wherever x A p . conj p != 0.
    """
    if nu <= 0:
        raise ValueError("coercivity probe requires nu > 0")
    probes = np.atleast_2d(np.asarray(sample_vectors, dtype=complex))
    if probes.shape[1] != 2:
        raise ValueError("probe vectors must be 2-vectors")
    norms2 = np.einsum("pk,pk->p", probes, probes.conj()).real
    if (norms2 == 0).any():
        raise ValueError("zero probe vector")
    nx = A.values.shape[0]
    x = np.linspace(-1.0, 1.0, nx)[:, None, None] if grid is None else grid.x_nodes[:, None, None]

    tq = np.einsum("pk,ijkl,pl->ijp", probes.conj(), T.values, probes).real
    aq = np.einsum("pk,ijkl,pl->ijp", probes.conj(), A.values, probes).real
    im_margin = (tq / norms2).min()
    xaq = x * aq
    mask = np.abs(x) > 0
    re_ratio = np.where(xaq != 0, xaq / np.where(xaq == 0, 1.0, xaq), 1.0)
    re_min = re_ratio[np.broadcast_to(mask, re_ratio.shape)].min()
    re_max = re_ratio[np.broadcast_to(mask, re_ratio.shape)].max()
    return {"im_margin": float(im_margin), "re_ratio_min": float(re_min),
            "re_ratio_max": float(re_max)}


# ---------------------------------------------------------------------------
# cold-plasma generator
# ---------------------------------------------------------------------------

@dataclass
class PlasmaParams:
    """Cold-plasma inputs: frequencies and the dimensionless profile S on the
    grid (scalar or array of shape (n_xnodes, ny)); nu is the collision
    absorption used by the full perturbed tensor."""

    omega: float
    omega_c: float
    S_profile: np.ndarray | float = 0.0
    nu: float = 0.0

    @property
    def D_I(self) -> float:
        return self.omega_c / self.omega

    def s_range(self) -> tuple[float, float]:
        d = self.D_I
        return (-d / (1.0 - d), d / (1.0 + d))

    def validate(self, grid: GridSpec | None = None) -> np.ndarray:
        if not (self.omega > 0 and self.omega_c > 0 and self.omega > self.omega_c):
            raise CoefficientError("plasma generator requires omega > omega_c > 0")
        d = self.D_I
        if not 0 < d < 1:
            raise CoefficientError(f"D_I = omega_c/omega = {d} outside (0,1)")
        S = np.asarray(self.S_profile, dtype=float)
        if grid is not None:
            S = np.broadcast_to(S, (grid.n_xnodes, grid.ny)).copy()
        lo, hi = self.s_range()
        if not ((S > lo) & (S < hi)).all():
            raise CoefficientError(
                f"S profile leaves the admissible range ({lo:.6g}, {hi:.6g})")
        D = d * (1.0 - S)
        if np.isclose(S, D).any() or np.isclose(S, -D).any():
            raise CoefficientError("S = +-D encountered; inverse tensor undefined")
        return S


def _deltas(params: PlasmaParams, S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First-order collision perturbations of (S, D)."""
    w, wc = params.omega, params.omega_c
    delta_s = (w * w + wc * wc) / (w * (w * w - wc * wc)) * (1.0 - S)
    delta_d = -2.0 * wc / (w * w - wc * wc) * (1.0 - S)
    return delta_s, delta_d


def _pack(m11, m12):
    """Hermitian 2x2 [[m11, i m12],[-i m12, m11]] with real m11, m12 arrays."""
    out = np.zeros(m11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = m11
    out[..., 1, 1] = m11
    out[..., 0, 1] = 1j * m12
    out[..., 1, 0] = -1j * m12
    return out


def _a_matrix(params: PlasmaParams, S: np.ndarray) -> np.ndarray:
    """Leading tensor a with S a = (inverse permittivity minus its constant
    antisymmetric part); Hermitian negative definite on the admissible range."""
    d = params.D_I
    D = d * (1.0 - S)
    denom = S * S - D * D
    return _pack(1.0 / denom, (S + D * d) / (d * denom))


def _t_matrix(params: PlasmaParams, S: np.ndarray) -> np.ndarray:
    """First-order absorption tensor t; Hermitian negative definite."""
    d = params.D_I
    D = d * (1.0 - S)
    ds, dd = _deltas(params, S)
    q = S * S + D * D
    denom2 = (S * S - D * D) ** 2
    m11 = (2.0 * D * S * dd - ds * q) / denom2
    m12 = (dd * q - 2.0 * S * D * ds) / denom2
    return _pack(m11, m12)


def plasma_tensors(params: PlasmaParams, grid: GridSpec) -> tuple[np.ndarray, TensorField, TensorField]:
    """Generate (S field, A, T) from cold-plasma parameters.

    The generator's native tensors a, t are negative definite; the returned
    pair is (-a, -t) so the solver sees positive-definite coefficients, at the
    price of flipping the sign of the right-hand side in the physical reading.
    """
    S = params.validate(grid)
    A = TensorField(-_a_matrix(params, S), role="A")
    T = TensorField(-_t_matrix(params, S), role="T")
    validate_coefficients(A, T)
    return S, A, T


def full_perturbed_tensor(params: PlasmaParams, grid: GridSpec, nu: float) -> np.ndarray:
    """Exact collision-perturbed inverse-permittivity tensor with its constant
    antisymmetric part removed, i.e. the exact counterpart of S a + i nu t.

    Computed from the exact substitution omega_p^2 -> omega_p^2 w/w_nu,
    omega_c -> omega_c w/w_nu with w_nu = omega + i nu.
    """
    S = params.validate(grid)
    w, wc = params.omega, params.omega_c
    wp2 = (1.0 - S) * (w * w - wc * wc)
    wnu = w + 1j * nu
    S_nu = 1.0 - wp2 * wnu / (w * (wnu * wnu - wc * wc))
    D_nu = wc * wp2 / (w * (wnu * wnu - wc * wc))
    denom = S_nu * S_nu - D_nu * D_nu
    alpha = np.zeros(S.shape + (2, 2), dtype=complex)
    alpha[..., 0, 0] = S_nu / denom
    alpha[..., 1, 1] = S_nu / denom
    alpha[..., 0, 1] = 1j * D_nu / denom
    alpha[..., 1, 0] = -1j * D_nu / denom
    d = params.D_I
    const = np.zeros((2, 2), dtype=complex)
    const[0, 1] = -1j / d
    const[1, 0] = 1j / d
    return alpha - const


def expansion_remainder_ratio(params: PlasmaParams, grid: GridSpec, nu: float) -> float:
    """Max-norm ratio of the expansion remainders at nu and nu/2.

    The remainder r(nu) = alpha_nu - (S a + i nu t) is second order in nu, so
    the ratio should be close to 4.
    """
    S = params.validate(grid)
    lead = S[..., None, None] * _a_matrix(params, S)
    t = _t_matrix(params, S)

    def rem(n):
        return np.abs(full_perturbed_tensor(params, grid, n) - lead - 1j * n * t).max()

    return rem(nu) / rem(0.5 * nu)
