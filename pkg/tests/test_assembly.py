import numpy as np
import pytest

from lapres import build_grid, assemble_system, assemble_rhs
from lapres.assembly import (
    assemble_subdomain,
    fitted_rhs,
    interface_load,
    interface_mass,
    mass_matrix,
)
from lapres.coefficients import identity_field, smooth_field
from lapres.grid import interface_dofs


def _oracle_plain_matrix(grid, nu):
    """Independent dense assembly of ((x + i nu) grad u, grad v) with 3x3
    Gauss (exact for the cubic integrand), plain Python loops."""
    import numpy.polynomial.legendre as leg
    pts, wts = leg.leggauss(3)
    pts = 0.5 * (pts + 1.0)
    wts = 0.5 * wts
    n = grid.n_dofs
    K = np.zeros((n, n), dtype=complex)
    h, k = grid.h_x, grid.h_y
    for icell in range(2 * grid.nx_half):
        for jcell in range(grid.ny):
            dofs = [grid.dof(icell, jcell), grid.dof(icell + 1, jcell),
                    grid.dof(icell + 1, jcell + 1), grid.dof(icell, jcell + 1)]
            x0 = grid.x_nodes[icell]
            for gx, wx in zip(pts, wts):
                for gy, wy in zip(pts, wts):
                    x = x0 + h * gx
                    c = x + 1j * nu
                    grads = [(-(1 - gy) / h, -(1 - gx) / k),
                             ((1 - gy) / h, -gx / k),
                             (gy / h, gx / k),
                             (-gy / h, (1 - gx) / k)]
                    for a in range(4):
                        for b in range(4):
                            val = c * (grads[a][0] * grads[b][0]
                                       + grads[a][1] * grads[b][1])
                            K[dofs[a], dofs[b]] += wx * wy * h * k * val
    return K


def test_plain_matrix_matches_hand_quadrature():
    grid = build_grid(1.0, 1.0, 2, 4)
    A, T = identity_field(grid), identity_field(grid, "T")
    sysm = assemble_system(grid, A, T, nu=1.0)
    plain = (sysm.s_a + 1j * sysm.s_t).toarray()
    oracle = _oracle_plain_matrix(grid, 1.0)
    assert np.abs(plain - oracle).max() < 1e-13


def test_conjugate_transpose_identity():
    grid = build_grid(1.0, 1.0, 4, 8)
    A = smooth_field(grid, 0.3)
    T = smooth_field(grid, 0.2, "T")
    nu, omega = 0.07, 0.4
    sysm = assemble_system(grid, A, T, nu, omega=omega)
    plain = sysm.s_a + 1j * nu * sysm.s_t - omega**2 * sysm.mass
    target = sysm.s_a - 1j * nu * sysm.s_t - omega**2 * sysm.mass
    assert np.abs((plain.conj().T - target).toarray()).max() < 1e-13
    # the exact-flux operator satisfies the adjoint relation raw(nu)^H = raw(-nu)
    sysm_m = assemble_system(grid, A, T, -nu, omega=omega)
    assert np.abs((sysm.raw.conj().T - sysm_m.raw).toarray()).max() < 1e-13


def test_constants_in_kernel_at_nu_zero():
    grid = build_grid(1.0, 1.0, 4, 8)
    A, T = identity_field(grid), identity_field(grid, "T")
    sysm = assemble_system(grid, A, T, nu=0.0)
    ones = np.ones(grid.n_dofs, dtype=complex)
    r = sysm.matrix @ ones
    interior = np.setdiff1d(np.arange(grid.n_dofs), sysm.dirichlet)
    assert np.abs(r[interior]).max() < 1e-13
    assert np.allclose(r[sysm.dirichlet], 1.0)


def test_dirichlet_rows_are_identity():
    grid = build_grid(1.0, 1.0, 4, 8)
    sysm = assemble_system(grid, identity_field(grid), identity_field(grid, "T"), 0.05)
    m = sysm.matrix.tocsr()
    for d in sysm.dirichlet:
        row = m.getrow(d)
        assert row.nnz == 1 and row[0, d] == 1.0


def test_garding_bound():
    grid = build_grid(1.0, 1.0, 8, 8)
    A = smooth_field(grid, 0.25)
    T = smooth_field(grid, 0.15, "T")
    from lapres.coefficients import validate_coefficients
    c_t = validate_coefficients(A, T).c_T
    nu = 0.03
    sysm = assemble_system(grid, A, T, nu)
    k_ident = assemble_system(grid, identity_field(grid), identity_field(grid, "T"), 0.0)
    rng = np.random.default_rng(11)
    for kind in ("plain", "fitted"):
        op = sysm.s_a + 1j * nu * sysm.s_t if kind == "plain" else sysm.raw
        for _ in range(5):
            v = rng.normal(size=grid.n_dofs) + 1j * rng.normal(size=grid.n_dofs)
            v[sysm.dirichlet] = 0.0
            im = np.vdot(v, op @ v).imag
            ref = np.vdot(v, k_ident.s_t @ v).real    # identity-coefficient |grad v|^2
            assert im >= nu * c_t * ref * (1 - 1e-10)


def test_rhs_zero_and_linearity():
    grid = build_grid(1.0, 1.0, 4, 8)
    f0 = np.zeros(grid.n_dofs, dtype=complex)
    assert np.all(assemble_rhs(grid, f0) == 0)
    rng = np.random.default_rng(5)
    f1 = rng.normal(size=grid.n_dofs).astype(complex)
    f2 = rng.normal(size=grid.n_dofs).astype(complex)
    b = assemble_rhs(grid, 2 * f1 - 3 * f2)
    assert np.allclose(b, 2 * assemble_rhs(grid, f1) - 3 * assemble_rhs(grid, f2))


def test_rhs_constant_rowsums():
    grid = build_grid(1.0, 1.0, 4, 8)
    b = assemble_rhs(grid, np.ones(grid.n_dofs, dtype=complex))
    interior = np.setdiff1d(np.arange(grid.n_dofs), grid.dirichlet_dofs())
    assert np.allclose(b[interior], -grid.h_x * grid.h_y)


def test_fitted_rhs_matches_quadrature_oracle():
    """Closed-form log-profile load integrals vs adaptive quadrature."""
    from scipy.integrate import quad
    grid = build_grid(1.0, 1.0, 4, 8)
    A, T = identity_field(grid), identity_field(grid, "T")
    nu = 0.02
    x = np.repeat(grid.x_nodes, grid.ny)
    y = np.tile(grid.y_nodes, grid.n_xnodes)
    f = (1.0 + 0.5 * x + 0.25 * np.sin(np.pi * y)).astype(complex)
    b = fitted_rhs(grid, f, A, T, nu)

    # oracle for the interface dof at j = 2: integrate f * phi-hat over the
    # four adjacent cells with the fitted x-profile
    j = 2
    dof = grid.dof(grid.ix_interface, j)
    h, k = grid.h_x, grid.h_y
    yj = grid.y_nodes[j]

    def fxy(xv, yv):
        return 1.0 + 0.5 * xv + 0.25 * np.sin(np.pi * yv)

    # fitted hat at x = 0: rising log profile on (-h,0), falling on (0,h)
    def hat_x(xv):
        if xv <= 0:
            lo, hi = -h + 1j * nu, 1j * nu
            return (np.log(xv + 1j * nu) - np.log(lo)) / (np.log(hi) - np.log(lo))
        lo, hi = 1j * nu, h + 1j * nu
        return 1.0 - (np.log(xv + 1j * nu) - np.log(lo)) / (np.log(hi) - np.log(lo))

    def hat_y(yv):
        return max(0.0, 1.0 - abs(yv - yj) / k)

    val = 0.0
    for (xlo, xhi) in ((-h, 0.0), (0.0, h)):
        for (ylo, yhi) in ((yj - k, yj), (yj, yj + k)):
            re = quad(lambda s: quad(
                lambda t: (fxy(t, s) * hat_x(t) * hat_y(s)).real, xlo, xhi)[0],
                ylo, yhi)[0]
            im = quad(lambda s: quad(
                lambda t: (fxy(t, s) * hat_x(t) * hat_y(s)).imag, xlo, xhi)[0],
                ylo, yhi)[0]
            val += re + 1j * im
    assert abs(b[dof] - (-val)) < 5e-4 * abs(val)


def test_subdomain_zero_data_gives_zero():
    grid = build_grid(1.0, 1.0, 4, 8)
    A, T = identity_field(grid), identity_field(grid, "T")
    from lapres.linsolve import solve
    for side in ("p", "n"):
        sysm, bg = assemble_subdomain(grid, side, A, T, 0.0)
        u, _ = solve(sysm, bg)
        assert np.abs(u).max() == 0.0


def test_subdomain_invalid_side():
    grid = build_grid(1.0, 1.0, 4, 8)
    with pytest.raises(ValueError, match="side"):
        assemble_subdomain(grid, "q", identity_field(grid), identity_field(grid, "T"), 0.0)


def test_interface_mass_rowsums():
    grid = build_grid(1.0, 1.0, 4, 8)
    m = interface_mass(grid)
    assert np.allclose(np.asarray(m.sum(axis=1)).ravel(), grid.h_y)


def test_interface_load_signs():
    grid = build_grid(1.0, 1.0, 4, 8)
    g = np.ones(grid.ny, dtype=complex)
    bp = interface_load(grid, g, "p")
    bn = interface_load(grid, g, "n")
    d = interface_dofs(grid)
    assert np.allclose(bp[d], -grid.h_y)
    assert np.allclose(bn[d], grid.h_y)
    mask = np.ones(grid.n_dofs, bool)
    mask[d] = False
    assert np.all(bp[mask] == 0) and np.all(bn[mask] == 0)
