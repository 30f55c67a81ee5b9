"""Self-contained property suite behind the `verify` command: one line per
suite, PASS/FAIL, at desk scale."""

from __future__ import annotations

import numpy as np

from .grid import build_grid, interface_dofs
from .coefficients import (
    PlasmaParams,
    expansion_remainder_ratio,
    identity_field,
    plasma_tensors,
    smooth_field,
    validate_coefficients,
)
from . import assembly
from .interface import (
    InterfaceTrace,
    bessel_potential,
    discrete_l2,
    harmonic_lifting,
    sobolev_norm,
    spectral_dy,
    trapezoid_weights,
    weighted_norm,
)
from .decomposition import extracted_jump, split
from .limiting import (
    green_check,
    lap_sweep,
    manufactured_solution,
    r_field,
    solve_absorption,
    solve_limiting,
    uniqueness_pairing,
)
from .oned import solve_1d


def _weighted_field_norm(u, grid):
    w = trapezoid_weights(grid)
    vals = np.asarray(u).reshape(grid.n_xnodes, grid.ny)
    return float(np.sqrt(np.sum(w[:, None] * grid.h_y * np.abs(vals) ** 2)))


def run_suite(cfg: dict, quiet: bool = False) -> list[tuple[str, bool, str]]:
    from .cli import config_grid   # late import to avoid a cycle

    grid = config_grid(cfg)
    A = identity_field(grid, "A")
    T = identity_field(grid, "T")
    f_one = np.ones(grid.n_dofs, dtype=complex)
    results: list[tuple[str, bool, str]] = []

    def check(name, ok, detail=""):
        results.append((name, bool(ok), detail))
        if not quiet:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    # grid invariants
    x0 = grid.x_nodes[grid.ix_interface]
    wrap = all(grid.dof(i, grid.ny) == grid.dof(i, 0) for i in range(grid.n_xnodes))
    check("grid", x0 == 0.0 and wrap,
          f"interface node x = {x0!r}, periodic dof wrap {'ok' if wrap else 'broken'}")

    # coefficient validation
    rep = validate_coefficients(A, T)
    ok = rep.c_A == 1.0 and rep.c_T == 1.0
    rep2 = validate_coefficients(smooth_field(grid, 0.25), smooth_field(grid, 0.1, "T"))
    check("coefficients", ok and rep2.c_A > 0 and rep2.c_T > 0,
          f"identity c=({rep.c_A:g},{rep.c_T:g}), smooth c=({rep2.c_A:.3f},{rep2.c_T:.3f})")

    # plasma generator
    params = PlasmaParams(omega=2.0, omega_c=1.0, S_profile=0.0, nu=1e-2)
    lo, hi = params.s_range()
    _, Ap, Tp = plasma_tensors(params, grid)
    ratio = expansion_remainder_ratio(params, grid, 1e-2)
    ok = (abs(params.D_I - 0.5) < 1e-15 and abs(lo + 1.0) < 1e-12
          and abs(hi - 1.0 / 3.0) < 1e-12 and 3.5 <= ratio <= 4.5)
    check("plasma", ok, f"D_I={params.D_I:g}, S range=({lo:.4g},{hi:.4g}), "
          f"remainder ratio={ratio:.3f}")

    # interface norms: Parseval, filters, Bessel identity
    rng = np.random.default_rng(7)
    tr = InterfaceTrace(rng.normal(size=grid.ny) + 1j * rng.normal(size=grid.ny), grid.ell)
    pars = abs(np.sum(np.abs(tr.coeffs) ** 2) - grid.h_y * np.sum(np.abs(tr.values) ** 2))
    u_rand = rng.normal(size=grid.n_dofs) + 1j * rng.normal(size=grid.n_dofs)
    j2 = bessel_potential(bessel_potential(u_rand, grid), grid)
    lhs = _weighted_field_norm(j2, grid) ** 2
    rhs = _weighted_field_norm(u_rand, grid) ** 2 + _weighted_field_norm(
        spectral_dy(u_rand, grid), grid) ** 2
    bessel_ok = abs(lhs - rhs) <= 1e-10 * max(lhs, rhs)
    check("interface-norms", pars < 1e-10 and bessel_ok,
          f"Parseval defect {pars:.2e}, Bessel identity defect {abs(lhs-rhs)/max(lhs,rhs):.2e}")

    # harmonic lifting: trace reproduction and the delta^(1/2) bound
    t = InterfaceTrace(1.0 + np.cos(np.pi * grid.y_nodes / grid.ell)
                       + 0.3 * np.cos(3 * np.pi * grid.y_nodes / grid.ell), grid.ell)
    consts = []
    trace_ok = True
    for delta in (0.4, 0.2, 0.1, 0.05):
        lift = harmonic_lifting(t, delta, grid)
        row0 = lift.reshape(grid.n_xnodes, grid.ny)[grid.ix_interface]
        trace_ok &= np.allclose(row0, t.values, rtol=1e-12, atol=1e-12)
        wn = weighted_norm(lift, 0.0, grid, region="p")
        consts.append((wn.l2 + delta * wn.grad) / (np.sqrt(delta) * sobolev_norm(t, 0.5)))
    spread = max(consts) / min(consts)
    check("lifting", trace_ok and spread < 1.2,
          f"fitted constant spread {spread:.3f} over delta sweep")

    # assembly structure: Hermitian pieces and the adjoint relation
    nu = 0.05
    sysm = assembly.assemble_system(grid, A, T, nu, omega=0.3)
    plain = sysm.s_a + 1j * nu * sysm.s_t - 0.3 ** 2 * sysm.mass
    herm = abs((plain.conj().T - (sysm.s_a - 1j * nu * sysm.s_t
                                  - 0.3 ** 2 * sysm.mass)).tocoo().data).max() \
        if (plain.nnz) else 0.0
    sysm_m = assembly.assemble_system(grid, A, T, -nu, omega=0.3)
    adj = abs((sysm.raw.conj().T - sysm_m.raw).tocoo().data)
    adj = adj.max() if adj.size else 0.0
    check("assembly", herm < 1e-12 and adj < 1e-12,
          f"Hermitian-part defect {herm:.2e}, adjoint defect {adj:.2e}")

    # 1D oracle agreement (y-independent data)
    u2, _ = solve_absorption(grid, A, T, f_one, 1e-3)
    oracle = solve_1d(lambda s: 1.0, lambda s: 1.0, 1e-3, grid.a, x_eval=grid.x_nodes)
    err = np.abs(u2.reshape(grid.n_xnodes, grid.ny) - oracle.values[:, None]).max()
    rel = err / np.abs(oracle.values).max()
    check("oned-oracle", rel <= 1e-2, f"relative nodal error {rel:.2e}")

    # sweep: boundedness and Cauchy decrease
    records, u_last, dec_last = lap_sweep(grid, A, T, f_one, [4e-2, 2e-2, 1e-2, 5e-3])
    l2s = [r.l2 for r in records]
    cauchy = [r.cauchy for r in records[1:]]
    ok = max(l2s) / min(l2s) < 2 and all(b < a for a, b in zip(cauchy, cauchy[1:]))
    check("sweep", ok and records[-1].jump_res < 0.05,
          f"l2 spread {max(l2s)/min(l2s):.3f}, final jump residual "
          f"{records[-1].jump_res:.2e}")

    # limiting solver: zero data, anchors, uniqueness pairing
    sol0 = solve_limiting(grid, A, T, np.zeros(grid.n_dofs, dtype=complex))
    sol = solve_limiting(grid, A, T, f_one)
    g_ref = -2j / np.pi
    g_err = np.abs(sol.g.values - g_ref).max() / abs(g_ref)
    jump_err = np.abs(extracted_jump(sol.dec).values + 2.0).max() / 2.0
    lhs_u, rhs_u = uniqueness_pairing(sol.dec)
    pair_err = abs(lhs_u - rhs_u) / abs(rhs_u)
    ok = (sobolev_norm(sol0.g, 0.0) <= 1e-10 and g_err <= 0.03 and jump_err <= 0.03
          and sol.jump_residual_rel <= 1e-8 and pair_err < 1e-10)
    check("limiting", ok, f"g error {g_err:.2e}, jump error {jump_err:.2e}, "
          f"pairing defect {pair_err:.2e}")

    # agreement between the sweep surrogate and the direct limit
    agree = discrete_l2(sol.u - u_last, grid, exclude_interface=True) / \
        discrete_l2(f_one, grid)
    check("limit-agreement", agree <= 0.05, f"|u+ - u_nu|/|f| = {agree:.3f}")

    # Green identity, self pairing
    res = abs(green_check(sol.dec, sol.dec, f_one, f_one))
    check("green", res <= 1e-3, f"normalized residual {res:.2e}")

    # manufactured convergence, one halving
    errs = []
    for scale in (1, 2):
        gsub = build_grid(grid.a, grid.ell, 8 * scale, 8 * scale)
        Asub, Tsub = identity_field(gsub), identity_field(gsub, "T")
        ustar, fman = manufactured_solution(gsub, 0.1)
        usol, _ = solve_absorption(gsub, Asub, Tsub, fman, 0.1)
        errs.append(discrete_l2(usol - ustar, gsub))
    rate = float(np.log2(errs[0] / errs[1]))
    check("manufactured", rate >= 1.9, f"observed rate {rate:.3f}")

    return results
