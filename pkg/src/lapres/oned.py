"""Quadrature oracle for the y-independent reduction
((x + i nu) a(x) u')' = f on (-a, a) with u(+-a) = 0.

Deliberately independent of the 2D code path: everything is built from
adaptive Gauss-Kronrod quadrature of the closed-form flux representation
(x + i nu) a u' = F + c0,  F(x) = int_{-a}^x f.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

QUAD_TOL = 1e-12


def _cquad(fn: Callable[[float], complex], lo: float, hi: float) -> complex:
    if lo == hi:
        return 0.0 + 0.0j
    val, _ = quad(fn, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400,
                  complex_func=True)
    return val


@dataclass
class OneDSolution:
    x: np.ndarray
    values: np.ndarray
    kappa: complex            # amplitude of log(x + i nu)
    d: complex                # value of the continuous remainder at x = 0
    g: complex                # conormal trace (x + i nu) a u' at x = 0
    c0: complex               # integration constant of the flux
    nu: float


def _cumulative(fn, points: np.ndarray) -> np.ndarray:
    """Antiderivative values at sorted points, segmentwise adaptive."""
    acc = np.zeros(len(points), dtype=complex)
    for k in range(1, len(points)):
        acc[k] = acc[k - 1] + _cquad(fn, points[k - 1], points[k])
    return acc


def _breakpoints(a: float, x_eval: np.ndarray) -> np.ndarray:
    pts = np.unique(np.concatenate([[-a, 0.0, a], np.asarray(x_eval, dtype=float)]))
    if pts[0] < -a or pts[-1] > a:
        raise ValueError("evaluation abscissae must lie in [-a, a]")
    return pts


def solve_1d(f: Callable[[float], complex], a_coeff: Callable[[float], float],
             nu: float, a: float, x_eval=None) -> OneDSolution:
    """Oracle solve with nu != 0; principal branch of the logarithm."""
    if nu == 0.0:
        raise ValueError("solve_1d needs nu != 0; use limit_1d for the limit")
    if a <= 0:
        raise ValueError("half-width a must be positive")
    x_eval = np.linspace(-a, a, 257) if x_eval is None else np.asarray(x_eval, float)
    pts = _breakpoints(a, x_eval)

    F_at = dict(zip(pts, _cumulative(f, pts)))
    idx = np.searchsorted(pts, 0.0)

    def F(t: float) -> complex:
        k = min(np.searchsorted(pts, t), len(pts) - 1)
        base = pts[k] if pts[k] <= t or k == 0 else pts[k - 1]
        return F_at[base] + _cquad(f, base, t)

    def w(t: float) -> complex:
        return 1.0 / ((t + 1j * nu) * a_coeff(t))

    def Fw(t: float) -> complex:
        return F(t) * w(t)

    # split integrals at 0 where the integrand peaks
    denom = _cquad(w, -a, 0.0) + _cquad(w, 0.0, a)
    numer = _cquad(Fw, -a, 0.0) + _cquad(Fw, 0.0, a)
    c0 = -numer / denom

    def integrand(t: float) -> complex:
        return (F(t) + c0) * w(t)

    u_at = _cumulative(integrand, pts)
    lookup = dict(zip(pts, u_at))
    values = np.array([lookup[t] for t in x_eval], dtype=complex)

    F0 = F_at[0.0]
    kappa = (F0 + c0) / a_coeff(0.0)
    g = F0 + c0
    u0 = lookup[0.0]
    d = u0 - kappa * np.log(1j * nu)
    return OneDSolution(x=np.asarray(x_eval, float), values=values, kappa=kappa,
                        d=d, g=g, c0=c0, nu=nu)


@dataclass
class OneDLimit:
    x: np.ndarray
    values: np.ndarray        # u_plus; infinite at x = 0
    kappa: complex
    jump: complex             # jump of the regular part, -i pi kappa
    u_reg_p: complex          # regular-part trace from x > 0
    u_reg_n: complex          # regular-part trace from x < 0
    c0: complex


def _regularized(q: Callable[[float], complex], q0: complex):
    """(q(t) - q0)/t with the removable singularity patched."""

    def fn(t: float) -> complex:
        if abs(t) < 1e-9:
            eps = 1e-7
            return ((q(eps) - q(-eps)) / (2 * eps))
        return (q(t) - q0) / t

    return fn


def limit_1d(f: Callable[[float], complex], a_coeff: Callable[[float], float],
             a: float, x_eval=None) -> OneDLimit:
    """Analytic nu -> 0+ limit: u_plus = regular + kappa (log|x| + i pi 1_{x<0});
    int dt/(t + i0+) over (-a, a) contributes -i pi."""
    if a <= 0:
        raise ValueError("half-width a must be positive")
    x_eval = np.linspace(-a, a, 257) if x_eval is None else np.asarray(x_eval, float)
    pts = _breakpoints(a, x_eval)

    F_at = dict(zip(pts, _cumulative(f, pts)))

    def F(t: float) -> complex:
        k = min(np.searchsorted(pts, t), len(pts) - 1)
        base = pts[k] if pts[k] <= t or k == 0 else pts[k - 1]
        return F_at[base] + _cquad(f, base, t)

    def h(t: float) -> complex:
        return 1.0 / a_coeff(t)

    def P(t: float) -> complex:
        return F(t) * h(t)

    # int q/(t + i0+) = int (q - q(0))/t  - i pi q(0)
    P0, h0 = F_at[0.0] * h(0.0), h(0.0)
    pv_P = _cquad(_regularized(P, P0), -a, 0.0) + _cquad(_regularized(P, P0), 0.0, a)
    pv_h = _cquad(_regularized(h, h0), -a, 0.0) + _cquad(_regularized(h, h0), 0.0, a)
    c0 = -(pv_P - 1j * np.pi * P0) / (pv_h - 1j * np.pi * h0)

    def H(t: float) -> complex:
        return (F(t) + c0) * h(t)

    kappa = (F_at[0.0] + c0) * h0
    reg = _cumulative(_regularized(H, kappa), pts)
    reg_lookup = dict(zip(pts, reg))
    log_na = np.log(a)                       # log(-a + i0+) = log a + i pi

    def u_plus(t: float) -> complex:
        if t == 0.0:
            return complex(np.inf, np.inf)
        logfac = np.log(abs(t)) + (1j * np.pi if t < 0 else 0.0)
        return reg_lookup[t] + kappa * (logfac - (log_na + 1j * np.pi))

    values = np.array([u_plus(t) for t in x_eval], dtype=complex)
    u_reg_p = reg_lookup[0.0] - kappa * (log_na + 1j * np.pi)
    u_reg_n = u_reg_p + 1j * np.pi * kappa
    return OneDLimit(x=np.asarray(x_eval, float), values=values, kappa=kappa,
                     jump=-1j * np.pi * kappa, u_reg_p=u_reg_p, u_reg_n=u_reg_n,
                     c0=c0)
