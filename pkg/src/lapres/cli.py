"""Experiment runner: YAML configs, solve/sweep/decompose/limit/oracle1d/
plasma-gen/verify commands, field dumps with JSON sidecars, CSV reports."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .grid import GridSpec, build_grid
from .coefficients import (
    CoefficientError,
    PlasmaParams,
    TensorField,
    constant_field,
    expansion_remainder_ratio,
    identity_field,
    plasma_tensors,
    smooth_field,
    validate_coefficients,
)
from .linsolve import SolverError
from .interface import InterfaceTrace, sobolev_norm, discrete_l2
from .decomposition import split, trace_of_regular, jump_residual
from .limiting import (
    lap_sweep,
    manufactured_solution,
    r_field,
    solve_absorption,
    solve_limiting,
)
from .oned import limit_1d, solve_1d
from . import verify as verify_mod

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

CSV_HEADER = "nu,l2,xgrad,sqrtnu_grad,g_hm12,g_h12,jump_res,cauchy"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# field dump format: raw little-endian complex128 payload + JSON sidecar
# ---------------------------------------------------------------------------

def write_field(base: Path, array: np.ndarray, grid: GridSpec | None = None,
                name: str = "") -> None:
    arr = np.ascontiguousarray(np.asarray(array, dtype=complex)).astype("<c16")
    base.parent.mkdir(parents=True, exist_ok=True)
    base.with_suffix(".bin").write_bytes(arr.tobytes())
    meta = {
        "name": name or base.name,
        "dims": list(arr.shape),
        "ordering": "row-major, y fastest",
        "scalar": "complex128 stored as little-endian float64 (re, im) pairs",
        "endianness": "little",
    }
    if grid is not None:
        meta["domain"] = {"a": grid.a, "ell": grid.ell,
                          "nx_half": grid.nx_half, "ny": grid.ny}
    base.with_suffix(".json").write_text(json.dumps(meta, indent=1, sort_keys=True))


def read_field(base: Path) -> tuple[np.ndarray, dict]:
    meta = json.loads(base.with_suffix(".json").read_text())
    raw = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype="<c16")
    return raw.reshape(meta["dims"]).astype(complex), meta


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

DEFAULT_CONFIG = {
    "grid": {"a": 1.0, "ell": 1.0, "nx_half": 32, "ny": 64},
    "coeff": {"preset": "identity"},
    "rhs": {"preset": "one"},
    "nu": 1e-2,
    "omega": 0.0,
    "branch": 1,
    "sweep": {"nu_list": [1e-1, 5e-2, 2.5e-2, 1e-2, 5e-3, 2.5e-3]},
    "limit": {"tol_jump": 1e-8},
    "tolerances": {"solver": 1e-10},
    "out": "out",
}


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> dict:
    cfg = DEFAULT_CONFIG
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            user = yaml.safe_load(p.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a mapping")
        cfg = _merge(cfg, user)
    return cfg


def config_grid(cfg: dict) -> GridSpec:
    g = cfg["grid"]
    try:
        return build_grid(float(g["a"]), float(g["ell"]), int(g["nx_half"]), int(g["ny"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid block: {exc}") from exc


def _tensor_from_table(path: Path, grid: GridSpec, role: str) -> TensorField:
    if not path.with_suffix(".json").exists():
        raise ConfigError(f"tensor table {path} missing")
    arr, _ = read_field(path)
    if arr.shape != (grid.n_xnodes, grid.ny, 2, 2):
        raise ConfigError(f"tensor table {path} has shape {arr.shape}, "
                          f"expected {(grid.n_xnodes, grid.ny, 2, 2)}")
    return TensorField(arr, role)


def config_coefficients(cfg: dict, grid: GridSpec) -> tuple[TensorField, TensorField]:
    block = cfg.get("coeff", {})
    preset = block.get("preset", "identity")
    if block.get("file"):
        d = Path(block["file"])
        A = _tensor_from_table(d / "A", grid, "A")
        T = _tensor_from_table(d / "T", grid, "T")
    elif preset == "identity":
        A, T = identity_field(grid, "A"), identity_field(grid, "T")
    elif preset == "constant":
        try:
            A = constant_field(grid, _matrix(block["a_matrix"]), "A")
            T = constant_field(grid, _matrix(block["t_matrix"]), "T")
        except (KeyError, CoefficientError) as exc:
            raise ConfigError(f"constant coefficient block invalid: {exc}") from exc
    elif preset == "smooth":
        amp = float(block.get("amplitude", 0.3))
        A = smooth_field(grid, amp, "A")
        T = smooth_field(grid, 0.5 * amp, "T")
    elif preset == "plasma":
        _, A, T = plasma_tensors(_plasma_params(cfg, grid), grid)
    else:
        raise ConfigError(f"unknown coefficient preset {preset!r}")
    try:
        validate_coefficients(A, T)
    except CoefficientError as exc:
        raise ConfigError(f"coefficients rejected: {exc}") from exc
    return A, T


def _matrix(entries) -> np.ndarray:
    m = np.asarray([[complex(*map(float, e)) if isinstance(e, (list, tuple))
                     else complex(e) for e in row] for row in entries])
    if m.shape != (2, 2):
        raise CoefficientError("matrix entries must form a 2x2 block")
    return m


def _plasma_params(cfg: dict, grid: GridSpec) -> PlasmaParams:
    block = cfg.get("plasma", {})
    try:
        omega = float(block["omega"])
        omega_c = float(block["omega_c"])
    except KeyError as exc:
        raise ConfigError(f"plasma block needs omega and omega_c: {exc}") from exc
    s_preset = block.get("s_preset", "uniform")
    s0 = float(block.get("s_value", 0.0))
    if s_preset == "uniform":
        S = np.full((grid.n_xnodes, grid.ny), s0)
    elif s_preset == "linear-x":
        S = s0 * np.broadcast_to(grid.x_nodes[:, None] / grid.a,
                                 (grid.n_xnodes, grid.ny)).copy()
    else:
        raise ConfigError(f"unknown S preset {s_preset!r}")
    return PlasmaParams(omega=omega, omega_c=omega_c, S_profile=S,
                        nu=float(block.get("nu", 0.0)))


def config_rhs(cfg: dict, grid: GridSpec, nu: float) -> np.ndarray:
    block = cfg.get("rhs", {})
    preset = block.get("preset", "one")
    if block.get("file"):
        p = Path(block["file"])
        if not p.with_suffix(".json").exists():
            raise ConfigError(f"rhs file {p} missing")
        arr, _ = read_field(p)
        if arr.shape != (grid.n_xnodes, grid.ny):
            raise ConfigError(f"rhs table has shape {arr.shape}")
        return arr.reshape(grid.n_dofs)
    if preset == "one":
        return np.ones(grid.n_dofs, dtype=complex)
    if preset == "zero":
        return np.zeros(grid.n_dofs, dtype=complex)
    if preset == "manufactured":
        return manufactured_solution(grid, nu)[1]
    raise ConfigError(f"unknown rhs preset {preset!r}")


def write_manifest(out: Path, command: str, cfg: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": cfg,
        "versions": {
            "lapres": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "tolerances": cfg.get("tolerances", {}),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True,
                                                  default=str))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sweep_csv(path: Path, records) -> None:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join(_fmt(v) for v in (
            r.nu, r.l2, r.xgrad, r.sqrtnu_grad, r.g_hm12, r.g_h12,
            r.jump_res, r.cauchy)))
    path.write_text("\n".join(lines) + "\n")


def _trace_report(g: InterfaceTrace) -> dict:
    return {
        "l2": sobolev_norm(g, 0.0),
        "h_minus_half": sobolev_norm(g, -0.5),
        "h_half": sobolev_norm(g, 0.5),
        "mean": [float(np.mean(g.values).real), float(np.mean(g.values).imag)],
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(cfg: dict, out: Path, quiet: bool) -> int:
    grid = config_grid(cfg)
    A, T = config_coefficients(cfg, grid)
    nu = float(cfg["nu"])
    f = config_rhs(cfg, grid, nu)
    u, g = solve_absorption(grid, A, T, f, nu, omega=float(cfg["omega"]))
    write_field(out / "u", u.reshape(grid.n_xnodes, grid.ny), grid, "u")
    write_field(out / "g", g.values, grid, "conormal trace")
    report = {"nu": nu, "l2": discrete_l2(u, grid), "g": _trace_report(g)}
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    if not quiet:
        print(f"solved nu={nu:g}: |u|_L2 = {report['l2']:.6g}")
    return EXIT_OK


def cmd_sweep(cfg: dict, out: Path, quiet: bool) -> int:
    grid = config_grid(cfg)
    A, T = config_coefficients(cfg, grid)
    nu_list = [float(v) for v in cfg["sweep"]["nu_list"]]
    f = config_rhs(cfg, grid, nu_list[0])
    records, u_last, _ = lap_sweep(grid, A, T, f, nu_list, omega=float(cfg["omega"]))
    write_sweep_csv(out / "sweep.csv", records)
    write_field(out / "u_limit_surrogate", u_last.reshape(grid.n_xnodes, grid.ny),
                grid, "u at smallest nu")
    if not quiet:
        for r in records:
            print(f"nu={r.nu:<10g} l2={r.l2:.6g} jump_res={r.jump_res:.3e}")
    return EXIT_OK


def cmd_decompose(cfg: dict, out: Path, quiet: bool) -> int:
    grid = config_grid(cfg)
    A, T = config_coefficients(cfg, grid)
    nu = float(cfg["nu"])
    branch = int(np.sign(nu))
    f = config_rhs(cfg, grid, nu)
    u, g = solve_absorption(grid, A, T, f, nu, omega=float(cfg["omega"]))
    dec = split(grid, u, g, A, nu=nu, r_field=r_field(A, T), branch_sign=branch)
    rho, rel = jump_residual(dec)
    tp = trace_of_regular(dec, "p")
    tn = trace_of_regular(dec, "n")
    for name, arr in (("u", u), ("u_h", dec.u_h), ("u_reg", dec.u_reg)):
        write_field(out / name, arr.reshape(grid.n_xnodes, grid.ny), grid, name)
    write_field(out / "g", g.values, grid, "conormal trace")
    report = {
        "nu": nu,
        "jump_residual_rel": rel,
        "jump_residual_l2": sobolev_norm(rho, 0.0),
        "jump_residual_h_half": sobolev_norm(rho, 0.5),
        "trace_p_mean": [float(np.mean(tp.values).real), float(np.mean(tp.values).imag)],
        "trace_n_mean": [float(np.mean(tn.values).real), float(np.mean(tn.values).imag)],
        "g": _trace_report(g),
    }
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    if not quiet:
        print(f"decomposed nu={nu:g}: jump residual {rel:.3e}")
    return EXIT_OK


def cmd_limit(cfg: dict, out: Path, quiet: bool) -> int:
    grid = config_grid(cfg)
    A, T = config_coefficients(cfg, grid)
    f = config_rhs(cfg, grid, 0.0)
    sol = solve_limiting(grid, A, T, f, tol_jump=float(cfg["limit"]["tol_jump"]),
                         branch_sign=int(cfg["branch"]))
    write_field(out / "u", sol.u.reshape(grid.n_xnodes, grid.ny), grid, "u limit")
    write_field(out / "g", sol.g.values, grid, "conormal trace")
    report = {
        "jump_residual_rel": sol.jump_residual_rel,
        "interface_condition": sol.interface_condition,
        "g": _trace_report(sol.g),
    }
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    if not quiet:
        print(f"limit solve: |g| = {report['g']['l2']:.6g}, "
              f"jump residual {sol.jump_residual_rel:.3e}")
    return EXIT_OK


def cmd_oracle1d(cfg: dict, out: Path, quiet: bool) -> int:
    grid = config_grid(cfg)
    nu = float(cfg["nu"])
    xs = grid.x_nodes
    sol = solve_1d(lambda t: 1.0, lambda t: 1.0, nu, grid.a, x_eval=xs)
    lim = limit_1d(lambda t: 1.0, lambda t: 1.0, grid.a, x_eval=xs)
    lines = ["x,re_u,im_u,re_ulimit,im_ulimit"]
    for x, v, w in zip(xs, sol.values, lim.values):
        lines.append(",".join(_fmt(t) for t in (x, v.real, v.imag, w.real, w.imag)))
    (out / "oracle1d.csv").write_text("\n".join(lines) + "\n")
    report = {
        "nu": nu,
        "kappa": [sol.kappa.real, sol.kappa.imag],
        "d": [sol.d.real, sol.d.imag],
        "g": [sol.g.real, sol.g.imag],
        "limit_kappa": [lim.kappa.real, lim.kappa.imag],
        "limit_jump": [lim.jump.real, lim.jump.imag],
    }
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    if not quiet:
        print(f"oracle kappa = {sol.kappa:.6g}, limit jump = {lim.jump:.6g}")
    return EXIT_OK


def cmd_plasma_gen(cfg: dict, out: Path, quiet: bool) -> int:
    grid = config_grid(cfg)
    params = _plasma_params(cfg, grid)
    S, A, T = plasma_tensors(params, grid)
    report_fields = validate_coefficients(A, T)
    write_field(out / "S", S.astype(complex), grid, "S profile")
    write_field(out / "A", A.values, grid, "tensor A")
    write_field(out / "T", T.values, grid, "tensor T")
    report = {
        "D_I": params.D_I,
        "s_range": list(params.s_range()),
        "c_A": report_fields.c_A,
        "c_T": report_fields.c_T,
    }
    if params.nu > 0:
        report["remainder_ratio"] = expansion_remainder_ratio(params, grid, params.nu)
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    if not quiet:
        print(f"plasma tensors: c_A={report['c_A']:.6g} c_T={report['c_T']:.6g}")
    return EXIT_OK


def cmd_verify(cfg: dict, out: Path, quiet: bool) -> int:
    results = verify_mod.run_suite(cfg, quiet=quiet)
    (out / "verify.json").write_text(json.dumps(
        [{"name": n, "passed": ok, "detail": d} for n, ok, d in results],
        indent=1, sort_keys=True))
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VERIFY


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "decompose": cmd_decompose,
    "limit": cmd_limit,
    "oracle1d": cmd_oracle1d,
    "plasma-gen": cmd_plasma_gen,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lapres",
        description="Degenerate-interface limiting-absorption laboratory")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="YAML config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--nu", type=float, default=None, help="override nu")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg["out"] = args.out
        if args.nu is not None:
            cfg["nu"] = args.nu
        out = Path(cfg["out"])
        write_manifest(out, args.command, cfg)
        code = COMMANDS[args.command](cfg, out, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, CoefficientError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return code


if __name__ == "__main__":
    sys.exit(main())
