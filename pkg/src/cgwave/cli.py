"""Batch command-line front end.

Subcommands: edge, dno-verify, spectrum, dprime, evolve.  Every successful
run writes the resolved configuration, the artifacts (CSV/JSON/WSF1) and a
manifest into the output directory.  Exit codes: 0 success, 2 configuration
problems, 3 numeric/domain failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import CgwaveError, ConfigurationError
from .params import PhysParams
from .spectral import RealField, make_grid, write_wsf1
from . import reporting
from .waves import LumpProfile, Q0_field, approx_solitary_state, d_prime, \
    d_second_leading, default_half_length, lump_l2sq_quadrature

OUT_ROOT_ENV = "CGWAVE_OUT_ROOT"


def _out_dir(args) -> Path:
    root = Path(args.out) if args.out else Path(os.environ.get(OUT_ROOT_ENV, "."))
    root.mkdir(parents=True, exist_ok=True)
    return root


def _resolved(args, names) -> dict:
    cfg = {"subcommand": args.subcommand}
    for n in names:
        cfg[n] = getattr(args, n)
    return cfg


def _finish(out: Path, cfg: dict, paths: list) -> None:
    cfg_path = out / "resolved_config.json"
    reporting.write_json(cfg_path, cfg)
    paths = list(paths) + [cfg_path]
    reporting.write_manifest(paths, out)


def _params_from(args) -> PhysParams:
    if args.kp:
        return PhysParams.kp_regime(sigma=args.sigma, eps=args.eps)
    c = args.c if args.c is not None else (1.0 + args.eps**2) ** -0.5
    return PhysParams(g=args.g, h=args.h, sigma=args.sigma, c=c, eps=args.eps)


def cmd_edge(args) -> int:
    from .symbols import spectral_edge
    params = _params_from(args)
    res = spectral_edge(params)
    print(f"sigma_star = {res.sigma_star!r} ({res.regime}, "
          f"minimizer_k1 = {res.minimizer_k1!r})")
    out = _out_dir(args)
    csvp = out / "edge.csv"
    reporting.write_csv(csvp, ("sigma_star", "regime", "minimizer_k1", "lambda", "bond"),
                        [(res.sigma_star, res.regime, res.minimizer_k1,
                          params.lam, params.bond)])
    _finish(out, _resolved(args, ("g", "h", "sigma", "eps", "c", "kp", "out")), [csvp])
    return 0


def cmd_dno_verify(args) -> int:
    from . import dno as _dno
    from .spectral import inner, sobolev_norm
    grid = make_grid(args.nx, args.ny, args.Lx, args.Ly)
    rng = np.random.default_rng(args.seed)
    X, Y = grid.meshgrid()
    kx, ky = np.pi / args.Lx, np.pi / args.Ly
    eta = RealField(grid, args.amp * np.cos(2 * kx * X) * np.cos(ky * Y))
    xi = RealField(grid, np.cos(kx * X) + 0.3 * np.sin(2 * kx * X) * np.cos(2 * ky * Y))
    elliptic = _dno.dno_apply(eta, xi, h=args.h, nz=args.nz)
    scale = sobolev_norm(elliptic, "L2")
    rows = []
    for order in range(args.order + 1):
        nd = _dno.nd_series_apply(eta, elliptic, order=order, h=args.h, nz=args.nz)
        err_vals = nd.values - nd.values.mean() - (xi.values - xi.values.mean())
        rel = sobolev_norm(RealField(grid, err_vals), "L2") / sobolev_norm(xi, "L2")
        rows.append((order, rel))
        print(f"series order {order}: composition relative error {rel:.3e}")
    out = _out_dir(args)
    csvp = out / "dno_verify.csv"
    reporting.write_csv(csvp, ("order", "composition_rel_err"), rows)
    _finish(out, _resolved(args, ("nx", "ny", "Lx", "Ly", "h", "amp", "order",
                                  "nz", "seed", "out")), [csvp])
    return 0


def cmd_spectrum(args) -> int:
    from .eigensolve import lowest_eigenpairs
    from . import linops
    L = args.L if args.L is not None else default_half_length(args.sigma)
    grid = make_grid(args.nx, args.ny, L, L)
    if args.operator == "A0":
        op = linops.a0_handle(args.sigma, grid)
    elif args.operator == "B_eps":
        op = linops.b_eps_handle(args.eps, args.sigma, grid)
    elif args.operator == "C_eps":
        op = linops.c_eps_handle(args.eps, args.sigma, grid)
    elif args.operator == "L0":
        op = linops.l0_handle(args.sigma, grid)
    elif args.operator == "A_flat":
        op = linops.a_flat_handle(_params_from(args), grid)
    else:
        raise ConfigurationError(f"unknown operator {args.operator!r}")
    rep = lowest_eigenpairs(op, m=args.num, tol=args.tol, seed=args.seed)
    for i, (ev, res) in enumerate(zip(rep.eigenvalues, rep.residuals)):
        flag = "discrete" if rep.discrete_candidates[i] else "continuum-band"
        print(f"lambda_{i} = {ev:+.10e}   residual {res:.2e}   [{flag}]")
    print(f"continuum edge = {rep.continuum_edge!r}")
    out = _out_dir(args)
    paths = reporting.write_spectrum(rep, out)
    _finish(out, _resolved(args, ("operator", "sigma", "eps", "nx", "ny", "L",
                                  "num", "tol", "seed", "out", "g", "h", "c", "kp")),
            paths)
    return 0


def cmd_dprime(args) -> int:
    params = PhysParams.kp_regime(sigma=args.sigma, eps=args.eps)
    i0 = lump_l2sq_quadrature(args.sigma)
    dsec = d_second_leading(params)
    print(f"lump L2^2 integral = {i0!r}")
    print(f"d''(c) leading term = {dsec!r} (positive: {dsec > 0})")
    rows = [(args.sigma, args.eps, i0, dsec)]
    out = _out_dir(args)
    csvp = out / "dprime.csv"
    reporting.write_csv(csvp, ("sigma", "eps", "lump_l2sq", "d_second_leading"), rows)
    _finish(out, _resolved(args, ("sigma", "eps", "out")), [csvp])
    return 0


def even_bump_perturbation(state, params, fraction: float):
    """Even-in-both-variables bump sized `fraction` of max|eta|."""
    grid = state.eta.grid
    X, Y = grid.meshgrid()
    eps = params.eps
    sx, sy = eps * X, eps**2 * Y
    a = 3.0 * params.sigma - 1.0
    bump = np.exp(-(sx**2 + sy**2) / (2.0 * a))
    amp = fraction * float(np.max(np.abs(state.eta.values)))
    from .spectral import WaveState, dealias
    eta = dealias(RealField(grid, state.eta.values + amp * bump))
    return WaveState(eta, state.xi)


def cmd_evolve(args) -> int:
    from .evolve import run_evolution
    params = PhysParams.kp_regime(sigma=args.sigma, eps=args.eps)
    Lx = args.Lx if args.Lx is not None else default_half_length(args.sigma) / args.eps
    Ly = args.Ly if args.Ly is not None else default_half_length(args.sigma) / args.eps**2
    grid = make_grid(args.nx, args.ny, Lx, Ly)
    reference = approx_solitary_state(params, grid, boundary_tol=args.boundary_tol)
    initial = even_bump_perturbation(reference, params, args.perturb) \
        if args.perturb else reference
    log = run_evolution(initial, T=args.T, dt=args.dt, params=params,
                        reference=reference, nz=args.nz, out_stride=args.stride,
                        dno_tol=args.dno_tol,
                        snapshot_stride=args.snapshot_stride)
    hmax = float(np.max(log.h_drift_rel))
    pmax = float(np.max(log.p_drift_rel))
    print(f"H drift (rel, max) = {hmax:.3e}")
    print(f"P drift (rel, max) = {pmax:.3e}")
    print(f"orbital distance: start {log.orbital[0]!r} max {np.max(log.orbital)!r}")
    out = _out_dir(args)
    paths = reporting.write_evolution(log, out)
    _finish(out, _resolved(args, ("sigma", "eps", "T", "dt", "nx", "ny", "Lx", "Ly",
                                  "nz", "perturb", "stride", "snapshot_stride",
                                  "dno_tol", "boundary_tol", "seed", "out")), paths)
    return 0


def _add_common(p, *, grid=False):
    p.add_argument("--out", default=None, help="output directory "
                   f"(default: ${OUT_ROOT_ENV} or cwd)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None,
                   help="JSON file of flat key/value pairs; flags override")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cgwave",
                                 description="spectral water-wave operator toolkit")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    pe = sub.add_parser("edge", help="continuum edge of the flat linearized operator")
    pe.add_argument("--g", type=float, default=1.0)
    pe.add_argument("--h", type=float, default=1.0)
    pe.add_argument("--sigma", type=float, default=1.0)
    pe.add_argument("--eps", type=float, default=0.1)
    pe.add_argument("--c", type=float, default=None)
    pe.add_argument("--kp", action="store_true", help="normalized regime")
    _add_common(pe)
    pe.set_defaults(fn=cmd_edge)

    pd = sub.add_parser("dno-verify", help="flat/elliptic/series agreement")
    pd.add_argument("--nx", type=int, default=64)
    pd.add_argument("--ny", type=int, default=64)
    pd.add_argument("--Lx", type=float, default=np.pi)
    pd.add_argument("--Ly", type=float, default=np.pi)
    pd.add_argument("--h", type=float, default=1.0)
    pd.add_argument("--amp", type=float, default=0.02)
    pd.add_argument("--order", type=int, default=4)
    pd.add_argument("--nz", type=int, default=24)
    _add_common(pd)
    pd.set_defaults(fn=cmd_dno_verify)

    ps = sub.add_parser("spectrum", help="lowest eigenvalues of an operator handle")
    ps.add_argument("--operator", default="A0",
                    choices=("A0", "B_eps", "C_eps", "L0", "A_flat"))
    ps.add_argument("--sigma", type=float, default=1.0)
    ps.add_argument("--eps", type=float, default=0.1)
    ps.add_argument("--nx", type=int, default=128)
    ps.add_argument("--ny", type=int, default=128)
    ps.add_argument("--L", type=float, default=None,
                    help="half-length (default 20 sqrt(3 sigma - 1))")
    ps.add_argument("--num", type=int, default=6)
    ps.add_argument("--tol", type=float, default=1e-8)
    ps.add_argument("--g", type=float, default=1.0)
    ps.add_argument("--h", type=float, default=1.0)
    ps.add_argument("--c", type=float, default=None)
    ps.add_argument("--kp", action="store_true")
    _add_common(ps)
    ps.set_defaults(fn=cmd_spectrum)

    pp = sub.add_parser("dprime", help="convexity quantity d''(c) leading term")
    pp.add_argument("--sigma", type=float, default=1.0)
    pp.add_argument("--eps", type=float, default=0.1)
    _add_common(pp)
    pp.set_defaults(fn=cmd_dprime)

    pv = sub.add_parser("evolve", help="conservative evolution experiment")
    pv.add_argument("--sigma", type=float, default=1.0)
    pv.add_argument("--eps", type=float, default=0.1)
    pv.add_argument("--T", type=float, default=20.0)
    pv.add_argument("--dt", type=float, default=0.01)
    pv.add_argument("--nx", type=int, default=64)
    pv.add_argument("--ny", type=int, default=64)
    pv.add_argument("--Lx", type=float, default=None)
    pv.add_argument("--Ly", type=float, default=None)
    pv.add_argument("--nz", type=int, default=8)
    pv.add_argument("--perturb", type=float, default=0.0,
                    help="even perturbation as a fraction of max|eta|")
    pv.add_argument("--stride", type=int, default=50)
    pv.add_argument("--snapshot-stride", dest="snapshot_stride", type=int, default=None)
    pv.add_argument("--dno-tol", dest="dno_tol", type=float, default=1e-10)
    pv.add_argument("--boundary-tol", dest="boundary_tol", type=float, default=1e-2)
    _add_common(pv)
    pv.set_defaults(fn=cmd_evolve)
    return ap


def run_command(argv=None) -> int:
    """Parse argv, run the subcommand, map errors to exit codes."""
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.config:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return 2
        given = {a for a in sys.argv if a.startswith("--")} if argv is None else \
            {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
        for key, val in overrides.items():
            if hasattr(args, key) and key not in given:
                setattr(args, key, val)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CgwaveError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
