"""Command-line front end.

Subcommands: ``precompute`` builds the on-disk K-matrix store, ``compute``
samples a phase-space function onto an equiangular grid, ``deriv`` samples
its analytic angular derivatives, ``bench`` runs the scaling harness.

Caches live under a root directory (``--cache`` or the SPINPHASE_CACHE
environment variable), one subdirectory per (d, s) pair.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .angular import SpinDimension, jy_eigenbasis
from .bench import cache_directory, default_grid_size, run_bench
from .fourier import derivative_coefficients, fourier_coefficients_method_c
from .gridfile import load_matrix, write_grid, write_grid_csv
from .kcache import CacheError, fourier_coefficients_method_d, open_cache, precompute_cache
from .parity import ParityOverflowError, build_parity
from .sampling import PhaseSpaceGrid, direct_grid, method_b_grid, sample_fft, window_extract
from . import states

KIND_TO_S = {"wigner": 0.0, "husimi": -1.0, "glauber": 1.0}
ENV_CACHE = "SPINPHASE_CACHE"


class CliError(Exception):
    pass


def _add_s_arguments(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--s", type=float, default=None,
                       help="phase-space order parameter in [-1, 1] (default 0)")
    group.add_argument("--kind", choices=sorted(KIND_TO_S),
                       help="named alias: wigner (s=0), husimi (s=-1), glauber (s=+1)")


def _resolve_s(args) -> float:
    if args.kind is not None:
        return KIND_TO_S[args.kind]
    return 0.0 if args.s is None else args.s


def _resolve_dim(d: int) -> SpinDimension:
    if d < 2:
        raise CliError(f"--dim must be at least 2 (J >= 1/2), got {d}")
    return SpinDimension.from_d(d)


def _cache_root(args) -> Path:
    root = args.cache or os.environ.get(ENV_CACHE)
    if root is None:
        raise CliError("no cache location: pass --cache or set " + ENV_CACHE)
    return Path(root)


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise CliError(f"--param expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def _build_state(args, dim: SpinDimension) -> tuple[np.ndarray, str]:
    if args.input is not None:
        rho = load_matrix(args.input)
        if rho.shape[0] != dim.d:
            raise CliError(f"input matrix is {rho.shape[0]}x{rho.shape[0]}, "
                           f"but --dim {dim.d} was requested")
        return rho, f"matrix:{args.input}"
    params = _parse_params(args.param)
    name = args.state
    if name == "ghz":
        return states.ghz(dim), "ghz"
    if name == "dicke":
        if "m" not in params:
            raise CliError("dicke needs --param m=<half-integer>")
        m = float(params["m"])
        return states.dicke(dim, m), f"dicke(m={m})"
    if name == "squeezed":
        xi = float(params.get("xi", 0.0))
        return states.squeezed(dim, xi), f"squeezed(xi={xi})"
    if name == "coherent":
        theta0 = float(params.get("theta0", 0.0))
        phi0 = float(params.get("phi0", 0.0))
        return states.coherent(dim, theta0, phi0), f"coherent({theta0},{phi0})"
    if name == "mixed":
        return states.maximally_mixed(dim), "mixed"
    if name == "random":
        if "seed" not in params:
            raise CliError("random needs --param seed=<int>")
        seed = int(params["seed"])
        return states.random_density(dim, seed), f"random(seed={seed})"
    raise CliError(f"unknown state family {name!r}")


def _compute_table(args, dim, rho, s):
    method = args.method
    parity = build_parity(dim, s)
    if method == "c":
        return fourier_coefficients_method_c(rho, parity, jy_eigenbasis(dim))
    if method == "d":
        directory = cache_directory(_cache_root(args), dim.d, s)
        try:
            cache = open_cache(directory, dim.d, s)
        except CacheError as exc:
            raise CliError(f"cannot use cached method: {exc}") from exc
        return fourier_coefficients_method_d(rho, cache)
    raise CliError(f"method {method!r} does not produce a coefficient table")


def _emit_grid(args, grid: PhaseSpaceGrid, description: str, out=None) -> None:
    out = out if out is not None else args.out
    window = None
    if args.window_theta_max is not None or args.window_phi is not None:
        theta_max = args.window_theta_max if args.window_theta_max is not None else np.pi
        phi_range = tuple(args.window_phi) if args.window_phi else None
        window = window_extract(grid, theta_max, phi_range)
    if args.format == "bin":
        if out is None:
            raise CliError("binary output needs --out")
        if window is not None:
            raise CliError("windows are only available with --format csv")
        write_grid(out, grid, description)
        print(f"wrote {out} (d={grid.dim.d}, s={grid.s}, n={grid.n}, "
              f"method={grid.method})")
        return
    stream = open(out, "w") if out is not None else sys.stdout
    try:
        if window is None:
            write_grid_csv(stream, grid)
        else:
            stream.write("theta,phi,re,im\n")
            for i, theta in enumerate(window.thetas):
                for jj, phi in enumerate(window.phis):
                    v = window.values[i, jj]
                    stream.write(f"{theta:.17g},{phi:.17g},{v.real:.17g},{v.imag:.17g}\n")
    finally:
        if out is not None:
            stream.close()
            print(f"wrote {out}")


def cmd_precompute(args) -> int:
    dim = _resolve_dim(args.dim)
    s = _resolve_s(args)
    directory = (Path(args.out) if args.out
                 else cache_directory(_cache_root(args), dim.d, s))
    cache = precompute_cache(dim, s, directory, force=args.force, workers=args.workers)
    k_bytes = cache.k_payload_bytes()
    print(f"{cache.last_action} cache in {cache.directory}")
    print(f"K-record payload: {k_bytes} bytes ({k_bytes / 1e3:.1f} kB)")
    print(f"companion payload: {cache.companion_payload_bytes()} bytes")
    return 0


def cmd_compute(args) -> int:
    dim = _resolve_dim(args.dim)
    s = _resolve_s(args)
    rho, description = _build_state(args, dim)
    n = args.n if args.n is not None else default_grid_size(dim)
    if args.method in ("c", "d"):
        table = _compute_table(args, dim, rho, s)
        grid = sample_fft(table, n, method=args.method)
    elif args.method == "b":
        grid = method_b_grid(rho, s, n)
    elif args.method == "direct":
        grid = direct_grid(rho, build_parity(dim, s), n)
    else:
        raise CliError(f"unknown method {args.method!r}")
    _emit_grid(args, grid, description)
    return 0


def cmd_deriv(args) -> int:
    dim = _resolve_dim(args.dim)
    s = _resolve_s(args)
    if args.method not in ("c", "d"):
        raise CliError("derivatives need a coefficient method: --method c or d")
    rho, description = _build_state(args, dim)
    n = args.n if args.n is not None else default_grid_size(dim)
    table = _compute_table(args, dim, rho, s)
    variables = ["theta", "phi"] if args.variable == "grad" else [args.variable]
    for variable in variables:
        deriv = derivative_coefficients(table, variable)
        grid = sample_fft(deriv, n, method=f"deriv-{variable}")
        out = args.out
        if out is not None and len(variables) > 1:
            path = Path(out)
            out = str(path.with_name(f"{path.stem}.d{variable}{path.suffix}"))
        _emit_grid(args, grid, f"d/d{variable} of {description}", out=out)
    return 0


def cmd_bench(args) -> int:
    dims = [int(tok) for tok in args.dims.split(",") if tok]
    methods = [tok.strip().lower() for tok in args.methods.split(",") if tok]
    cache_root = args.cache or os.environ.get(ENV_CACHE)
    report = run_bench(dims, methods, repetitions=args.reps, s=_resolve_s(args),
                       cache_root=cache_root, seed=args.seed, parallel=args.parallel)
    if args.out:
        with open(args.out, "w") as fh:
            report.to_csv(fh)
        print(f"wrote {args.out}")
    else:
        report.to_csv(sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinphase",
        description="Spherical phase-space functions of spin-J states")
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("precompute", help="build or verify a K-matrix cache")
    pre.add_argument("--dim", type=int, required=True, help="Hilbert dimension d = 2J+1")
    _add_s_arguments(pre)
    pre.add_argument("--out", help="exact cache directory (default: under cache root)")
    pre.add_argument("--cache", help="cache root directory")
    pre.add_argument("--force", action="store_true", help="rewrite even if verified")
    pre.add_argument("--workers", type=int, default=1,
                     help="parallel workers for the K-matrix loop")
    pre.set_defaults(func=cmd_precompute)

    helps = {"compute": "sample a phase-space function onto a grid",
             "deriv": "sample analytic angular derivatives onto a grid"}
    for name, func in (("compute", cmd_compute), ("deriv", cmd_deriv)):
        cmd = sub.add_parser(name, help=helps[name])
        src = cmd.add_mutually_exclusive_group(required=True)
        src.add_argument("--state",
                         choices=["ghz", "dicke", "squeezed", "coherent", "mixed", "random"])
        src.add_argument("--input", help="density-matrix file (.bin container or .csv)")
        cmd.add_argument("--param", action="append", metavar="KEY=VALUE",
                         help="state parameter (m=, xi=, theta0=, phi0=, seed=)")
        cmd.add_argument("--dim", type=int, required=True)
        _add_s_arguments(cmd)
        cmd.add_argument("--n", type=int, default=None,
                         help="grid size (even, >= 4J+2; default max(512, next pow2))")
        cmd.add_argument("--method", default="c",
                         choices=["c", "d", "b", "direct"] if name == "compute" else ["c", "d"])
        cmd.add_argument("--cache", help="cache root (for --method d)")
        cmd.add_argument("--format", choices=["bin", "csv"], default="csv")
        cmd.add_argument("--out", help="output path (csv defaults to stdout)")
        cmd.add_argument("--window-theta-max", type=float, default=None,
                         help="keep only rows with theta <= bound (csv only)")
        cmd.add_argument("--window-phi", type=float, nargs=2, metavar=("LO", "HI"),
                         help="keep only columns with LO <= phi <= HI (csv only)")
        if name == "deriv":
            cmd.add_argument("--variable", choices=["theta", "phi", "grad"],
                             required=True)
        cmd.set_defaults(func=func)

    ben = sub.add_parser("bench", help="run the scaling benchmark harness")
    ben.add_argument("--dims", required=True, help="comma-separated dimensions")
    ben.add_argument("--methods", default="c,d", help="comma-separated subset of b,c,d")
    ben.add_argument("--reps", type=int, default=3)
    _add_s_arguments(ben)
    ben.add_argument("--cache", help="cache root (for method d rows)")
    ben.add_argument("--seed", type=int, default=2047)
    ben.add_argument("--parallel", action="store_true",
                     help="lift the single-thread pin")
    ben.add_argument("--out", help="write the CSV report here instead of stdout")
    ben.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, CacheError, ParityOverflowError, OverflowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
