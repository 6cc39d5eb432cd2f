"""Command-line front end: ``polyberg <command> [flags]``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or parse
error, 3 a point or parameter outside its domain.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys

import numpy as np

from . import geometry as geo
from . import kernels as ker
from .errors import DomainError
from .multipoly import MixedPoly
from .params import SpaceParams
from .special_fn import JacobiParams, RPolyParams, jacobi_eval, r_poly
from .verify import SUITES, MCConfig, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
SEED_ENV = "POLYBERG_SEED"


class UsageError(Exception):
    pass


_BARE_UNIT = re.compile(r"(^|[+-])j")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (also ``bi``, ``i``, ``-i``, plain reals)."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("i", "j")
    s = _BARE_UNIT.sub(r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def parse_vector(text: str, n: int | None = None) -> np.ndarray:
    vec = np.array([parse_complex(p) for p in text.split(",")], dtype=complex)
    if n is not None and vec.size != n:
        raise UsageError(f"expected {n} coordinates, got {vec.size} in {text!r}")
    return vec


def parse_reals(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse real list {text!r}") from None


def _point_from_json(obj, n: int) -> np.ndarray:
    """A point is a list of n complex numbers, each a [re, im] pair."""
    try:
        vec = np.array([complex(float(c[0]), float(c[1])) for c in obj], dtype=complex)
    except (TypeError, ValueError, IndexError, KeyError):
        raise UsageError(f"malformed point {obj!r}: expected a list of [re, im] pairs") from None
    if vec.size != n:
        raise UsageError(f"expected {n} coordinates, got {vec.size}")
    return vec


def load_points(path: str, n: int, arity: int) -> list:
    """Read a JSON array of points (arity 1) or of point pairs (arity 2)."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read points file {path!r}: {exc}") from None
    if not isinstance(data, list) or not data:
        raise UsageError("points file must hold a non-empty JSON array")
    if arity == 1:
        return [_point_from_json(p, n) for p in data]
    out = []
    for pair in data:
        if not isinstance(pair, list) or len(pair) != 2:
            raise UsageError("each entry must be a pair [first point, second point]")
        out.append((_point_from_json(pair[0], n), _point_from_json(pair[1], n)))
    return out


# output

def _fmt_real(x: float) -> str:
    if not math.isfinite(x):
        return str(x)
    if x != 0 and (abs(x) < 1e-4 or abs(x) >= 1e16):
        return np.format_float_scientific(x, trim="-")
    return np.format_float_positional(x, trim="-")


def _fmt_value(v) -> str:
    v = complex(v)
    if v.imag == 0:
        return _fmt_real(v.real)
    sign = "-" if v.imag < 0 else "+"
    return f"{_fmt_real(v.real)}{sign}{_fmt_real(abs(v.imag))}i"


def _jsonable(v):
    v = complex(v)
    clean = lambda x: x if math.isfinite(x) else None
    if v.imag == 0:
        return clean(v.real)
    return {"re": clean(v.real), "im": clean(v.imag)}


def emit_values(command: str, values, fmt: str, out) -> None:
    vals = [complex(v) for v in np.atleast_1d(np.asarray(values)).ravel()]
    if fmt == "json":
        out.write(json.dumps({"command": command, "values": [_jsonable(v) for v in vals]}) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(vals):
            w.writerow([i, repr(v.real), repr(v.imag)])
    else:
        for v in vals:
            out.write(_fmt_value(v) + "\n")


def emit_report(report, fmt: str, out) -> None:
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["id", "residual", "tol", "sigma", "pass"])
        for c in report.checks:
            d = c.to_dict()
            w.writerow([d["id"], d["residual"], d["tol"], "" if d["sigma"] is None else d["sigma"], d["pass"]])
    elif fmt == "plain":
        for c in report.checks:
            out.write(f"{'PASS' if c.passed else 'FAIL'} {c.id} residual={c.residual:.3e} tol={c.tol:.3e}\n")
        out.write(f"{report.suite}: {'PASS' if report.passed else 'FAIL'}\n")
    else:
        out.write(report.to_json() + "\n")


# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    g.add_argument("--n", type=int, default=1, help="complex dimension")
    g.add_argument("--m", type=int, default=1, help="total order (degree for jacobi/rpoly)")
    g.add_argument("--alpha", type=float, default=0.0, help="weight exponent (first Jacobi parameter)")
    g.add_argument("--beta", type=float, default=0.0, help="second Jacobi / R parameter")
    g.add_argument("--t", help="comma-separated real arguments")
    g.add_argument("--z", help="ball point, comma-separated complex coordinates like 0.1+0.2i")
    g.add_argument("--w", help="second ball point")
    g.add_argument("--xi", help="Siegel point")
    g.add_argument("--eta", help="second Siegel point")
    g.add_argument("--domain", choices=["ball", "siegel"], default="ball")
    g.add_argument("--points-file", help="JSON array of points or point pairs; each point a list of [re, im]")
    m = common.add_argument_group("verification")
    m.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples")
    m.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    m.add_argument("--chunk", type=int, default=1 << 16, help="samples per RNG substream")
    m.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo chunks")
    m.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    common.add_argument("--format", choices=["json", "csv", "plain"], default=None)

    p = argparse.ArgumentParser(prog="polyberg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [("jacobi", "Jacobi polynomial P_m^{(alpha,beta)}(t)"),
                        ("rpoly", "reproducing polynomial R_m^{(alpha,beta)}(t), or its coefficients"),
                        ("kernel-ball", "reproducing kernel K_z(w) on the ball"),
                        ("kernel-siegel", "reproducing kernel K_xi(eta) on the Siegel domain"),
                        ("distance", "pseudohyperbolic distance"),
                        ("berezin", "Berezin transforms of the null operator S and of <.,1>1")]:
        sub.add_parser(name, parents=[common], help=help_)
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=list(SUITES) + ["all"])
    return p


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"${SEED_ENV} must be an integer, got {env!r}") from None


def _pairs(args, first: str, second: str, n: int):
    if args.points_file:
        pts = load_points(args.points_file, n, 2)
        return np.array([a for a, _ in pts]), np.array([b for _, b in pts])
    a, b = getattr(args, first), getattr(args, second)
    if a is None or b is None:
        raise UsageError(f"--{first} and --{second} (or --points-file) are required")
    return parse_vector(a, n)[None, :], parse_vector(b, n)[None, :]


def _singles(args, flag: str, n: int):
    if args.points_file:
        return np.array(load_points(args.points_file, n, 1))
    val = getattr(args, flag)
    if val is None:
        raise UsageError(f"--{flag} (or --points-file) is required")
    return parse_vector(val, n)[None, :]


def cmd_eval(args, out) -> int:
    fmt = args.format or "plain"
    c = args.command
    if c == "jacobi":
        if args.t is None:
            raise UsageError("--t is required")
        vals = jacobi_eval(JacobiParams(args.alpha, args.beta, args.m), parse_reals(args.t))
    elif c == "rpoly":
        poly = r_poly(RPolyParams(args.m, args.alpha, args.beta))
        vals = poly.coeffs.astype(float) if args.t is None else poly(parse_reals(args.t))
    elif c in ("kernel-ball", "kernel-siegel"):
        params = SpaceParams(args.n, args.m, args.alpha)
        if c == "kernel-ball":
            z, w = _pairs(args, "z", "w", args.n)
            vals = ker.kernel_ball(params, z, w)
        else:
            xi, eta = _pairs(args, "xi", "eta", args.n)
            vals = ker.kernel_siegel(params, xi, eta)
    elif c == "distance":
        if args.domain == "ball":
            z, w = _pairs(args, "z", "w", args.n)
            vals = geo.rho_ball(z, w)
        else:
            xi, eta = _pairs(args, "xi", "eta", args.n)
            vals = geo.rho_siegel(xi, eta)
    elif c == "berezin":
        params = SpaceParams(args.n, args.m, args.alpha)
        spec = ker.KernelSpec(params, args.domain)
        pts = _singles(args, "z" if args.domain == "ball" else "xi", args.n)
        if args.domain == "ball":
            geo.check_ball(pts)
        else:
            geo.check_siegel(pts)
        one = MixedPoly.constant(args.n)
        ops = [ker.FiniteRankOp([(1.0, one, one)])]
        if args.m >= 2:
            ops.insert(0, ker.nonzero_berezin_null_operator(args.n))
        vals = np.stack([ker.berezin_finite_rank(op, spec, pts) for op in ops], axis=-1)
    else:
        raise UsageError(f"unknown command {c!r}")
    emit_values(c, vals, fmt, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    params = SpaceParams(args.n, args.m, args.alpha)
    cfg = MCConfig(args.samples, _seed(args), args.chunk)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    z_list = None
    if args.points_file:
        z_list = np.array(load_points(args.points_file, args.n, 1))
    elif args.z is not None:
        z_list = parse_vector(args.z, args.n)[None, :]
    report = run_suite(args.suite, params, cfg, args.threads, args.tol_scale, z_list)
    emit_report(report, args.format or "json", out)
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return cmd_verify(args, out)
        return cmd_eval(args, out)
    except UsageError as exc:
        print(f"polyberg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"polyberg: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
