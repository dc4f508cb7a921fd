"""Command-line front end: ``schwarzlat {rearrange|verify|oracle|minimize} ...``.

Exit codes: 0 success, 1 a checked inequality or run failed, 2 usage or input
error, 3 internal error such as an exhausted cycle budget.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .functionals import (
    Bivariate,
    Kernel,
    cavalieri_sum,
    f_weighted_sum,
    hardy_littlewood_sum,
    lp_norm,
    riesz_sum,
    sobolev_energy,
)
from .io import FormatError, parse_sparse_function, write_sparse_function
from .lattice import Direction, SparseFunction, direction_set, random_function
from .optimize import (
    TruncatedDomain,
    euler_lagrange_residual,
    fit_omega,
    minimize_dnls,
    minimize_nonnormalized,
    minimize_sobolev_extremal,
)
from .oracle import (
    BudgetExceeded,
    brute_force_riesz_max,
    enumerate_connected_supports,
    equimeasurable_minimizers,
    pruss_obstruction,
)
from .rearrange import ConvergenceError, is_schwarz_symmetric, schwarz_rearrange

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
RTOL = 1e-9


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _kernel(text: str) -> Kernel:
    try:
        return Kernel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bivariate(text: str) -> Bivariate:
    try:
        return Bivariate.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the same flags appear before or after the subcommand
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS,
                        help="accepted for compatibility; computation is single-threaded")
    common.add_argument("--report", type=Path, default=argparse.SUPPRESS, help="write the JSON report here")
    common.add_argument("--timing", action="store_true", default=argparse.SUPPRESS,
                        help="include wall time in the report (makes it nondeterministic)")

    parser = argparse.ArgumentParser(prog="schwarzlat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--threads", type=_positive_int, default=1)
    parser.add_argument("--report", type=Path, default=None)
    parser.add_argument("--timing", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rearrange", parents=[common], help="Schwarz-rearrange a function file")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--cycle", default="default", help="default | custom:DIR,DIR,...")
    p.add_argument("--max-cycles", type=_positive_int, default=None)
    p.add_argument("--trace", action="store_true", help="write one file per one-step rearrangement")

    p = sub.add_parser("verify", parents=[common], help="check a rearrangement inequality")
    p.add_argument("check", choices=["polya-szego", "riesz", "hardy-littlewood", "contraction",
                                     "cavalieri", "weighted-f"])
    p.add_argument("--u", type=Path, help="function file (random when omitted)")
    p.add_argument("--v", type=Path, help="second function file (random when omitted)")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--kernel", type=_kernel, default=Kernel.geometric(2.0, 8))
    p.add_argument("--bivariate", type=_bivariate, default=Bivariate.product())
    p.add_argument("--window", type=int, default=None, help="box radius for weighted-f")
    p.add_argument("--dim", type=_positive_int, default=2, help="dimension of random inputs")
    p.add_argument("--size", type=_positive_int, default=20, help="support size of random inputs")

    p = sub.add_parser("oracle", parents=[common], help="brute-force ground truth")
    osub = p.add_subparsers(dest="oracle", required=True)
    q = osub.add_parser("pentominoes", parents=[common])
    q.add_argument("--size", type=_positive_int, default=5)
    q = osub.add_parser("minimizers", parents=[common])
    q.add_argument("--values", type=_float_list, required=True)
    osub.add_parser("obstruction", parents=[common])
    q = osub.add_parser("riesz-max", parents=[common])
    q.add_argument("--u-values", type=_float_list, required=True)
    q.add_argument("--v-values", type=_float_list, required=True)
    q.add_argument("--window", type=int, default=4)
    q.add_argument("--kernel", type=_kernel, default=Kernel.geometric(2.0, 8))
    q.add_argument("--bivariate", type=_bivariate, default=Bivariate.product())

    p = sub.add_parser("minimize", parents=[common], help="rearrangement-accelerated minimization")
    msub = p.add_subparsers(dest="problem", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--dim", type=_positive_int, required=True)
    shared.add_argument("--radius", type=_positive_int, required=True)
    shared.add_argument("--iters", type=int, default=20000)
    shared.add_argument("--tol", type=float, default=1e-7)
    shared.add_argument("--rearrange-every", type=_positive_int, default=10)
    shared.add_argument("--solution", type=Path, default=None)
    q = msub.add_parser("dnls", parents=[common, shared])
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--sigma", type=float, required=True)
    q = msub.add_parser("wave", parents=[common, shared])
    q.add_argument("--omega", type=float, required=True)
    q.add_argument("--sigma", type=float, required=True)
    q = msub.add_parser("sobolev", parents=[common, shared])
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--q", type=float, required=True)
    return parser


# ---------------------------------------------------------------------------
# helpers


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _echo(args: argparse.Namespace) -> dict:
    skip = {"threads", "timing", "report"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, (Kernel, Bivariate)):
            v = v.name
        elif isinstance(v, Path):
            v = str(v)
        out[k] = v
    return out


def _load(args: argparse.Namespace, which: str, inputs: dict, rng: np.random.Generator) -> SparseFunction:
    path = getattr(args, which)
    if path is None:
        radius = max(2, math.ceil(args.size ** (1 / args.dim)))
        return random_function(rng, args.dim, args.size, radius)
    inputs[which] = _digest(path)
    return parse_sparse_function(path)


def _holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + RTOL * max(1.0, abs(lhs), abs(rhs))


def _inequality(lhs: float, rhs: float, **extra) -> dict:
    return {"lhs": lhs, "rhs": rhs, "gap": rhs - lhs, "pass": _holds(lhs, rhs), **extra}


# ---------------------------------------------------------------------------
# subcommands


def cmd_rearrange(args: argparse.Namespace, inputs: dict) -> dict:
    inputs["input"] = _digest(args.input)
    u = parse_sparse_function(args.input)
    if args.cycle == "default":
        cycle = direction_set(u.dim)
    elif args.cycle.startswith("custom:"):
        try:
            cycle = [Direction.parse(t) for t in args.cycle[len("custom:"):].split(",")]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        raise UsageError(f"--cycle must be 'default' or 'custom:LIST', got {args.cycle!r}")
    steps = []

    def trace(step: int, e: Direction, w: SparseFunction) -> None:
        steps.append(str(e))
        if args.trace:
            out = args.output.with_name(f"{args.output.stem}.step{step:04d}{args.output.suffix or '.tsv'}")
            write_sparse_function(w, out)

    try:
        star = schwarz_rearrange(u, max_cycles=args.max_cycles, cycle=cycle, trace=trace)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_sparse_function(star, args.output)
    return {
        "steps": len(steps),
        "cycles": len(steps) // len(cycle),
        "support_size": len(star),
        "symmetric": is_schwarz_symmetric(star),
        "pass": True,
    }


def cmd_verify(args: argparse.Namespace, inputs: dict) -> dict:
    rng = np.random.default_rng(args.seed)
    u = _load(args, "u", inputs, rng)
    needs_v = args.check in ("riesz", "hardy-littlewood", "contraction")
    v = _load(args, "v", inputs, rng) if needs_v else None
    if v is not None and v.dim != u.dim:
        raise UsageError("u and v have different dimensions")
    p = args.p
    if p < 1:
        raise UsageError("--p must be >= 1")
    us = schwarz_rearrange(u)
    vs = schwarz_rearrange(v) if v is not None else None
    check = args.check
    if check == "polya-szego":
        return _inequality(sobolev_energy(us, p), sobolev_energy(u, p), p=p)
    if check == "riesz":
        return _inequality(riesz_sum(u, v, args.bivariate, args.kernel),
                           riesz_sum(us, vs, args.bivariate, args.kernel),
                           kernel=args.kernel.name, bivariate=args.bivariate.name)
    if check == "hardy-littlewood":
        return _inequality(hardy_littlewood_sum(u, v), hardy_littlewood_sum(us, vs))
    if check == "contraction":
        def dist(a: SparseFunction, b: SparseFunction) -> float:
            return math.fsum(abs(a(x) - b(x)) ** p for x in set(a) | set(b))
        return _inequality(dist(us, vs), dist(u, v), p=p)
    if check == "cavalieri":
        lhs, rhs = cavalieri_sum(u, lambda t: t ** p), cavalieri_sum(us, lambda t: t ** p)
        ok = abs(lhs - rhs) <= RTOL * max(1.0, abs(lhs))
        return {"lhs": lhs, "rhs": rhs, "gap": rhs - lhs, "pass": ok, "p": p}
    # weighted-f with F(r, t) = t^p / (1 + r)
    window = args.window if args.window is not None else max(u.max_abs_coord(), us.max_abs_coord())
    F = lambda r, t: t ** p / (1.0 + r)  # noqa: E731
    try:
        return _inequality(f_weighted_sum(u, F, window), f_weighted_sum(us, F, window),
                           p=p, window=window)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _shape_json(shape) -> list:
    return [list(pt) for pt in shape.points]


def cmd_oracle(args: argparse.Namespace, inputs: dict) -> dict:
    if args.oracle == "pentominoes":
        shapes = enumerate_connected_supports(args.size)
        return {"size": args.size, "count": len(shapes), "shapes": [_shape_json(s) for s in shapes],
                "pass": True}
    if args.oracle == "minimizers":
        if any(v <= 0 for v in args.values):
            raise UsageError("values must be positive")
        mins = equimeasurable_minimizers(args.values)
        return {"values": sorted(args.values, reverse=True), "energy": mins.energy,
                "minimizers": [_shape_json(s) for s in mins.shapes], "unique": len(mins.shapes) == 1,
                "pass": True}
    if args.oracle == "obstruction":
        rep = pruss_obstruction().to_dict()
        rep["pass"] = rep["contradiction"]
        return rep
    # riesz-max: exhaustive maximum against the rearranged pair on Z
    if any(v <= 0 for v in args.u_values + args.v_values):
        raise UsageError("values must be positive")
    best = brute_force_riesz_max(args.u_values, args.v_values, args.window, args.bivariate, args.kernel)
    place = lambda vals: SparseFunction({(k,): x for k, x in enumerate(vals)}, dim=1)  # noqa: E731
    us = schwarz_rearrange(place(args.u_values))
    vs = schwarz_rearrange(place(args.v_values))
    rearranged = riesz_sum(us, vs, args.bivariate, args.kernel)
    ok = abs(best.value - rearranged) <= 1e-12 * max(1.0, abs(best.value))
    return {"brute_force_max": best.value, "rearranged": rearranged, "gap": best.value - rearranged,
            "argmax_count": len(best.argmax), "pass": ok}


def cmd_minimize(args: argparse.Namespace, inputs: dict) -> dict:
    domain = TruncatedDomain(args.dim, args.radius)
    opts = dict(iters=args.iters, tol=args.tol, rearrange_every=args.rearrange_every)
    extra: dict = {}
    try:
        if args.problem == "dnls":
            u, value, trace = minimize_dnls(args.c, args.sigma, domain, **opts)
            omega = fit_omega(u, args.sigma, domain)
            extra = {"omega": omega, "euler_lagrange_residual":
                     euler_lagrange_residual(u, omega, args.sigma, domain),
                     "l2_norm": lp_norm(u, 2), "negative": value < 0}
        elif args.problem == "wave":
            u, value, trace = minimize_nonnormalized(args.omega, args.sigma, domain, **opts)
            extra = {"constraint_norm": lp_norm(u, 2 + 2 * args.sigma)}
        else:
            u, value, trace = minimize_sobolev_extremal(args.p, args.q, domain, **opts)
            extra = {"constraint_norm": lp_norm(u, args.q)}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.solution is not None:
        write_sparse_function(u, args.solution)
    monotone = trace.monotone_across_rearrangements()
    symmetric = is_schwarz_symmetric(u)
    return {
        "value": value,
        "converged": trace.converged,
        "iterations": trace.iterations,
        "stationarity": trace.stationarity[-1],
        "constraint_residual": trace.constraint_residuals[-1],
        "rearrangements": len(trace.rearrangement_steps),
        "monotone_across_rearrangements": monotone,
        "symmetric": symmetric,
        "support_size": len(u),
        "pass": trace.converged and monotone and symmetric,
        **extra,
    }


COMMANDS = {"rearrange": cmd_rearrange, "verify": cmd_verify, "oracle": cmd_oracle,
            "minimize": cmd_minimize}


def _finite(obj):
    """Replace non-finite floats, which JSON cannot carry, by strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    start = time.perf_counter()
    inputs: dict = {}
    try:
        results = COMMANDS[args.command](args, inputs)
    except (UsageError, FormatError, OSError, BudgetExceeded) as exc:
        print(f"schwarzlat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"schwarzlat: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"schwarzlat: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report = {
        "command": _echo(args),
        "inputs": inputs,
        "results": results,
        "pass": bool(results.get("pass", True)),
        "version": __version__,
    }
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - start
    text = json.dumps(_finite(report), sort_keys=True, indent=2) + "\n"
    if args.report is not None:
        args.report.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def main() -> None:
    sys.exit(dispatch())
