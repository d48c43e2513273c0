"""Command-line front end.

Every subcommand prints one report (canonical JSON with sorted keys, or a CSV
of the per-point rows) and exits 0 when all thresholds pass, 1 when one
fails or a numerical error interrupts the run, and 2 on invalid input.
Wall time goes to standard error so reports are byte-identical across runs.

Complex values are written "re,im" or "r@theta"; points of the log surface
use the same syntax, and "r@theta" keeps arguments beyond 2 pi.  Grids are
lists of points separated by ";".
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .checks import identity_suite
from .errors import QBorelError
from .euler import (EulerFactor, euler1_sum_mp, euler_borel, euler_sum, euler_sum_mp,
                    functional_residual, spiral_inverse_scan, stokes_jump, stokes_n_deviation)
from .newton import multisum, newton_polygon, tilde_sequence
from .product import (ORDER_12, EulerDecomposition, ProductSum, euler_operator,
                      product_theorem_check, qeuler_carre_operator)
from .qcore import LogPoint, QContext, operator_from_json
from .quad import DEFAULT_CONFIG, QuadratureConfig


# --- value syntax -----------------------------------------------------------------

def parse_complex(text: str) -> complex:
    """"re,im", "r@theta" or a bare real number."""
    s = text.strip()
    try:
        if "@" in s:
            r, t = s.split("@")
            return complex(float(r) * math.cos(float(t)), float(r) * math.sin(float(t)))
        if "," in s:
            re, im = s.split(",")
            return complex(float(re), float(im))
        return complex(float(s), 0.0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex value: {text!r}") from None


def parse_point(text: str) -> LogPoint:
    """A point of the log surface; "r@theta" keeps theta unreduced."""
    s = text.strip()
    try:
        if "@" in s:
            r, t = s.split("@")
            return LogPoint(float(r), float(t))
        return LogPoint.from_complex(parse_complex(s))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a point of the log surface: {text!r} ({exc})") from None


def parse_grid(text: str) -> list[LogPoint]:
    items = [p for p in text.split(";") if p.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty grid")
    return [parse_point(p) for p in items]


def parse_reals(text: str) -> list[float]:
    items = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    try:
        return [float(p) for p in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of reals: {text!r}") from None


def parse_order(text: str) -> list[Fraction]:
    try:
        return [Fraction(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of rationals: {text!r}") from None


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _point(x: LogPoint) -> list[float]:
    return [x.modulus, x.argument]


# --- reports -------------------------------------------------------------------------

class RunReport:
    """Command echo, config echo, per-point results and threshold verdicts."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.results: list[dict] = []
        self.deviations: dict[str, float] = {}
        self.thresholds: dict[str, float] = {}
        self.extra: dict = {}
        self.error: Optional[str] = None

    def check(self, name: str, deviation: float, threshold: float):
        self.deviations[name] = float(deviation)
        self.thresholds[name] = float(threshold)

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        return all(self.deviations[k] < self.thresholds[k] for k in self.deviations)

    def as_dict(self) -> dict:
        out = {"command": self.command, "config": self.config, "results": self.results,
               "max_deviation": self.deviations, "thresholds": self.thresholds,
               "passed": self.passed}
        out.update(self.extra)
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.as_dict()), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        rows = [_flatten(r) for r in self.results]
        buf = io.StringIO()
        if rows:
            keys = sorted({k for r in rows for k in r})
            writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if hasattr(v, "item"):  # numpy scalars
        return _jsonable(v.item())
    return v


def _flatten(row: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        elif isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
            out[key + "_0"], out[key + "_1"] = v
        else:
            out[key] = v
    return out


# --- subcommands -------------------------------------------------------------------

def _config(args) -> QuadratureConfig:
    return DEFAULT_CONFIG.with_(step=args.quad_step, tol=args.quad_tol, max_window=args.quad_window)


def _grid(args) -> list[LogPoint]:
    if args.grid is not None:
        return args.grid
    if getattr(args, "x", None) is not None:
        return [args.x]
    return []


def cmd_euler_sum(args, rep: RunReport):
    ctx, cfg = QContext(args.q), _config(args)
    fac = EulerFactor(args.a, args.m)
    worst = 0.0
    for x in _grid(args):
        row = {"x": _point(x), "value": _pair(euler_sum(fac, args.d, ctx, x, cfg))}
        if fac.m == 0:
            row["residual"] = functional_residual(fac, args.d, ctx, x, cfg)
            worst = max(worst, row["residual"])
        rep.results.append(row)
    if fac.m == 0:
        rep.check("residual", worst, args.threshold or 1e-7)


def cmd_stokes_check(args, rep: RunReport):
    ctx, cfg = QContext(args.q), _config(args)
    fac = EulerFactor(args.a, args.m)
    threshold = args.threshold or 1e-6
    if args.n is not None and (fac.a != 1 or fac.m != 0 or args.d != 0):
        raise argparse.ArgumentTypeError("the sheet reduction is implemented for a = 1, m = 0, d = 0")
    worst = 0.0
    for x in _grid(args):
        if args.n is not None:
            dev, direct, reduced = stokes_n_deviation(args.n, x, ctx, cfg)
            row = {"x": _point(x), "N": args.n, "direct": _pair(direct),
                   "reduced": _pair(reduced), "relative_deviation": dev}
        else:
            predicted = stokes_jump(fac, args.d, args.d2, ctx, x)
            s1 = euler_sum(fac, args.d, ctx, x, cfg, "quadrature")
            s2 = euler_sum(fac, args.d2, ctx, x, cfg, "quadrature")
            dev = abs(s1 - s2 - predicted)
            row = {"x": _point(x), "predicted_jump": _pair(predicted),
                   "measured_jump": _pair(s1 - s2), "deviation": dev}
        worst = max(worst, dev)
        rep.results.append(row)
    rep.check("stokes", worst, threshold)


def cmd_spiral_scan(args, rep: RunReport):
    ctx, cfg = QContext(args.q), _config(args)
    t_grid = args.t if args.t is not None else [0.0] + [s * 2 * math.pi * j for j in (1, 2, 3) for s in (1, -1)]
    rows = spiral_inverse_scan(ctx, args.r, t_grid, 0.0, cfg)
    rep.results = [r.as_dict() for r in rows]
    base = [r for r in rows if r.t == 0.0]
    if base:
        ref = base[0]
        slack = args.threshold or 3.0
        rep.check("growth_bound", max(r.bound_quantity - ref.bound_quantity for r in rows), slack)
        rep.check("shifted_growth_bound", max(r.shifted_quantity - ref.shifted_quantity for r in rows), slack)
    if args.reduction_check:
        x = LogPoint(args.r, 2 * math.pi)
        reduced, _ = euler1_sum_mp(ctx, x, cfg)
        direct = euler_sum_mp(EulerFactor(1.0), 0.0, ctx, x, cfg)
        dev = float(abs(reduced - direct) / max(1, abs(direct)))
        rep.extra["reduction_check"] = {"x": _point(x), "reduced": _pair(complex(reduced)),
                                        "direct": _pair(complex(direct))}
        rep.check("reduction", dev, 1e-6)


def cmd_newton_polygon(args, rep: RunReport):
    if args.operator is not None:
        L = operator_from_json(json.loads(Path(args.operator).read_text()))
    elif args.b is not None:
        L = qeuler_carre_operator(args.a, args.b, QContext(args.q))
    else:
        L = euler_operator(args.a)
    poly = newton_polygon(L)
    rep.extra["polygon"] = poly.as_dict()
    rep.results = [{"vertex": list(v)} for v in poly.vertices]
    if args.expect_slopes is not None:
        want = [Fraction(s).limit_denominator(10 ** 6) for s in args.expect_slopes]
        rep.check("slopes_mismatch", 0.0 if list(poly.slopes) == want else 1.0, 0.5)


def cmd_multisum(args, rep: RunReport):
    ctx, cfg = QContext(args.q), _config(args)
    if args.b is None:
        order = tilde_sequence(args.order or [1])
        fac = EulerFactor(args.a, args.m)
        germ = euler_borel(fac)

        def value(x):
            return multisum(germ, order, args.d, ctx, x, cfg)

        def reference(x):
            return euler_sum(fac, args.d, ctx, x, cfg)
    else:
        order = tilde_sequence(args.order or [1, 2])
        if order != ORDER_12:
            raise argparse.ArgumentTypeError("products of two Euler series use the order 1,2")
        ps = ProductSum(args.a, args.b, args.d, ctx, cfg)
        fa, fb = EulerFactor(args.a), EulerFactor(args.b)

        def value(x):
            return ps(x)

        def reference(x):
            return euler_sum(fa, args.d, ctx, x, cfg) * euler_sum(fb, args.d, ctx, x, cfg)
    rep.extra["order"] = {"s": [str(s) for s in order.s], "s_tilde": [str(s) for s in order.s_tilde]}
    worst = 0.0
    for x in _grid(args):
        v, r = value(x), reference(x)
        worst = max(worst, abs(v - r))
        rep.results.append({"x": _point(x), "value": _pair(v), "order1_product": _pair(r)})
    rep.check("against_order1_product", worst, args.threshold or 1e-6)


def cmd_product_check(args, rep: RunReport):
    ctx, cfg = QContext(args.q), _config(args)
    A = EulerDecomposition.from_json(json.loads(Path(args.A).read_text()))
    B = EulerDecomposition.from_json(json.loads(Path(args.B).read_text()))
    grid = _grid(args)
    report = product_theorem_check(A, B, args.d, ctx, grid, cfg)
    rep.extra["cells"] = report.cells
    for x, l, r in zip(grid, report.lhs, report.rhs):
        rep.results.append({"x": _point(x), "lhs": _pair(l), "rhs": _pair(r), "deviation": abs(l - r)})
    rep.check("product", report.max_deviation, args.threshold or 1e-6)


def cmd_identity_suite(args, rep: RunReport):
    for c in identity_suite(_config(args)):
        rep.results.append(c.as_dict())
        rep.check(c.name, c.deviation, c.threshold)


COMMANDS = {
    "euler-sum": cmd_euler_sum,
    "stokes-check": cmd_stokes_check,
    "spiral-scan": cmd_spiral_scan,
    "newton-polygon": cmd_newton_polygon,
    "multisum": cmd_multisum,
    "product-check": cmd_product_check,
    "identity-suite": cmd_identity_suite,
}

NEEDS_GRID = {"euler-sum", "stokes-check", "multisum", "product-check"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=float, default=2.0, help="base q > 1")
    common.add_argument("--quad-step", type=float, default=None, help="trapezoid step in log variable")
    common.add_argument("--quad-tol", type=float, default=DEFAULT_CONFIG.tol, help="relative tail tolerance")
    common.add_argument("--quad-window", type=float, default=None, help="largest half-width of the window")
    common.add_argument("--threshold", type=float, default=None, help="override the pass threshold")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="write the report to FILE")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--x", type=parse_point, default=None, help='evaluation point "re,im" or "r@theta"')
    point.add_argument("--grid", type=parse_grid, default=None, help='points separated by ";"')
    point.add_argument("--d", type=float, default=0.0, help="summation direction (radians)")

    euler = argparse.ArgumentParser(add_help=False)
    euler.add_argument("--a", type=parse_complex, default=complex(1.0), help="Euler parameter")
    euler.add_argument("--m", type=int, default=0, help="a-derivative order")

    parser = argparse.ArgumentParser(prog="qborel", description="q-Borel-Laplace summation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("euler-sum", parents=[common, point, euler], help="sum of a q-Euler series")

    p = sub.add_parser("stokes-check", parents=[common, point, euler],
                       help="residue jump against two quadratures, or the sheet reduction")
    p.add_argument("--d2", type=float, default=None, help="second direction (default d + 2 pi)")
    p.add_argument("--n", type=int, default=None, help="check the N-sheet reduction instead")

    p = sub.add_parser("spiral-scan", parents=[common], help="growth of 1/S(E_1) on a spiral")
    p.add_argument("--r", type=float, default=0.5, help="spiral radius")
    p.add_argument("--t", type=parse_reals, default=None, help="arguments t (comma separated)")
    p.add_argument("--no-reduction-check", dest="reduction_check", action="store_false",
                   help="skip the reduction-vs-quadrature comparison at t = 2 pi")

    p = sub.add_parser("newton-polygon", parents=[common], help="Newton polygon of an operator")
    p.add_argument("--operator", default=None, help="operator JSON file")
    p.add_argument("--a", type=parse_complex, default=complex(1.0))
    p.add_argument("--b", type=parse_complex, default=None)
    p.add_argument("--expect-slopes", type=parse_reals, default=None)

    p = sub.add_parser("multisum", parents=[common, point, euler], help="order-s sum of E_a or E_a E_b")
    p.add_argument("--b", type=parse_complex, default=None, help="second Euler parameter")
    p.add_argument("--order", type=parse_order, default=None, help='increasing orders, e.g. "1,2"')

    p = sub.add_parser("product-check", parents=[common, point],
                       help="product theorem on two decompositions")
    p.add_argument("--A", required=True, help="decomposition JSON file")
    p.add_argument("--B", required=True, help="decomposition JSON file")

    sub.add_parser("identity-suite", parents=[common], help="invariant battery")
    return parser


def _echo(args) -> dict:
    skip = {"command", "format", "out"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        if isinstance(v, LogPoint):
            v = _point(v)
        elif isinstance(v, list) and v and isinstance(v[0], LogPoint):
            v = [_point(p) for p in v]
        out[k] = v
    return out


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 with usage on parse errors
    if args.command in NEEDS_GRID and not _grid(args):
        parser.error("empty grid: give --x or a non-empty --grid")
    if args.command == "stokes-check" and args.d2 is None:
        args.d2 = args.d + 2 * math.pi
    try:
        _config(args)
    except ValueError as exc:
        parser.error(str(exc))
    rep = RunReport(args.command, _echo(args))
    start = time.perf_counter()
    try:
        COMMANDS[args.command](args, rep)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except (QBorelError, ValueError, OSError, KeyError) as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    text = rep.to_json() if args.format == "json" else rep.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    print(f"wall time {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
