"""Command-line front end (``tchar``).

Exit codes: 0 success or pass, 1 verification failure, 2 bad usage or
parameters.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import characterization as ch
from .distributions import (
    DistributionModel,
    QFamilyParams,
    exponential,
    fit_qfamily,
    normal,
    qfamily,
    qfamily_objective,
    sample,
    student_t,
    uniform,
    z_distribution,
)
from .errors import DomainError, MomentError, RankError, TcharError
from .order_stats import OrderStatContext
from .simulation import (
    AboveAvgDeviation,
    BelowAvgDeviation,
    SampleMean,
    SquaredSpacingDifference,
    WeightedTheorem1,
    compare_report,
    simulate_regression,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DISTS = ("t", "qfamily", "normal", "uniform", "exponential", "z")
STATS = ("sample-mean", "below", "above", "theorem1", "squared-spacing")


class UsageError(Exception):
    """Bad flag value; reported with exit code 2."""


# ---------------------------------------------------------------- output


def format_float(v: float) -> str:
    return format(v, ".17g")


def _json_value(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return format_float(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{_json_value(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(obj: dict) -> str:
    """JSON with every float written to 17 significant digits; non-finite values become null."""
    return _json_value(obj) + "\n"


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(format_float(float(v)) if math.isfinite(v) else "nan" if math.isnan(v) else
                             ("inf" if v > 0 else "-inf"))
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------- parsing


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", choices=DISTS, default="t")
    g.add_argument("--nu", type=float, default=None, help="t / z degrees of freedom (also the nu of the second-moment identity)")
    g.add_argument("--mu", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="Q-family lambda; also the weight of the first-moment identity and the cdf ODE")
    g.add_argument("--c", type=float, default=None)
    g.add_argument("--d", type=float, default=0.0)
    g.add_argument("--low", type=float, default=0.0, help="uniform lower end")
    g.add_argument("--high", type=float, default=1.0, help="uniform upper end")
    g.add_argument("--rate", type=float, default=1.0, help="exponential rate")
    g.add_argument("--shift", type=float, default=0.0, help="exponential start point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    p.add_argument("--out", default=None, help="output file (default: standard output)")


def _grid_flags(p: argparse.ArgumentParser, tol: float) -> None:
    p.add_argument("--points", type=int, default=ch.DEFAULT_GRID_POINTS)
    p.add_argument("--p-min", type=float, default=ch.DEFAULT_P_MIN)
    p.add_argument("--at", type=float, nargs="+", default=None, help="explicit x points instead of the grid")
    p.add_argument("--tol", type=float, default=tol)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tchar", description="Order-statistic characterization checks "
                                     "for the Q-family and Student t distributions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate pdf, cdf, sf, quantile or isf")
    _common(p)
    p.add_argument("--at", type=float, nargs="+", required=True)
    p.add_argument("--what", choices=("pdf", "cdf", "sf", "quantile", "isf"), default="pdf")

    p = sub.add_parser("sample", help="draw inverse-transform samples")
    _common(p)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--stream", type=int, default=0)

    p = sub.add_parser("residual-grid", help="first-moment (1) or second-moment (2) identity residuals over a grid")
    _common(p)
    p.add_argument("--theorem", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--center", type=float, default=None,
                   help="centering point for --theorem 2 (default: --mu for t, else 0)")
    _grid_flags(p, 1e-6)

    p = sub.add_parser("ode-check", help="cdf ODE, Z integral identity or log-slope residuals over a grid")
    _common(p)
    p.add_argument("--check", choices=("lemma1", "star", "log-slope"), default="lemma1")
    p.add_argument("--h", type=float, default=1e-4, help="finite-difference step for log-slope")
    _grid_flags(p, None)

    p = sub.add_parser("mc-verify", help="Monte Carlo check of a conditional regression")
    _common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--stat", choices=STATS, default="sample-mean")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--replications", type=int, default=200_000)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--z-threshold", type=float, default=3.0)
    p.add_argument("--min-pass-fraction", type=float, default=0.95)

    p = sub.add_parser("fit-lambda", help="least-squares Q-family fit to a distribution's quantiles")
    _common(p)
    p.add_argument("--points", type=int, default=99)
    p.add_argument("--p-min", type=float, default=0.01)
    p.add_argument("--init-lambda", type=float, default=0.5)
    p.add_argument("--init-c", type=float, default=1.0)
    p.add_argument("--init-d", type=float, default=0.0)
    return parser


def make_dist(args: argparse.Namespace) -> DistributionModel:
    name = args.dist
    if name == "t":
        if args.nu is None:
            raise UsageError("--nu is required for --dist t")
        if not args.sigma > 0.0:
            raise UsageError(f"--sigma must be positive, got {args.sigma}")
        return student_t(args.nu, args.mu, args.sigma)
    if name == "qfamily":
        if args.lam is None:
            raise UsageError("--lambda is required for --dist qfamily")
        if not 0.0 < args.lam < 1.0:
            raise UsageError(f"--lambda must lie in (0, 1), got {args.lam}")
        c = 1.0 if args.c is None else args.c
        if not c > 0.0:
            raise UsageError(f"--c must be positive, got {c}")
        return qfamily(args.lam, c, args.d)
    if name == "normal":
        if not args.sigma > 0.0:
            raise UsageError(f"--sigma must be positive, got {args.sigma}")
        return normal(args.mu, args.sigma)
    if name == "uniform":
        if not args.high > args.low:
            raise UsageError(f"--high must exceed --low, got {args.low}, {args.high}")
        return uniform(args.low, args.high)
    if name == "exponential":
        if not args.rate > 0.0:
            raise UsageError(f"--rate must be positive, got {args.rate}")
        return exponential(args.rate, args.shift)
    if args.nu is None or not args.nu > 2.0:
        raise UsageError("--dist z needs --nu > 2")
    return z_distribution(args.nu)


def _integer_nu(args: argparse.Namespace, default: float | None = None) -> float:
    nu = args.nu if args.nu is not None else default
    if nu is None:
        raise UsageError("--nu is required")
    if nu != int(nu) or nu < 3:
        raise UsageError(f"--nu must be an integer >= 3 here, got {nu:g}")
    return nu


def _theorem_lambda(args: argparse.Namespace) -> float:
    lam = 0.5 if args.lam is None else args.lam
    if not 0.0 < lam < 1.0:
        raise UsageError(f"--lambda must lie in (0, 1), got {lam}")
    return lam


def _x_points(args, dist):
    if args.at is not None:
        return np.asarray(args.at, dtype=np.float64)
    if args.points < 1:
        raise UsageError(f"--points must be >= 1, got {args.points}")
    if not 0.0 < args.p_min < 0.5:
        raise UsageError(f"--p-min must lie in (0, 1/2), got {args.p_min}")
    return ch.quantile_grid(dist, args.points, args.p_min)


# ---------------------------------------------------------------- commands


def _values_output(label: str, xs, ys, fmt) -> str:
    if fmt == "json":
        return to_json({"x": list(map(float, xs)), label: list(map(float, ys))})
    if fmt == "csv":
        return to_csv(["x", label], [(float(a), float(b)) for a, b in zip(xs, ys)])
    return "".join(format_float(float(v)) + "\n" for v in ys)


def _report_output(report: ch.ResidualReport, fmt) -> str:
    if fmt == "json":
        return to_json(report.to_dict())
    rows = zip(report.x_grid, report.lhs, report.rhs, report.delta)
    return to_csv(["x", "lhs", "rhs", "delta"], rows)


def cmd_eval(args) -> tuple[int, str]:
    dist = make_dist(args)
    xs = np.asarray(args.at, dtype=np.float64)
    if args.what in ("quantile", "isf") and not np.all((xs > 0.0) & (xs < 1.0)):
        raise UsageError("--at values must lie in (0, 1) for quantile/isf")
    ys = np.atleast_1d(getattr(dist, args.what)(xs))
    return EXIT_OK, _values_output(args.what, xs, ys, args.fmt)


def cmd_sample(args) -> tuple[int, str]:
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    if args.seed < 0 or args.stream < 0:
        raise UsageError("--seed and --stream must be non-negative")
    values = sample(make_dist(args), args.count, args.seed, args.stream)
    if args.fmt == "json":
        return EXIT_OK, to_json({"values": list(map(float, values))})
    if args.fmt == "csv":
        return EXIT_OK, to_csv(["value"], [(float(v),) for v in values])
    return EXIT_OK, "".join(format_float(float(v)) + "\n" for v in values)


def cmd_residual_grid(args) -> tuple[int, str]:
    dist = make_dist(args)
    ctx = OrderStatContext(args.n, args.k)
    ctx.check_interior()
    xs = _x_points(args, dist)
    if args.theorem == 1:
        report = ch.theorem1_grid(dist, _theorem_lambda(args), ctx, args.tol, x_grid=xs)
    else:
        nu = _integer_nu(args, 3.0)
        center = args.center if args.center is not None else (args.mu if args.dist == "t" else 0.0)
        report = ch.theorem2_grid(dist, nu, ctx, args.tol, loc=center, x_grid=xs)
    which = "first-moment" if args.theorem == 1 else "second-moment"
    _summary(f"{which} identity on {dist.name}, n={args.n}, k={args.k}", report)
    return (EXIT_OK if report.passed else EXIT_FAIL), _report_output(report, args.fmt)


def cmd_ode_check(args) -> tuple[int, str]:
    if args.check == "lemma1":
        dist = make_dist(args)
        lam = _theorem_lambda(args)
        c = args.c if args.c is not None else 1.0
        if not c > 0.0:
            raise UsageError(f"--c must be positive, got {c}")
        tol = 1e-9 if args.tol is None else args.tol
        report = ch.lemma1_ode_grid(dist, lam, c, tol, x_grid=_x_points(args, dist))
        label = f"cdf ODE (lambda={lam:g}, c={c:g}) on {dist.name}"
    else:
        nu = _integer_nu(args)
        xs = _x_points(args, z_distribution(nu))
        if args.check == "star":
            report = ch.star_grid(nu, 1e-7 if args.tol is None else args.tol, x_grid=xs)
        else:
            if not args.h > 0.0:
                raise UsageError(f"--h must be positive, got {args.h}")
            report = ch.log_slope_grid(nu, args.h, 1e-6 if args.tol is None else args.tol, x_grid=xs)
        label = f"{args.check} for Z(nu={nu:g})"
    _summary(label, report)
    return (EXIT_OK if report.passed else EXIT_FAIL), _report_output(report, args.fmt)


def _kind(args):
    if args.r not in (1, 2):
        raise UsageError(f"--r must be 1 or 2, got {args.r}")
    if args.stat == "sample-mean":
        return SampleMean()
    if args.stat == "below":
        return BelowAvgDeviation(args.r)
    if args.stat == "above":
        return AboveAvgDeviation(args.r)
    if args.stat == "theorem1":
        return WeightedTheorem1(_theorem_lambda(args))
    return SquaredSpacingDifference(_integer_nu(args, 3.0))


def cmd_mc_verify(args) -> tuple[int, str]:
    dist = make_dist(args)
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    if not 0.0 <= args.min_pass_fraction <= 1.0:
        raise UsageError(f"--min-pass-fraction must lie in [0, 1], got {args.min_pass_fraction}")
    est = simulate_regression(dist, args.n, args.k, _kind(args), args.replications, args.seed, args.bins)
    result = compare_report(est, args.z_threshold, args.min_pass_fraction)
    print(result.summary, file=sys.stderr)
    if args.fmt == "json":
        text = to_json(est.to_dict())
    else:
        rows = [(x, e, t, e - t) for x, e, t in zip(est.bin_centers, est.empirical_mean, est.theoretical)]
        text = to_csv(["x", "lhs", "rhs", "delta"], rows)
    return (EXIT_OK if result.passed else EXIT_FAIL), text


def cmd_fit_lambda(args) -> tuple[int, str]:
    dist = make_dist(args)
    if args.points < 5:
        raise UsageError(f"--points must be >= 5, got {args.points}")
    if not 0.0 < args.p_min < 0.5:
        raise UsageError(f"--p-min must lie in (0, 1/2), got {args.p_min}")
    try:
        init = QFamilyParams(args.init_lambda, args.init_c, args.init_d)
    except DomainError as exc:
        raise UsageError(f"initial guess: {exc}") from exc
    u = np.linspace(args.p_min, 1.0 - args.p_min, args.points)
    fit = fit_qfamily(dist, u, init)
    obj = qfamily_objective(fit, u, np.asarray(dist.quantile(u)))
    out = {"lam": fit.lam, "c": fit.c, "d": fit.d, "objective": obj}
    if args.fmt == "json":
        return EXIT_OK, to_json(out)
    return EXIT_OK, to_csv(list(out), [tuple(out.values())])


COMMANDS = {
    "eval": cmd_eval,
    "sample": cmd_sample,
    "residual-grid": cmd_residual_grid,
    "ode-check": cmd_ode_check,
    "mc-verify": cmd_mc_verify,
    "fit-lambda": cmd_fit_lambda,
}


def _summary(label: str, report: ch.ResidualReport) -> None:
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{label}: max|delta| = {report.max_abs_delta:.3e} (tol {report.tol:g}) {verdict}", file=sys.stderr)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        code, text = COMMANDS[args.command](args)
    except (UsageError, DomainError, RankError, MomentError) as exc:
        print(f"tchar {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TcharError as exc:
        print(f"tchar {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
