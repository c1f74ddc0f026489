"""Residuals of the order-statistic regression identities.

Each ``*_residual`` returns left side minus right side at one conditioning
point; it vanishes identically for members of the characterized family.
The ``*_grid`` helpers evaluate a residual over a quantile-spaced grid and
collect the result in a :class:`ResidualReport`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import DistributionModel, z_distribution, z_pdf
from .errors import DomainError, MomentError, TcharError
from .order_stats import OrderStatContext, Side, avg_cond_moment, side_probabilities, truncated_moment

__all__ = [
    "DEFAULT_GRID_POINTS",
    "DEFAULT_P_MIN",
    "ResidualReport",
    "RouteMismatchError",
    "lemma1_ode_grid",
    "lemma1_ode_residual",
    "lemma1_ode_terms",
    "log_slope_grid",
    "log_slope_residual",
    "quantile_grid",
    "star_grid",
    "star_residual",
    "theorem1_grid",
    "theorem1_residual",
    "theorem1_terms",
    "theorem2_grid",
    "theorem2_residual",
    "theorem2_routes",
]

DEFAULT_GRID_POINTS = 41
DEFAULT_P_MIN = 1e-4
DEFAULT_TOL = 1e-6
ROUTE_TOL = 1e-9


class RouteMismatchError(TcharError, ArithmeticError):
    """The expanded and simplified forms of the second-moment identity disagree."""


@dataclass
class ResidualReport:
    x_grid: list[float]
    lhs: list[float]
    rhs: list[float]
    delta: list[float]
    max_abs_delta: float
    tol: float
    passed: bool
    delta_normalized: list[float] | None = field(default=None)

    @classmethod
    def from_sides(cls, x, lhs, rhs, tol: float, normalize: bool = False) -> "ResidualReport":
        x = [float(v) for v in x]
        lhs = [float(v) for v in lhs]
        rhs = [float(v) for v in rhs]
        delta = [a - b for a, b in zip(lhs, rhs)]
        worst = max(abs(d) for d in delta) if delta else 0.0
        norm = [d / (1.0 + xi * xi) for d, xi in zip(delta, x)] if normalize else None
        return cls(x, lhs, rhs, delta, worst, float(tol), bool(worst <= tol), norm)

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["delta_normalized"] is None:
            del out["delta_normalized"]
        return out


def quantile_grid(dist: DistributionModel, points: int = DEFAULT_GRID_POINTS,
                  p_min: float = DEFAULT_P_MIN) -> np.ndarray:
    """Map equally spaced probabilities in [p_min, 1 - p_min] through the quantile."""
    if points < 1:
        raise DomainError("grid needs at least one point")
    if not 0.0 < p_min < 0.5:
        raise DomainError(f"p_min must lie in (0, 1/2), got {p_min}")
    u = np.linspace(p_min, 1.0 - p_min, points) if points > 1 else np.array([0.5])
    x = np.empty_like(u)
    low = u <= 0.5
    x[low] = dist.quantile(u[low])
    if (~low).any():
        x[~low] = dist.isf(1.0 - u[~low])
    return x


# ---------------------------------------------------------------- first moments


def _require_first_moment(dist: DistributionModel) -> None:
    if not dist.has_first_moment:
        raise MomentError(f"{dist.name} has no finite first moment")


def theorem1_terms(dist: DistributionModel, lam: float, ctx: OrderStatContext, x: float) -> tuple[float, float]:
    """(lam * mean deviation below x, (1 - lam) * mean deviation above x)."""
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    ctx.check_interior()
    _require_first_moment(dist)
    first = OrderStatContext(ctx.n, ctx.k, 1)
    below = avg_cond_moment(dist, first, x, Side.BELOW)
    above = avg_cond_moment(dist, first, x, Side.ABOVE)
    return lam * (x - below), (1.0 - lam) * (above - x)


def theorem1_residual(dist: DistributionModel, lam: float, ctx: OrderStatContext, x: float) -> float:
    """lam * (x - m_below) - (1 - lam) * (m_above - x); zero on the Q-family with that lambda."""
    lhs, rhs = theorem1_terms(dist, lam, ctx, x)
    return lhs - rhs


# ---------------------------------------------------------------- second moments


def theorem2_routes(
    dist: DistributionModel, nu: float, ctx: OrderStatContext, x: float, loc: float = 0.0
) -> dict[str, float]:
    """Both forms of the second-moment identity at ``x``.

    Moments are taken of ``X - loc``. Returns the simplified sides
    ``lhs = (nu-1) y (m1+ - m1-)`` and ``rhs = (nu-2) (m2+ - m2-)`` with
    ``y = x - loc``, the expanded squared-deviation sides, and the expanded
    difference divided by ``nu - 2`` (which equals ``lhs - rhs``).
    """
    if not nu >= 3:
        raise DomainError(f"nu must be >= 3, got {nu}")
    ctx.check_interior()
    if not dist.has_second_moment:
        raise MomentError(f"{dist.name} has no finite second moment")
    one = OrderStatContext(ctx.n, ctx.k, 1)
    two = OrderStatContext(ctx.n, ctx.k, 2)
    m1_lo = avg_cond_moment(dist, one, x, Side.BELOW)
    m1_hi = avg_cond_moment(dist, one, x, Side.ABOVE)
    m2_lo = avg_cond_moment(dist, two, x, Side.BELOW)
    m2_hi = avg_cond_moment(dist, two, x, Side.ABOVE)
    if loc != 0.0:
        m2_lo = m2_lo - 2.0 * loc * m1_lo + loc * loc
        m2_hi = m2_hi - 2.0 * loc * m1_hi + loc * loc
        m1_lo -= loc
        m1_hi -= loc
    y = x - loc
    lhs = (nu - 1.0) * y * (m1_hi - m1_lo)
    rhs = (nu - 2.0) * (m2_hi - m2_lo)
    a = 0.5 * (nu - 1.0) * y
    b = nu - 2.0
    below_sq = a * a - 2.0 * a * b * m1_lo + b * b * m2_lo
    above_sq = b * b * m2_hi - 2.0 * a * b * m1_hi + a * a
    return {
        "lhs": lhs,
        "rhs": rhs,
        "simplified": lhs - rhs,
        "expanded_below": below_sq,
        "expanded_above": above_sq,
        "expanded": (below_sq - above_sq) / b,
    }


def theorem2_residual(
    dist: DistributionModel, nu: float, ctx: OrderStatContext, x: float, loc: float = 0.0
) -> float:
    """(nu-1) y (m1+ - m1-) - (nu-2) (m2+ - m2-) for moments of ``X - loc``.

    Raises :class:`RouteMismatchError` if the expanded squared-deviation form
    disagrees with the simplified one by more than ``ROUTE_TOL`` (relative to
    the size of the expanded terms when those exceed 1).
    """
    r = theorem2_routes(dist, nu, ctx, x, loc)
    size = max(1.0, abs(r["expanded_below"]) + abs(r["expanded_above"]))
    if abs(r["expanded"] - r["simplified"]) > ROUTE_TOL * size:
        raise RouteMismatchError(
            f"expanded {r['expanded']!r} vs simplified {r['simplified']!r} at x={x!r}"
        )
    return r["simplified"]


# ---------------------------------------------------------------- ODE checks


def lemma1_ode_terms(dist: DistributionModel, lam: float, c: float, x: float) -> tuple[float, float]:
    u, v = side_probabilities(dist, x)
    if not (0.0 < u < 1.0):
        raise DomainError(f"F(x) = {u!r} must lie strictly inside (0, 1)")
    return u ** (2.0 - lam) * v ** (1.0 + lam), c * float(dist.pdf(x))


def lemma1_ode_residual(dist: DistributionModel, lam: float, c: float, x: float) -> float:
    """F^(2-lam) (1-F)^(1+lam) - c f at ``x``."""
    if not c > 0.0:
        raise DomainError(f"c must be positive, got {c}")
    lhs, rhs = lemma1_ode_terms(dist, lam, c, x)
    return lhs - rhs


def _star_terms(nu: float, x: float, dist: DistributionModel | None = None) -> tuple[float, float]:
    z = z_distribution(nu) if dist is None else dist
    first = truncated_moment(z, 1, x, Side.BELOW)
    second = truncated_moment(z, 2, x, Side.BELOW)
    f_x = float(z.cdf(x))
    return -(nu - 1.0) * x * first, (nu - 2.0) * (f_x - second)


def star_residual(nu: float, x: float, dist: DistributionModel | None = None) -> float:
    """-(nu-1) x int_{-inf}^x t dF - (nu-2) [F(x) - int_{-inf}^x t^2 dF].

    ``dist`` defaults to the unit-variance Z_nu law; pass another
    zero-mean, unit-variance model to run a negative control.
    """
    if not nu >= 3:
        raise DomainError(f"nu must be >= 3, got {nu}")
    lhs, rhs = _star_terms(nu, x, dist)
    return lhs - rhs


def _log_slope_terms(nu: float, x: float, h: float) -> tuple[float, float]:
    fd = (math.log(z_pdf(nu, x + h)) - math.log(z_pdf(nu, x - h))) / (2.0 * h)
    exact = -(nu + 1.0) / (nu - 2.0) * x / (1.0 + x * x / (nu - 2.0))
    return fd, exact


def log_slope_residual(nu: float, x: float, h: float = 1e-4) -> float:
    """Central-difference log-density slope of Z_nu minus the closed-form slope."""
    if not nu >= 3:
        raise DomainError(f"nu must be >= 3, got {nu}")
    if not h > 0.0:
        raise DomainError(f"h must be positive, got {h}")
    fd, exact = _log_slope_terms(nu, x, h)
    return fd - exact


# ---------------------------------------------------------------- grids


def _grid(dist, points, p_min, x_grid):
    if x_grid is not None:
        return np.asarray(x_grid, dtype=np.float64)
    return quantile_grid(dist, points, p_min)


def _collect(terms: Callable[[float], tuple[float, float]], xs: Sequence[float], tol: float,
             normalize: bool = False) -> ResidualReport:
    pairs = [terms(float(x)) for x in xs]
    return ResidualReport.from_sides(xs, [p[0] for p in pairs], [p[1] for p in pairs], tol, normalize)


def theorem1_grid(dist: DistributionModel, lam: float, ctx: OrderStatContext, tol: float = DEFAULT_TOL, *,
                  points: int = DEFAULT_GRID_POINTS, p_min: float = DEFAULT_P_MIN,
                  x_grid: Sequence[float] | None = None) -> ResidualReport:
    xs = _grid(dist, points, p_min, x_grid)
    return _collect(lambda x: theorem1_terms(dist, lam, ctx, x), xs, tol)


def theorem2_grid(dist: DistributionModel, nu: float, ctx: OrderStatContext, tol: float = DEFAULT_TOL, *,
                  loc: float = 0.0, points: int = DEFAULT_GRID_POINTS, p_min: float = DEFAULT_P_MIN,
                  x_grid: Sequence[float] | None = None) -> ResidualReport:
    """Grid report for the second-moment identity; also reports delta / (1 + x^2)."""
    xs = _grid(dist, points, p_min, x_grid)

    def terms(x):
        theorem2_residual(dist, nu, ctx, x, loc)  # route check
        r = theorem2_routes(dist, nu, ctx, x, loc)
        return r["lhs"], r["rhs"]

    return _collect(terms, xs, tol, normalize=True)


def lemma1_ode_grid(dist: DistributionModel, lam: float, c: float, tol: float = 1e-9, *,
                    points: int = DEFAULT_GRID_POINTS, p_min: float = DEFAULT_P_MIN,
                    x_grid: Sequence[float] | None = None) -> ResidualReport:
    xs = _grid(dist, points, p_min, x_grid)
    return _collect(lambda x: lemma1_ode_terms(dist, lam, c, x), xs, tol)


def star_grid(nu: float, tol: float = 1e-7, *, points: int = DEFAULT_GRID_POINTS,
              p_min: float = DEFAULT_P_MIN, x_grid: Sequence[float] | None = None) -> ResidualReport:
    z = z_distribution(nu)
    xs = _grid(z, points, p_min, x_grid)
    return _collect(lambda x: _star_terms(nu, x, z), xs, tol)


def log_slope_grid(nu: float, h: float = 1e-4, tol: float = 1e-6, *, points: int = DEFAULT_GRID_POINTS,
                   p_min: float = DEFAULT_P_MIN, x_grid: Sequence[float] | None = None) -> ResidualReport:
    xs = _grid(z_distribution(nu), points, p_min, x_grid)
    return _collect(lambda x: _log_slope_terms(nu, x, h), xs, tol)
