"""Conditional moments of order statistics given X_{k:n} = x.

The averaged conditional moments reduce to normalized truncated moments
(independent of n and k). :func:`cond_density` implements the textbook
conditional density of X_{j:n} given X_{k:n} = x, which gives an
independent route to the same averages by direct quadrature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import DistributionModel
from .errors import DegenerateConditioningError, DomainError, MomentError, RankError
from .numerics import Interval, integrate

__all__ = [
    "DEGENERATE_EPS",
    "OrderStatContext",
    "Side",
    "avg_cond_moment",
    "cond_density",
    "cond_moment_oracle",
    "averaging_oracle",
    "side_probabilities",
    "truncated_moment",
]

DEGENERATE_EPS = 1e-12
MOMENT_REL_TOL = 1e-13
MOMENT_ABS_TOL = 1e-15


class Side(enum.Enum):
    BELOW = "below"
    ABOVE = "above"


@dataclass(frozen=True)
class OrderStatContext:
    """Sample size ``n``, conditioning rank ``k`` and moment power ``r``."""

    n: int
    k: int
    r: int = 1

    def __post_init__(self) -> None:
        for name in ("n", "k", "r"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise DomainError(f"{name} must be an integer, got {value!r}")
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if self.r < 1:
            raise DomainError(f"r must be >= 1, got {self.r}")
        if not 1 <= self.k <= self.n:
            raise RankError(f"k must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")

    def check_side(self, side: Side) -> None:
        if side is Side.BELOW and not 2 <= self.k <= self.n:
            raise RankError(f"below-side averages need 2 <= k <= n, got k={self.k}, n={self.n}")
        if side is Side.ABOVE and not 1 <= self.k <= self.n - 1:
            raise RankError(f"above-side averages need 1 <= k <= n-1, got k={self.k}, n={self.n}")

    def check_interior(self) -> None:
        """Both sides defined: 2 <= k <= n - 1."""
        if not 2 <= self.k <= self.n - 1:
            raise RankError(f"need 2 <= k <= n-1, got k={self.k}, n={self.n}")


def side_probabilities(dist: DistributionModel, x: float) -> tuple[float, float]:
    """(F(x), 1 - F(x)), each evaluated directly for tail precision."""
    return float(dist.cdf(x)), float(dist.sf(x))


def _check_moment(dist: DistributionModel, r: int, side: Side) -> None:
    if not dist.has_moment(r, side.value):
        raise MomentError(f"the {side.value}-side moment of order {r} does not exist for {dist.name}")


def _t_quad(f, dist: DistributionModel, dom: Interval, x: float, rel_tol: float, abs_tol: float) -> float:
    # split at the centre when it lies inside; a lone tail piece starting far
    # out is mapped with a scale that grows with its distance from the centre
    if dom.lower < dist.loc < dom.upper:
        pts, scale = [dist.loc], dist.scale
    else:
        pts, scale = [], max(dist.scale, abs(x - dist.loc))
    return integrate(f, dom, rel_tol, abs_tol, vectorized=True, scale=scale, points=pts).value


def _t_domain(dist: DistributionModel, r: int, x: float, side: Side, rel_tol: float, abs_tol: float) -> float:
    if side is Side.BELOW:
        dom = Interval(dist.support.lower, x)
    else:
        dom = Interval(x, dist.support.upper)

    def f(t):
        return t**r * dist.pdf(t)

    return _t_quad(f, dist, dom, x, rel_tol, abs_tol)


def _p_domain(dist: DistributionModel, r: int, u: float, v: float, side: Side, rel_tol: float,
              abs_tol: float) -> float:
    # integral of Q(p)^r dp over (0, u) or (u, 1), in the logit variable s
    s0 = math.log(u) - math.log(v)
    index = dist.lower_tail_index if side is Side.BELOW else dist.upper_tail_index
    decay = 1.0 - r / index if math.isfinite(index) else 1.0
    scale = max(1.0, 1.0 / decay)

    def f(s):
        p = special.expit(s)
        pc = special.expit(-s)
        out = np.zeros_like(s)
        ok = (p > 0.0) & (pc > 0.0)
        # fold the Jacobian into q before raising to r: q^r alone can overflow
        w = np.minimum(p[ok], pc[ok])
        q = dist.quantile_logit(s[ok])
        out[ok] = (q * w ** (1.0 / r)) ** r * np.maximum(p[ok], pc[ok])
        return out

    dom = Interval(-math.inf, s0) if side is Side.BELOW else Interval(s0, math.inf)
    res = integrate(f, dom, rel_tol, abs_tol, vectorized=True, scale=scale)
    return res.value


def truncated_moment(
    dist: DistributionModel,
    r: int,
    x: float,
    side: Side,
    *,
    rel_tol: float = MOMENT_REL_TOL,
    abs_tol: float = MOMENT_ABS_TOL,
) -> float:
    """Integral of t^r dF(t) over (-inf, x] (BELOW) or [x, inf) (ABOVE).

    Models with an inexpensive cdf are integrated in the t-domain; the
    others (e.g. the Q-family) use the probability domain, integrating
    Q(p)^r over (0, F(x)) or (F(x), 1) in the logit variable.
    """
    side = Side(side)
    if r < 0 or int(r) != r:
        raise DomainError(f"r must be a non-negative integer, got {r}")
    _check_moment(dist, r, side)
    x = float(x)
    if x <= dist.support.lower:
        return 0.0 if side is Side.BELOW else _full_moment(dist, r, rel_tol, abs_tol)
    if x >= dist.support.upper:
        return 0.0 if side is Side.ABOVE else _full_moment(dist, r, rel_tol, abs_tol)
    if dist.cheap_cdf:
        return _t_domain(dist, r, x, side, rel_tol, abs_tol)
    u, v = side_probabilities(dist, x)
    if u <= 0.0:
        return 0.0 if side is Side.BELOW else _full_moment(dist, r, rel_tol, abs_tol)
    if v <= 0.0:
        return 0.0 if side is Side.ABOVE else _full_moment(dist, r, rel_tol, abs_tol)
    return _p_domain(dist, r, u, v, side, rel_tol, abs_tol)


def _full_moment(dist: DistributionModel, r: int, rel_tol: float, abs_tol: float) -> float:
    below = truncated_moment(dist, r, dist.loc, Side.BELOW, rel_tol=rel_tol, abs_tol=abs_tol)
    above = truncated_moment(dist, r, dist.loc, Side.ABOVE, rel_tol=rel_tol, abs_tol=abs_tol)
    return below + above


def avg_cond_moment(
    dist: DistributionModel,
    ctx: OrderStatContext,
    x: float,
    side: Side,
    **tol,
) -> float:
    """Average of E[X_{i:n}^r | X_{k:n} = x] over the ranks on ``side`` of k."""
    side = Side(side)
    ctx.check_side(side)
    u, v = side_probabilities(dist, x)
    if u <= DEGENERATE_EPS or v <= DEGENERATE_EPS:
        raise DegenerateConditioningError(f"F(x) = {u!r} is too close to 0 or 1 at x = {x!r}")
    m = truncated_moment(dist, ctx.r, x, side, **tol)
    return m / u if side is Side.BELOW else m / v


def _cdf_gap(dist: DistributionModel, x: float, ux: float, vx: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """F(t), 1 - F(t) and |F(x) - F(t)| computed from the more precise tail."""
    ft = np.asarray(dist.cdf(t), dtype=np.float64)
    st = np.asarray(dist.sf(t), dtype=np.float64)
    gap = np.abs(ux - ft) if ux <= 0.5 else np.abs(st - vx)
    return ft, st, gap


def cond_density(dist: DistributionModel, n: int, k: int, j: int, x: float, t):
    """Density at ``t`` of X_{j:n} given X_{k:n} = x.

    For j < k this is the j-th order statistic of k - 1 draws from F
    truncated to (-inf, x); for j > k the (j - k)-th of n - k draws
    truncated to (x, inf).
    """
    if j == k or not (1 <= j <= n and 1 <= k <= n):
        raise RankError(f"need j != k and 1 <= j, k <= n; got n={n}, k={k}, j={j}")
    ux, vx = side_probabilities(dist, x)
    if not (0.0 < ux < 1.0):
        raise DegenerateConditioningError(f"F(x) = {ux!r} at x = {x!r}")
    ta = np.asarray(t, dtype=np.float64)
    ft, st, gap = _cdf_gap(dist, x, ux, vx, ta)
    f = np.asarray(dist.pdf(ta), dtype=np.float64)
    if j < k:
        m = k - 1
        log_coef = math.lgamma(m + 1) - math.lgamma(j) - math.lgamma(m - j + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp(log_coef - m * math.log(ux)) * ft ** (j - 1) * gap ** (m - j) * f
        val = np.where(ta < x, val, 0.0)
    else:
        m = n - k
        i = j - k
        log_coef = math.lgamma(m + 1) - math.lgamma(i) - math.lgamma(m - i + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.exp(log_coef - m * math.log(vx)) * gap ** (i - 1) * st ** (m - i) * f
        val = np.where(ta > x, val, 0.0)
    val = np.where(np.isfinite(val), val, 0.0)
    return float(val) if ta.ndim == 0 else val


def _oracle_p_domain(dist: DistributionModel, n: int, k: int, j: int, x: float, r: int,
                     rel_tol: float, abs_tol: float) -> float:
    # F(X_{j:n}) given F(X_{k:n}) = u is a scaled beta variable; integrate
    # Q(p)^r against that density in the logit variable
    u, v = side_probabilities(dist, x)
    s0 = math.log(u) - math.log(v)
    if j < k:
        m, i = k - 1, j
        log_coef = math.lgamma(m + 1) - math.lgamma(i) - math.lgamma(m - i + 1) - m * math.log(u)
    else:
        m, i = n - k, j - k
        log_coef = math.lgamma(m + 1) - math.lgamma(i) - math.lgamma(m - i + 1) - m * math.log(v)

    def f(s):
        p = special.expit(s)
        pc = special.expit(-s)
        out = np.zeros_like(s)
        ok = (p > 0.0) & (pc > 0.0)
        p, pc, s = p[ok], pc[ok], s[ok]
        with np.errstate(divide="ignore", invalid="ignore"):
            if j < k:
                gap = np.where(p <= 0.5, u - p, pc - v)
                dens = np.exp(log_coef + (i - 1) * np.log(p) + (m - i) * np.log(np.maximum(gap, 0.0)))
            else:
                gap = np.where(p <= 0.5, p - u, v - pc)
                dens = np.exp(log_coef + (i - 1) * np.log(np.maximum(gap, 0.0)) + (m - i) * np.log(pc))
        w = np.minimum(p, pc)
        q = dist.quantile_logit(s)
        val = (q * w ** (1.0 / r)) ** r * np.maximum(p, pc) * dens
        out[ok] = np.where(np.isfinite(val), val, 0.0)
        return out

    dom = Interval(-math.inf, s0) if j < k else Interval(s0, math.inf)
    return integrate(f, dom, rel_tol, abs_tol, vectorized=True).value


def cond_moment_oracle(
    dist: DistributionModel,
    n: int,
    k: int,
    j: int,
    x: float,
    r: int,
    *,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-14,
) -> float:
    """E[X_{j:n}^r | X_{k:n} = x] by direct quadrature of the conditional density.

    Models with an inexpensive cdf integrate :func:`cond_density` in t;
    the others integrate the quantile against the beta law of the
    conditioned uniform order statistic.
    """
    side = Side.BELOW if j < k else Side.ABOVE
    _check_moment(dist, r, side)
    if j == k or not (1 <= j <= n and 1 <= k <= n):
        raise RankError(f"need j != k and 1 <= j, k <= n; got n={n}, k={k}, j={j}")
    if not dist.cheap_cdf:
        return _oracle_p_domain(dist, n, k, j, x, r, rel_tol, abs_tol)
    dom = Interval(dist.support.lower, x) if side is Side.BELOW else Interval(x, dist.support.upper)

    def f(t):
        return t**r * cond_density(dist, n, k, j, x, t)

    return _t_quad(f, dist, dom, x, rel_tol, abs_tol)


def averaging_oracle(dist: DistributionModel, ctx: OrderStatContext, x: float, side: Side, **tol) -> float:
    """Left side of the averaging identity, one conditional moment per rank."""
    side = Side(side)
    ctx.check_side(side)
    ranks = range(1, ctx.k) if side is Side.BELOW else range(ctx.k + 1, ctx.n + 1)
    vals = [cond_moment_oracle(dist, ctx.n, ctx.k, j, x, ctx.r, **tol) for j in ranks]
    return math.fsum(vals) / len(vals)
