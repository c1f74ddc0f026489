"""Special functions, adaptive quadrature, monotone inversion and minimization."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import BracketError, ConvergenceError, DomainError, QuadratureError

__all__ = [
    "Interval",
    "QuadratureResult",
    "integrate",
    "invert_monotone",
    "log_gamma",
    "minimize",
    "regularized_incomplete_beta",
]

DEFAULT_REL_TOL = 1e-10
DEFAULT_ABS_TOL = 1e-12
MAX_EVALUATIONS = 10**6
MAX_DOUBLINGS = 64


@dataclass(frozen=True)
class Interval:
    """Integration or bracketing interval; either end may be infinite."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper) or not self.lower < self.upper:
            raise DomainError(f"interval requires lower < upper, got ({self.lower}, {self.upper})")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def __contains__(self, x: float) -> bool:
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"log_gamma requires finite x > 0, got {x}")
    return math.lgamma(x)


def regularized_incomplete_beta(a: float, b: float, x):
    """I_x(a, b) by continued fraction. Accepts a scalar or array ``x``."""
    if not (a > 0.0 and b > 0.0) or math.isinf(a) or math.isinf(b):
        raise DomainError(f"incomplete beta requires a > 0 and b > 0, got a={a}, b={b}")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise DomainError("incomplete beta requires 0 <= x <= 1")
    flat = arr.ravel()
    out = _kernels.betainc(float(a), float(b), flat, 1.0 - flat)
    if np.any(np.isnan(out)):
        raise ConvergenceError(f"incomplete beta continued fraction did not converge for a={a}, b={b}")
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])
_EPS = np.finfo(float).eps


def _make_mapping(domain: Interval, center: float | None, scale: float):
    """Return (g, a, b): integrate g over the finite interval [a, b]."""
    lo, hi = domain.lower, domain.upper
    if domain.is_finite:
        return None, lo, hi
    if math.isinf(lo) and math.isinf(hi):
        m = 0.0 if center is None else center

        def jac(u):
            one = 1.0 - u * u
            return m + scale * u / one, scale * (1.0 + u * u) / (one * one)

        return jac, -1.0, 1.0
    if math.isinf(hi):

        def jac(u):
            one = 1.0 - u
            return lo + scale * u / one, scale / (one * one)

        return jac, 0.0, 1.0

    def jac(u):
        one = 1.0 - u
        return hi - scale * u / one, scale / (one * one)

    return jac, 0.0, 1.0


def _gk15(fun, a: float, b: float) -> tuple[float, float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fv = fun(mid + half * _NODES)
    resk = float(np.dot(_KWEIGHTS, fv))
    resg = float(np.dot(_GWEIGHTS, fv))
    reskh = 0.5 * resk
    resabs = float(np.dot(_KWEIGHTS, np.abs(fv))) * abs(half)
    resasc = float(np.dot(_KWEIGHTS, np.abs(fv - reskh))) * abs(half)
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    floor = 50.0 * _EPS * resabs
    err = max(floor, err)
    return resk * half, err, floor


def integrate(
    f: Callable,
    domain: Interval | tuple[float, float],
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    *,
    vectorized: bool = False,
    center: float | None = None,
    scale: float = 1.0,
    points: Sequence[float] = (),
    max_evaluations: int = MAX_EVALUATIONS,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod (7/15) quadrature.

    ``points`` split the domain first (kinks, peaks). A piece with one
    infinite end is mapped by ``t = a + s*u/(1-u)`` from its finite end
    ``a``; the whole real line (no points) by ``t = m + s*u/(1-u^2)``, with
    ``s = scale`` and ``m = center``.

    Set ``vectorized=True`` when ``f`` maps an ndarray to an ndarray.
    """
    if not isinstance(domain, Interval):
        domain = Interval(*domain)
    if not (rel_tol > 0.0 and abs_tol > 0.0):
        raise DomainError("tolerances must be positive")
    if not scale > 0.0:
        raise DomainError("scale must be positive")

    if vectorized:
        fv = f
    else:

        def fv(t):
            return np.array([f(float(ti)) for ti in t], dtype=np.float64)

    def mapped(jac):
        def fun(u):
            with np.errstate(divide="ignore", invalid="ignore"):
                t, w = jac(u)
            # nodes that round onto a mapped endpoint carry no weight
            inner = np.isfinite(w)
            if inner.all():
                return fv(t) * w
            out = np.zeros_like(u)
            out[inner] = fv(t[inner]) * w[inner]
            return out

        return fun

    # split at the breakpoints first; only pieces with an infinite end are
    # mapped, each anchored at its own finite end
    inner_pts = sorted({float(p) for p in points if domain.lower < p < domain.upper})
    edges = [domain.lower, *inner_pts, domain.upper]
    funs = []
    segments = []  # (lo, hi, piece index)
    for lo, hi in zip(edges[:-1], edges[1:]):
        jac, a, b = _make_mapping(Interval(lo, hi), center, scale)
        funs.append(fv if jac is None else mapped(jac))
        if jac is None:
            segments.append((a, b, len(funs) - 1))
        else:
            # the transform packs the far tail near the end; split there too
            cuts = [a + q * (b - a) for q in (0.0, 0.25, 0.5, 0.75, 1.0)]
            segments.extend((c0, c1, len(funs) - 1) for c0, c1 in zip(cuts[:-1], cuts[1:]))

    # heap items: (-error, lo, hi, value, roundoff floor, piece)
    heap: list[tuple[float, float, float, float, float, int]] = []
    total = 0.0
    err_total = 0.0
    floor_total = 0.0
    evaluations = 0
    for lo, hi, k in segments:
        val, err, flo = _gk15(funs[k], lo, hi)
        evaluations += 15
        total += val
        err_total += err
        floor_total += flo
        heapq.heappush(heap, (-err, lo, hi, val, flo, k))

    # cancellation can leave the roundoff floor above the requested tolerance;
    # nothing is gained by refining below it
    while not err_total <= max(abs_tol, rel_tol * abs(total), 1.5 * floor_total):
        if not math.isfinite(total) or not math.isfinite(err_total):
            raise QuadratureError("integrand produced a non-finite value", total, err_total)
        if evaluations + 30 > max_evaluations:
            raise QuadratureError(
                f"quadrature did not converge within {max_evaluations} evaluations "
                f"(value {total!r}, error estimate {err_total:.3g})",
                total,
                err_total,
            )
        neg_err, lo, hi, val, flo, k = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError("interval width reached machine precision", total, err_total)
        v1, e1, f1 = _gk15(funs[k], lo, mid)
        v2, e2, f2 = _gk15(funs[k], mid, hi)
        evaluations += 30
        total += v1 + v2 - val
        err_total += e1 + e2 + neg_err
        floor_total += f1 + f2 - flo
        heapq.heappush(heap, (-e1, lo, mid, v1, f1, k))
        heapq.heappush(heap, (-e2, mid, hi, v2, f2, k))
        if len(heap) % 64 == 0:
            # refresh the running sums to shed accumulated rounding
            total = math.fsum(item[3] for item in heap)
            err_total = math.fsum(-item[0] for item in heap)
            floor_total = math.fsum(item[4] for item in heap)

    total = math.fsum(item[3] for item in heap)
    err_total = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, err_total, evaluations)


def invert_monotone(
    g: Callable[[float], float],
    target: float,
    bracket: Interval | tuple[float, float],
    tol: float = 1e-12,
    *,
    max_doublings: int = MAX_DOUBLINGS,
) -> float:
    """Solve ``g(x) = target`` for strictly increasing ``g``.

    The bracket is widened geometrically (its width doubles at each step)
    until it straddles ``target``; :class:`BracketError` is raised after
    ``max_doublings`` unsuccessful expansions.
    """
    if not isinstance(bracket, Interval):
        bracket = Interval(*bracket)
    lo, hi = float(bracket.lower), float(bracket.upper)
    glo, ghi = g(lo), g(hi)
    width = hi - lo
    n = 0
    while not (glo <= target <= ghi):
        if n >= max_doublings or not math.isfinite(width):
            raise BracketError(
                f"could not bracket target {target!r} after {n} doublings (g range seen: [{glo!r}, {ghi!r}])"
            )
        if glo > target:
            lo -= width
            glo = g(lo)
        if ghi < target:
            hi += width
            ghi = g(hi)
        width = hi - lo
        n += 1
    if glo == target:
        return lo
    if ghi == target:
        return hi
    root = optimize.brentq(lambda x: g(x) - target, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)
    if abs(g(root) - target) > tol:
        # accept only if the bracket has collapsed to machine resolution
        step = 8 * _EPS * max(abs(root), 1e-300)
        if not (g(root - step) <= target <= g(root + step)):
            raise ConvergenceError(f"inversion residual {abs(g(root) - target):.3g} exceeds tol {tol:.3g}")
    return float(root)


def minimize(
    objective: Callable[[np.ndarray], float],
    initial: Sequence[float],
    tol: float = 1e-10,
    *,
    max_iterations: int = 20000,
    restarts: int = 4,
) -> np.ndarray:
    """Derivative-free Nelder-Mead minimization, restarted from its own result.

    Restarting rebuilds the simplex around the current best point, which
    guards against the simplex collapsing early. Deterministic for fixed
    inputs. Raises :class:`ConvergenceError` if the iteration cap is hit.
    """
    x = np.atleast_1d(np.asarray(initial, dtype=np.float64)).copy()
    if x.size > 3:
        raise DomainError("minimize supports at most 3 parameters")
    f0 = objective(x)
    if not math.isfinite(f0):
        raise DomainError("objective is not finite at the initial point")
    best = f0
    used = 0
    for _ in range(restarts + 1):
        step = np.where(x != 0.0, 0.05 * np.abs(x), 0.00025)
        simplex = np.vstack([x] + [x + np.eye(x.size)[i] * step[i] for i in range(x.size)])
        res = optimize.minimize(
            objective,
            x,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": tol,
                "fatol": tol * tol,
                "maxiter": max_iterations - used,
                "maxfev": 4 * max_iterations,
            },
        )
        used += int(res.nit)
        if res.status == 2 or used >= max_iterations:
            raise ConvergenceError(f"Nelder-Mead hit its iteration cap ({max_iterations})")
        improved = best - res.fun
        if res.fun <= best:
            x = np.asarray(res.x, dtype=np.float64)
            best = float(res.fun)
        if improved <= tol * tol:
            break
    return x
