"""Student t, the standardized Z density, the Q-family and a few controls.

All pdf/cdf/quantile callables accept scalars or numpy arrays. Each model
also carries an upper-tail pair (``sf`` and ``isf``) so that probabilities
close to 1 keep full relative precision through ``1 - F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from . import _kernels
from .errors import ConvergenceError, DomainError
from .numerics import Interval, log_gamma, minimize

__all__ = [
    "DistributionModel",
    "QFamilyParams",
    "StudentTParams",
    "exponential",
    "fit_qfamily",
    "normal",
    "qfam_cdf_pdf",
    "qfam_pdf_at_u",
    "qfam_quantile",
    "qfamily",
    "qfamily_objective",
    "sample",
    "student_t",
    "t_cdf",
    "t_pdf",
    "t_quantile",
    "uniform",
    "z_distribution",
    "z_pdf",
]

_REAL_LINE = Interval(-math.inf, math.inf)


@dataclass(frozen=True)
class StudentTParams:
    nu: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not (self.nu >= 1.0) or math.isinf(self.nu):
            raise DomainError(f"nu must be a finite real >= 1, got {self.nu}")
        if not (self.sigma > 0.0) or math.isinf(self.sigma):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class QFamilyParams:
    lam: float
    c: float
    d: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.lam < 1.0):
            raise DomainError(f"lambda must lie in (0, 1), got {self.lam}")
        if not (self.c > 0.0) or math.isinf(self.c):
            raise DomainError(f"c must be positive, got {self.c}")
        if not math.isfinite(self.d):
            raise DomainError(f"d must be finite, got {self.d}")


@dataclass(frozen=True)
class DistributionModel:
    """Immutable bundle of the functions describing one distribution.

    ``lower_tail_index``/``upper_tail_index`` are the power-law tail indices:
    ``E|X|^r`` restricted to that tail is finite iff ``r`` is below the index
    (``inf`` for light or bounded tails). ``cheap_cdf`` marks models whose
    cdf needs no root finding, which decides the quadrature domain used for
    truncated moments. ``loc``/``scale`` are hints for quadrature transforms.
    """

    name: str
    pdf: Callable
    cdf: Callable
    sf: Callable
    quantile: Callable
    isf: Callable
    support: Interval = _REAL_LINE
    lower_tail_index: float = math.inf
    upper_tail_index: float = math.inf
    cheap_cdf: bool = True
    loc: float = 0.0
    scale: float = 1.0
    params: object = field(default=None, compare=False)

    @property
    def has_first_moment(self) -> bool:
        return self.has_moment(1)

    @property
    def has_second_moment(self) -> bool:
        return self.has_moment(2)

    def has_moment(self, r: int, side: str | None = None) -> bool:
        """Whether the r-th absolute moment is finite on ``side``
        ("below", "above", or both when None)."""
        if r == 0:
            return True
        if side == "below":
            return r < self.lower_tail_index
        if side == "above":
            return r < self.upper_tail_index
        return r < min(self.lower_tail_index, self.upper_tail_index)

    def quantile_logit(self, s):
        """Quantile at probability ``1/(1+exp(-s))`` without losing tail precision."""
        s = np.asarray(s, dtype=np.float64)
        out = np.empty_like(s)
        neg = s <= 0.0
        if neg.any():
            out[neg] = self.quantile(special.expit(s[neg]))
        if (~neg).any():
            out[~neg] = self.isf(special.expit(-s[~neg]))
        return out


def _as_out(arr: np.ndarray, like) -> float | np.ndarray:
    return float(arr) if np.ndim(like) == 0 else arr


def _check_prob(u: np.ndarray) -> None:
    if np.any(np.isnan(u)) or np.any((u <= 0.0) | (u >= 1.0)):
        raise DomainError("probability must lie strictly inside (0, 1)")


# ---------------------------------------------------------------- Student t


def _log_c(nu: float) -> float:
    return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) - 0.5 * math.log(math.pi * nu)


def _std_t_lower_tail(nu: float, z: np.ndarray) -> np.ndarray:
    """P(T <= -|z|) for the standard t."""
    az = np.abs(z)
    if nu == 1.0:
        with np.errstate(divide="ignore"):
            return np.arctan2(1.0, az) / math.pi
    if nu == 2.0:
        r = np.sqrt(2.0 + az * az)
        with np.errstate(over="ignore"):
            return 1.0 / (r * (r + az))
    return _kernels.t_lower_tail(float(nu), az.ravel()).reshape(az.shape)


def _std_t_lower_quantile(nu: float, p: np.ndarray) -> np.ndarray:
    """z <= 0 with P(T <= z) = p, for 0 < p <= 1/2."""
    if nu == 1.0:
        return -1.0 / np.tan(math.pi * p)
    if nu == 2.0:
        # 1 - p computed exactly enough: p <= 1/2
        return math.sqrt(2.0) * (p - 0.5) / np.sqrt(p * (1.0 - p))
    out = _kernels.t_lower_quantile(float(nu), p.ravel()).reshape(p.shape)
    if np.any(np.isnan(out)):
        raise ConvergenceError(f"t quantile inversion failed for nu={nu}")
    return out


def t_pdf(params: StudentTParams, x):
    """Location-scale Student t density."""
    z = (np.asarray(x, dtype=np.float64) - params.mu) / params.sigma
    nu = params.nu
    val = np.exp(_log_c(nu) - 0.5 * (nu + 1.0) * np.log1p(z * z / nu)) / params.sigma
    return _as_out(val, x)


def t_cdf(params: StudentTParams, x):
    """Student t cdf. Uses the closed form 1/2 (1 + z / sqrt(2 + z^2)) for nu = 2."""
    z = (np.asarray(x, dtype=np.float64) - params.mu) / params.sigma
    tail = _std_t_lower_tail(params.nu, z)
    return _as_out(np.where(z <= 0.0, tail, 1.0 - tail), x)


def t_sf(params: StudentTParams, x):
    z = (np.asarray(x, dtype=np.float64) - params.mu) / params.sigma
    tail = _std_t_lower_tail(params.nu, z)
    return _as_out(np.where(z >= 0.0, tail, 1.0 - tail), x)


def t_quantile(params: StudentTParams, u):
    """Inverse of :func:`t_cdf` on (0, 1)."""
    ua = np.asarray(u, dtype=np.float64)
    _check_prob(ua)
    lower = ua <= 0.5
    p = np.where(lower, ua, 1.0 - ua)
    z = _std_t_lower_quantile(params.nu, p)
    z = np.where(lower, z, -z)
    return _as_out(params.mu + params.sigma * z, u)


def t_isf(params: StudentTParams, v):
    """x with P(X > x) = v; precise for small v."""
    va = np.asarray(v, dtype=np.float64)
    _check_prob(va)
    upper = va <= 0.5
    p = np.where(upper, va, 1.0 - va)
    z = _std_t_lower_quantile(params.nu, p)
    z = np.where(upper, -z, z)
    return _as_out(params.mu + params.sigma * z, v)


def student_t(nu: float, mu: float = 0.0, sigma: float = 1.0) -> DistributionModel:
    params = StudentTParams(float(nu), float(mu), float(sigma))
    label = f"t(nu={params.nu:g}, mu={params.mu:g}, sigma={params.sigma:g})"
    return DistributionModel(
        name=label,
        pdf=lambda x: t_pdf(params, x),
        cdf=lambda x: t_cdf(params, x),
        sf=lambda x: t_sf(params, x),
        quantile=lambda u: t_quantile(params, u),
        isf=lambda v: t_isf(params, v),
        lower_tail_index=params.nu,
        upper_tail_index=params.nu,
        cheap_cdf=True,
        loc=params.mu,
        scale=params.sigma,
        params=params,
    )


def z_pdf(nu: float, x):
    """Unit-variance rescaling of the t_nu density (requires nu > 2)."""
    if not nu > 2.0:
        raise DomainError(f"z_pdf requires nu > 2, got {nu}")
    xa = np.asarray(x, dtype=np.float64)
    log_c = log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) - 0.5 * math.log((nu - 2.0) * math.pi)
    val = np.exp(log_c - 0.5 * (nu + 1.0) * np.log1p(xa * xa / (nu - 2.0)))
    return _as_out(val, x)


def z_distribution(nu: float) -> DistributionModel:
    """Model of Z = T * sqrt((nu - 2) / nu) with T ~ t_nu: mean 0, variance 1."""
    if not nu > 2.0:
        raise DomainError(f"z distribution requires nu > 2, got {nu}")
    base = StudentTParams(float(nu), 0.0, math.sqrt((nu - 2.0) / nu))
    return DistributionModel(
        name=f"Z(nu={nu:g})",
        pdf=lambda x: z_pdf(nu, x),
        cdf=lambda x: t_cdf(base, x),
        sf=lambda x: t_sf(base, x),
        quantile=lambda u: t_quantile(base, u),
        isf=lambda v: t_isf(base, v),
        lower_tail_index=float(nu),
        upper_tail_index=float(nu),
        cheap_cdf=True,
        scale=1.0,
        params=base,
    )


# ---------------------------------------------------------------- Q-family


def _qfam_from_uv(params: QFamilyParams, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # c (u - lam) / (lam (1 - lam) v^lam u^(1 - lam)) + d, with v = 1 - u
    lam, c = params.lam, params.c
    # u - lam from whichever of u, v is more precise
    num = np.where(u <= 0.5, u - lam, (1.0 - lam) - v)
    with np.errstate(divide="ignore", over="ignore"):
        val = c * num / (lam * (1.0 - lam) * v**lam * u ** (1.0 - lam))
    return val + params.d


def qfam_quantile(params: QFamilyParams, u):
    """Quantile function of the Q-family."""
    ua = np.asarray(u, dtype=np.float64)
    _check_prob(ua)
    return _as_out(_qfam_from_uv(params, ua, 1.0 - ua), u)


def qfam_isf(params: QFamilyParams, v):
    va = np.asarray(v, dtype=np.float64)
    _check_prob(va)
    return _as_out(_qfam_from_uv(params, 1.0 - va, va), v)


def qfam_quantile_derivative(params: QFamilyParams, u):
    """Q'(u) = c (1 - u)^-(1 + lam) u^-(2 - lam)."""
    ua = np.asarray(u, dtype=np.float64)
    lam = params.lam
    return _as_out(params.c * (1.0 - ua) ** (-(1.0 + lam)) * ua ** (-(2.0 - lam)), u)


def qfam_pdf_at_u(params: QFamilyParams, u, v=None):
    """Density at the point Q(u), i.e. 1 / Q'(u)."""
    ua = np.asarray(u, dtype=np.float64)
    va = 1.0 - ua if v is None else np.asarray(v, dtype=np.float64)
    lam = params.lam
    return _as_out(va ** (1.0 + lam) * ua ** (2.0 - lam) / params.c, u)


def _qfam_uv(params: QFamilyParams, x) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=np.float64)
    u, v = _kernels.qfam_cdf(params.lam, params.c, params.d, xa.ravel())
    if np.any(np.isnan(u)):
        raise ConvergenceError(f"Q-family cdf inversion failed for {params}")
    return u.reshape(xa.shape), v.reshape(xa.shape)


def qfam_cdf_pdf(params: QFamilyParams, x):
    """Return ``(F(x), f(x))`` for the Q-family; F is found by monotone inversion of Q."""
    u, v = _qfam_uv(params, x)
    pdf = qfam_pdf_at_u(params, u, v)
    return _as_out(u, x), _as_out(np.asarray(pdf), x)


def qfamily(lam: float, c: float, d: float = 0.0) -> DistributionModel:
    params = QFamilyParams(float(lam), float(c), float(d))

    def cdf(x):
        return _as_out(_qfam_uv(params, x)[0], x)

    def sf(x):
        return _as_out(_qfam_uv(params, x)[1], x)

    def pdf(x):
        return qfam_cdf_pdf(params, x)[1]

    return DistributionModel(
        name=f"Q(lambda={params.lam:g}, c={params.c:g}, d={params.d:g})",
        pdf=pdf,
        cdf=cdf,
        sf=sf,
        quantile=lambda u: qfam_quantile(params, u),
        isf=lambda v: qfam_isf(params, v),
        lower_tail_index=1.0 / (1.0 - params.lam),
        upper_tail_index=1.0 / params.lam,
        cheap_cdf=False,
        loc=params.d,
        scale=params.c,
        params=params,
    )


# ---------------------------------------------------------------- controls


def normal(mu: float = 0.0, sigma: float = 1.0) -> DistributionModel:
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")

    def pdf(x):
        z = (np.asarray(x, dtype=np.float64) - mu) / sigma
        return _as_out(np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi)), x)

    def cdf(x):
        return _as_out(special.ndtr((np.asarray(x, dtype=np.float64) - mu) / sigma), x)

    def sf(x):
        return _as_out(special.ndtr((mu - np.asarray(x, dtype=np.float64)) / sigma), x)

    def quantile(u):
        ua = np.asarray(u, dtype=np.float64)
        _check_prob(ua)
        return _as_out(mu + sigma * special.ndtri(ua), u)

    def isf(v):
        va = np.asarray(v, dtype=np.float64)
        _check_prob(va)
        return _as_out(mu - sigma * special.ndtri(va), v)

    return DistributionModel(f"normal(mu={mu:g}, sigma={sigma:g})", pdf, cdf, sf, quantile, isf,
                             loc=mu, scale=sigma, params=(mu, sigma))


def uniform(a: float = 0.0, b: float = 1.0) -> DistributionModel:
    if not a < b:
        raise DomainError(f"uniform requires a < b, got ({a}, {b})")
    w = b - a

    def pdf(x):
        xa = np.asarray(x, dtype=np.float64)
        return _as_out(np.where((xa >= a) & (xa <= b), 1.0 / w, 0.0), x)

    def cdf(x):
        return _as_out(np.clip((np.asarray(x, dtype=np.float64) - a) / w, 0.0, 1.0), x)

    def sf(x):
        return _as_out(np.clip((b - np.asarray(x, dtype=np.float64)) / w, 0.0, 1.0), x)

    def quantile(u):
        ua = np.asarray(u, dtype=np.float64)
        _check_prob(ua)
        return _as_out(a + w * ua, u)

    def isf(v):
        va = np.asarray(v, dtype=np.float64)
        _check_prob(va)
        return _as_out(b - w * va, v)

    return DistributionModel(f"uniform({a:g}, {b:g})", pdf, cdf, sf, quantile, isf,
                             support=Interval(a, b), loc=0.5 * (a + b), scale=w, params=(a, b))


def exponential(rate: float = 1.0, loc: float = 0.0) -> DistributionModel:
    """Exponential shifted to start at ``loc``; ``loc=-1/rate`` gives mean zero."""
    if not rate > 0.0:
        raise DomainError(f"rate must be positive, got {rate}")

    def pdf(x):
        y = np.asarray(x, dtype=np.float64) - loc
        with np.errstate(over="ignore"):
            return _as_out(np.where(y >= 0.0, rate * np.exp(-rate * y), 0.0), x)

    def cdf(x):
        y = np.maximum(np.asarray(x, dtype=np.float64) - loc, 0.0)
        return _as_out(-np.expm1(-rate * y), x)

    def sf(x):
        y = np.maximum(np.asarray(x, dtype=np.float64) - loc, 0.0)
        return _as_out(np.exp(-rate * y), x)

    def quantile(u):
        ua = np.asarray(u, dtype=np.float64)
        _check_prob(ua)
        return _as_out(loc - np.log1p(-ua) / rate, u)

    def isf(v):
        va = np.asarray(v, dtype=np.float64)
        _check_prob(va)
        return _as_out(loc - np.log(va) / rate, v)

    return DistributionModel(f"exponential(rate={rate:g}, loc={loc:g})", pdf, cdf, sf, quantile, isf,
                             support=Interval(loc, math.inf), loc=loc + 1.0 / rate, scale=1.0 / rate,
                             params=(rate, loc))


# ---------------------------------------------------------------- sampling and fitting


def sample(dist: DistributionModel, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """Inverse-transform draws from a PCG64 generator seeded with ``(seed, stream)``.

    Uniforms are ``(k + 1/2) / 2**53`` for integer ``k``, so they never hit 0
    or 1; the upper half is mapped through ``isf`` to keep tail resolution.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))
    k = rng.integers(0, 2**53, size=count, dtype=np.int64)
    u = (k.astype(np.float64) + 0.5) / 2.0**53
    out = np.empty(count)
    low = u < 0.5
    if low.any():
        out[low] = dist.quantile(u[low])
    if (~low).any():
        out[~low] = dist.isf(1.0 - u[~low])
    return out


def qfamily_objective(params: QFamilyParams, u_grid: np.ndarray, target_q: np.ndarray) -> float:
    """Sum of squared quantile differences over ``u_grid``."""
    diff = qfam_quantile(params, u_grid) - target_q
    return float(np.dot(diff, diff))


def fit_qfamily(
    target: DistributionModel,
    u_grid: Sequence[float],
    initial: QFamilyParams,
    tol: float = 1e-12,
) -> QFamilyParams:
    """Least-squares fit of Q-family quantiles to ``target`` on ``u_grid``.

    The search runs over (logit lambda, log c, d) so every trial point is a
    valid parameter set.
    """
    u = np.asarray(u_grid, dtype=np.float64)
    if u.size < 5:
        raise DomainError("u_grid needs at least 5 points")
    _check_prob(u)
    tq = np.asarray(target.quantile(u), dtype=np.float64)
    if not np.all(np.isfinite(tq)):
        raise DomainError("target quantile is not finite on u_grid")

    def unpack(theta):
        lam = float(special.expit(theta[0]))
        lam = min(max(lam, 1e-15), 1.0 - 1e-15)
        return QFamilyParams(lam, math.exp(theta[1]), float(theta[2]))

    def objective(theta):
        try:
            return qfamily_objective(unpack(theta), u, tq)
        except (DomainError, OverflowError):
            return math.inf

    theta0 = np.array([special.logit(initial.lam), math.log(initial.c), initial.d])
    theta = minimize(objective, theta0, tol=tol)
    fitted = unpack(theta)
    if objective(theta) > objective(theta0):
        return initial
    return fitted
