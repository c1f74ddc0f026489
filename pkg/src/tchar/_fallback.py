"""Pure numpy implementations of the scalar kernels.

Every function here mirrors one in ``_core.pyx`` and takes/returns
contiguous float64 arrays. The algorithms are identical; only the loop
structure differs (masked array updates instead of per-element C loops).
Elements that fail to converge come back as NaN.
"""

from __future__ import annotations

from math import lgamma, log, pi

import numpy as np

_EPS = 1e-16
_TINY = 1e-300
_MAX_CF = 2000
_MAX_ROOT = 200
# relative step in log space at which root iterations stop; below ~4 ulp the
# iteration can cycle on rounding noise
_ROOT_TOL = 1e-14
# g is a difference of logs; |g| below _G_TOL times the size of those logs is rounding noise
_G_TOL = 4e-16


def _betacf(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    # modified Lentz evaluation; converged entries leave the working set
    out = np.full(x.shape, np.nan)
    idx = np.arange(x.size)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _MAX_CF + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h *= delta
        conv = np.abs(delta - 1.0) < _EPS
        if conv.any():
            out[idx[conv]] = h[conv]
            keep = ~conv
            if not keep.any():
                break
            idx, a, b, x, c, d, h = idx[keep], a[keep], b[keep], x[keep], c[keep], d[keep], h[keep]
            qab, qap, qam = qab[keep], qap[keep], qam[keep]
    return out


def _betainc_log(a: float, b: float, x, y, logx, logy) -> np.ndarray:
    # logx/logy stay finite when x itself underflows (extreme t tails)
    out = np.empty_like(x)
    lbeta = lgamma(a + b) - lgamma(a) - lgamma(b)
    interior = np.isfinite(logx) & np.isfinite(logy)
    out[~np.isfinite(logx)] = 0.0
    out[~np.isfinite(logy)] = 1.0
    if not interior.any():
        return out
    xi, yi = x[interior], y[interior]
    front = np.exp(lbeta + a * logx[interior] + b * logy[interior])
    swap = xi > (a + 1.0) / (a + b + 2.0)
    aa = np.where(swap, b, a)
    bb = np.where(swap, a, b)
    arg = np.where(swap, yi, xi)
    cf = _betacf(aa, bb, arg)
    val = front * cf / aa
    out[interior] = np.where(swap, 1.0 - val, val)
    return out


def betainc(a: float, b: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Regularized incomplete beta I_x(a, b); ``y`` must equal ``1 - x``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.where(x > 0.0, np.log(np.maximum(x, 0.0)), -np.inf)
        logy = np.where(y > 0.0, np.log(np.maximum(y, 0.0)), -np.inf)
    return _betainc_log(a, b, x, y, logx, logy)


def _t_norm(nu: float) -> float:
    return lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) - 0.5 * log(pi * nu)


def _t_xy(nu: float, z: np.ndarray):
    # x = nu / (nu + z^2), y = 1 - x and their logs, without overflow for huge |z|
    az = np.abs(z)
    rn = np.sqrt(nu)
    big = az > rn
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        ratio = np.where(big, rn / np.where(big, az, 1.0), az / rn)
        w = ratio * ratio
        logw = 2.0 * np.log(ratio)
    l1w = np.log1p(w)
    x = np.where(big, w / (1.0 + w), 1.0 / (1.0 + w))
    y = np.where(big, 1.0 / (1.0 + w), w / (1.0 + w))
    logx = np.where(big, logw - l1w, -l1w)
    logy = np.where(big, -l1w, logw - l1w)
    return x, y, logx, logy


def t_lower_tail(nu: float, z: np.ndarray) -> np.ndarray:
    """P(T <= -|z|) for standard Student t with ``nu`` degrees of freedom."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    return 0.5 * _betainc_log(0.5 * nu, 0.5, *_t_xy(nu, z))


def _t_log_pdf(nu: float, z: np.ndarray) -> np.ndarray:
    return _t_norm(nu) + 0.5 * (nu + 1.0) * _t_xy(nu, z)[2]


def _solve_decreasing(fun, s: np.ndarray, lo: np.ndarray, hi: np.ndarray, gscale: np.ndarray) -> np.ndarray:
    # safeguarded Newton for g(s) = 0 with g(lo) > 0 > g(hi);
    # fun(s, idx) evaluates g and g' for the elements listed in idx
    out = np.full(s.shape, np.nan)
    idx = np.arange(s.size)
    s, lo, hi = s.copy(), lo.copy(), hi.copy()
    gtol = _G_TOL * np.maximum(gscale, 1.0)
    for _ in range(_MAX_ROOT):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g, dg = fun(s, idx)
            pos = g > 0.0
            lo = np.where(pos, s, lo)
            hi = np.where(pos, hi, s)
            cand = s - g / dg
        bad = ~np.isfinite(cand) | (cand < lo) | (cand > hi)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        tol = _ROOT_TOL * np.maximum(np.abs(s), 1.0)
        exact = np.abs(g) <= gtol
        conv = exact | (np.abs(cand - s) <= tol) | (hi - lo <= tol)
        s = np.where(exact, s, cand)
        if conv.any():
            out[idx[conv]] = s[conv]
            keep = ~conv
            if not keep.any():
                break
            idx, s, lo, hi, gtol = idx[keep], s[keep], lo[keep], hi[keep], gtol[keep]
    return out


def _expand_up(fun, s: np.ndarray, cap: float) -> np.ndarray:
    # move s right until g(s) < 0, doubling the step each time
    every = np.arange(s.size)
    step = np.ones_like(s)
    for _ in range(64):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g, _ = fun(s, every)
        ok = g < 0.0
        if ok.all():
            break
        s = np.where(ok, s, np.minimum(s + step, cap))
        step *= 2.0
    return s


def _expand_down(fun, s: np.ndarray, cap: float) -> np.ndarray:
    # move s left until g(s) > 0
    every = np.arange(s.size)
    step = np.ones_like(s)
    for _ in range(64):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g, _ = fun(s, every)
        ok = g > 0.0
        if ok.all():
            break
        s = np.where(ok, s, np.maximum(s - step, cap))
        step *= 2.0
    return s


def t_lower_quantile(nu: float, p: np.ndarray) -> np.ndarray:
    """Solve P(T <= z) = p for z <= 0, given 0 < p <= 1/2."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    work = p < 0.5
    if not work.any():
        return out
    logp = np.log(p[work])

    # root in s = log(-z); the tail probability falls as s grows
    def fun(s, idx):
        z = -np.exp(s)
        tail = t_lower_tail(nu, z)
        g = np.log(tail) - logp[idx]
        dg = -np.exp(_t_log_pdf(nu, z) + s) / tail
        return g, dg

    tail_const = _t_norm(nu) + 0.5 * (nu - 1.0) * log(nu)
    s0 = np.clip((tail_const - logp) / nu, -30.0, 700.0)
    lo = _expand_down(fun, s0 - 1.0, -700.0)
    hi = _expand_up(fun, s0 + 1.0, 709.0)
    s = _solve_decreasing(fun, np.clip(s0, lo, hi), lo, hi, np.abs(logp))
    out[work] = -np.exp(s)
    return out


def _qfam_log_gap(lam: float, c: float, s: np.ndarray, upper: bool) -> tuple[np.ndarray, np.ndarray]:
    # log|Q - d| and its derivative with respect to s = log(tail probability)
    w = np.exp(s)
    k = log(c) - log(lam * (1.0 - lam))
    if upper:
        gap = 1.0 - lam - w
        val = k + np.log(gap) - lam * s + (lam - 1.0) * np.log1p(-w)
        deriv = -w / gap - lam + (1.0 - lam) * w / (1.0 - w)
    else:
        gap = lam - w
        val = k + np.log(gap) + (lam - 1.0) * s - lam * np.log1p(-w)
        deriv = -w / gap + (lam - 1.0) + lam * w / (1.0 - w)
    return val, deriv


def _qfam_tail_solve(lam: float, c: float, target: np.ndarray, upper: bool) -> np.ndarray:
    # solves log|Q - d| = target for s = log of the tail probability
    edge = log(1.0 - lam) if upper else log(lam)
    expo = lam if upper else 1.0 - lam

    def fun(s, idx):
        val, deriv = _qfam_log_gap(lam, c, s, upper)
        return val - target[idx], deriv

    # tail asymptote |Q - d| ~ (c / expo) * w**(-expo)
    s0 = np.clip((log(c) - log(expo) - target) / expo, -745.0, edge)
    lo = _expand_down(fun, np.minimum(s0 - 1.0, edge - 1.0), -745.0)
    hi = np.full_like(target, edge)
    start = np.where((s0 > lo) & (s0 < edge), s0, 0.5 * (lo + edge))
    k = log(c) - log(lam * (1.0 - lam))
    return _solve_decreasing(fun, start, lo, hi, np.abs(target) + abs(k))


def qfam_cdf(lam: float, c: float, d: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (F(x), 1 - F(x)) for the Q-family, both to full relative precision."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    u = np.empty_like(x)
    v = np.empty_like(x)
    at = x == d
    u[at] = lam
    v[at] = 1.0 - lam
    for upper in (False, True):
        mask = ((x > d) if upper else (x < d)) & np.isfinite(x)
        if not mask.any():
            continue
        with np.errstate(divide="ignore"):
            target = np.log(np.abs(x[mask] - d))
        s = _qfam_tail_solve(lam, c, target, upper)
        small = np.exp(s)
        big = -np.expm1(s)
        if upper:
            v[mask], u[mask] = small, big
        else:
            u[mask], v[mask] = small, big
    inf_lo = np.isneginf(x)
    inf_hi = np.isposinf(x)
    u[inf_lo], v[inf_lo] = 0.0, 1.0
    u[inf_hi], v[inf_hi] = 1.0, 0.0
    return u, v
