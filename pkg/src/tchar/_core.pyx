# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; API mirrors ``tchar._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, isfinite, lgamma, log, log1p, sqrt, M_PI, NAN, INFINITY

cnp.import_array()

cdef double _EPS = 1e-16
cdef double _TINY = 1e-300
cdef int _MAX_CF = 2000
cdef int _MAX_ROOT = 200
cdef double _ROOT_TOL = 1e-14
cdef double _G_TOL = 4e-16


cdef double _betacf(double a, double b, double x) noexcept nogil:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d = 1.0 - qab * x / qap, h, aa, delta, m2
    cdef int m
    if fabs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _EPS:
            return h
    return NAN


cdef double _betainc(double a, double b, double x, double y, double logx, double logy,
                     double lbeta) noexcept nogil:
    # logx/logy stay finite when x itself underflows (extreme t tails)
    cdef double front
    if not isfinite(logx):
        return 0.0
    if not isfinite(logy):
        return 1.0
    front = exp(lbeta + a * logx + b * logy)
    if x > (a + 1.0) / (a + b + 2.0):
        return 1.0 - front * _betacf(b, a, y) / b
    return front * _betacf(a, b, x) / a


cdef inline double _safe_log(double v) noexcept nogil:
    return log(v) if v > 0.0 else -INFINITY


def betainc(double a, double b, x, y):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lbeta = lgamma(a + b) - lgamma(a) - lgamma(b)
    with nogil:
        for i in range(n):
            ov[i] = _betainc(a, b, xv[i], yv[i], _safe_log(xv[i]), _safe_log(yv[i]), lbeta)
    return out


cdef inline double _t_norm(double nu) noexcept nogil:
    return lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) - 0.5 * log(M_PI * nu)


cdef inline void _t_xy(double nu, double z, double* x, double* y, double* logx, double* logy) noexcept nogil:
    cdef double az = fabs(z), rn = sqrt(nu), ratio, w, logw, l1w
    if az > rn:
        ratio = rn / az
    else:
        ratio = az / rn
    w = ratio * ratio
    logw = 2.0 * log(ratio) if ratio > 0.0 else -INFINITY
    l1w = log1p(w)
    if az > rn:
        x[0] = w / (1.0 + w)
        y[0] = 1.0 / (1.0 + w)
        logx[0] = logw - l1w
        logy[0] = -l1w
    else:
        x[0] = 1.0 / (1.0 + w)
        y[0] = w / (1.0 + w)
        logx[0] = -l1w
        logy[0] = logw - l1w


cdef inline double _t_tail(double nu, double z, double lbeta) noexcept nogil:
    cdef double x, y, lx, ly
    _t_xy(nu, z, &x, &y, &lx, &ly)
    return 0.5 * _betainc(0.5 * nu, 0.5, x, y, lx, ly, lbeta)


def t_lower_tail(double nu, z):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t i, n = zv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lbeta = lgamma(0.5 * nu + 0.5) - lgamma(0.5 * nu) - lgamma(0.5)
    with nogil:
        for i in range(n):
            ov[i] = _t_tail(nu, zv[i], lbeta)
    return out


# root finding: g(s) decreasing in s, bracket lo (g > 0) and hi (g < 0)

cdef struct _TParams:
    double nu
    double lbeta
    double norm
    double logp


cdef inline void _t_fun(_TParams* p, double s, double* g, double* dg) noexcept nogil:
    cdef double z = -exp(s), x, y, lx, ly, tail
    _t_xy(p.nu, z, &x, &y, &lx, &ly)
    tail = 0.5 * _betainc(0.5 * p.nu, 0.5, x, y, lx, ly, p.lbeta)
    g[0] = log(tail) - p.logp
    dg[0] = -exp(p.norm + 0.5 * (p.nu + 1.0) * lx + s) / tail


cdef struct _QParams:
    double lam
    double k
    double target
    int upper


cdef inline void _q_fun(_QParams* p, double s, double* g, double* dg) noexcept nogil:
    cdef double w = exp(s), lam = p.lam, gap
    if p.upper:
        gap = 1.0 - lam - w
        g[0] = p.k + log(gap) - lam * s + (lam - 1.0) * log1p(-w) - p.target
        dg[0] = -w / gap - lam + (1.0 - lam) * w / (1.0 - w)
    else:
        gap = lam - w
        g[0] = p.k + log(gap) + (lam - 1.0) * s - lam * log1p(-w) - p.target
        dg[0] = -w / gap + (lam - 1.0) + lam * w / (1.0 - w)


cdef inline void _eval(int kind, void* params, double s, double* g, double* dg) noexcept nogil:
    if kind == 0:
        _t_fun(<_TParams*> params, s, g, dg)
    else:
        _q_fun(<_QParams*> params, s, g, dg)


cdef double _expand(int kind, void* params, double s, double cap, int up) noexcept nogil:
    cdef double g, dg, step = 1.0
    cdef int it
    for it in range(64):
        _eval(kind, params, s, &g, &dg)
        if (up and g < 0.0) or (not up and g > 0.0):
            return s
        if up:
            s = s + step
            if s > cap:
                s = cap
        else:
            s = s - step
            if s < cap:
                s = cap
        step *= 2.0
    return s


cdef double _solve(int kind, void* params, double s, double lo, double hi, double gscale) noexcept nogil:
    # g is a difference of logs of size ~gscale; below that it is rounding noise
    cdef double g, dg, cand, tol, gtol = _G_TOL * (gscale if gscale > 1.0 else 1.0)
    cdef int it
    for it in range(_MAX_ROOT):
        _eval(kind, params, s, &g, &dg)
        if fabs(g) <= gtol:
            return s
        if g > 0.0:
            lo = s
        else:
            hi = s
        cand = s - g / dg
        if not isfinite(cand) or cand < lo or cand > hi:
            cand = 0.5 * (lo + hi)
        tol = _ROOT_TOL * (fabs(s) if fabs(s) > 1.0 else 1.0)
        if fabs(cand - s) <= tol or hi - lo <= tol:
            return cand
        s = cand
    return NAN


def t_lower_quantile(double nu, p):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t i, n = pv.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef _TParams par
    cdef double s0, lo, hi, tail_const
    par.nu = nu
    par.lbeta = lgamma(0.5 * nu + 0.5) - lgamma(0.5 * nu) - lgamma(0.5)
    par.norm = _t_norm(nu)
    tail_const = par.norm + 0.5 * (nu - 1.0) * log(nu)
    with nogil:
        for i in range(n):
            if pv[i] >= 0.5:
                ov[i] = 0.0
                continue
            par.logp = log(pv[i])
            s0 = (tail_const - par.logp) / nu
            if s0 < -30.0:
                s0 = -30.0
            elif s0 > 700.0:
                s0 = 700.0
            lo = _expand(0, &par, s0 - 1.0, -700.0, 0)
            hi = _expand(0, &par, s0 + 1.0, 709.0, 1)
            if s0 < lo:
                s0 = lo
            elif s0 > hi:
                s0 = hi
            ov[i] = -exp(_solve(0, &par, s0, lo, hi, fabs(par.logp)))
    return out


def qfam_cdf(double lam, double c, double d, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    u = np.empty(n, dtype=np.float64)
    v = np.empty(n, dtype=np.float64)
    cdef double[::1] uv = u
    cdef double[::1] vv = v
    cdef _QParams par
    cdef double xi, edge, expo, s0, lo, s
    par.lam = lam
    par.k = log(c) - log(lam * (1.0 - lam))
    with nogil:
        for i in range(n):
            xi = xv[i]
            if xi == d:
                uv[i] = lam
                vv[i] = 1.0 - lam
                continue
            if xi == -INFINITY:
                uv[i] = 0.0
                vv[i] = 1.0
                continue
            if xi == INFINITY:
                uv[i] = 1.0
                vv[i] = 0.0
                continue
            par.upper = xi > d
            par.target = log(fabs(xi - d))
            edge = log(1.0 - lam) if par.upper else log(lam)
            expo = lam if par.upper else 1.0 - lam
            s0 = (log(c) - log(expo) - par.target) / expo
            if s0 < -745.0:
                s0 = -745.0
            elif s0 > edge:
                s0 = edge
            lo = _expand(1, &par, (s0 - 1.0) if s0 - 1.0 < edge - 1.0 else edge - 1.0, -745.0, 0)
            if not (s0 > lo and s0 < edge):
                s0 = 0.5 * (lo + edge)
            s = _solve(1, &par, s0, lo, edge, fabs(par.target) + fabs(par.k))
            if par.upper:
                vv[i] = exp(s)
                uv[i] = -expm1(s)
            else:
                uv[i] = exp(s)
                vv[i] = -expm1(s)
    return u, v
