"""Log-domain special functions.

Everything here accepts scalars or numpy arrays and broadcasts.  The
incomplete gamma integral is evaluated with the usual split: the power
series for ``x < a + 1`` and a Lentz continued fraction for ``x >= a + 1``.
Both share the log prefactor ``a ln x - x - ln Gamma(a)``, which for large
``a`` is rewritten through Stirling's correction so that the huge terms
cancel analytically instead of in floating point.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfinv, gammaln

__all__ = [
    "DomainError",
    "ConvergenceError",
    "log_gamma",
    "reg_lower_gamma",
    "log_reg_lower_gamma",
    "log_reg_upper_gamma",
    "inv_reg_lower_gamma",
    "log_binomial",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 200_000
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(RuntimeError):
    """An iterative evaluation hit its iteration cap."""


def _scalar_or_array(out):
    out = np.asarray(out, dtype=float)
    return out.item() if out.ndim == 0 else out


def log_gamma(a):
    """Natural log of the gamma function for ``a > 0``."""
    a = np.asarray(a, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("log_gamma requires a > 0")
    return _scalar_or_array(gammaln(a))


def _stirlerr(a):
    # ln Gamma(a) - [(a - 1/2) ln a - a + ln sqrt(2 pi)], valid for a >= 10
    r = 1.0 / a
    r2 = r * r
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (
        1.0 / 1680 - r2 * (1.0 / 1188 - r2 * (691.0 / 360360))))))


def _log_prefactor(a, x):
    """``a ln x - x - ln Gamma(a)`` for broadcast 1-d arrays, x > 0."""
    out = np.empty_like(x)
    big = a >= 10.0
    if np.any(big):
        ab, xb = a[big], x[big]
        t = (xb - ab) / ab
        out[big] = (-ab * (t - np.log1p(t)) + 0.5 * np.log(ab)
                    - _HALF_LOG_2PI - _stirlerr(ab))
    small = ~big
    if np.any(small):
        as_, xs = a[small], x[small]
        out[small] = as_ * np.log(xs) - xs - gammaln(as_)
    return out


def _series_log(a, x, logpre):
    """log P(a, x) by the power series; assumes x < a + 1."""
    term = 1.0 / a
    total = term.copy()
    ap = a.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        ap[idx] += 1.0
        term[idx] *= x[idx] / ap[idx]
        total[idx] += term[idx]
        active[idx] = term[idx] > total[idx] * _EPS
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    return logpre + np.log(total)


def _cf_log(a, x, logpre):
    """log Q(a, x) by modified Lentz; assumes x >= a + 1."""
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    i = 0
    while np.any(active):
        i += 1
        if i > _MAX_ITER:
            raise ConvergenceError("incomplete gamma continued fraction did not converge")
        idx = np.nonzero(active)[0]
        an = -i * (i - a[idx])
        b[idx] += 2.0
        dd = an * d[idx] + b[idx]
        dd = np.where(np.abs(dd) < _TINY, _TINY, dd)
        cc = b[idx] + an / c[idx]
        cc = np.where(np.abs(cc) < _TINY, _TINY, cc)
        dd = 1.0 / dd
        delta = dd * cc
        d[idx] = dd
        c[idx] = cc
        h[idx] *= delta
        active[idx] = np.abs(delta - 1.0) > _EPS
    return logpre + np.log(h)


def _check_ax(a, x):
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(a > 0)):
        raise DomainError("incomplete gamma requires a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("incomplete gamma requires x >= 0")
    return a, x


def _incgamma_logs(a, x):
    """Return (log P, log Q, q_direct).

    ``q_direct`` marks entries where Q came from the continued fraction; the
    other member of each pair is filled with log1p(-exp(.)), which is still
    correct to double precision in absolute terms.
    """
    a, x = _check_ax(a, x)
    shape = a.shape
    a = a.ravel().copy()
    x = x.ravel().copy()
    logp = np.empty_like(a)
    logq = np.empty_like(a)
    q_direct = np.zeros(a.shape, dtype=bool)

    zero = x == 0
    logp[zero] = -np.inf
    logq[zero] = 0.0

    inf = np.isinf(x)
    logp[inf] = 0.0
    logq[inf] = -np.inf
    q_direct[inf] = True

    rest = ~(zero | inf)
    ser = rest & (x < a + 1.0)
    cf = rest & ~ser
    if np.any(ser):
        lp = _series_log(a[ser], x[ser], _log_prefactor(a[ser], x[ser]))
        lp = np.minimum(lp, 0.0)
        logp[ser] = lp
        logq[ser] = np.log1p(-np.exp(lp))
    if np.any(cf):
        lq = _cf_log(a[cf], x[cf], _log_prefactor(a[cf], x[cf]))
        lq = np.minimum(lq, 0.0)
        logq[cf] = lq
        logp[cf] = np.log1p(-np.exp(lq))
        q_direct[cf] = True
    return logp.reshape(shape), logq.reshape(shape), q_direct.reshape(shape)


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``."""
    logp, logq, q_direct = _incgamma_logs(a, x)
    out = np.where(q_direct, -np.expm1(logq), np.exp(logp))
    return _scalar_or_array(out)


def log_reg_lower_gamma(a, x):
    """``ln P(a, x)``; stays finite far into the left tail."""
    logp, _, _ = _incgamma_logs(a, x)
    return _scalar_or_array(logp)


def log_reg_upper_gamma(a, x):
    """``ln(1 - P(a, x))`` without cancellation in either tail."""
    _, logq, _ = _incgamma_logs(a, x)
    return _scalar_or_array(logq)


def _log_density(a, x):
    # ln of the Gamma(a, 1) density at x
    return float(_log_prefactor(np.array([a]), np.array([x]))[0]) - math.log(x)


def inv_reg_lower_gamma(a, p, *, max_iter=200):
    """Solve ``P(a, x) = p`` for ``x``.

    Safeguarded Newton on the log of whichever tail is smaller, so that
    probabilities like ``1 / C(N, K)`` are handled without underflow.
    """
    a = float(a)
    p = float(p)
    if not a > 0:
        raise DomainError("inv_reg_lower_gamma requires a > 0")
    if not 0.0 <= p < 1.0:
        raise DomainError("inv_reg_lower_gamma requires 0 <= p < 1")
    if p == 0.0:
        return 0.0

    use_lower = p <= 0.5
    target = math.log(p) if use_lower else math.log1p(-p)

    def resid(x):
        lp, lq, _ = _incgamma_logs(a, x)
        if use_lower:
            return float(lp) - target, float(lp)
        return float(lq) - target, float(lq)

    # bracket: resid is increasing in x for the lower tail, decreasing for the upper
    sign = 1.0 if use_lower else -1.0
    hi = max(a, 1.0)
    while sign * resid(hi)[0] < 0:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceError("could not bracket the incomplete gamma inverse")
    lo = min(a, 1.0)
    while sign * resid(lo)[0] > 0:
        lo *= 1e-8
        if lo < 1e-300:
            raise ConvergenceError("inverse lies below the smallest normal double")

    # Wilson-Hilferty start; for tiny p use the small-x form P ~ x^a / Gamma(a + 1)
    z = math.sqrt(2.0) * float(erfinv(2.0 * p - 1.0))
    x = a * (1.0 - 1.0 / (9.0 * a) + z / (3.0 * math.sqrt(a))) ** 3
    if not lo < x < hi and use_lower:
        x = math.exp((target + float(gammaln(a + 1.0))) / a)
    if not lo < x < hi:
        x = math.sqrt(lo * hi)

    # Newton in t = ln x, safeguarded by the bracket
    for _ in range(max_iter):
        r, logtail = resid(x)
        if r == 0.0:
            return x
        if sign * r > 0:
            hi = x
        else:
            lo = x
        # d ln(tail) / d ln x = +- x * density / tail
        slope = sign * math.exp(math.log(x) + _log_density(a, x) - logtail)
        step = -r / slope if slope != 0 and math.isfinite(slope) else math.nan
        x_new = x * math.exp(step) if abs(step) < 50.0 else math.nan
        if not lo < x_new < hi:
            x_new = math.sqrt(lo * hi)
        if abs(x_new - x) <= 1e-15 * x or hi - lo <= 1e-15 * hi:
            return x_new
        x = x_new
    raise ConvergenceError("inv_reg_lower_gamma did not converge")


def log_binomial(N, K):
    """``ln C(N, K)`` continued to real arguments through log-gamma."""
    N, K = np.broadcast_arrays(np.asarray(N, dtype=float), np.asarray(K, dtype=float))
    if np.any(~(N > 0)):
        raise DomainError("log_binomial requires N > 0")
    if np.any(~((K >= 0) & (K <= N))):
        raise DomainError("log_binomial requires 0 <= K <= N")
    out = gammaln(N + 1.0) - gammaln(K + 1.0) - gammaln(N - K + 1.0)
    out = np.where((K == 0) | (K == N), 0.0, out)
    return _scalar_or_array(out)
