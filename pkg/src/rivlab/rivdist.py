"""Distributions of the left and right restricted isometry random variables.

Conventions: encoder entries have variance ``1/M``, so the ratio variable
``R = ||Ax||^2 / ||x||^2`` is a scaled chi-square with mean 1 and variance
``2/M``.  The left variable is ``1 - min R`` and the right one ``max R - 1``,
both taken over ``N_s = C(N, K)`` supports treated as independent.

Powers like ``F^{N_s}`` are evaluated as ``exp(N_s * ln F)`` with ``N_s``
itself kept as a logarithm, so large triplets never overflow.  Results
below ``exp(-745)`` come out as exact zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import (
    DomainError,
    log_binomial,
    log_gamma,
    log_reg_lower_gamma,
    log_reg_upper_gamma,
    reg_lower_gamma,
)

# Multiplier on the one-term Taylor estimate of the Weibull scale.  The
# derivation reports that keeping more series terms raises the scale by
# about this factor; set to 1.0 to study the uncorrected constant.
WEIBULL_SCALE_CORRECTION = 3.0


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _out(x):
    x = np.asarray(x, dtype=float)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True)
class Triplet:
    """Problem size ``(K, M, N)``: sparsity, measurements, ambient dimension."""

    K: int
    M: int
    N: int
    log_ns: float = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("K", "M", "N"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise DomainError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.K <= self.M < self.N:
            raise DomainError(
                f"triplet must satisfy 1 <= K <= M < N, got ({self.K}, {self.M}, {self.N})"
            )
        object.__setattr__(self, "log_ns", float(log_binomial(self.N, self.K)))

    @classmethod
    def parse(cls, text: str) -> "Triplet":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise DomainError(f"expected K,M,N, got {text!r}")
        try:
            K, M, N = (int(p) for p in parts)
        except ValueError as exc:
            raise DomainError(f"expected integers in K,M,N, got {text!r}") from exc
        return cls(K, M, N)


@dataclass(frozen=True)
class WeibullParams:
    q: float
    beta: float
    location: float = 0.0


@dataclass(frozen=True)
class GumbelParams:
    s: float
    l: float  # noqa: E741


# ---------------------------------------------------------------------------
# ratio variable


def ratio_logpdf(M, x):
    """Log density of ``R`` (chi-square with M dof, scaled by ``1/M``)."""
    if M < 1:
        raise DomainError("M must be >= 1")
    x = _as_float_array(x)
    if np.any(x < 0):
        raise DomainError("ratio density is defined for x >= 0")
    a = 0.5 * M
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * math.log(a) - log_gamma(a) + (a - 1.0) * np.log(x) - a * x
    if a == 1.0:
        out = np.where(x == 0, 0.0, out)
    elif a < 1.0:
        out = np.where(x == 0, np.inf, out)
    else:
        out = np.where(x == 0, -np.inf, out)
    return _out(out)


def ratio_pdf(M, x):
    """Density of the ratio variable, ``p_C(x)``."""
    return _out(np.exp(ratio_logpdf(M, x)))


def ratio_cdf(M, x):
    """``F_C(x) = P(M/2, M x / 2)``."""
    if M < 1:
        raise DomainError("M must be >= 1")
    x = _as_float_array(x)
    if np.any(x < 0):
        raise DomainError("ratio CDF is defined for x >= 0")
    return reg_lower_gamma(0.5 * M, 0.5 * M * x)


# ---------------------------------------------------------------------------
# exact (non-asymptotic) distributions


def _pow_ns(log_ns, log_base):
    """``exp(N_s * log_base)`` for ``log_base <= 0`` with N_s given by its log."""
    log_base = np.asarray(log_base, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        expo = -np.exp(log_ns + np.log(-log_base))
    return np.exp(np.where(log_base == 0.0, 0.0, expo))


def _log_pow_ns_minus_one(log_ns, log_base):
    """``(N_s - 1) * log_base`` in log-safe form."""
    log_base = np.asarray(log_base, dtype=float)
    if log_ns == 0.0:
        return np.zeros_like(log_base)
    log_nm1 = log_ns + math.log1p(-math.exp(-log_ns)) if log_ns > 1e-12 else -math.inf
    with np.errstate(divide="ignore", over="ignore"):
        out = -np.exp(log_nm1 + np.log(-log_base))
    return np.where(log_base == 0.0, 0.0, out)


def _check_unit(u):
    u = _as_float_array(u)
    if np.any(~((u >= 0) & (u <= 1))):
        raise DomainError("left RIV argument must lie in [0, 1]")
    return u


def _check_nonneg(v):
    v = _as_float_array(v)
    if np.any(~(v >= 0)):
        raise DomainError("right RIV argument must be >= 0")
    return v


def _left_cdf(t: Triplet, u):
    # valid for any u <= 1; the public wrapper restricts to [0, 1]
    a = 0.5 * t.M
    return _pow_ns(t.log_ns, log_reg_upper_gamma(a, a * (1.0 - u)))


def _right_cdf(t: Triplet, v):
    a = 0.5 * t.M
    return _pow_ns(t.log_ns, log_reg_lower_gamma(a, a * (v + 1.0)))


def left_riv_cdf(t: Triplet, u):
    """Exact CDF of the left RIV on ``[0, 1]``."""
    return _out(_left_cdf(t, _check_unit(u)))


def left_riv_logpdf(t: Triplet, u):
    u = _check_unit(u)
    a = 0.5 * t.M
    w = 1.0 - u
    return _out(t.log_ns + _log_pow_ns_minus_one(t.log_ns, log_reg_upper_gamma(a, a * w))
                + ratio_logpdf(t.M, w))


def left_riv_pdf(t: Triplet, u):
    """Exact density of the left RIV."""
    return _out(np.exp(left_riv_logpdf(t, u)))


def right_riv_cdf(t: Triplet, v):
    """Exact CDF of the right RIV for ``v >= 0``."""
    return _out(_right_cdf(t, _check_nonneg(v)))


def right_riv_logpdf(t: Triplet, v):
    v = _check_nonneg(v)
    a = 0.5 * t.M
    w = v + 1.0
    return _out(t.log_ns + _log_pow_ns_minus_one(t.log_ns, log_reg_lower_gamma(a, a * w))
                + ratio_logpdf(t.M, w))


def right_riv_pdf(t: Triplet, v):
    """Exact density of the right RIV."""
    return _out(np.exp(right_riv_logpdf(t, v)))


def symmetric_ric(dL: float, dR: float) -> float:
    if not 0.0 <= dL <= 1.0:
        raise DomainError("left RIC must lie in [0, 1]")
    if not dR >= 0.0:
        raise DomainError("right RIC must be >= 0")
    return max(dL, dR)


# ---------------------------------------------------------------------------
# extreme-value constants


def weibull_scale(M: float, log_ns: float, correction: float | None = None) -> float:
    """Weibull scale ``q`` for ``M`` measurements and ``ln N_s`` supports.

    Accepts real ``M`` and ``log_ns`` so the critical functions can use the
    continuous relaxation ``K = rho * delta * N``.
    """
    if correction is None:
        correction = WEIBULL_SCALE_CORRECTION
    a = 0.5 * M
    return correction * (2.0 / M) * math.exp(
        (2.0 / M) * (float(log_gamma(a)) + math.log(a) - log_ns))


def gumbel_location(M: float, log_ns: float) -> float:
    """Gumbel location ``l``; needs ``ln N_s > 0`` so that ``ln ln N_s`` exists."""
    if not log_ns > 0:
        raise DomainError("Gumbel location needs N_s > 1 (ln ln N_s undefined)")
    a = 0.5 * M
    return (2.0 / M) * (log_ns + (a - 1.0) * math.log(log_ns) - float(log_gamma(a)))


def weibull_params(t: Triplet, correction: float | None = None) -> WeibullParams:
    return WeibullParams(q=weibull_scale(t.M, t.log_ns, correction), beta=0.5 * t.M)


def gumbel_params(t: Triplet) -> GumbelParams:
    if t.log_ns < math.log(3.0) - 1e-12:
        raise DomainError("Gumbel constants need N_s >= 3")
    return GumbelParams(s=2.0 / t.M, l=gumbel_location(t.M, t.log_ns))


# ---------------------------------------------------------------------------
# asymptotic distributions


def weibull_cdf(w, p: WeibullParams):
    """Reversed Weibull CDF in ``w = 1 - u``: ``exp(-(w/q)^beta)``, w >= 0."""
    w = _as_float_array(w)
    with np.errstate(divide="ignore"):
        z = p.beta * (np.log(w) - math.log(p.q))
    return _out(np.exp(-np.exp(z)))


def weibull_logpdf(w, p: WeibullParams):
    w = _as_float_array(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(w) - math.log(p.q)
        out = math.log(p.beta / p.q) + (p.beta - 1.0) * lz - np.exp(p.beta * lz)
    if p.beta > 1.0:
        out = np.where(w == 0, -np.inf, out)
    return _out(out)


def gumbel_cdf(w, p: GumbelParams):
    """Gumbel CDF in ``w = v + 1`` over the whole real line."""
    z = (_as_float_array(w) - p.l) / p.s
    return _out(np.exp(-np.exp(-z)))


def gumbel_logpdf(w, p: GumbelParams):
    z = (_as_float_array(w) - p.l) / p.s
    return _out(-math.log(p.s) - (np.exp(-z) + z))


def left_riv_cdf_asym(t: Triplet, u, params: WeibullParams | None = None):
    """Weibull limit of the left RIV CDF."""
    u = _check_unit(u)
    return weibull_cdf(1.0 - u, params or weibull_params(t))


def left_riv_logpdf_asym(t: Triplet, u, params: WeibullParams | None = None):
    u = _check_unit(u)
    return weibull_logpdf(1.0 - u, params or weibull_params(t))


def left_riv_pdf_asym(t: Triplet, u, params: WeibullParams | None = None):
    return _out(np.exp(left_riv_logpdf_asym(t, u, params)))


def right_riv_cdf_asym(t: Triplet, v, params: GumbelParams | None = None):
    """Gumbel limit of the right RIV CDF."""
    v = _check_nonneg(v)
    return gumbel_cdf(v + 1.0, params or gumbel_params(t))


def right_riv_logpdf_asym(t: Triplet, v, params: GumbelParams | None = None):
    v = _check_nonneg(v)
    return gumbel_logpdf(v + 1.0, params or gumbel_params(t))


def right_riv_pdf_asym(t: Triplet, v, params: GumbelParams | None = None):
    return _out(np.exp(right_riv_logpdf_asym(t, v, params)))


def weibull_offset(p: WeibullParams, neg_log_prob: float) -> float:
    """``1 - u`` at which the asymptotic left CDF equals ``exp(-neg_log_prob)``."""
    return p.q * neg_log_prob ** (1.0 / p.beta)


def left_support(t: Triplet, eps: float, params: WeibullParams | None = None):
    """Effective support ``(u_left, u_right)`` of the asymptotic left RIV.

    ``u_left`` is where the Weibull CDF reaches ``eps`` and ``u_right`` where
    it reaches ``1 - eps``; both are clamped to ``[0, 1]``.
    """
    if not 0.0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 0.5)")
    p = params or weibull_params(t)
    u_left = 1.0 - weibull_offset(p, -math.log(eps))
    u_right = 1.0 - weibull_offset(p, -math.log1p(-eps))
    return min(max(u_left, 0.0), 1.0), min(max(u_right, 0.0), 1.0)


def convergence_estimate(t: Triplet) -> float:
    """Nominal gap between exact and limiting CDFs, ``(ln N_s)^-2``."""
    if not t.log_ns > 0:
        raise DomainError("needs N_s > 1")
    return t.log_ns ** -2
