"""Critical functions for the left and right RICs over the phase-transition space.

A point of the space is ``(rho, delta) = (K/M, M/N)``.  For a given ambient
dimension the implied ``M = delta N`` and ``K = rho delta N`` are generally not
integers; they are used as real numbers throughout (``C(N, K)`` is continued
through log-gamma).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .rivdist import GumbelParams, WeibullParams, gumbel_location, weibull_offset, weibull_scale
from .specfun import DomainError, log_binomial

DEFAULT_EPS = 1e-3
DEFAULT_N = 10_000


class ClampWarning(RuntimeWarning):
    """A critical value fell outside its admissible range and was clamped."""


@dataclass(frozen=True)
class PhasePoint:
    rho: float
    delta: float
    ambient_n: float = DEFAULT_N
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho}")
        if not 0.0 < self.delta <= 1.0:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        # small slack so that grid endpoints like K = 1 survive rounding
        if self.M < 2.0 - 1e-9:
            raise DomainError(f"delta * N = {self.M} < 2")
        if self.K < 1.0 - 1e-9:
            raise DomainError(f"rho * delta * N = {self.K} < 1")

    @property
    def M(self) -> float:
        return self.delta * self.ambient_n

    @property
    def K(self) -> float:
        return self.rho * self.delta * self.ambient_n

    @property
    def log_ns(self) -> float:
        return float(log_binomial(self.ambient_n, min(self.K, self.ambient_n)))

    def weibull(self) -> WeibullParams:
        return WeibullParams(q=weibull_scale(self.M, self.log_ns), beta=0.5 * self.M)

    def gumbel(self) -> GumbelParams:
        return GumbelParams(s=2.0 / self.M, l=gumbel_location(self.M, self.log_ns))


@dataclass
class CurveSeries:
    """Ordered ``(delta, value)`` pairs plus the grid points that produced no value."""

    kind: str
    points: list[tuple[float, float]] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    missing: list[float] = field(default_factory=list)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([d for d, _ in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points])

    def __len__(self):
        return len(self.points)


def _neg_log_keep(eps: float) -> float:
    # ln(1 / (1 - eps))
    return -math.log1p(-eps)


def u_crit(p: PhasePoint, clamp: bool = True) -> float:
    """Left critical value: ``u`` with ``F_L^inf(u) = 1 - eps``.

    With ``clamp=False`` the raw closed form is returned even when it leaves
    ``[0, 1]``; otherwise the value is clamped and a ``ClampWarning`` issued.
    """
    u = 1.0 - weibull_offset(p.weibull(), _neg_log_keep(p.eps))
    if clamp and not 0.0 <= u <= 1.0:
        warnings.warn(f"u_crit={u:.6g} clamped to [0, 1] at {p}", ClampWarning, stacklevel=2)
        u = min(max(u, 0.0), 1.0)
    return u


def v_crit(p: PhasePoint, clamp: bool = True) -> float:
    """Right critical value: ``v`` with ``F_R^inf(v) = 1 - eps``."""
    g = p.gumbel()
    v = g.l - 1.0 - g.s * math.log(_neg_log_keep(p.eps))
    if clamp and v < 0.0:
        warnings.warn(f"v_crit={v:.6g} clamped to 0 at {p}", ClampWarning, stacklevel=2)
        v = 0.0
    return v


def default_delta_grid(count: int = 100) -> np.ndarray:
    return np.geomspace(0.01, 1.0, count)


def rho_bracket(delta: float, N: float, rho_scale: float = 1.0) -> tuple[float, float]:
    """Range of ``rho`` on which ``C(N, rho_scale * rho * delta * N)`` is increasing.

    The lower end gives ``K = 1``; the upper end stops at ``K = N/2`` (beyond
    it the binomial turns over and the critical functions lose monotonicity).
    """
    lo = 1.0 / (rho_scale * delta * N)
    hi = min(1.0 / rho_scale, 1.0 / (2.0 * rho_scale * delta))
    return lo, hi


def level_curve(level: float, N: float = DEFAULT_N, eps: float = DEFAULT_EPS,
                delta_grid=None, xtol: float = 1e-12) -> CurveSeries:
    """Trace ``u_crit(rho, delta) = level`` as ``rho`` versus ``delta``.

    Grid points without a root in the admissible ``rho`` range are recorded
    in ``missing``.
    """
    if not 0.0 < level < 1.0:
        raise DomainError("level must lie in (0, 1)")
    grid = default_delta_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    curve = CurveSeries(kind="level-curve")
    for delta in grid:
        delta = float(delta)
        if not 0.0 < delta <= 1.0 or delta * N < 2.0:
            curve.missing.append(delta)
            continue
        lo, hi = rho_bracket(delta, N)

        def f(rho, delta=delta):
            return u_crit(PhasePoint(rho, delta, N, eps), clamp=False) - level

        f_lo, f_hi = f(lo), f(hi)
        if not (f_lo <= 0.0 <= f_hi):
            curve.missing.append(delta)
            continue
        rho = bisect(f, lo, hi, xtol=xtol) if f_lo < 0.0 < f_hi else (lo if f_lo == 0 else hi)
        curve.points.append((delta, rho))
        curve.residuals.append(abs(f(rho)))
    return curve
