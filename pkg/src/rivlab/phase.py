"""Phase-transition boundaries for L1 recovery and the implied measurement bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .critical import (
    DEFAULT_EPS,
    DEFAULT_N,
    CurveSeries,
    PhasePoint,
    default_delta_grid,
    rho_bracket,
    u_crit,
    v_crit,
)
from .specfun import DomainError

_FL_CONST = (1.0 + math.sqrt(2.0)) / 4.0

# Table entries that are quoted, not computed here.
CITED_BOUNDS = {
    "polytope": {"value": 5.9, "type": "geometric", "provenance": "paper"},
    "ev": {"value": 317.0, "type": "RIP-based", "provenance": "paper"},
}


def mu_fl(dL: float, dR: float) -> float:
    """Foucart-Lai recovery functional; recovery is guaranteed when it is below 1."""
    if not 0.0 <= dL < 1.0:
        raise DomainError("left RIC must lie in [0, 1)")
    if not dR >= 0.0:
        raise DomainError("right RIC must be >= 0")
    return _FL_CONST * ((1.0 + dR) / (1.0 - dL) - 1.0)


def mu_riv(p: PhasePoint) -> float:
    """FL functional with both RICs replaced by critical values at sparsity ``2 rho``.

    Returns ``inf`` when the left critical value reaches 1, where the
    condition cannot be met.
    """
    if 2.0 * p.rho > 1.0:
        raise DomainError("mu_riv needs 2 rho <= 1")
    p2 = PhasePoint(2.0 * p.rho, p.delta, p.ambient_n, p.eps)
    u = min(max(u_crit(p2, clamp=False), 0.0), 1.0)
    v = max(v_crit(p2, clamp=False), 0.0)
    if u >= 1.0:
        return math.inf
    return mu_fl(u, v)


def _gfa_gamma(x: float) -> float:
    L = math.log(math.e / x)
    return math.exp(math.log1p(2.0 * L) / (4.0 * L))


def mu_gfa(rho: float, delta: float) -> float:
    """Closed-form GFA recovery functional (natural logarithms throughout)."""
    x = rho * delta
    if not 0.0 < x < 1.0:
        raise DomainError("mu_gfa requires 0 < rho * delta < 1")
    return rho * (12.0 + 8.0 * math.log(1.0 / x)) * _gfa_gamma(x) ** 2


@dataclass
class Boundary:
    curve: CurveSeries
    method: str
    params: dict = field(default_factory=dict)

    def rho_at(self, delta: float) -> float | None:
        return _boundary_rho(self.method, delta, **self.params)


def _boundary_rho(method: str, delta: float, N: float = DEFAULT_N, eps: float = DEFAULT_EPS,
                  xtol: float = 1e-13) -> float | None:
    if method == "riv":
        if delta * N < 2.0:
            return None
        # the point itself must carry K >= 1, not only its doubled twin
        lo, hi = rho_bracket(delta, N, rho_scale=2.0)
        lo = max(lo, 1.0 / (delta * N))
        if lo >= hi:
            return None

        def f(rho):
            return mu_riv(PhasePoint(rho, delta, N, eps)) - 1.0
    elif method == "gfa":
        lo = 1e-12
        hi = min(1.0, 1.0 / delta) * (1.0 - 1e-12)

        def f(rho):
            return mu_gfa(rho, delta) - 1.0
    else:
        raise DomainError(f"unknown method {method!r}")

    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0.0 < f_hi):
        return None
    return bisect(f, lo, hi, xtol=xtol)


def _mu(method: str, rho: float, delta: float, params: dict) -> float:
    if method == "riv":
        return mu_riv(PhasePoint(rho, delta, params["N"], params["eps"]))
    return mu_gfa(rho, delta)


def pt_boundary(method: str, N: float = DEFAULT_N, eps: float = DEFAULT_EPS,
                delta_grid=None) -> Boundary:
    """Solve ``mu(rho, delta) = 1`` for ``rho`` at each grid ``delta``."""
    if method not in ("riv", "gfa"):
        raise DomainError(f"unknown method {method!r}")
    params = {"N": N, "eps": eps} if method == "riv" else {}
    grid = default_delta_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    curve = CurveSeries(kind="pt-boundary")
    for delta in grid:
        delta = float(delta)
        rho = _boundary_rho(method, delta, **params) if 0.0 < delta <= 1.0 else None
        if rho is None or not 0.0 < rho < 1.0:
            curve.missing.append(delta)
            continue
        curve.points.append((delta, rho))
        curve.residuals.append(abs(_mu(method, rho, delta, params) - 1.0))
    return Boundary(curve=curve, method=method, params=params)


def _golden_max(f, a: float, b: float, tol: float = 1e-10) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    best = [(fc, c), (fd, d), (f(a), a), (f(b), b)]
    fx, x = max(best)
    return x, fx


def boundary_peak(b: Boundary) -> tuple[float, float]:
    """Location and height of the largest ``rho_s(delta)``.

    The grid maximizer is refined by golden-section search between its grid
    neighbours.
    """
    if len(b.curve) == 0:
        raise DomainError("empty boundary")
    deltas = b.curve.deltas
    rhos = b.curve.values
    i = int(np.argmax(rhos))
    a = deltas[max(i - 1, 0)]
    c = deltas[min(i + 1, len(deltas) - 1)]
    if a == c:
        return float(deltas[i]), float(rhos[i])

    def f(delta):
        r = b.rho_at(delta)
        return -math.inf if r is None else r

    x, fx = _golden_max(f, float(a), float(c))
    if fx < rhos[i]:
        return float(deltas[i]), float(rhos[i])
    return x, fx


def measurement_bound(b: Boundary) -> float:
    """Constant ``c`` in ``M >= c K`` implied by the boundary: ``1 / max rho_s``."""
    return 1.0 / boundary_peak(b)[1]
