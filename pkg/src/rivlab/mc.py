"""Monte Carlo oracle built on real Gaussian encoders.

Small encoders are sampled, every support of size K is enumerated, and the
ratio statistic and the Gram-matrix extreme eigenvalues are computed per
support.  ``validate`` folds these into an ``MCReport`` that checks the
chi-square law of the ratio, the eigenvalue sandwich, and the ordering of
the dependent RIV distributions against the independent-support formulas.

Randomness: the config seed feeds a ``SeedSequence`` that is spawned once
per block of trials, and each block draws from its own Philox stream.  A
block's draws never depend on another block, so the blocks can be run in any
order (or in parallel) with an identical report.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np

from .eig import jacobi_eigvalsh
from .rivdist import Triplet, _left_cdf, _right_cdf, ratio_cdf
from .specfun import DomainError, inv_reg_lower_gamma

X_RULES = ("equal-entries", "canonical", "seeded-random")
MAX_SUPPORTS = 10_000
BLOCK_TRIALS = 1_000
GRID_POINTS = 50
SANDWICH_SLACK = 1e-10
# standard deviation of the limiting Kolmogorov distribution (of sqrt(n) D_n)
_KOLMOGOROV_SD = 0.2603


@dataclass(frozen=True)
class MCConfig:
    triplet: Triplet
    trials: int
    seed: int = 0
    sigma2: float | None = None
    x_rule: str = "equal-entries"

    def __post_init__(self):
        if not isinstance(self.triplet, Triplet):
            raise DomainError("triplet must be a Triplet")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an integer in [0, 2**64)")
        if self.x_rule not in X_RULES:
            raise DomainError(f"x_rule must be one of {', '.join(X_RULES)}")
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", 1.0 / self.triplet.M)
        elif not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")
        n_s = math.comb(self.triplet.N, self.triplet.K)
        if n_s > MAX_SUPPORTS:
            raise DomainError(f"C(N, K) = {n_s} exceeds the enumeration limit {MAX_SUPPORTS}")

    @property
    def n_supports(self) -> int:
        return math.comb(self.triplet.N, self.triplet.K)


@dataclass
class MCReport:
    trials: int
    n_supports: int
    ratio_mean: float
    ratio_var: float
    ratio_mean_expected: float
    ratio_var_expected: float
    ks_ratio: float
    ks_ratio_alt: float
    alt_x_rule: str
    ks_difference: float
    ks_noise: float
    numerator_mean: float
    numerator_var: float
    numerator_mean_expected: float
    numerator_var_expected: float
    sandwich_violations: int
    ev_dominance_violations: int
    mean_left_riv: float
    mean_right_riv: float
    mean_left_ev: float
    mean_right_ev: float
    left_grid: list[float]
    emp_left_cdf: list[float]
    iid_left_cdf: list[float]
    left_ordering_margin: list[float]
    right_grid: list[float]
    emp_right_cdf: list[float]
    iid_right_cdf: list[float]
    right_ordering_margin: list[float]
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def deterministic_ok(self) -> bool:
        return self.sandwich_violations == 0 and self.ev_dominance_violations == 0

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# building blocks


def sample_encoder(M: int, N: int, sigma2: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Gaussian encoder with i.i.d. N(0, sigma2) entries.

    With ``size`` a stack of ``size`` encoders is drawn; it equals ``size``
    consecutive single draws from the same generator.
    """
    if M < 1 or N < 1:
        raise DomainError("encoder dimensions must be positive")
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    shape = (M, N) if size is None else (size, M, N)
    return math.sqrt(sigma2) * rng.standard_normal(shape)


def supports(N: int, K: int) -> np.ndarray:
    """All size-K index sets of ``range(N)`` in lexicographic order, one per row."""
    n_s = math.comb(N, K)
    if n_s > MAX_SUPPORTS:
        raise DomainError(f"C(N, K) = {n_s} exceeds the enumeration limit {MAX_SUPPORTS}")
    return np.array(list(combinations(range(N), K)), dtype=np.intp).reshape(n_s, K)


def x_values(rule: str, K: int, rng: np.random.Generator | None = None, shape=()) -> np.ndarray:
    """Support coefficients for the ratio statistic.

    ``equal-entries`` is ``1/sqrt(K)`` everywhere; ``canonical`` is the
    normalized ramp ``1, 2, ..., K``; ``seeded-random`` draws a fresh
    standard normal vector for every leading index in ``shape``.
    """
    if rule == "equal-entries":
        x = np.full(K, 1.0 / math.sqrt(K))
    elif rule == "canonical":
        x = np.arange(1.0, K + 1.0)
        x /= np.linalg.norm(x)
    elif rule == "seeded-random":
        if rng is None:
            raise DomainError("seeded-random x needs a generator")
        return rng.standard_normal(tuple(shape) + (K,))
    else:
        raise DomainError(f"unknown x_rule {rule!r}")
    return np.broadcast_to(x, tuple(shape) + (K,))


def ratio_stat(A, support, x_vals) -> float:
    """``||A x||^2 / ||x||^2`` for the vector carrying ``x_vals`` on ``support``."""
    A = np.asarray(A, dtype=float)
    support = np.asarray(support, dtype=np.intp)
    x_vals = np.asarray(x_vals, dtype=float)
    if support.ndim != 1 or len(set(support.tolist())) != support.size:
        raise DomainError("support indices must be distinct")
    if support.size and (support.min() < 0 or support.max() >= A.shape[1]):
        raise DomainError("support index out of range")
    if x_vals.shape != support.shape:
        raise DomainError("x_vals must match the support size")
    den = float(x_vals @ x_vals)
    if den == 0.0:
        raise DomainError("x is the zero vector")
    y = A[:, support] @ x_vals
    return float(y @ y) / den


def _support_ratios(A, sup, x):
    """Ratios for a stack of encoders ``A[..., M, N]`` over all rows of ``sup``.

    ``x`` broadcasts against ``(..., n_s, K)``.
    """
    cols = A[..., :, sup]                       # (..., M, n_s, K)
    y = np.einsum("...mjk,...jk->...mj", cols, x)
    return np.sum(y * y, axis=-2) / np.sum(x * x, axis=-1)


def _support_grams(A, sup):
    cols = A[..., :, sup]
    return np.einsum("...mjk,...mjl->...jkl", cols, cols)


def empirical_rivs(A, K: int, x_rule: str = "equal-entries",
                   rng: np.random.Generator | None = None) -> tuple[float, float]:
    """``(1 - min R, max R - 1)`` over every support of size K."""
    A = np.asarray(A, dtype=float)
    sup = supports(A.shape[1], K)
    r = _support_ratios(A, sup, x_values(x_rule, K, rng, shape=(len(sup),)))
    return 1.0 - float(r.min()), float(r.max()) - 1.0


def wishart_extreme_eigs(G) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    ev = jacobi_eigvalsh(G)
    return float(ev[0]), float(ev[-1])


def empirical_ev_rics(A, K: int) -> tuple[float, float]:
    """Eigenvalue-based constants ``(1 - min lambda_min, max lambda_max - 1)``."""
    A = np.asarray(A, dtype=float)
    ev = jacobi_eigvalsh(_support_grams(A, supports(A.shape[1], K)))
    return 1.0 - float(ev[:, 0].min()), float(ev[:, -1].max()) - 1.0


def iid_order_statistics(M: int, n_s: int, replicates: int, rng: np.random.Generator,
                         chunk: int = 100_000) -> tuple[np.ndarray, np.ndarray]:
    """``(1 - min, max - 1)`` of ``n_s`` independent ratio variables per replicate."""
    left = np.empty(replicates)
    right = np.empty(replicates)
    for start in range(0, replicates, chunk):
        stop = min(start + chunk, replicates)
        g = rng.gamma(0.5 * M, 2.0 / M, size=(stop - start, n_s))
        left[start:stop] = 1.0 - g.min(axis=1)
        right[start:stop] = g.max(axis=1) - 1.0
    return left, right


def ks_distance(samples, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between samples and a CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("no samples")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


# ---------------------------------------------------------------------------
# validation run


def _alt_rule(rule: str) -> str:
    return "canonical" if rule == "equal-entries" else "equal-entries"


def _right_grid(t: Triplet, top: float = 0.9999) -> np.ndarray:
    a = 0.5 * t.M
    # P(a, a (v + 1)) = top ** (1 / N_s)
    per_support = math.exp(math.log(top) / math.exp(t.log_ns))
    v_max = inv_reg_lower_gamma(a, per_support) / a - 1.0
    return np.linspace(0.0, max(v_max, 1e-3), GRID_POINTS)


def _emp_cdf(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    s = np.sort(samples)
    return np.searchsorted(s, grid, side="right") / s.size


def _ordering_margin(emp, F, n):
    return emp - F + 3.0 * np.sqrt(F * (1.0 - F) / n)


def _run_block(cfg: MCConfig, sup, alt, ss: np.random.SeedSequence, first: int, count: int):
    t = cfg.triplet
    enc_ss, x_ss = ss.spawn(2)
    rng = np.random.Generator(np.random.Philox(enc_ss))
    A = sample_encoder(t.M, t.N, cfg.sigma2, rng, size=count)
    n_s = len(sup)
    x_rng = np.random.Generator(np.random.Philox(x_ss))
    x = x_values(cfg.x_rule, t.K, x_rng, shape=(count, n_s))
    x_alt = x_values(alt, t.K, x_rng, shape=(count, n_s))

    r = _support_ratios(A, sup, x)                   # (count, n_s)
    r_alt = _support_ratios(A, sup, x_alt)
    ev = jacobi_eigvalsh(_support_grams(A, sup))     # (count, n_s, K)
    lam_min, lam_max = ev[..., 0], ev[..., -1]

    pick = (first + np.arange(count)) % n_s
    rows = np.arange(count)
    ones_cols = np.take_along_axis(A, sup[pick][:, None, :], axis=2)  # (count, M, K)
    numer = np.sum(ones_cols.sum(axis=-1) ** 2, axis=-1)

    left = 1.0 - r.min(axis=1)
    right = r.max(axis=1) - 1.0
    left_ev = 1.0 - lam_min.min(axis=1)
    right_ev = lam_max.max(axis=1) - 1.0
    sandwich = int(np.count_nonzero((r < lam_min - SANDWICH_SLACK) | (r > lam_max + SANDWICH_SLACK)))
    dominance = int(np.count_nonzero(left_ev < left - SANDWICH_SLACK)
                    + np.count_nonzero(right_ev < right - SANDWICH_SLACK))
    return {
        "r": r[rows, pick],
        "r_alt": r_alt[rows, pick],
        "numer": numer,
        "left": left,
        "right": right,
        "left_ev": left_ev,
        "right_ev": right_ev,
        "sandwich": sandwich,
        "dominance": dominance,
    }


def validate(cfg: MCConfig) -> MCReport:
    """Run the full Monte Carlo check suite for ``cfg``.

    Statistical shortfalls are recorded in ``checks``; they never raise.
    """
    t = cfg.triplet
    sup = supports(t.N, t.K)
    alt = _alt_rule(cfg.x_rule)
    n_blocks = -(-cfg.trials // BLOCK_TRIALS)
    block_seeds = np.random.SeedSequence(cfg.seed).spawn(n_blocks)

    parts = []
    for b, ss in enumerate(block_seeds):
        first = b * BLOCK_TRIALS
        parts.append(_run_block(cfg, sup, alt, ss, first, min(BLOCK_TRIALS, cfg.trials - first)))

    def cat(key):
        return np.concatenate([p[key] for p in parts])

    n = cfg.trials
    r, r_alt, numer = cat("r"), cat("r_alt"), cat("numer")
    left, right = cat("left"), cat("right")
    left_ev, right_ev = cat("left_ev"), cat("right_ev")
    sandwich = sum(p["sandwich"] for p in parts)
    dominance = sum(p["dominance"] for p in parts)

    # R = ||Ax||^2/||x||^2 with N(0, sigma2) entries is sigma2 * chi2_M
    scale = t.M * cfg.sigma2

    def r_cdf(x):
        return ratio_cdf(t.M, x / scale)

    ks = ks_distance(r, r_cdf)
    ks_alt = ks_distance(r_alt, r_cdf)
    ks_noise = math.sqrt(2.0) * _KOLMOGOROV_SD / math.sqrt(n)

    # the RIV formulas assume sigma2 = 1/M; rescale so the comparison is in those units
    left_u = 1.0 - (1.0 - left) / scale
    right_v = (right + 1.0) / scale - 1.0
    u_grid = np.linspace(0.0, 1.0, GRID_POINTS + 2)[1:-1]
    v_grid = _right_grid(t)
    emp_l = _emp_cdf(left_u, u_grid)
    emp_r = _emp_cdf(right_v, v_grid)
    iid_l = np.asarray(_left_cdf(t, u_grid), dtype=float)
    iid_r = np.asarray(_right_cdf(t, v_grid), dtype=float)
    margin_l = _ordering_margin(emp_l, iid_l, n)
    margin_r = _ordering_margin(emp_r, iid_r, n)

    K = t.K
    numer_mean_exp = K * t.M * cfg.sigma2
    numer_var_exp = 2.0 * K * K * t.M * cfg.sigma2 ** 2
    ratio_var = float(np.var(r, ddof=1)) if n > 1 else 0.0
    numer_var = float(np.var(numer, ddof=1)) if n > 1 else 0.0

    report = MCReport(
        trials=n,
        n_supports=len(sup),
        ratio_mean=float(np.mean(r)),
        ratio_var=ratio_var,
        ratio_mean_expected=scale,
        ratio_var_expected=2.0 * t.M * cfg.sigma2 ** 2,
        ks_ratio=ks,
        ks_ratio_alt=ks_alt,
        alt_x_rule=alt,
        ks_difference=abs(ks - ks_alt),
        ks_noise=ks_noise,
        numerator_mean=float(np.mean(numer)),
        numerator_var=numer_var,
        numerator_mean_expected=numer_mean_exp,
        numerator_var_expected=numer_var_exp,
        sandwich_violations=sandwich,
        ev_dominance_violations=dominance,
        mean_left_riv=float(np.mean(left)),
        mean_right_riv=float(np.mean(right)),
        mean_left_ev=float(np.mean(left_ev)),
        mean_right_ev=float(np.mean(right_ev)),
        left_grid=u_grid.tolist(),
        emp_left_cdf=emp_l.tolist(),
        iid_left_cdf=iid_l.tolist(),
        left_ordering_margin=margin_l.tolist(),
        right_grid=v_grid.tolist(),
        emp_right_cdf=emp_r.tolist(),
        iid_right_cdf=iid_r.tolist(),
        right_ordering_margin=margin_r.tolist(),
    )
    se_mean = math.sqrt(report.ratio_var_expected / n)
    report.checks = {
        "sandwich": sandwich == 0,
        "ev_dominance": dominance == 0,
        "ratio_mean": abs(report.ratio_mean - scale) <= max(4.0 * se_mean, 0.01 * scale),
        "ratio_var": abs(ratio_var - report.ratio_var_expected) <= 0.1 * report.ratio_var_expected,
        "ks_ratio": ks <= max(0.01, 1.63 / math.sqrt(n)),
        "x_invariance": report.ks_difference < 2.0 * ks_noise,
        "left_ordering": bool(np.all(margin_l >= 0.0)),
        "right_ordering": bool(np.all(margin_r >= 0.0)),
    }
    return report
