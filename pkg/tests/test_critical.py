import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rivlab import rivdist as rd
from rivlab.critical import (
    ClampWarning,
    PhasePoint,
    default_delta_grid,
    level_curve,
    rho_bracket,
    u_crit,
    v_crit,
)
from rivlab.specfun import DomainError, log_binomial


@pytest.mark.parametrize("kwargs", [
    dict(rho=0.0, delta=0.5),
    dict(rho=1.2, delta=0.5),
    dict(rho=0.1, delta=0.0),
    dict(rho=0.1, delta=1.5),
    dict(rho=0.1, delta=0.5, eps=1.0),
    dict(rho=0.1, delta=0.5, eps=0.0),
    dict(rho=0.5, delta=0.0001),          # M = 1
    dict(rho=0.001, delta=0.05),          # K = 0.5
])
def test_phase_point_rejects(kwargs):
    with pytest.raises(DomainError):
        PhasePoint(**kwargs)


def test_phase_point_derived_sizes():
    p = PhasePoint(0.1, 0.2, 10_000)
    assert p.M == pytest.approx(2000)
    assert p.K == pytest.approx(200)
    assert p.log_ns == pytest.approx(float(log_binomial(10_000, 200)), rel=1e-14)


def test_u_crit_high_precision_value():
    # 40-digit evaluation of 1 - q (ln 1/(1 - eps))^(2/M) at K = 200, M = 2000, N = 10^4
    assert u_crit(PhasePoint(0.1, 0.2)) == pytest.approx(0.58553004294379864, rel=1e-13)


def test_v_crit_high_precision_value():
    p = PhasePoint(0.05, 0.5)
    assert v_crit(p, clamp=False) == pytest.approx(-0.29592911797703235, rel=1e-12)
    with pytest.warns(ClampWarning):
        assert v_crit(p) == 0.0


def test_u_crit_clamps_with_warning():
    p = PhasePoint(0.001, 0.5)
    assert u_crit(p, clamp=False) < 0
    with pytest.warns(ClampWarning):
        assert u_crit(p) == 0.0


points = st.tuples(st.floats(0.005, 0.5), st.floats(0.02, 1.0),
                   st.sampled_from([1e-2, 1e-3, 1e-6]))


@settings(max_examples=80, deadline=None)
@given(points)
def test_round_trips(args):
    rho, delta, eps = args
    p = PhasePoint(rho, delta, 10_000, eps)
    u = u_crit(p, clamp=False)
    w = p.weibull()
    assert rd.weibull_cdf(1.0 - u, w) == pytest.approx(1.0 - eps, abs=1e-9)
    v = v_crit(p, clamp=False)
    assert rd.gumbel_cdf(v + 1.0, p.gumbel()) == pytest.approx(1.0 - eps, abs=1e-9)


@pytest.mark.parametrize("rho", [0.02, 0.1, 0.3])
def test_u_crit_nonincreasing_in_delta(rho):
    u = [u_crit(PhasePoint(rho, d), clamp=False) for d in np.geomspace(0.01, 1, 60)]
    assert np.all(np.diff(u) <= 0)


def test_left_ric_below_level_beyond_delta_point_two():
    # at rho = 0.1 the left critical value stays under 0.6 for every delta >= 0.2
    for d in np.linspace(0.2, 1.0, 41):
        assert u_crit(PhasePoint(0.1, d)) < 0.6
    assert u_crit(PhasePoint(0.1, 0.1)) > 0.6


def test_v_crit_at_single_support_limit():
    # smallest admissible rho puts K = 1, so N_s = N
    delta, N, eps = 0.5, 10_000, 1e-3
    p = PhasePoint(1.0 / (delta * N), delta, N, eps)
    M = delta * N
    expected = rd.gumbel_location(M, math.log(N)) - 1 - (2 / M) * math.log(-math.log1p(-eps))
    assert v_crit(p, clamp=False) == pytest.approx(expected, rel=1e-9)
    vs = [v_crit(PhasePoint(r, delta, N, eps), clamp=False) for r in np.geomspace(p.rho, 0.5, 30)]
    assert np.all(np.diff(vs) > 0)


def test_rho_bracket():
    lo, hi = rho_bracket(0.5, 10_000)
    assert lo == pytest.approx(1 / 5000)
    assert hi == pytest.approx(1.0)
    lo2, hi2 = rho_bracket(0.5, 10_000, rho_scale=2.0)
    assert lo2 == pytest.approx(lo / 2) and hi2 == pytest.approx(0.5)


def test_default_grid():
    g = default_delta_grid()
    assert len(g) == 100 and g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(1.0)


class TestLevelCurve:
    curve = level_curve(0.6)

    def test_residuals(self):
        assert len(self.curve) == 100
        assert max(self.curve.residuals) <= 1e-8

    def test_monotone(self):
        assert np.all(np.diff(self.curve.values) >= 0)

    def test_rho_at_delta_point_two_is_near_tenth(self):
        i = int(np.argmin(np.abs(self.curve.deltas - 0.2)))
        assert self.curve.values[i] == pytest.approx(0.1, abs=0.01)

    def test_deterministic(self):
        again = level_curve(0.6)
        assert again.points == self.curve.points


def test_level_curve_records_missing_points():
    c = level_curve(0.6, delta_grid=[1e-5, 0.2, 1.5])
    assert c.missing == [1e-5, 1.5]
    assert len(c) == 1
    high = level_curve(0.999, delta_grid=[0.5])
    assert len(high) == 0 and high.missing == [0.5]


@pytest.mark.parametrize("level", [0.0, 1.0, -0.2])
def test_level_domain(level):
    with pytest.raises(DomainError):
        level_curve(level)


def test_no_warnings_on_default_curve():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        level_curve(0.4, delta_grid=np.geomspace(0.05, 1, 10))
