"""End-to-end acceptance checks.

Each check records one PASS/FAIL line (shown in the pytest terminal summary,
or printed directly when this file is run as a script) and fails the test
when its condition or runtime budget is not met.
"""

import functools
import math
import subprocess
import sys
import time

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from rivlab import rivdist as rd
from rivlab.critical import PhasePoint, u_crit, v_crit
from rivlab.mc import MCConfig, iid_order_statistics, ks_distance, validate
from rivlab.phase import CITED_BOUNDS, measurement_bound, pt_boundary
from rivlab.rivdist import Triplet

RESULTS: list[str] = []


def criterion(number, title, budget=None):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            ok, detail = False, "assertion failed"
            try:
                detail = fn(*args, **kwargs) or ""
                ok = True
            except AssertionError as exc:
                if str(exc):
                    detail = str(exc).splitlines()[0]
                raise
            finally:
                elapsed = time.perf_counter() - t0
                if ok and budget is not None and elapsed > budget:
                    ok = False
                    detail += f"; over runtime budget {budget:g}s"
                line = f"[{number:2d}] {'PASS' if ok else 'FAIL'} {title} ({elapsed:.2f}s) {detail}"
                RESULTS.append(line)
                print(line, flush=True)
            assert ok, detail
        return run
    return wrap


T268 = Triplet(2, 6, 8)
REF_T = Triplet(5, 200, 1000)


@criterion(1, "ratio moments at (2,6,8), 1e5 trials", budget=10)
def test_ratio_moments():
    r = validate(MCConfig(T268, 100_000, seed=2024))
    assert abs(r.ratio_mean - 1.0) <= 0.01, f"mean {r.ratio_mean}"
    assert abs(r.ratio_var - 2 / 6) <= 0.1 * (2 / 6), f"variance {r.ratio_var}"
    return f"mean={r.ratio_mean:.5f} var={r.ratio_var:.5f} (target 1, {2 / 6:.5f})"


@criterion(2, "ratio law and x-invariance, 1e5 samples", budget=30)
def test_ratio_distribution():
    r = validate(MCConfig(T268, 100_000, seed=2024))
    assert r.ks_ratio <= 0.01, f"KS {r.ks_ratio}"
    assert r.ks_difference <= 0.005, f"KS difference {r.ks_difference}"
    return f"KS={r.ks_ratio:.5f} KS({r.alt_x_rule})={r.ks_ratio_alt:.5f} diff={r.ks_difference:.5f}"


@criterion(3, "eigenvalue sandwich and dominance, 1e4 encoders", budget=60)
def test_sandwich_and_dominance():
    r = validate(MCConfig(T268, 10_000, seed=31))
    assert r.sandwich_violations == 0, f"{r.sandwich_violations} sandwich violations"
    assert r.ev_dominance_violations == 0, f"{r.ev_dominance_violations} dominance violations"
    return f"violations 0/0 over {10_000 * r.n_supports} support evaluations"


@criterion(4, "exact CDFs vs iid order statistics at (2,4,6), 1e6 replicates", budget=60)
def test_iid_oracle():
    t = Triplet(2, 4, 6)
    left, right = iid_order_statistics(4, 15, 1_000_000, np.random.default_rng(4))
    ks_l = ks_distance(left, lambda u: rd._left_cdf(t, u))
    ks_r = ks_distance(right, lambda v: rd._right_cdf(t, v))
    assert ks_l <= 0.005 and ks_r <= 0.005, f"KS left {ks_l}, right {ks_r}"
    return f"KS left={ks_l:.5f} right={ks_r:.5f}"


@criterion(5, "dependent supports dominate the iid CDFs, 1e4 trials", budget=60)
def test_ordering():
    r = validate(MCConfig(T268, 10_000, seed=55))
    ml, mr = min(r.left_ordering_margin), min(r.right_ordering_margin)
    assert len(r.left_ordering_margin) == len(r.right_ordering_margin) == 50
    assert ml >= 0, f"left margin {ml}"
    assert mr >= 0, f"right margin {mr}"
    return f"min margin left={ml:.2e} right={mr:.2e}"


def _gap(t):
    u = np.linspace(0.0, 1.0, 200)
    gl = np.max(np.abs(rd.left_riv_cdf(t, u) - rd.left_riv_cdf_asym(t, u)))
    v = np.linspace(0.0, 4.0, 200)
    gr = np.max(np.abs(rd.right_riv_cdf(t, v) - rd.right_riv_cdf_asym(t, v)))
    return gl, gr


@criterion(6, "limit CDFs approach exact CDFs along N = 40..640", budget=10)
def test_limit_convergence():
    rho, delta = 0.1, 0.25
    rows = []
    for N in (40, 80, 160, 320, 640):
        M = int(round(delta * N))
        t = Triplet(int(round(rho * M)), M, N)
        gl, gr = _gap(t)
        rows.append((N, gl, gr, t.log_ns ** 2))
    detail = " ".join(f"N={N}:L={gl:.3g},R={gr:.3g}" for N, gl, gr, _ in rows)
    gl = np.array([r[1] for r in rows])
    gr = np.array([r[2] for r in rows])
    scale = np.array([r[3] for r in rows])
    assert np.all(np.diff(gl) < 0) and np.all(np.diff(gr) < 0), f"gaps not decreasing: {detail}"
    for g in (gl * scale, gr * scale):
        assert g.max() / g.min() <= 4, f"gap*(ln N_s)^2 spread {g.max() / g.min():.3g}: {detail}"
    return detail


@criterion(7, "critical values invert the limit CDFs on a 20x20 lattice", budget=5)
def test_critical_round_trips():
    eps = 1e-3
    worst = 0.0
    for rho in np.linspace(0.01, 0.5, 20):
        for delta in np.linspace(0.05, 1.0, 20):
            p = PhasePoint(rho, delta, 10_000, eps)
            u = u_crit(p, clamp=False)
            v = v_crit(p, clamp=False)
            worst = max(worst, abs(rd.weibull_cdf(1 - u, p.weibull()) - (1 - eps)),
                        abs(rd.gumbel_cdf(v + 1, p.gumbel()) - (1 - eps)))
    assert worst <= 1e-9, f"worst round-trip error {worst}"
    return f"worst error {worst:.2e}"


@criterion(8, "level-0.6 curve crosses rho=0.1 at delta=0.2+-0.03", budget=5)
def test_level_crossing():
    d = brentq(lambda x: u_crit(PhasePoint(0.1, x), clamp=False) - 0.6, 0.02, 1.0, xtol=1e-12)
    assert abs(d - 0.2) <= 0.03, f"crossing at delta={d:.5f}"
    return f"crossing at delta={d:.5f}"


@criterion(9, "measurement bounds c_riv, c_gfa and ratio to the EV bound", budget=30)
def test_measurement_bounds():
    c_riv = measurement_bound(pt_boundary("riv", 10_000, 1e-3))
    c_gfa = measurement_bound(pt_boundary("gfa"))
    ratio = CITED_BOUNDS["ev"]["value"] / c_riv
    assert abs(c_riv - 16.8) <= 0.5, f"c_riv={c_riv}"
    assert abs(c_gfa - 56) <= 2, f"c_gfa={c_gfa}"
    assert abs(ratio - 18.8) <= 0.6, f"ratio={ratio}"
    return f"c_riv={c_riv:.4f} c_gfa={c_gfa:.4f} 317/c_riv={ratio:.4f}"


@criterion(10, "support band at delta=0.2, rho=0.05 with calibrated eps", budget=5)
def test_support_band():
    t = Triplet(50, 1000, 5000)
    exps = np.arange(-2.0, -20.0001, -0.1)
    errs = [sum((a - b) ** 2 for a, b in zip(rd.left_support(t, 10.0 ** e), (0.354, 0.397))) for e in exps]
    e = float(exps[int(np.argmin(errs))])
    lo, hi = rd.left_support(t, 10.0 ** e)
    assert abs(lo - 0.354) <= 0.01 and abs(hi - 0.397) <= 0.01, f"LESP={lo}, UESP={hi}"
    assert abs((hi - lo) - 0.043) <= 0.005, f"width={hi - lo}"
    return f"eps=1e{e:.1f} LESP={lo:.4f} UESP={hi:.4f} width={hi - lo:.4f}"


def _five_point(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


@criterion(11, "PDF normalization and CDF/PDF consistency at (5,200,1000)", budget=30)
def test_normalization_suite():
    t = REF_T
    w = rd.weibull_params(t)
    g = rd.gumbel_params(t)

    def qtl(cdf, p, lo, hi):
        return brentq(lambda x: cdf(x) - p, lo, hi, xtol=1e-14)

    lq = [qtl(lambda u: rd.left_riv_cdf(t, u), p, 0, 1) for p in (0.05, 0.25, 0.5, 0.75, 0.95)]
    rq = [qtl(lambda v: rd.right_riv_cdf(t, v), p, 0, 5) for p in (0.05, 0.25, 0.5, 0.75, 0.95)]
    wq = [w.q * (-math.log(p)) ** (1 / w.beta) for p in (0.05, 0.25, 0.5, 0.75, 0.95)]
    gq = [g.l - g.s * math.log(-math.log(p)) for p in (0.05, 0.25, 0.5, 0.75, 0.95)]
    kw = dict(limit=400, epsabs=1e-12, epsrel=1e-12)
    totals = {
        "left exact": quad(lambda u: rd.left_riv_pdf(t, u), 0, 1, points=lq, **kw)[0],
        "right exact": quad(lambda v: rd.right_riv_pdf(t, v), 0, 5, points=rq, **kw)[0],
        "left limit": quad(lambda u: rd.left_riv_pdf_asym(t, u), 0, 1, points=[1 - x for x in wq], **kw)[0],
        "right limit": quad(lambda x: math.exp(rd.gumbel_logpdf(x, g)), g.l - 40 * g.s, g.l + 60 * g.s,
                            points=gq, **kw)[0],
    }
    for name, total in totals.items():
        assert abs(total - 1) <= 1e-6, f"{name} integrates to {total}"

    worst = 0.0
    for u in lq:
        h = 1e-4 * min(u, 1 - u)
        fd = _five_point(lambda x: rd.left_riv_cdf(t, x), u, h)
        worst = max(worst, abs(fd / rd.left_riv_pdf(t, u) - 1))
    for v in rq:
        fd = _five_point(lambda x: rd.right_riv_cdf(t, x), v, 1e-4 * v)
        worst = max(worst, abs(fd / rd.right_riv_pdf(t, v) - 1))
    for x in wq:
        fd = _five_point(lambda u: rd.left_riv_cdf_asym(t, u), 1 - x, 1e-4 * x)
        worst = max(worst, abs(fd / rd.left_riv_pdf_asym(t, 1 - x) - 1))
    for x in gq:
        fd = _five_point(lambda y: rd.gumbel_cdf(y, g), x, 1e-4 * g.s)
        worst = max(worst, abs(fd / math.exp(rd.gumbel_logpdf(x, g)) - 1))
    assert worst <= 1e-6, f"worst finite-difference mismatch {worst}"
    spread = max(abs(v - 1) for v in totals.values())
    return f"max |integral-1|={spread:.1e} max FD rel err={worst:.1e}"


@criterion(12, "validate report is byte-identical across runs")
def test_determinism(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"report{i}.json"
        proc = subprocess.run([sys.executable, "-m", "rivlab.cli", "validate", "--triplet", "2,6,8",
                               "--trials", "3000", "--seed", "12345", "--out", str(path)],
                              capture_output=True)
        assert proc.returncode == 0, proc.stderr.decode()
        outs.append(path.read_bytes())
    assert outs[0] == outs[1], "reports differ"
    return f"{len(outs[0])} bytes, identical"


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    checks = [test_ratio_moments, test_ratio_distribution, test_sandwich_and_dominance, test_iid_oracle,
              test_ordering, test_limit_convergence, test_critical_round_trips, test_level_crossing,
              test_measurement_bounds, test_support_band, test_normalization_suite]
    failed = 0
    for check in checks:
        try:
            check()
        except AssertionError:
            failed += 1
    with tempfile.TemporaryDirectory() as d:
        try:
            test_determinism(Path(d))
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
