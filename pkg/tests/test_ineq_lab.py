import math

import numpy as np
import pytest
from scipy.integrate import quad

from liftlab.covering import REAL_LINE
from liftlab.domain import make_domain
from liftlab.energy import make_field, truncated
from liftlab.errors import (BadEta, ExponentConditionViolated, ExponentOutOfRange, NotConvexDomain)
from liftlab.families import trig_mix
from liftlab.ineq_lab import Mode, exact, explicit, run_suite, stability, suite_ids
from liftlab.ineq_lab import counterexample as cex
from liftlab.ineq_lab.suites import (coarsen, fractional_constant, gap_constant, membership_threshold, s_flat,
                                     s_star_large_osc, truncated_power_constant)


@pytest.mark.parametrize("s,sigma,p", [(0.5, 0.3, 2), (0.75, 0.5, 2), (0.6, 0.2, 3)])
def test_fractional_constant_matches_double_integral(s, sigma, p):
    a = (s - sigma) * p
    # inner integral over t < r with the singular factor (r - t)^(a - 1) as a quadrature weight; symmetric in t, r
    inner = lambda r: quad(lambda t: 1.0, 0, r, weight="alg", wvar=(0, a - 1))[0] if r > 0 else 0.0
    val = 2 * quad(inner, 0, 1, epsabs=1e-12)[0]
    assert fractional_constant(s, sigma, p) == pytest.approx(val, rel=1e-6)


def test_gap_constant_cases():
    assert gap_constant(1.0, 1.0, 0.5, 1.0) == pytest.approx(1.0)
    # q <= 1, gamma >= 1: 2^(gamma-1) (lam1/lam0)^(1-gamma)
    assert gap_constant(0.5, 2.0, 1.0, 4.0) == pytest.approx(2 * 0.25)


def test_s_flat_is_exact():
    assert s_flat(0.8, 2, 2) == 0.75
    assert s_star_large_osc(0.8, 2, 4, 1) == pytest.approx(0.625)


def test_report_modes():
    r = exact("x", "a", 1.0, 1.0 + 1e-13)
    assert r.passed and r.mode is Mode.EXACT
    assert not exact("x", "a", 1.0 + 1e-9, 1.0).passed
    e = explicit("x", "b", 2.09, 1.0, 2.0, 0.05)
    assert e.passed and e.ratio == pytest.approx(2.09)
    assert not explicit("x", "b", 2.11, 1.0, 2.0, 0.05).passed
    st = stability("x", "c", 1.19, 1.0)
    assert st.passed and math.isnan(st.bound_constant)
    assert not stability("x", "c", 1.21, 1.0).passed
    assert set(st.row()) == {"suite_id", "case_id", "s", "p", "q", "lhs", "rhs", "bound_constant", "ratio",
                             "mode", "pass"}


def test_truncated_power_constant_oracle():
    # q0 = q1 = 0: (t-1)^0 / int_eta^t r^-1 dr = 1/ln(t/eta), maximal at the smallest t on the grid
    c = truncated_power_constant(0.0, 0.0, 0.5, 10.0, points=400)
    t1 = np.linspace(1.0, 10.0, 400)[1]
    assert c == pytest.approx(1 / math.log(t1 / 0.5), rel=1e-6)
    with pytest.raises(BadEta):
        truncated_power_constant(1.0, 1.0, 1.5, 10.0)


def test_membership_threshold_on_synthetic_slopes():
    s_grid = np.array([0.6, 0.7, 0.8, 0.9])
    # increments scale like 2^{k (s - 0.75) * 4}: slope zero at 0.75
    energies = {n: np.array([sum(2.0 ** (4 * (s - 0.75) * j) for j in range(k)) for s in s_grid])
                for k, n in enumerate((8, 16, 32), start=1)}
    thr, slopes = membership_threshold(s_grid, energies)
    assert thr == pytest.approx(0.75, abs=1e-12)


def test_coarsening_error_decays_with_k():
    dom = make_domain("cube", 2, 32)
    f = make_field(dom, REAL_LINE, trig_mix(dom, seed=1))
    s, p, q = 0.5, 2.0, 1.0
    errs = []
    for k in (2, 4, 8):
        d = np.abs(f.scalar() - coarsen(f, k, p, q).scalar())
        errs.append(np.sum(np.minimum(d ** p, d ** q)) * dom.weight)
    # smooth fields: the ratio matches the (faster) smooth rate, at least the bound rate 2^{sp}
    for a, b in zip(errs, errs[1:]):
        assert a / b >= 2 ** (s * p)
    for k, e in zip((2, 4, 8), errs):
        C = dom.m ** ((dom.m + s * p) / 2) / k ** (s * p)
        assert e <= C * truncated(f, s, p, q).value


def test_psi_gradient_matches_finite_differences(rng):
    x = rng.uniform(-0.95, 0.95, size=(50, 2))
    _, g = cex.psi(x)
    eps = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = eps
        fd = (cex.psi(x + e)[0] - cex.psi(x - e)[0]) / (2 * eps)
        np.testing.assert_allclose(g[:, k], fd, atol=1e-6)


def test_psi_profile():
    v, g = cex.psi(np.array([[0.3, 0.1], [0.0, 0.95]]))
    assert v[0] == pytest.approx(0.3) and v[1] == 0.0
    np.testing.assert_allclose(g[0], [1.0, 0.0])


@pytest.mark.parametrize("A,q", [(5.0, 1.5), (30.0, 1.0)])
def test_angular_integral(A, q):
    ref = quad(lambda th: abs(math.cos(th)) ** q * max(math.log(A * abs(math.cos(th))), 0.0), 0, 2 * math.pi,
               limit=400, points=[math.acos(1 / A), 2 * math.pi - math.acos(1 / A)])[0]
    assert float(cex._angular(np.array([A]), q)[0]) == pytest.approx(ref, rel=1e-5)


def test_gradient_integral_on_flat_part():
    # on the disk of radius 1/2, |D psi| = 1; the integral exceeds pi/4
    assert cex.gradient_integral(1.5, n=128) > math.pi / 4


def test_counterexample_scaling_identity_small():
    res = cex.bump_terms(math.exp(4), 1.5, 3, n=64)
    np.testing.assert_allclose(res["grad_term"], res["grad_term_scaled"], rtol=1e-9)
    assert np.all(np.diff(res["grad_term"]) < 0)


def test_suite_registry_names():
    assert suite_ids() == ["fractional_integration", "gap_scaling", "truncated_powers", "exponent_equivalence",
                           "lifting_estimates", "nonlinear_exponent", "large_scale", "counterexample",
                           "supercritical", "small_lemmas", "sum_space"]


@pytest.mark.parametrize("sid", ["gap_scaling", "truncated_powers", "exponent_equivalence", "large_scale",
                                 "small_lemmas", "lifting_estimates"])
def test_fast_suites_pass(sid):
    res = run_suite(sid)
    assert res.reports
    assert [r.case_id for r in res.reports if not r.passed] == []


def test_suites_are_deterministic():
    a = run_suite("small_lemmas", {"seed": 7})
    b = run_suite("small_lemmas", {"seed": 7})
    assert [r.row() for r in a.reports] == [r.row() for r in b.reports]


@pytest.mark.parametrize("sid,over,exc", [
    ("exponent_equivalence", {"pairs": [[1.5, 1.0]]}, ExponentOutOfRange),
    ("gap_scaling", {"domain": "torus"}, NotConvexDomain),
    ("truncated_powers", {"cases": [[1.0, 1.0, 0.0]]}, BadEta),
    ("counterexample", {"q": 2.0}, ExponentOutOfRange),
    ("nonlinear_exponent", {"s": 0.4}, ExponentConditionViolated),
    ("supercritical", {"p": 3.0}, ExponentConditionViolated),
])
def test_suite_errors(sid, over, exc):
    with pytest.raises(exc):
        run_suite(sid, over)
