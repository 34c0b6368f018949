import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rel
from yblab.errors import BudgetExhausted, TailNotDecaying
from yblab.quad import Interval, QuadResult, TailPolicy, integrate_finite, integrate_line, sum_bilateral
from yblab.specfun import PrecisionBudget
from yblab.verify import random_star, star_integrand
from yblab.weights import EllipticModel, GammaModel


def test_types_validate():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(0.0, math.inf)
    with pytest.raises(ValueError):
        TailPolicy(growth_factor=1.2)
    with pytest.raises(ValueError):
        QuadResult(0.0, -1.0, 1)


def test_finite_basic():
    r = integrate_finite(np.sin, Interval(0, math.pi))
    assert r.value == pytest.approx(2.0, rel=1e-13)
    assert r.evaluations >= 1 and r.error_estimate >= 0
    assert integrate_finite(lambda x: x * x, Interval(0, 1)).value == pytest.approx(1 / 3, rel=1e-14)


def test_finite_vector_valued():
    r = integrate_finite(lambda x: np.stack([np.cos(x), np.exp(x)]), Interval(0, 1))
    assert np.allclose(r.value, [math.sin(1), math.e - 1], rtol=1e-13)


def test_finite_budget_exhausted():
    tight = PrecisionBudget(rel_tol=1e-14, max_refinements=1)
    with pytest.raises(BudgetExhausted) as exc:
        integrate_finite(lambda x: np.sqrt(np.abs(x - 0.3)), Interval(0, 1), tight)
    assert exc.value.value is not None and exc.value.error_estimate > 0


def test_finite_elliptic_star_against_refined_budget():
    m = EllipticModel.from_nomes(0.3, 0.5)
    cfg = random_star(m, np.random.default_rng(8))
    f = star_integrand(m, cfg)
    b = PrecisionBudget(rel_tol=1e-10)
    coarse = integrate_finite(f, Interval(0, math.pi), b)
    fine = integrate_finite(f, Interval(0, math.pi), b.refined())
    assert rel(coarse.value, fine.value) <= 1e-10


def test_line_closed_forms():
    assert integrate_line(lambda x: np.exp(-x * x)).value == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    r = integrate_line(lambda x: 1 / (1 + x * x), TailPolicy(stop_rel=1e-9),
                       PrecisionBudget(rel_tol=1e-10, max_refinements=60))
    assert r.value == pytest.approx(math.pi, rel=1e-7)
    assert r.truncation_used > 8
    r = integrate_line(lambda x: np.cos(x) / np.cosh(x))
    assert r.value == pytest.approx(math.pi / math.cosh(math.pi / 2), rel=1e-12)


def test_line_tail_not_decaying():
    with pytest.raises(TailNotDecaying):
        integrate_line(lambda x: np.ones_like(x), TailPolicy(), PrecisionBudget(max_refinements=6))


def test_sum_closed_forms():
    r = sum_bilateral(lambda n: 2.0 ** -np.abs(n))
    assert r.value == pytest.approx(3.0, rel=1e-13)
    # n^{-2} tail: the fitted remainder supplies what the cutoff misses
    r = sum_bilateral(lambda n: 1 / (1 + n.astype(float) ** 2), TailPolicy(stop_rel=1e-4))
    exact = math.pi / math.tanh(math.pi)
    assert r.value == pytest.approx(exact, rel=1e-7)
    assert abs(r.value - exact) <= r.error_estimate


def test_sum_respects_max_terms():
    with pytest.raises(BudgetExhausted) as exc:
        sum_bilateral(lambda n: 1 / (1 + n.astype(float) ** 2), TailPolicy(stop_rel=1e-12),
                      PrecisionBudget(max_terms=10_000))
    assert exc.value.value is not None


def test_sum_power_tail_is_fitted():
    # sum 1/(1+n^2)^2 ~ n^{-4}: a fitted tail beats the raw truncation
    term = lambda n: 1 / (1 + n.astype(float) ** 2) ** 2
    exact = (math.pi / 2) * (1 / math.tanh(math.pi) + math.pi / math.sinh(math.pi) ** 2)
    r = sum_bilateral(term, TailPolicy(initial_cutoff=8, stop_rel=1e-6))
    assert rel(r.value, exact) <= 1e-8
    assert r.tail_exponent == pytest.approx(4.0, abs=0.2)


def test_sum_tail_not_decaying():
    with pytest.raises(TailNotDecaying):
        sum_bilateral(lambda n: np.ones(n.shape), TailPolicy(), PrecisionBudget(max_refinements=5))


def test_sum_gamma_star_stable_under_doubling():
    m = GammaModel()
    cfg = random_star(m, np.random.default_rng(5))
    from yblab.verify import star_side

    b = PrecisionBudget(rel_tol=1e-7)
    a, _ = star_side(m, cfg, b)
    c, _ = star_side(m, cfg, b.refined())
    assert rel(a, c) <= 1e-6


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_finite_linearity(a, b):
    f = lambda x: np.exp(-x) * np.sin(3 * x)
    g = lambda x: 1 / (1 + x * x)
    iv = Interval(-1.0, 2.0)
    lhs = integrate_finite(lambda x: a * f(x) + b * g(x), iv)
    rf, rg = integrate_finite(f, iv), integrate_finite(g, iv)
    tol = lhs.error_estimate + abs(a) * rf.error_estimate + abs(b) * rg.error_estimate
    assert abs(lhs.value - (a * rf.value + b * rg.value)) <= tol + 1e-14 * (abs(a) + abs(b) + 1)


BATTERY = [
    (lambda x: x ** 5 - 2 * x, Interval(-1, 2), 2.0 ** 6 / 6 - 1 / 6 - 3),
    (lambda x: np.exp(-x * x), Interval(-3, 3), math.sqrt(math.pi) * math.erf(3)),
    (lambda x: 1 / (1 + 25 * x * x), Interval(-1, 1), 2 * math.atan(5) / 5),
    (lambda x: np.exp(np.cos(x)), Interval(0, 2 * math.pi), 2 * math.pi * 1.2660658777520082),
    (lambda x: np.sqrt(x), Interval(0, 1), 2 / 3),
]


@pytest.mark.parametrize("k", range(len(BATTERY)))
def test_error_estimate_conservative_and_refinement(k):
    f, iv, exact = BATTERY[k]
    errs = []
    for tol in (1e-4, 1e-6, 1e-8, 1e-10):
        r = integrate_finite(f, iv, PrecisionBudget(rel_tol=tol, abs_tol=0.0, max_refinements=80))
        true = abs(r.value - exact)
        assert true <= 10 * r.error_estimate + 4e-16 * abs(exact)
        errs.append(true)
    assert errs[-1] <= errs[0] + 1e-15
