import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import UNIT_B, rel
from yblab.errors import DomainError, KindMismatch, NumericalError
from yblab.specfun import ModularParam
from yblab.weights import (
    DualSpin,
    EllipticModel,
    GammaModel,
    HyperbolicModel,
    SpectralParam,
    Spin,
    canonical_spin,
    crossed_edge_weight,
    edge_weight,
    real_log_edge,
    single_spin_weight,
)

# mpmath product of gamma functions (scripts/oracles.py)
W_GAMMA_HALF_ZERO = 25.899527357669339225
W_GAMMA_035 = 0.44258526908172285616

ELL = EllipticModel.from_nomes(0.3, 0.3)
HYP = HyperbolicModel.from_b(1.0)
HYP_U = HyperbolicModel.from_b(UNIT_B)
GAM = GammaModel()


def test_spin_types():
    with pytest.raises((ValueError, TypeError)):
        DualSpin(0.1, 0.5)
    with pytest.raises(NumericalError):
        Spin(math.nan)
    assert canonical_spin(math.pi + 0.25) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        SpectralParam(1.2, 1.0)
    assert SpectralParam(0.3, 1.0).crossed().value == pytest.approx(0.7)


def test_site_weights_examples():
    assert single_spin_weight(GAM, DualSpin(0.0, 0)) == 0.0
    assert single_spin_weight(GAM, DualSpin(1.0, 0)) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert single_spin_weight(ELL, Spin(0.0)) == pytest.approx(0.0, abs=1e-300)


def test_kind_mismatch():
    with pytest.raises(KindMismatch):
        single_spin_weight(GAM, Spin(0.3))
    with pytest.raises(KindMismatch):
        edge_weight(ELL, 0.2, DualSpin(0.1, 0), Spin(0.3))


def test_gamma_weight_oracles():
    assert rel(edge_weight(GAM, 0.5, DualSpin(0, 0), DualSpin(0, 0)), W_GAMMA_HALF_ZERO) <= 1e-12
    assert rel(edge_weight(GAM, 0.35, DualSpin(0.7, 1), DualSpin(-0.4, 2)), W_GAMMA_035) <= 1e-12


def test_gamma_weight_vanishing_beta():
    assert edge_weight(GAM, 1e-6, DualSpin(0.3, 1), DualSpin(0.7, 0)) == pytest.approx(1.0, abs=1e-4)


def test_gamma_reflection_symmetry_random(rng):
    for _ in range(20):
        b = rng.uniform(0.05, 0.95)
        s1 = DualSpin(rng.uniform(-2, 2), int(rng.integers(-2, 3)))
        s2 = DualSpin(rng.uniform(-2, 2), int(rng.integers(-2, 3)))
        assert rel(edge_weight(GAM, b, s1, s2), edge_weight(GAM, b, s2, s1)) <= 1e-10


def test_elliptic_periodicity():
    a = 0.25 * ELL.eta
    w = edge_weight(ELL, a, Spin(0.4), Spin(1.3))
    assert rel(edge_weight(ELL, a, Spin(0.4 + math.pi), Spin(1.3)), w) <= 1e-10
    assert rel(single_spin_weight(ELL, Spin(0.4 + math.pi)), single_spin_weight(ELL, Spin(0.4))) <= 1e-10


def test_crossed_weights():
    s1, s2 = DualSpin(0.3, 1), DualSpin(-1.1, -2)
    assert crossed_edge_weight(GAM, 0.4, s1, s2) == edge_weight(GAM, 0.6, s1, s2)
    half = ELL.eta / 2
    assert crossed_edge_weight(ELL, half, Spin(0.2), Spin(1.0)) == pytest.approx(
        edge_weight(ELL, half, Spin(0.2), Spin(1.0)), rel=1e-14)
    # two paths: crossing helper vs explicit spectral value
    w_c = crossed_edge_weight(HYP, SpectralParam(0.3, 1.0), Spin(0.2), Spin(-0.5))
    w_d = math.exp(float(real_log_edge(HYP, 0.7, 0.2, -0.5)))
    assert rel(w_c, w_d) <= 1e-12


def test_spectral_param_model_mismatch():
    with pytest.raises(DomainError):
        edge_weight(GAM, SpectralParam(0.3, ELL.eta), DualSpin(0, 0), DualSpin(0, 0))


def test_hyperbolic_weight_is_real_positive():
    m = HyperbolicModel.from_b(1.2)
    lw = complex(m.log_edge(0.4, 0.3, -0.1))
    assert abs(lw.imag) <= 1e-10
    assert math.exp(lw.real) > 0


def test_hyperbolic_first_argument_prefactor_is_symmetric():
    # the e^{4 pi alpha x} factor sits on the first spin; the phi ratios
    # compensate it, so the weight is symmetric anyway
    for m in (HYP, HyperbolicModel.from_b(1.3), HYP_U):
        a = 0.35 * m.eta
        assert rel(edge_weight(m, a, Spin(0.9), Spin(-0.4)), edge_weight(m, a, Spin(-0.4), Spin(0.9))) <= 1e-10


MODELS = {
    "elliptic": (ELL, lambda r: Spin(r.uniform(0, math.pi))),
    "elliptic_asym": (EllipticModel.from_nomes(0.2, 0.5), lambda r: Spin(r.uniform(0, math.pi))),
    "hyperbolic": (HyperbolicModel.from_b(1.3), lambda r: Spin(r.uniform(-2, 2))),
    "hyperbolic_unit": (HYP_U, lambda r: Spin(r.uniform(-2, 2))),
    "gamma": (GAM, lambda r: DualSpin(r.uniform(-2, 2), int(r.integers(-2, 3)))),
}


@pytest.mark.parametrize("name", MODELS)
def test_positivity_many_configs(name):
    m, draw = MODELS[name]
    r = np.random.default_rng(11)
    n = 1000
    a = r.uniform(0.02, 0.98, n) * m.eta
    s1 = [draw(r) for _ in range(n)]
    s2 = [draw(r) for _ in range(n)]
    if isinstance(m, GammaModel):
        coords = ([s.x for s in s1], [s.n for s in s1], [s.x for s in s2], [s.n for s in s2])
        site = m.site(coords[0], coords[1])
    else:
        coords = ([s.x for s in s1], [s.x for s in s2])
        site = m.site(coords[0])
    for k in range(0, n, 100):
        lw = real_log_edge(m, float(a[k]), *[np.asarray(c[k:k + 100]) for c in coords])
        assert np.all(np.isfinite(lw))
    assert np.all(site >= 0) and np.all(np.isfinite(site))


@given(st.floats(0.02, 0.98), st.floats(-2, 2), st.integers(-3, 3), st.floats(-2, 2), st.integers(-3, 3))
def test_gamma_inversion_and_symmetry(beta, x, n, y, m):
    a = DualSpin(x, n)
    b = DualSpin(y, m)
    lw = GAM.log_edge(beta, x, n, y, m) + GAM.log_edge(-beta, x, n, y, m)
    assert abs(np.exp(lw) - 1) <= 1e-9
    assert rel(edge_weight(GAM, beta, a, b), edge_weight(GAM, beta, b, a)) <= 1e-10


@given(st.floats(-3, 3), st.integers(-4, 4))
def test_gamma_site_even(x, n):
    assert GAM.site(-x, -n) == GAM.site(x, n)


@given(st.floats(0.02, 0.98), st.floats(0, math.pi), st.floats(0, math.pi))
def test_elliptic_symmetry_and_inversion(frac, x, y):
    a = frac * ELL.eta
    w1 = edge_weight(ELL, a, Spin(x), Spin(y))
    w2 = edge_weight(ELL, a, Spin(y), Spin(x))
    assert rel(w1, w2) <= 1e-10
    lw = ELL.log_edge(a, x, y) + ELL.log_edge(-a, x, y, continuation=True)
    assert abs(np.exp(lw) - 1) <= 1e-9


@given(st.floats(0.02, 0.98), st.floats(-2, 2), st.floats(-2, 2), st.sampled_from([1.0, 1.3, UNIT_B]))
def test_hyperbolic_symmetry_and_inversion(frac, x, y, b):
    m = HyperbolicModel(ModularParam(b))
    a = frac * m.eta
    assert rel(edge_weight(m, a, Spin(x), Spin(y)), edge_weight(m, a, Spin(y), Spin(x))) <= 1e-10
    lw = m.log_edge(a, x, y) + m.log_edge(-a, x, y)
    assert abs(np.exp(lw) - 1) <= 1e-9
