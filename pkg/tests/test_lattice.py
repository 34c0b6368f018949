import math
import warnings

import numpy as np
import pytest

from yblab.errors import ErgodicityWarning, TooManyInternalSites
from yblab.lattice import (
    Edge,
    GridDiscretization,
    LatticeSpec,
    MCConfig,
    Method,
    exact_edge_observable,
    exact_partition,
    free_energy_trend,
    mc_run,
)
from yblab.specfun import PrecisionBudget
from yblab.verify import StarConfig, str_residual
from yblab.weights import DualSpin, EllipticModel, GammaModel, HyperbolicModel, Spin, edge_weight

ELL = EllipticModel.from_nomes(0.3, 0.3)
HYP = HyperbolicModel.from_b(1.3)
GAM = GammaModel()
ZERO = {"elliptic": Spin(0.4), "hyperbolic": Spin(0.0), "gamma": DualSpin(0.0, 0)}


def test_types_validate():
    with pytest.raises(ValueError):
        LatticeSpec(2, {}, (Edge(0, 0, 0.1),))
    with pytest.raises(ValueError):
        GridDiscretization([0.0, 1.0], [1.0, -1.0])
    with pytest.raises(ValueError):
        MCConfig(sweeps=10, burn_in=10)
    with pytest.raises(ValueError):
        MCConfig(n_step_prob=1.0)
    with pytest.raises(ValueError):
        LatticeSpec.square(3, 3, 0.2, 0.1, zero=Spin(0.0))


def test_square_lattice_geometry():
    sp = LatticeSpec.square(4, 4, 0.3, 1.0, zero=DualSpin(0.0, 0))
    assert len(sp.internal) == 4 and len(sp.fixed) == 12
    assert len(sp.edges) == 24
    assert sum(e.spectral == 0.3 for e in sp.edges) == 12


def test_no_internal_sites_is_a_plain_product():
    b = [Spin(0.1), Spin(0.7), Spin(1.9), Spin(2.5)]
    sp = LatticeSpec.square(2, 2, 0.3 * ELL.eta, ELL.eta, boundary=b)
    res = exact_partition(sp, ELL)
    want = sum(math.log(edge_weight(ELL, e.spectral, sp.fixed[e.i], sp.fixed[e.j])) for e in sp.edges)
    assert res.log_z == pytest.approx(want, rel=1e-13)
    assert res.method is Method.Exact


def test_too_many_internal_sites():
    sp = LatticeSpec.square(5, 4, 0.3, 1.0, zero=DualSpin(0.0, 0))
    with pytest.raises(TooManyInternalSites):
        exact_partition(sp, GAM)


@pytest.mark.parametrize("m,outer", [
    (ELL, (Spin(0.5), Spin(1.1), Spin(2.0))),
    (HYP, (Spin(0.3), Spin(-0.6), Spin(1.0))),
], ids=["elliptic", "hyperbolic"])
def test_single_site_matches_star_side(m, outer):
    spectral = tuple(m.eta * np.array([0.2, 0.3, 0.5]))
    rep = str_residual(m, StarConfig(outer, spectral), PrecisionBudget(rel_tol=1e-10))
    res = exact_partition(LatticeSpec.star(outer, spectral, m.eta), m)
    assert math.exp(res.log_z) == pytest.approx(rep.lhs, rel=1e-6)


def test_gamma_single_site_refinement():
    spec = LatticeSpec.star(tuple(DualSpin(0.0, 0) for _ in range(3)), (1 / 3, 1 / 3, 1 / 3), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = exact_partition(spec, GAM, GridDiscretization.for_model(GAM, 128, 32))
        b = exact_partition(spec, GAM, GridDiscretization.for_model(GAM, 192, 48))
    assert math.isfinite(a.log_z)
    assert abs(math.exp(a.log_z - b.log_z) - 1) <= 1e-5


@pytest.mark.parametrize("m", [ELL, HYP, GAM], ids=["elliptic", "hyperbolic", "gamma"])
def test_transposition_with_crossing(m):
    sp = LatticeSpec.square(4, 4, 0.3 * m.eta, m.eta, zero=ZERO[m.name])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = exact_partition(sp, m)
        b = exact_partition(sp.transposed(m.eta), m)
    assert a.log_z == pytest.approx(b.log_z, rel=1e-6)


def test_free_energy_trend_elliptic():
    specs = [LatticeSpec.square(r, c, 0.3 * ELL.eta, ELL.eta, zero=Spin(0.4)) for r, c in ((3, 3), (3, 4), (4, 4))]
    coarse = free_energy_trend(specs, ELL)
    fine = free_energy_trend(specs, ELL, GridDiscretization.for_model(ELL, 128))
    assert len(coarse) == len(specs)
    assert all(math.isfinite(v) for v in coarse)
    assert np.allclose(coarse, fine, rtol=0, atol=1e-4)


def test_edge_observable_consistent_with_weights():
    # the star's edges each have exactly one fixed end
    outer = (Spin(0.5), Spin(1.1), Spin(2.0))
    spec = LatticeSpec.star(outer, tuple(ELL.eta * np.array([0.2, 0.3, 0.5])), ELL.eta)
    obs = exact_edge_observable(spec, ELL)
    assert obs.shape == (3,) and np.all(np.isfinite(obs))


SMALL = LatticeSpec.square(3, 3, 0.4, 1.0, zero=DualSpin(0.0, 0))


@pytest.mark.filterwarnings("ignore::yblab.errors.ErgodicityWarning")
def test_mc_deterministic():
    cfg = MCConfig(sweeps=200, burn_in=50, seed=5, chains=4)
    a = mc_run(SMALL, GAM, cfg)
    b = mc_run(SMALL, GAM, cfg)
    assert np.array_equal(a.series, b.series)
    assert np.array_equal(a.samples, b.samples)
    c = mc_run(SMALL, GAM, MCConfig(sweeps=200, burn_in=50, seed=6, chains=4))
    assert not np.array_equal(a.series, c.series)


def test_mc_identity_proposal_limit():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ErgodicityWarning)
        obs = mc_run(SMALL, GAM, MCConfig(sweeps=300, burn_in=50, x_step=1e-7, n_step_prob=0.0, chains=2))
    assert obs.acceptance > 0.999


def test_mc_frozen_integer_warns():
    with pytest.warns(ErgodicityWarning, match="never moved"):
        mc_run(SMALL, GAM, MCConfig(sweeps=100, burn_in=10, n_step_prob=0.0, chains=2))


@pytest.mark.filterwarnings("ignore:integer spin components")
def test_mc_low_acceptance_warns():
    with pytest.warns(ErgodicityWarning, match="acceptance"):
        mc_run(SMALL, GAM, MCConfig(sweeps=60, burn_in=10, x_step=1e4, chains=2))


def test_mc_hyperbolic_runs_and_stays_finite():
    sp = LatticeSpec.square(3, 4, 0.4, HYP.eta, zero=Spin(0.0))
    obs = mc_run(sp, HYP, MCConfig(sweeps=120, burn_in=20, seed=1, chains=4))
    assert 0 < obs.acceptance < 1
    assert np.all(np.isfinite(obs.series)) and np.all(obs.edge_stderr > 0)
    assert obs.autocorr_time >= 1
