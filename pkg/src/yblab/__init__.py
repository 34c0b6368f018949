"""Numerical laboratory for star-triangle integrable lattice models.

Three families of Boltzmann weights are provided: the elliptic master
solution, the hyperbolic (generalised Faddeev-Volkov) weights and the
two-spin model built from Euler gamma functions. The ``verify`` module
checks their integrability identities numerically; ``lattice`` evaluates
small partition functions and samples the Gibbs measure.
"""

from .errors import (
    BudgetExhausted,
    ConvergenceError,
    DomainError,
    ErgodicityWarning,
    PoleError,
    TooManyInternalSites,
    TruncationWarning,
    YBLabError,
)
from .specfun import EllipticNomes, ModularParam, PrecisionBudget, Regime
from .weights import (
    DualSpin,
    EllipticModel,
    GammaModel,
    HyperbolicModel,
    SpectralParam,
    Spin,
    crossed_edge_weight,
    edge_weight,
    single_spin_weight,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "ConvergenceError",
    "DomainError",
    "DualSpin",
    "EllipticModel",
    "EllipticNomes",
    "ErgodicityWarning",
    "GammaModel",
    "HyperbolicModel",
    "ModularParam",
    "PoleError",
    "PrecisionBudget",
    "Regime",
    "SpectralParam",
    "Spin",
    "TooManyInternalSites",
    "TruncationWarning",
    "YBLabError",
    "crossed_edge_weight",
    "edge_weight",
    "single_spin_weight",
]
