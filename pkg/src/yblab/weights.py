"""Boltzmann weights of the three models.

Each model offers an array-level interface (``log_edge``, ``site``) used by
the verification and lattice code, and the scalar, type-checked functions
:func:`single_spin_weight`, :func:`edge_weight` and :func:`crossed_edge_weight`.

The gamma model's site variable is a :class:`DualSpin` ``(x, n)``; the
other two use :class:`Spin`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import specfun
from .errors import DomainError, KindMismatch, NumericalError, RealityViolation
from .specfun import DEFAULT_BUDGET, EllipticNomes, ModularParam, PrecisionBudget

REALITY_TOL = 1e-9


@dataclass(frozen=True)
class Spin:
    x: float

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise NumericalError(f"non-finite spin {self.x}")


@dataclass(frozen=True)
class DualSpin:
    x: float
    n: int

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise NumericalError(f"non-finite spin {self.x}")
        if int(self.n) != self.n:
            raise ValueError(f"integer component must be integral, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class SpectralParam:
    """Spectral parameter restricted to the physical domain 0 < value < model_eta."""

    value: float
    model_eta: float

    def __post_init__(self):
        if not 0 < self.value < self.model_eta:
            raise DomainError(f"spectral value {self.value} outside (0, {self.model_eta})")

    def crossed(self) -> "SpectralParam":
        return SpectralParam(self.model_eta - self.value, self.model_eta)


def canonical_spin(x: float) -> float:
    """Representative of an elliptic spin in [0, pi)."""
    return float(np.mod(x, math.pi))


def _real_log(logw: np.ndarray, what: str) -> np.ndarray:
    """Real part of a log-weight after checking the phase is 0 mod 2 pi."""
    phase = np.angle(np.exp(1j * np.asarray(logw).imag))
    bad = np.abs(phase) > REALITY_TOL
    if np.any(bad):
        worst = float(np.max(np.abs(phase)))
        raise RealityViolation(f"{what}: phase {worst:.3e} exceeds {REALITY_TOL:.0e}")
    return np.asarray(logw).real


@dataclass(frozen=True)
class EllipticModel:
    nomes: EllipticNomes
    budget: PrecisionBudget = field(default=DEFAULT_BUDGET, compare=False)

    spin_kind = Spin
    name = "elliptic"

    def __post_init__(self):
        if not self.nomes.is_real:
            raise DomainError("the physical elliptic model needs real nomes in (0, 1)")

    @classmethod
    def from_nomes(cls, p: float, q: float) -> "EllipticModel":
        return cls(EllipticNomes(p, q))

    @property
    def eta(self) -> float:
        return self.nomes.eta

    def site(self, x) -> np.ndarray:
        """S(x) = e^{eta/2}/(2 pi) theta_1(2x|p) theta_1(2x|q)."""
        x = np.asarray(x, dtype=float)
        t = (np.asarray(specfun.theta1(2 * x, self.nomes.p, self.budget))
             * np.asarray(specfun.theta1(2 * x, self.nomes.q, self.budget)))
        return math.exp(self.eta / 2) / (2 * math.pi) * t.real

    def log_kappa(self, alpha: float, continuation: bool = False) -> complex:
        return specfun.log_kappa_elliptic(alpha, self.nomes, self.budget, continuation)

    def log_edge(self, alpha: float, x, y, continuation: bool = False) -> np.ndarray:
        """Complex log W_alpha(x, y) (mod 2 pi i)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        ia = 1j * alpha
        args = np.stack([x + y + ia, x - y + ia, x + y - ia, x - y - ia])
        lg = np.asarray(specfun.log_elliptic_gamma(args, self.nomes, self.budget))
        return lg[0] + lg[1] - lg[2] - lg[3] - self.log_kappa(alpha, continuation)


@dataclass(frozen=True)
class HyperbolicModel:
    modular: ModularParam
    budget: PrecisionBudget = field(default=DEFAULT_BUDGET, compare=False)
    method: str = field(default="auto", compare=False)

    spin_kind = Spin
    name = "hyperbolic"

    @classmethod
    def from_b(cls, b: complex) -> "HyperbolicModel":
        return cls(ModularParam(b))

    @property
    def eta(self) -> float:
        return self.modular.eta

    def log_site(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).astype(complex)
        b = self.modular.b
        val = (math.log(2.0) + specfun._log_sinh(np.atleast_1d(2 * math.pi * b * x))
               + specfun._log_sinh(np.atleast_1d(2 * math.pi * x / b)))
        # S >= 0: the phase is 0 or, at x = 0, undefined
        return val.real.reshape(x.shape)

    def site(self, x) -> np.ndarray:
        """S(x) = 2 sinh(2 pi b x) sinh(2 pi x / b)."""
        x = np.asarray(x, dtype=float)
        return np.where(x == 0, 0.0, np.exp(self.log_site(np.where(x == 0, 1.0, x))))

    def log_kappa(self, alpha: float) -> complex:
        return specfun.log_kappa_hyperbolic(alpha, self.modular, self.budget, self.method
                                            if self.method != "product" else "series")

    def log_ratio(self, alpha: float, u) -> np.ndarray:
        """log phi(u + i alpha) - log phi(u - i alpha); W depends on x +- y through it."""
        u = np.asarray(u, dtype=float)
        ia = 1j * alpha
        method = self.method if self.method != "series" else "product"
        lp = np.asarray(specfun.log_ncqdl(np.stack([u + ia, u - ia]), self.modular, self.budget, method))
        return lp[0] - lp[1]

    def log_edge(self, alpha: float, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        lr = self.log_ratio(alpha, np.stack([x + y, x - y]))
        return lr[0] + lr[1] + 4 * math.pi * alpha * x - self.log_kappa(alpha)


@dataclass(frozen=True)
class GammaModel:
    """The two-spin model with Euler-gamma weights; crossing parameter 1."""

    spin_kind = DualSpin
    name = "gamma"
    eta = 1.0

    def site(self, x, n) -> np.ndarray:
        """S(x, n) = (x^2 + n^2) / (2 pi)."""
        x = np.asarray(x, dtype=float)
        n = np.asarray(n, dtype=float)
        return (x * x + n * n) / (2 * math.pi)

    def log_pair(self, beta: float, s, k) -> np.ndarray:
        """Part of log W depending on one combination (s, k) = (x + y, n + m) or (x - y, m - n).

        log Gamma((1 - beta)/2 +- (i s - k)/2) - log Gamma((1 + beta)/2 +- (i s + k)/2),
        each written as a gamma_pm pair.
        """
        s, k = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(k, dtype=float))
        c = (1j * s - k) / 2
        d = (1j * s + k) / 2
        args = np.stack([(1 - beta) / 2 + c, (1 - beta) / 2 - c, (1 + beta) / 2 + d, (1 + beta) / 2 - d])
        lg = np.asarray(specfun.log_gamma(args))
        return (lg[0] + lg[1]) - (lg[2] + lg[3])

    def log_prefactor(self, beta: float) -> complex:
        pre = np.asarray(specfun.log_gamma(np.array([(1 + beta) / 2, (1 - beta) / 2]))).astype(complex)
        return complex(pre[0] - pre[1])

    def log_edge(self, beta: float, x, n, y, m) -> np.ndarray:
        """Complex log W_beta((x, n) | (y, m)).

        The eight gamma factors are grouped as Gamma(a +- c) pairs.
        """
        x, n, y, m = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(n, dtype=float),
            np.asarray(y, dtype=float), np.asarray(m, dtype=float))
        lp = self.log_pair(beta, np.stack([x + y, x - y]), np.stack([m + n, m - n]))
        return self.log_prefactor(beta) + lp[0] + lp[1]


Model = Union[EllipticModel, HyperbolicModel, GammaModel]


def _spectral_value(m: Model, a) -> float:
    if isinstance(a, SpectralParam):
        if abs(a.model_eta - m.eta) > 1e-12 * max(1.0, m.eta):
            raise DomainError(f"spectral parameter built for eta = {a.model_eta}, model has {m.eta}")
        return a.value
    return float(a)


def _check_kind(m: Model, *spins):
    for s in spins:
        if not isinstance(s, m.spin_kind):
            raise KindMismatch(f"{m.name} model expects {m.spin_kind.__name__}, got {type(s).__name__}")


def single_spin_weight(m: Model, s) -> float:
    _check_kind(m, s)
    if isinstance(m, GammaModel):
        return float(m.site(s.x, s.n))
    return float(m.site(s.x))


def log_edge_weight(m: Model, a, s1, s2) -> float:
    """Real log of the edge weight; raises RealityViolation if it is not positive."""
    _check_kind(m, s1, s2)
    alpha = _spectral_value(m, a)
    if isinstance(m, GammaModel):
        lw = m.log_edge(alpha, s1.x, s1.n, s2.x, s2.n)
    else:
        lw = m.log_edge(alpha, s1.x, s2.x)
    return float(_real_log(lw, f"{m.name} edge weight"))


def edge_weight(m: Model, a, s1, s2) -> float:
    """W_a(s1, s2), real and strictly positive."""
    return math.exp(log_edge_weight(m, a, s1, s2))


def crossed_edge_weight(m: Model, a, s1, s2) -> float:
    """W-bar_a(s1, s2) = W_{eta - a}(s1, s2)."""
    alpha = _spectral_value(m, a)
    return edge_weight(m, m.eta - alpha, s1, s2)


def real_log_edge(m: Model, alpha: float, *coords) -> np.ndarray:
    """Vectorised real log-weight with the reality check applied."""
    return _real_log(m.log_edge(alpha, *coords), f"{m.name} edge weight")
