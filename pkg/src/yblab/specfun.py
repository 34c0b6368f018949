"""Special functions entering the Boltzmann weights.

All kernels are vectorised over their first argument and return complex
numpy values (a Python scalar in, a 0-d result out, unwrapped to ``complex``).
Logarithmic variants are provided wherever the weights need them; those are
defined modulo ``2*pi*i`` unless stated otherwise.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContourError,
    ConvergenceError,
    DomainError,
    NomeDomainError,
    NumericalError,
    PoleError,
    StripError,
)

LOG_PI = math.log(math.pi)
LOG_2PI_HALF = 0.5 * math.log(2.0 * math.pi)

# Chunk size (number of complex entries) for outer-product evaluations.
_CHUNK = 1 << 21
_GROUP = 16


@dataclass(frozen=True)
class PrecisionBudget:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-16
    max_terms: int = 200_000
    max_refinements: int = 40

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")

    def refined(self, factor: float = 1e-2) -> "PrecisionBudget":
        """Tighter copy used by refined-budget oracles."""
        return PrecisionBudget(
            rel_tol=self.rel_tol * factor,
            abs_tol=self.abs_tol * factor,
            max_terms=self.max_terms * 4,
            max_refinements=self.max_refinements + 10,
        )


DEFAULT_BUDGET = PrecisionBudget()


def _as_complex(z) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    if np.isnan(arr).any():
        raise NumericalError("NaN argument")
    if np.isinf(arr).any():
        raise NumericalError("infinite argument")
    return arr


def _unwrap(arr: np.ndarray):
    return complex(arr) if arr.ndim == 0 else arr


# ---------------------------------------------------------------------------
# log Gamma
# ---------------------------------------------------------------------------

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    # valid for Re z >= 1/2
    zm = z - 1.0
    a = np.full(zm.shape, _LANCZOS_COEF[0], dtype=complex)
    for i in range(1, len(_LANCZOS_COEF)):
        a = a + _LANCZOS_COEF[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return LOG_2PI_HALF + (zm + 0.5) * np.log(t) - t + np.log(a)


def _log_sinpi(z: np.ndarray) -> np.ndarray:
    """Principal log of sin(pi z), stable for large |Im z|."""
    # sin(pi z) has period 2 in Re z
    zr = z - 2.0 * np.round(z.real / 2.0)
    small = np.abs(zr.imag) < 15.0
    out = np.empty(zr.shape, dtype=complex)
    if small.any():
        out[small] = np.log(np.sin(np.pi * zr[small]))
    big = ~small
    if big.any():
        w = zr[big]
        flip = w.imag < 0
        w = np.where(flip, np.conj(w), w)
        # Im w > 0: sin(pi w) = (i/2) e^{-i pi w} (1 - e^{2 i pi w})
        val = np.log(0.5j) - 1j * np.pi * w + np.log1p(-np.exp(2j * np.pi * w))
        im = np.angle(np.exp(1j * val.imag))
        val = val.real + 1j * im
        out[big] = np.where(flip, np.conj(val), val)
    return out


def log_gamma(z):
    """Principal branch of log Gamma(z).

    Lanczos approximation for Re z >= 1/2, reflection with an explicit
    branch correction otherwise. Raises PoleError at non-positive integers.
    """
    z = _as_complex(z)
    zz = np.atleast_1d(z)
    pole = (zz.imag == 0) & (zz.real <= 0) & (zz.real == np.round(zz.real))
    if pole.any():
        raise PoleError(f"log_gamma pole at {zz[pole][0]}")
    out = np.empty(zz.shape, dtype=complex)
    right = zz.real >= 0.5
    if right.any():
        out[right] = _lanczos_log_gamma(zz[right])
    left = ~right
    if left.any():
        w = zz[left]
        branch = np.copysign(2.0 * np.pi, w.imag) * np.floor(0.5 * w.real + 0.25)
        out[left] = (LOG_PI + 1j * branch) - _log_sinpi(w) - _lanczos_log_gamma(1.0 - w)
    return _unwrap(out.reshape(z.shape))


def gamma_pm_log(a, c):
    """log[Gamma(a + c) Gamma(a - c)]; exactly symmetric in c -> -c."""
    a = _as_complex(a)
    c = _as_complex(c)
    return _unwrap(np.asarray(log_gamma(a + c)) + np.asarray(log_gamma(a - c)))


# ---------------------------------------------------------------------------
# Jacobi theta_1
# ---------------------------------------------------------------------------

def log_theta1(z, q, budget: PrecisionBudget = DEFAULT_BUDGET):
    """log theta_1(z | q) from the triple product (mod 2 pi i).

    2 q^{1/4} sin z prod_n (1 - q^{2n})(1 - 2 q^{2n} cos 2z + q^{4n}); no
    cancellation as |q| -> 1, where the series loses all digits.
    """
    z = _as_complex(z)
    q = complex(q)
    if not 0 < abs(q) < 1:
        raise NomeDomainError(f"|q| = {abs(q)} outside (0, 1)")
    logq = cmath.log(q)
    zz = np.atleast_1d(z)
    ymax = float(np.max(np.abs(zz.imag))) if zz.size else 0.0
    # factor deviation from 1 ~ |q|^{2n} e^{2 ymax}
    nmax = int(math.ceil((math.log(budget.abs_tol * 1e-2) - 2 * ymax) / (2 * logq.real))) + 1
    if nmax > budget.max_terms:
        raise ConvergenceError(f"theta1 product needs {nmax} factors")
    n = np.arange(1, max(nmax, 1) + 1)
    q2n = np.exp(2 * n * logq)
    e2 = np.exp(2j * zz)[..., None]
    # 1 - 2 q^{2n} cos 2z + q^{4n} = (1 - q^{2n} e^{2iz})(1 - q^{2n} e^{-2iz})
    acc = (np.log1p(-q2n * e2) + np.log1p(-q2n / e2)).sum(axis=-1)
    acc = acc + np.sum(np.log1p(-q2n)) + math.log(2.0) + logq / 4 + np.log(np.sin(zz))
    return _unwrap(acc.reshape(z.shape))


def theta1(z, q, budget: PrecisionBudget = DEFAULT_BUDGET):
    """Jacobi theta_1(z | q) = 2 sum_n (-1)^n q^{(n+1/2)^2} sin((2n+1) z).

    For |q| > 0.6 the product form is used instead of the series.
    """
    z = _as_complex(z)
    q = complex(q)
    if not abs(q) < 1:
        raise NomeDomainError(f"|q| = {abs(q)} >= 1")
    if q == 0:
        return _unwrap(np.zeros(z.shape, dtype=complex))
    if abs(q) > 0.6:
        zz = np.atleast_1d(z)
        zero = np.sin(zz) == 0
        val = np.exp(np.atleast_1d(log_theta1(np.where(zero, 1.0, zz), q, budget)))
        return _unwrap(np.where(zero, 0.0, val).reshape(z.shape))
    logq = cmath.log(q)
    zz = np.atleast_1d(z)
    ymax = float(np.max(np.abs(zz.imag))) if zz.size else 0.0
    # term magnitude ~ |q|^{(n+1/2)^2} e^{(2n+1) ymax}
    total = np.zeros(zz.shape, dtype=complex)
    n = 0
    while True:
        k = n + 0.5
        term = 2.0 * (-1) ** n * np.exp(k * k * logq) * np.sin((2 * n + 1) * zz)
        total = total + term
        n += 1
        bound = math.exp((n + 0.5) ** 2 * logq.real + (2 * n + 1) * ymax)
        scale = max(float(np.max(np.abs(total))), 1e-300)
        if n >= 4 and bound < budget.abs_tol * scale:
            break
        if bound == 0.0 and n >= 4:
            break
        if n > budget.max_terms:
            raise ConvergenceError("theta1 series did not converge")
    return _unwrap(total.reshape(z.shape))


# ---------------------------------------------------------------------------
# Elliptic nomes and the elliptic gamma function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticNomes:
    """Nomes p = e^{i pi sigma}, q = e^{i pi tau} with e^{-2 eta} = p q."""

    p: complex
    q: complex

    def __post_init__(self):
        p, q = complex(self.p), complex(self.q)
        if not (0 < abs(p) < 1 and 0 < abs(q) < 1):
            raise NomeDomainError(f"nomes must satisfy 0 < |p|, |q| < 1, got {p}, {q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_moduli(cls, tau: complex, sigma: complex) -> "EllipticNomes":
        return cls(cmath.exp(1j * math.pi * sigma), cmath.exp(1j * math.pi * tau))

    @property
    def tau(self) -> complex:
        return cmath.log(self.q) / (1j * math.pi)

    @property
    def sigma(self) -> complex:
        return cmath.log(self.p) / (1j * math.pi)

    @property
    def is_real(self) -> bool:
        return (self.p.imag == 0 and self.q.imag == 0
                and self.p.real > 0 and self.q.real > 0)

    @property
    def eta(self):
        val = -0.5 * (cmath.log(self.p) + cmath.log(self.q))
        return val.real if self.is_real else val


def _product_terms(nomes: EllipticNomes, cutoff: float, max_terms: int) -> np.ndarray:
    """Values q^{2j+1} p^{2k+1} with modulus above cutoff."""
    lp, lq = math.log(abs(nomes.p)), math.log(abs(nomes.q))
    lc = math.log(cutoff)
    jmax = max(0, int(math.ceil((lc - lp - lq) / (2 * lq))))
    kmax = max(0, int(math.ceil((lc - lp - lq) / (2 * lp))))
    if (jmax + 1) * (kmax + 1) > max_terms * 50:
        raise ConvergenceError("elliptic gamma product needs too many factors")
    j = np.arange(jmax + 1)
    k = np.arange(kmax + 1)
    mod = (2 * j[:, None] + 1) * lq + (2 * k[None, :] + 1) * lp
    keep = mod > lc
    qp = (nomes.q ** (2 * j + 1))[:, None] * (nomes.p ** (2 * k + 1))[None, :]
    return qp[keep]


def _log_elliptic_gamma_product(z: np.ndarray, nomes: EllipticNomes, budget) -> np.ndarray:
    zz = z.ravel()
    if zz.size == 0:
        return z.astype(complex)
    ymax = float(np.max(np.abs(zz.imag)))
    cutoff = max(budget.abs_tol, 1e-300) * 1e-2 * math.exp(-2 * ymax)
    terms = _product_terms(nomes, cutoff, budget.max_terms)
    out = np.empty(zz.shape, dtype=complex)
    step = max(1, _CHUNK // max(terms.size, 1))
    # each factor is at most ~e^{2 ymax}; keep group products finite
    group = max(1, min(_GROUP, int(300.0 / (2.0 * ymax + 1.0))))
    for s in range(0, zz.size, step):
        zc = zz[s:s + step]
        up = 1.0 - np.exp(2j * zc)[:, None] * terms[None, :]
        dn = 1.0 - np.exp(-2j * zc)[:, None] * terms[None, :]
        if np.min(np.abs(dn)) < 1e-14:
            raise PoleError("elliptic gamma evaluated at a pole")
        if np.min(np.abs(up)) < 1e-14:
            raise PoleError("elliptic gamma evaluated at a zero (log undefined)")
        # one log per group of factors; groups are short enough not to overflow
        ratio = up / dn
        acc = np.zeros(zc.shape, dtype=complex)
        for g in range(0, terms.size, group):
            acc += np.log(np.prod(ratio[:, g:g + group], axis=1))
        out[s:s + step] = acc
    return out.reshape(z.shape)


def _log_elliptic_gamma_sum(z: np.ndarray, nomes: EllipticNomes, budget) -> np.ndarray:
    eta = complex(nomes.eta)
    zz = z.ravel()
    if zz.size == 0:
        return z.astype(complex)
    ymax = float(np.max(np.abs(zz.imag)))
    if not ymax < eta.real:
        raise StripError(f"sum form needs |Im z| < Re eta = {eta.real}, got {ymax}")
    rate = 2.0 * (eta.real - ymax)
    nmax = int(math.ceil((-math.log(budget.abs_tol * 1e-2)) / rate)) + 2
    if nmax > budget.max_terms:
        raise ConvergenceError(f"sum form needs {nmax} terms")
    n = np.arange(1, nmax + 1)
    p, q = nomes.p, nomes.q
    # 1/(n (p^n - p^-n)(q^n - q^-n)) = (pq)^n / (n (1 - p^{2n})(1 - q^{2n}))
    logpq = cmath.log(p) + cmath.log(q)
    denom = n * (1.0 - p ** (2 * n)) * (1.0 - q ** (2 * n))
    out = np.empty(zz.shape, dtype=complex)
    step = max(1, _CHUNK // nmax)
    for s in range(0, zz.size, step):
        zc = zz[s:s + step][:, None]
        # (u^{-n} - u^{n}) (pq)^n with u = e^{2iz}
        a = np.exp(n * (logpq - 2j * zc))
        b = np.exp(n * (logpq + 2j * zc))
        out[s:s + step] = np.sum((a - b) / denom, axis=1)
    return out.reshape(z.shape)


def log_elliptic_gamma(z, nomes: EllipticNomes, budget: PrecisionBudget = DEFAULT_BUDGET,
                       method: str = "product"):
    """log Phi(z), modulo 2 pi i for the product path."""
    z = _as_complex(z)
    if method == "product":
        out = _log_elliptic_gamma_product(np.atleast_1d(z), nomes, budget)
    elif method == "sum":
        out = _log_elliptic_gamma_sum(np.atleast_1d(z), nomes, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _unwrap(out.reshape(z.shape))


def elliptic_gamma(z, nomes: EllipticNomes, budget: PrecisionBudget = DEFAULT_BUDGET,
                   method: str = "product"):
    """Elliptic gamma function Phi(z) by the double product or the exponential sum."""
    return _unwrap(np.exp(np.asarray(log_elliptic_gamma(z, nomes, budget, method))))


# ---------------------------------------------------------------------------
# Modular parameter and the non-compact quantum dilogarithm
# ---------------------------------------------------------------------------

class Regime(enum.Enum):
    RealPositive = "real"
    UnitCircle = "unit"


@dataclass(frozen=True)
class ModularParam:
    """Parameter b with b > 0 or |b| = 1, Im b^2 > 0; eta = (b + 1/b)/2."""

    b: complex

    def __post_init__(self):
        b = complex(self.b)
        object.__setattr__(self, "b", b)
        self.regime  # validates

    @classmethod
    def unit(cls, theta: float) -> "ModularParam":
        """b = e^{i theta}, 0 < theta < pi/2."""
        return cls(cmath.exp(1j * theta))

    @classmethod
    def near_i(cls, delta: float) -> "ModularParam":
        """b = e^{i(pi/2 - delta)}; eta = sin(delta)."""
        return cls.unit(math.pi / 2 - delta)

    @property
    def regime(self) -> Regime:
        b = self.b
        if b.imag == 0 and b.real > 0:
            return Regime.RealPositive
        if abs(abs(b) - 1.0) < 1e-12 and (b * b).imag > 0:
            return Regime.UnitCircle
        raise DomainError(f"b = {b} is in neither regime (b > 0, or |b| = 1 with Im b^2 > 0)")

    @property
    def eta(self):
        val = 0.5 * (self.b + 1.0 / self.b)
        if self.regime is Regime.RealPositive:
            return val.real
        return val.real  # |b| = 1: eta = Re b, exactly real

    @property
    def c_b(self) -> complex:
        """(b^2 + b^-2), the combination entering the inversion phase."""
        return self.b ** 2 + self.b ** -2


def _log_sinh(w: np.ndarray) -> np.ndarray:
    """log sinh(w) modulo 2 pi i, without overflow."""
    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w.real) < 1.0
    if small.any():
        out[small] = np.log(np.sinh(w[small]))
    big = ~small
    if big.any():
        v = w[big]
        s = np.where(v.real > 0, 1.0, -1.0)
        av = s * v
        val = av - math.log(2.0) + np.log1p(-np.exp(-2.0 * av))
        out[big] = np.where(s > 0, val, val + 1j * np.pi)
    return out


def _log_cosh(w: np.ndarray) -> np.ndarray:
    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w.real) < 1.0
    if small.any():
        out[small] = np.log(np.cosh(w[small]))
    big = ~small
    if big.any():
        v = w[big]
        av = np.where(v.real > 0, v, -v)
        out[big] = av - math.log(2.0) + np.log1p(np.exp(-2.0 * av))
    return out


def _trapezoid_line(logf, delta: float, h: float, rate: float, budget, label: str):
    """Trapezoid sum of exp(logf(y)) over y = t + i delta, t in h*Z, |t| <= T.

    T is doubled until the added shell changes the sum by less than abs_tol.
    ``logf`` maps a 1-d array of nodes to a (batch, nodes) array.
    """
    T = max(16.0 * h, 30.0 / max(rate, 1e-300))
    kmax = int(math.ceil(T / h))
    k = np.arange(-kmax, kmax + 1)
    total = np.sum(np.exp(logf(k * h + 1j * delta)), axis=-1) * h
    for _ in range(budget.max_refinements):
        knew = np.concatenate([np.arange(-2 * kmax, -kmax), np.arange(kmax + 1, 2 * kmax + 1)])
        if knew.size > budget.max_terms * 10:
            break
        inc = np.sum(np.exp(logf(knew * h + 1j * delta)), axis=-1) * h
        total = total + inc
        kmax *= 2
        if np.max(np.abs(inc)) <= budget.abs_tol:
            return total, kmax * h
    raise ConvergenceError(f"{label}: contour truncation did not converge")


def _log_ncqdl_integral(z: np.ndarray, bp: ModularParam, budget) -> np.ndarray:
    b = bp.b
    eta = bp.eta
    zz = z.ravel()
    if zz.size == 0:
        return z.astype(complex)
    vmax = float(np.max(np.abs(zz.imag)))
    if not vmax < eta:
        raise StripError(f"integral path needs |Im z| < Re eta = {eta}, got {vmax}")
    delta = 0.5 * math.pi * min(b.real, (1.0 / b).real)
    if delta < 1e-3:
        raise ContourError(f"shift {delta} cannot separate the poles for b = {b}")
    # reflect to Re z <= 0, where e^{-2iyz} is bounded on the upper line
    flip = zz.real > 0
    w = np.where(flip, -zz, zz)
    umax = float(np.max(np.abs(w.real)))
    h = min(delta / 2.0, 2.0 * math.pi * delta / (45.0 + 2.0 * umax * delta))
    rate = 2.0 * (eta - vmax)

    out = np.empty(zz.shape, dtype=complex)
    nodes_budget = max(1, _CHUNK // 4096)
    for s in range(0, zz.size, nodes_budget):
        wc = w[s:s + nodes_budget]

        def logf(y, wc=wc):
            base = -(np.log(y) + _log_sinh(y * b) + _log_sinh(y / b)) - math.log(4.0)
            return -2j * y[None, :] * wc[:, None] + base[None, :]

        val, _ = _trapezoid_line(logf, delta, h, rate, budget, "ncqdl")
        out[s:s + nodes_budget] = val
    phase = 1j * math.pi * zz ** 2 + 1j * math.pi * bp.c_b / 12.0
    out = np.where(flip, phase - out, out)
    return out.reshape(z.shape)


def _qpoch_log(logx: np.ndarray, logq: complex, budget) -> np.ndarray:
    """sum_k log(1 + e^{logx} q^{2k}) over k >= 0, i.e. log(-x; q^2)_inf."""
    lq = logq.real
    if not lq < 0:
        raise ConvergenceError("q-Pochhammer needs |q| < 1")
    xmax = float(np.max(logx.real))
    kmax = int(math.ceil((math.log(budget.abs_tol * 1e-2) - max(xmax, 0.0)) / (2 * lq))) + 1
    kmax = max(kmax, int(math.ceil(-xmax / (2 * lq))) + 1 if xmax > 0 else kmax)
    if kmax > budget.max_terms:
        raise ConvergenceError(f"q-Pochhammer needs {kmax} factors")
    k = np.arange(kmax + 1)
    out = np.empty(logx.shape, dtype=complex)
    step = max(1, _CHUNK // (kmax + 1))
    flat = logx.ravel()
    res = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, step):
        lx = flat[s:s + step][:, None]
        res[s:s + step] = np.sum(np.log1p(np.exp(lx + 2 * k[None, :] * logq)), axis=1)
    out[...] = res.reshape(logx.shape)
    return out


def _log_ncqdl_product(z: np.ndarray, bp: ModularParam, budget) -> np.ndarray:
    b = bp.b
    if not (b * b).imag > 0:
        raise DomainError("product representation needs Im b^2 > 0")
    logq = 1j * math.pi * b * b          # q = e^{i pi b^2}
    logqt = -1j * math.pi / (b * b)      # q~ = e^{-i pi b^-2}
    num = _qpoch_log(logq + 2 * math.pi * b * z, logq, budget)
    den = _qpoch_log(logqt + 2 * math.pi * z / b, logqt, budget)
    return num - den


def log_ncqdl(z, b: ModularParam, budget: PrecisionBudget = DEFAULT_BUDGET, method: str = "auto"):
    """log phi(z), modulo 2 pi i.

    ``method`` is ``"integral"`` (shifted-contour trapezoid), ``"product"``
    (q-Pochhammer ratio, needs Im b^2 > 0) or ``"auto"``.
    """
    z = _as_complex(z)
    if method == "auto":
        method = "product" if b.regime is Regime.UnitCircle else "integral"
    zz = np.atleast_1d(z)
    if method == "integral":
        out = _log_ncqdl_integral(zz, b, budget)
    elif method == "product":
        out = _log_ncqdl_product(zz, b, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _unwrap(out.reshape(z.shape))


def ncqdl(z, b: ModularParam, budget: PrecisionBudget = DEFAULT_BUDGET, method: str = "auto"):
    """Non-compact quantum dilogarithm phi(z)."""
    return _unwrap(np.exp(np.asarray(log_ncqdl(z, b, budget, method))))


# ---------------------------------------------------------------------------
# Normalisation factors
# ---------------------------------------------------------------------------

def _log_kappa_elliptic_series(alpha: float, p: float, q: float, eta: float, budget) -> float:
    rate = 4.0 * (eta - abs(alpha))
    nmax = int(math.ceil(-math.log(budget.abs_tol * 1e-2) / rate)) + 2
    if nmax > budget.max_terms:
        raise ConvergenceError(f"kappa series needs {nmax} terms")
    n = np.arange(1, nmax + 1, dtype=float)
    r = (p * q) ** 2
    denom = n * (1.0 - p ** (2 * n)) * (1.0 - q ** (2 * n)) * (1.0 + r ** n)
    num = np.exp(-4.0 * (eta - alpha) * n) - np.exp(-4.0 * (eta + alpha) * n)
    return float(np.sum(num / denom))


def _log_kappa_elliptic_product(alpha: float, p: float, q: float, budget) -> complex:
    # prod_{j,k,l} [(1 - e^{-4a} X)/(1 - e^{4a} X)]^{(-1)^l},  X = p^{2j+1} q^{2k+1} (pq)^{2l+1}
    lp, lq = math.log(p), math.log(q)
    lc = math.log(budget.abs_tol * 1e-2) - 4 * abs(alpha)
    total = 0j
    l = 0
    while True:
        base = (2 * l + 1) * (lp + lq)
        if base + lp + lq < lc:
            break
        jmax = int(math.ceil((lc - base - lp - lq) / (2 * lq))) + 1
        kmax = int(math.ceil((lc - base - lp - lq) / (2 * lp))) + 1
        j = np.arange(max(jmax, 1))
        k = np.arange(max(kmax, 1))
        logx = base + (2 * j[:, None] + 1) * lq + (2 * k[None, :] + 1) * lp
        x = np.exp(logx[logx > lc])
        plus = 1.0 - np.exp(4 * alpha) * x
        minus = 1.0 - np.exp(-4 * alpha) * x
        if np.min(np.abs(plus)) < 1e-14 or np.min(np.abs(minus)) < 1e-14:
            raise PoleError(f"kappa has a zero or pole at alpha = {alpha}")
        contrib = np.sum(np.log(minus.astype(complex)) - np.log(plus.astype(complex)))
        total += contrib if l % 2 == 0 else -contrib
        l += 1
        if l > budget.max_terms:
            raise ConvergenceError("kappa product did not converge")
    return total


def log_kappa_elliptic(alpha: float, nomes: EllipticNomes,
                       budget: PrecisionBudget = DEFAULT_BUDGET, continuation: bool = False) -> complex:
    """log kappa(alpha) for real nomes; imaginary part is 0 or pi (sign of kappa).

    The defining bilateral series converges for |alpha| < eta. With
    ``continuation=True`` other real alpha are reached through the equivalent
    triple product.
    """
    alpha = float(alpha)
    if math.isnan(alpha):
        raise NumericalError("NaN spectral parameter")
    if not nomes.is_real:
        raise DomainError("kappa_elliptic needs real nomes in (0, 1)")
    p, q, eta = nomes.p.real, nomes.q.real, nomes.eta
    if abs(alpha) < eta:
        return complex(_log_kappa_elliptic_series(alpha, p, q, eta, budget))
    if not continuation:
        raise DomainError(f"alpha = {alpha} outside |alpha| < eta = {eta}")
    val = _log_kappa_elliptic_product(alpha, p, q, budget)
    im = math.pi if abs(abs(val.imag / math.pi) % 2 - 1) < 0.5 else 0.0
    return complex(val.real, im)


def kappa_elliptic(alpha: float, nomes: EllipticNomes,
                   budget: PrecisionBudget = DEFAULT_BUDGET, continuation: bool = False) -> float:
    """Normalisation kappa(alpha) of the elliptic edge weight (real)."""
    lk = log_kappa_elliptic(alpha, nomes, budget, continuation)
    sign = -1.0 if lk.imag else 1.0
    return sign * math.exp(lk.real)


def _log_kappa_hyperbolic_integral(alpha: complex, bp: ModularParam, budget) -> complex:
    b, eta = bp.b, bp.eta
    gap = min(math.pi * min(b.real, (1.0 / b).real), math.pi / (4.0 * eta))
    delta = 0.5 * gap
    if delta < 1e-3:
        raise ContourError(f"contour shift {delta} too small for b = {b}")
    rate = 4.0 * (eta - abs(alpha.real))
    h = min(delta / 2.0, 2.0 * math.pi * delta / (45.0 + 4.0 * abs(alpha.imag) * delta))
    a = np.array([alpha])

    def logf(y):
        base = -(np.log(y) + _log_sinh(y * b) + _log_sinh(y / b) + _log_cosh(2 * eta * y)) - math.log(8.0)
        return 4.0 * y[None, :] * a[:, None] + base[None, :]

    val, _ = _trapezoid_line(logf, delta, h, rate, budget, "kappa_hyperbolic")
    return complex(val[0])


def _log_kappa_hyperbolic_series(alpha: complex, bp: ModularParam, budget) -> complex:
    b, eta = bp.b, bp.eta
    if not (b * b).imag > 0:
        raise DomainError("residue series needs Im b^2 > 0")
    logq = 1j * math.pi * b * b
    logqt = -1j * math.pi / (b * b)
    # (x q^2; q^4)_inf written as (-y; (q^2)^2)_inf with y = -x q^2
    x1 = np.array([4j * math.pi * alpha * b + 2 * logq + 1j * math.pi])
    x2 = np.array([4j * math.pi * alpha / b + 2 * logqt + 1j * math.pi])
    part = complex(_qpoch_log(x1, 2 * logq, budget)[0] - _qpoch_log(x2, 2 * logqt, budget)[0])
    # residues at the zeros of cosh(2 y eta)
    tan_theta = abs(b.imag / b.real) if b.real != 0 else float("inf")
    decay = math.pi * tan_theta if b.imag != 0 else 0.0
    growth = 2 * math.pi * abs(alpha.imag) / eta
    if decay - growth <= 0:
        raise ConvergenceError("cosh-pole residue series does not converge for this b")
    jmax = int(math.ceil(-math.log(budget.abs_tol * 1e-2) / (decay - growth))) + 2
    if jmax > budget.max_terms:
        raise ConvergenceError(f"kappa residue series needs {jmax} terms")
    j = np.arange(jmax) + 0.5
    logterm = (2j * math.pi * j * alpha / eta - np.log(j)
               + _log_csc(math.pi * j * b / (2 * eta)) + _log_csc(math.pi * j / (2 * eta * b)))
    sign = (-1.0) ** np.arange(jmax)
    part += 0.25j * complex(np.sum(sign * np.exp(logterm)))
    return part


def _log_csc(w: np.ndarray) -> np.ndarray:
    """log(1/sin w), without overflow for large |Im w|."""
    w = np.asarray(w, dtype=complex)
    up = w.imag >= 0
    e = np.where(up, 1j * w, -1j * w)   # Re e <= 0
    c = np.where(up, -2j, 2j)
    return np.log(c) + e - np.log1p(-np.exp(2 * e))


def log_kappa_hyperbolic(alpha, b: ModularParam, budget: PrecisionBudget = DEFAULT_BUDGET,
                         method: str = "auto") -> complex:
    """log kappa(alpha) of the hyperbolic edge weight (mod 2 pi i).

    ``method``: ``"integral"`` (shifted contour), ``"series"`` (residue
    expansion, needs Im b^2 > 0) or ``"auto"``.
    """
    alpha = complex(alpha)
    if cmath.isnan(alpha):
        raise NumericalError("NaN spectral parameter")
    eta = b.eta
    if not abs(alpha.real) < eta:
        raise DomainError(f"kappa_hyperbolic needs |Re alpha| < eta = {eta}, got {alpha}")
    if method == "auto":
        method = "series" if b.regime is Regime.UnitCircle else "integral"
    if method == "integral":
        core = _log_kappa_hyperbolic_integral(alpha, b, budget)
    elif method == "series":
        core = _log_kappa_hyperbolic_series(alpha, b, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return core + 1j * math.pi * alpha ** 2 - 1j * math.pi * eta ** 2 / 3.0 + 1j * math.pi / 24.0


def kappa_hyperbolic(alpha, b: ModularParam, budget: PrecisionBudget = DEFAULT_BUDGET,
                     method: str = "auto") -> complex:
    return cmath.exp(log_kappa_hyperbolic(alpha, b, budget, method))
