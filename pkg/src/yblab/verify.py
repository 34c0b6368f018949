"""Numerical checks of the star-triangle, inversion and limit identities."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .errors import BudgetExhausted, ConvergenceError, DomainError, RealityViolation, TailNotDecaying
from .quad import Interval, TailPolicy, integrate_finite, integrate_line, sum_bilateral
from .specfun import EllipticNomes, ModularParam, PrecisionBudget
from .weights import (
    DualSpin,
    EllipticModel,
    GammaModel,
    HyperbolicModel,
    Model,
    Spin,
    real_log_edge,
)


@dataclass(frozen=True)
class StarConfig:
    """Outer spins (x1, x2, x3) and spectral values (a1, a2, a3) summing to eta."""

    outer: tuple
    spectral: tuple

    def __post_init__(self):
        object.__setattr__(self, "outer", tuple(self.outer))
        object.__setattr__(self, "spectral", tuple(float(a) for a in self.spectral))
        if len(self.outer) != 3 or len(self.spectral) != 3:
            raise ValueError("a star has exactly three outer spins and three spectral values")

    def validate(self, m: Model, tol: float = 1e-12):
        for s in self.outer:
            if not isinstance(s, m.spin_kind):
                raise DomainError(f"{m.name} star needs {m.spin_kind.__name__} spins")
        if abs(sum(self.spectral) - m.eta) > tol * max(1.0, m.eta):
            raise DomainError(f"spectral values sum to {sum(self.spectral)}, expected {m.eta}")
        if not all(0 < a < m.eta for a in self.spectral):
            raise DomainError(f"spectral values {self.spectral} outside (0, {m.eta})")

    def relabeled(self, perm: Sequence[int]) -> "StarConfig":
        return StarConfig(tuple(self.outer[i] for i in perm), tuple(self.spectral[i] for i in perm))

    def to_dict(self) -> dict:
        return {"outer": [asdict(s) for s in self.outer], "spectral": list(self.spectral)}


@dataclass
class VerificationReport:
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    r_factor: float
    budget_used: dict
    passed: bool
    model: str = ""
    config: dict = field(default_factory=dict)
    note: str = ""

    @classmethod
    def build(cls, lhs, rhs, tol, budget_used, model="", config=None, note=""):
        lhs, rhs = float(lhs), float(rhs)
        absr = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        relr = absr / scale if scale > 0 else 0.0
        r = lhs / rhs if rhs != 0 else float("inf")
        ok = bool(relr <= tol) and not note
        return cls(lhs, rhs, absr, relr, r, budget_used, ok, model, config or {}, note)

    def to_dict(self) -> dict:
        return asdict(self)


def _triangle_log(m: Model, cfg: StarConfig) -> float:
    s1, s2, s3 = cfg.outer
    a1, a2, a3 = cfg.spectral
    if isinstance(m, GammaModel):
        pairs = [(a1, s2, s3), (a2, s1, s3), (a3, s2, s1)]
        return float(sum(real_log_edge(m, a, u.x, u.n, v.x, v.n) for a, u, v in pairs))
    pairs = [(a1, s2, s3), (a2, s1, s3), (a3, s2, s1)]
    return float(sum(real_log_edge(m, a, u.x, v.x) for a, u, v in pairs))


def star_integrand(m: Model, cfg: StarConfig, shift: float = 0.0) -> Callable:
    """Integrand of the star side, divided by exp(shift).

    Elliptic and hyperbolic: f(x0). Gamma: f(x0, n0) with n0 an array,
    returning shape (len(n0), len(x0)).
    """
    eta = m.eta
    crossed = [eta - a for a in cfg.spectral]
    if isinstance(m, GammaModel):
        def f(x0, n0):
            x0 = np.asarray(x0, dtype=float)[None, :]
            n0 = np.asarray(n0, dtype=float)[:, None]
            acc = np.log(np.maximum(m.site(x0, n0), 1e-300)) - shift
            for a, s in zip(crossed, cfg.outer):
                acc = acc + real_log_edge(m, a, s.x, s.n, x0, n0)
            return np.where(m.site(x0, n0) > 0, np.exp(acc), 0.0)
        return f
    if isinstance(m, HyperbolicModel):
        def f(x0):
            x0 = np.asarray(x0, dtype=float)
            acc = m.log_site(np.where(x0 == 0, 1e-300, x0)) - shift
            for a, s in zip(crossed, cfg.outer):
                acc = acc + real_log_edge(m, a, s.x, x0)
            return np.where(x0 == 0, 0.0, np.exp(acc))
        return f

    def f(x0):
        x0 = np.asarray(x0, dtype=float)
        acc = np.full(x0.shape, -shift)
        for a, s in zip(crossed, cfg.outer):
            acc = acc + real_log_edge(m, a, s.x, x0)
        return m.site(x0) * np.exp(acc)
    return f


def _star_gamma(m: GammaModel, cfg: StarConfig, shift: float, budget: PrecisionBudget):
    f = star_integrand(m, cfg, shift)
    xs = [s.x for s in cfg.outer]
    pts = sorted(set([v for x in xs for v in (x, -x)]))
    reach = max(abs(x) for x in xs) + 4.0
    inner = PrecisionBudget(rel_tol=min(1e-10, budget.rel_tol * 1e-3),
                            abs_tol=0.0, max_terms=budget.max_terms,
                            max_refinements=max(budget.max_refinements, 60))
    line_tail = TailPolicy(initial_cutoff=reach, growth_factor=2.0, stop_rel=inner.rel_tol)
    used = {"x_cutoff": 0.0, "evaluations": 0}

    def term(ns):
        res = integrate_line(lambda x: f(x, ns), line_tail, inner, points=pts)
        used["x_cutoff"] = max(used["x_cutoff"], res.truncation_used)
        used["evaluations"] += res.evaluations * len(ns)
        return np.real(res.value), np.full(len(ns), res.error_estimate)

    n_tail = TailPolicy(initial_cutoff=8, growth_factor=2.0, stop_rel=min(1e-7, budget.rel_tol * 0.1))
    res = sum_bilateral(term, n_tail, inner)
    used.update(n_cutoff=res.truncation_used, tail_exponent=res.tail_exponent,
                error_estimate=res.error_estimate)
    return float(np.real(res.value)), used


def _star_hyperbolic(m: HyperbolicModel, cfg: StarConfig, shift, budget):
    f = star_integrand(m, cfg, shift)
    xs = [s.x for s in cfg.outer]
    inner = PrecisionBudget(rel_tol=min(1e-11, budget.rel_tol * 1e-3), abs_tol=0.0,
                            max_terms=budget.max_terms,
                            max_refinements=max(budget.max_refinements, 60))
    reach = max(abs(x) for x in xs) + 2.0
    res = integrate_line(f, TailPolicy(reach, 1.5, inner.rel_tol), inner,
                         points=sorted(set(xs + [-x for x in xs])))
    return float(np.real(res.value)), {"x_cutoff": res.truncation_used,
                                       "evaluations": res.evaluations,
                                       "error_estimate": res.error_estimate}


def _star_elliptic(m: EllipticModel, cfg: StarConfig, shift, budget):
    f = star_integrand(m, cfg, shift)
    inner = PrecisionBudget(rel_tol=min(1e-12, budget.rel_tol * 1e-3), abs_tol=0.0,
                            max_terms=budget.max_terms,
                            max_refinements=max(budget.max_refinements, 60))
    res = integrate_finite(f, Interval(0.0, math.pi), inner)
    return float(np.real(res.value)), {"evaluations": res.evaluations,
                                       "error_estimate": res.error_estimate}


def star_side(m: Model, cfg: StarConfig, budget: PrecisionBudget, shift: float = 0.0):
    """Star (integrated) side divided by exp(shift), plus the budget actually used."""
    if isinstance(m, GammaModel):
        return _star_gamma(m, cfg, shift, budget)
    if isinstance(m, HyperbolicModel):
        return _star_hyperbolic(m, cfg, shift, budget)
    return _star_elliptic(m, cfg, shift, budget)


# Smallest relative tolerance each star side can deliver in double precision.
ATTAINABLE_REL_TOL = {"elliptic": 1e-13, "hyperbolic": 1e-12, "gamma": 1e-8}


def str_residual(m: Model, cfg: StarConfig, budget: PrecisionBudget = PrecisionBudget(rel_tol=1e-6),
                 r_expected: float = 1.0) -> VerificationReport:
    """Compare the star side with r_expected times the triangle side.

    Passes iff rel_residual <= budget.rel_tol. A tolerance below the
    model's attainable floor is not attempted: the star side is computed at
    the floor and the report fails with a BudgetExhausted note.
    """
    cfg.validate(m)
    log_rhs = _triangle_log(m, cfg) + math.log(r_expected)
    note = ""
    floor = ATTAINABLE_REL_TOL[m.name]
    work = budget
    if budget.rel_tol < floor:
        work = PrecisionBudget(rel_tol=floor, abs_tol=budget.abs_tol, max_terms=budget.max_terms,
                               max_refinements=budget.max_refinements)
        note = (f"BudgetExhausted: rel_tol {budget.rel_tol:.1e} is below the attainable "
                f"{floor:.0e} for the {m.name} model")
    try:
        ratio, used = star_side(m, cfg, work, shift=log_rhs)
    except (BudgetExhausted, TailNotDecaying) as exc:
        ratio = float(np.real(np.sum(exc.value))) if exc.value is not None else float("nan")
        used = {"error_estimate": exc.error_estimate}
        note = f"{type(exc).__name__}: {exc}"
    except RealityViolation as exc:
        ratio, used = float("nan"), {}
        note = f"RealityViolation: {exc}"
    scale = math.exp(log_rhs)
    return VerificationReport.build(ratio * scale, scale, budget.rel_tol, used,
                                    model=m.name, config=cfg.to_dict(), note=note)


# ---------------------------------------------------------------------------
# random configurations
# ---------------------------------------------------------------------------

def random_spectral(rng: np.random.Generator, eta: float, floor: float = 0.1) -> tuple:
    """Flat simplex draw scaled by eta, rejecting draws with a component below floor."""
    while True:
        w = rng.dirichlet(np.ones(3))
        if np.all(w >= floor):
            return tuple(float(eta * v) for v in w)


def random_star(m: Model, rng: np.random.Generator, x_range: float = 2.0, n_range: int = 2,
                floor: float = 0.1) -> StarConfig:
    spectral = random_spectral(rng, m.eta, floor)
    if isinstance(m, GammaModel):
        outer = tuple(DualSpin(float(rng.uniform(-x_range, x_range)),
                               int(rng.integers(-n_range, n_range + 1))) for _ in range(3))
    elif isinstance(m, HyperbolicModel):
        outer = tuple(Spin(float(rng.uniform(-x_range, x_range))) for _ in range(3))
    else:
        outer = tuple(Spin(float(rng.uniform(0.0, math.pi))) for _ in range(3))
    return StarConfig(outer, spectral)


def campaign_configs(m: Model, count: int, seed: int, spectral: Sequence | None = None) -> list:
    """The ``count`` seeded random stars of a campaign (item k uses child seed k)."""
    seeds = np.random.SeedSequence(seed).spawn(count)
    cfgs = [random_star(m, np.random.default_rng(s)) for s in seeds]
    if spectral is not None:
        cfgs = [StarConfig(c.outer, tuple(float(a) for a in spectral)) for c in cfgs]
    return cfgs


def str_campaign(m: Model, count: int, tol: float, seed: int, threads: int = 1,
                 budget: PrecisionBudget | None = None, r_expected: float = 1.0,
                 spectral: Sequence | None = None) -> list[VerificationReport]:
    """``count`` seeded random stars; reports are ordered by item index.

    ``spectral`` fixes the spectral triple and randomises only the spins.
    """
    budget = budget or PrecisionBudget(rel_tol=tol)
    cfgs = campaign_configs(m, count, seed, spectral)

    def one(c):
        return str_residual(m, c, budget, r_expected)

    if threads <= 1:
        return [one(c) for c in cfgs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, cfgs))


# ---------------------------------------------------------------------------
# inversion relations
# ---------------------------------------------------------------------------

def _coords(m: Model, s1, s2):
    if isinstance(m, GammaModel):
        return (s1.x, s1.n, s2.x, s2.n)
    return (s1.x, s2.x)


def inversion_pointwise(m: Model, alpha: float, s1, s2) -> float:
    """|W_alpha(s1, s2) W_{-alpha}(s1, s2) - 1|."""
    c = _coords(m, s1, s2)
    total = np.asarray(m.log_edge(alpha, *c)) + np.asarray(m.log_edge(-alpha, *c))
    return float(abs(np.exp(total) - 1.0))


def inversion_pointwise_batch(m: Model, alpha, *coords) -> np.ndarray:
    """Vectorised form of :func:`inversion_pointwise` over coordinate arrays."""
    alpha = np.asarray(alpha, dtype=float)
    out = np.empty(np.broadcast(alpha, *coords).shape)
    coords = np.broadcast_arrays(alpha, *coords)
    for idx in np.ndindex(out.shape):
        a = float(coords[0][idx])
        c = [v[idx] for v in coords[1:]]
        tot = np.asarray(m.log_edge(a, *c)) + np.asarray(m.log_edge(-a, *c))
        out[idx] = abs(np.exp(tot) - 1.0)
    return out


def _log_edge_complex(m: EllipticModel, alpha: float, x, y, log_kappa: complex) -> np.ndarray:
    ia = 1j * alpha
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    x, y = np.broadcast_arrays(x, y)
    args = np.stack([x + y + ia, x - y + ia, x + y - ia, x - y - ia])
    lg = np.asarray(specfun.log_elliptic_gamma(args, m.nomes, m.budget))
    return lg[0] + lg[1] - lg[2] - lg[3] - log_kappa


def _periodic_trapezoid(g, budget: PrecisionBudget, start: int = 64, label: str = ""):
    """Trapezoid rule on [0, pi) for a pi-periodic analytic g, doubling nodes."""
    n = start
    prev = None
    for _ in range(budget.max_refinements):
        t = np.arange(n) * (math.pi / n)
        val = np.sum(g(t), axis=-1) * (math.pi / n)
        if prev is not None and np.all(np.abs(val - prev) <= budget.rel_tol * np.abs(val) + budget.abs_tol):
            return val, n
        prev = val
        n *= 2
        if n > budget.max_terms:
            break
    raise BudgetExhausted(f"{label}: periodic trapezoid did not converge", value=prev, evaluations=n)


def _site_complex(m: EllipticModel, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return (math.exp(m.eta / 2) / (2 * math.pi)
            * np.asarray(specfun.theta1(2 * z, m.nomes.p, m.budget))
            * np.asarray(specfun.theta1(2 * z, m.nomes.q, m.budget)))


def _log_residue_phi(m: EllipticModel) -> complex:
    """log of the residue of Phi at its first pole u = i eta."""
    nm = m.nomes
    X = specfun._product_terms(nm, 1e-17, m.budget.max_terms)
    drop = int(np.argmin(np.abs(X - nm.p * nm.q)))
    rest = np.delete(X, drop)
    e2 = math.exp(2 * m.eta)
    return complex(np.sum(np.log(1 - X / e2)) - np.sum(np.log(1 - e2 * rest)) - np.log(2j))


def _pow2_at_least(n: float, lo: int) -> int:
    return max(lo, 1 << int(math.ceil(math.log2(max(n, 1.0)))))


@dataclass
class WeakInversionKernel:
    """Quadrature rule for the weak-form convolution  y -> LHS(f) = sum w_i f(y_i).

    The nodes are real points of [0, pi); ``weights`` already include the
    extrapolation to the pinch. ``extrapolation_error`` is the change
    between quadratic and cubic extrapolation for f = 1.
    """

    alpha: float
    x: float
    nodes: np.ndarray
    weights: np.ndarray
    site_x: float
    extrapolation_error: float

    def lhs(self, f: Callable) -> complex:
        return complex(np.sum(self.weights * np.asarray(f(self.nodes))))

    def rhs(self, f: Callable) -> complex:
        fx = complex(np.asarray(f(np.asarray(self.x))))
        fm = complex(np.asarray(f(np.asarray(math.pi - self.x))))
        return (fx + fm) / (2.0 * self.site_x)

    def residual(self, f: Callable) -> float:
        """|LHS - RHS| scaled by (|f(x)| + |f(pi - x)|) / (2 s(x)).

        The scale equals |RHS| unless the two images cancel.
        """
        fx = abs(complex(np.asarray(f(np.asarray(self.x)))))
        fm = abs(complex(np.asarray(f(np.asarray(math.pi - self.x)))))
        scale = max((fx + fm) / (2.0 * self.site_x), 1e-300)
        return float(abs(self.lhs(f) - self.rhs(f)) / scale)


def _weak_density(m: EllipticModel, alpha: float, x: float, gamma: float,
                  lk_minus: complex, log_res: complex, n_base: int, n_res: int):
    """Nodes and weights for the y-integral at spectral value gamma in (eta, eta + alpha).

    The z-integral of s(z) w_{eta-alpha}(x, z) w_gamma(z, y) is continued
    from gamma < eta: for each of the four factors Phi(sz + ty + i gamma)
    the pole at z = s(i(eta - gamma) - t y) has crossed the real line and
    contributes a residue term.
    """
    eta = m.eta
    lk = specfun.log_kappa_elliptic(gamma, m.nomes, m.budget, continuation=True)
    h = math.pi / n_base
    yb = (np.arange(n_base) + 0.5) * h
    z = np.arange(n_base) * h
    wz = _site_complex(m, z) * np.exp(_log_edge_complex(m, eta - alpha, np.full(z.shape, x), z, lk_minus))
    zz, yy = np.meshgrid(z, yb)
    u = np.stack([zz + yy, zz - yy, -zz - yy, -zz + yy]) + 1j * gamma
    lg = np.asarray(specfun.log_elliptic_gamma(u, m.nomes, m.budget)).sum(axis=0) - lk
    base = (np.exp(lg) * wz[None, :]).sum(axis=1) * h * h

    hr = math.pi / n_res
    yr = (np.arange(n_res) + 0.5) * hr
    eps = eta - gamma
    signs = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    acc = np.zeros(n_res, dtype=complex)
    for s, t in signs:
        z0 = s * (1j * eps - t * yr)
        others = [s2 * z0 + t2 * yr + 1j * gamma for s2, t2 in signs if (s2, t2) != (s, t)]
        lo = np.asarray(specfun.log_elliptic_gamma(np.stack(others), m.nomes, m.budget)).sum(axis=0)
        lw = _log_edge_complex(m, eta - alpha, np.full(z0.shape, x, dtype=complex), z0, lk_minus)
        term = _site_complex(m, z0) * np.exp(lw + lo - lk + log_res)
        # for s = -1 the crossing direction and d(z0)/du both flip sign
        acc += 2j * math.pi * term
    return np.concatenate([yb, yr]), np.concatenate([base, acc * hr])


def weak_inversion_kernel(m: EllipticModel, alpha: float, x: float,
                          budget: PrecisionBudget = PrecisionBudget(rel_tol=1e-10)
                          ) -> WeakInversionKernel:
    """Build the quadrature rule behind :func:`inversion_weak`.

    At gamma = eta + alpha the delta functions arise from pairs of poles
    pinching the real y-axis at y = +-x, so the integral is evaluated on the
    real line at gamma = eta + alpha - k d1, k = 1..4, and extrapolated
    to d = 0 with a cubic.
    """
    if not isinstance(m, EllipticModel):
        raise DomainError("weak inversion is implemented for the elliptic model")
    eta = m.eta
    if not 0 < alpha < eta:
        raise DomainError(f"weak inversion needs 0 < alpha < eta = {eta:.6g}")
    x = float(x)
    site_x = float(m.site(x))
    if site_x <= 0:
        raise DomainError("weak inversion needs s(x) > 0")
    lk_minus = specfun.log_kappa_elliptic(eta - alpha, m.nomes, m.budget)
    log_res = _log_residue_phi(m)
    digits = -math.log(max(budget.rel_tol, 1e-15))
    # the pinch points y = x and y = pi - x merge where s vanishes; d must
    # stay well below their separation for the d-expansion to be regular
    r = x % (math.pi / 2)
    dist = min(r, math.pi / 2 - r)
    d1 = min(0.05 * alpha, dist / 40)
    n_base = _pow2_at_least(1.5 * digits / (2 * (alpha - 4 * d1)), 64)
    n_res = _pow2_at_least(1.5 * digits / (2 * d1), 256)
    if n_res > budget.max_terms or n_base > budget.max_terms:
        raise BudgetExhausted("weak inversion grid exceeds the node budget",
                              evaluations=n_res + n_base * n_base)
    parts = [_weak_density(m, alpha, x, eta + alpha - k * d1, lk_minus, log_res, n_base, n_res)
             for k in (1, 2, 3, 4)]
    cubic = (4.0, -6.0, 4.0, -1.0)
    quadratic = (3.0, -3.0, 1.0)
    nodes = np.concatenate([p[0] for p in parts])
    weights = np.concatenate([c * p[1] for c, p in zip(cubic, parts)])
    vals = [p[1].sum() for p in parts]
    err = abs(sum(c * v for c, v in zip(cubic, vals)) - sum(c * v for c, v in zip(quadratic, vals)))
    return WeakInversionKernel(alpha, x, nodes, weights, site_x, float(err))


def inversion_weak(m: EllipticModel, alpha: float, x: float, f: Callable,
                   budget: PrecisionBudget = PrecisionBudget(rel_tol=1e-10)) -> float:
    """Relative residual of the convolution inversion relation in weak form.

    Compares  int dy int dz f(y) s(z) w_{eta-alpha}(x, z) w_{eta+alpha}(z, y)
    over [0, pi)^2 with (f(x) + f(pi - x)) / (2 s(x)). ``f`` must be
    pi-periodic and smooth; it is only evaluated on real points.
    """
    return weak_inversion_kernel(m, alpha, x, budget).residual(f)


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitSchedule:
    control: tuple
    probe: dict

    def __post_init__(self):
        c = tuple(float(v) for v in self.control)
        object.__setattr__(self, "control", c)
        if len(c) < 3:
            raise ValueError("a limit schedule needs at least three control values")
        if not all(v > 0 for v in c) or any(b >= a for a, b in zip(c, c[1:])):
            raise ValueError("controls must be positive and strictly decreasing")


@dataclass
class LimitSweep:
    control: list
    ratios: list
    label: str = ""

    @property
    def deviations(self) -> list:
        return [abs(r - 1.0) for r in self.ratios]

    @property
    def monotone(self) -> bool:
        d = self.deviations
        return all(b < a for a, b in zip(d, d[1:]))


@dataclass
class HyperbolicLimitSweep:
    """Ratios along eps -> 0.

    ``weight`` is W_ell / W_hyp as it stands. It carries the divergent,
    spin-independent factor e^{pi^2 alpha / (2 eps)}, which drops out of the
    star-triangle relation together with the matching factor in S;
    ``weight_normalized`` divides it out. ``site`` is
    eps S_ell(x eps) e^{pi^2 eta / (2 eps)} / S_hyp(x).
    """

    weight: LimitSweep
    weight_normalized: LimitSweep
    site: LimitSweep


def hyperbolic_limit_residual(schedule: LimitSchedule,
                              budget: PrecisionBudget = PrecisionBudget(rel_tol=1e-12)
                              ) -> HyperbolicLimitSweep:
    """Elliptic weights against their hyperbolic limit along eps -> 0.

    Probe keys: b (real, > 0), alpha, x, y. At each eps the elliptic model
    has p = e^{-b eps}, q = e^{-eps/b}, spins x eps, y eps and spectral
    value alpha eps. Optional ``sx`` is the site-weight probe (default x,
    or 0.5 when x = 0).
    """
    pr = schedule.probe
    b, alpha, x, y = float(pr["b"]), float(pr["alpha"]), float(pr["x"]), float(pr["y"])
    hyp = HyperbolicModel(ModularParam(b), budget)
    eta = hyp.eta
    log_w_hyp = float(real_log_edge(hyp, alpha, x, y))
    sx = float(pr.get("sx", x if x != 0 else 0.5))
    log_s_hyp = float(hyp.log_site(sx))
    raw, norm, site = [], [], []
    for eps in schedule.control:
        try:
            ell = EllipticModel(EllipticNomes(math.exp(-b * eps), math.exp(-eps / b)), budget)
            log_w_ell = float(real_log_edge(ell, alpha * eps, x * eps, y * eps))
            s_ell = float(ell.site(sx * eps))
        except (ConvergenceError, MemoryError) as exc:
            raise ConvergenceError(f"elliptic weight degenerates at eps = {eps}: {exc}") from exc
        gauge = math.pi ** 2 / (2 * eps)
        raw.append(math.exp(log_w_ell - log_w_hyp))
        norm.append(math.exp(log_w_ell - log_w_hyp - gauge * alpha))
        site.append(eps * s_ell * math.exp(gauge * eta - log_s_hyp))
    ctrl = list(schedule.control)
    return HyperbolicLimitSweep(LimitSweep(ctrl, raw, "W"),
                                LimitSweep(ctrl, norm, "W (normalized)"),
                                LimitSweep(ctrl, site, "S"))


@dataclass
class StrongCouplingSweep:
    """Ratios along delta -> 0.

    ``weight`` and ``kappa`` use the asymptotic forms exactly as printed:
    prefactor 2^{-5 beta} (pi eta)^{3 beta} and the unit-modulus kappa
    form. ``weight_corrected`` uses (pi eta)^{-3 beta}; ``kappa_corrected``
    uses (8 pi eta)^{-beta} Gamma((1-beta)/2) / Gamma((1+beta)/2), which is
    the printed form continued to beta -> -i beta.
    """

    weight: LimitSweep
    site: LimitSweep
    kappa: LimitSweep
    weight_corrected: LimitSweep
    kappa_corrected: LimitSweep

    @property
    def monotone(self) -> bool:
        return self.weight.monotone and self.site.monotone and self.kappa.monotone

    @property
    def monotone_corrected(self) -> bool:
        return self.weight_corrected.monotone and self.site.monotone and self.kappa_corrected.monotone


def strong_coupling_residual(schedule: LimitSchedule,
                             budget: PrecisionBudget = PrecisionBudget(rel_tol=1e-12)
                             ) -> StrongCouplingSweep:
    """Hyperbolic weights at b = e^{i(pi/2 - delta)} against their eta -> 0 asymptotics.

    Probe keys: beta, m, n, x, y (edge weight at spectral beta*eta between
    m + x eta and n + y eta) and optionally sx, sn for the site weight
    S(sn + sx eta). Every hyperbolic evaluation uses the product / residue
    representations; the contour pinches as b -> i.
    """
    pr = schedule.probe
    beta = float(pr["beta"])
    mm, nn = int(pr["m"]), int(pr["n"])
    x, y = float(pr["x"]), float(pr["y"])
    sx, sn = float(pr.get("sx", 1.0)), int(pr.get("sn", 1))
    log_wg = float(real_log_edge(GammaModel(), beta, x, mm, y, nn))
    lg = specfun.log_gamma
    lg_printed = complex(lg(complex(0.5, -beta / 2))) - complex(lg(complex(0.5, beta / 2)))
    lg_real = (complex(lg((1 + beta) / 2)) - complex(lg((1 - beta) / 2))).real
    w_p, w_c, s_r, k_p, k_c = [], [], [], [], []
    for delta in schedule.control:
        bp = ModularParam.near_i(delta)
        eta = bp.eta
        hyp = HyperbolicModel(bp, budget, method="product")
        lw = float(real_log_edge(hyp, beta * eta, mm + x * eta, nn + y * eta))
        base = -5 * beta * math.log(2.0)
        w_p.append(math.exp(lw - log_wg - base - 3 * beta * math.log(math.pi * eta)))
        w_c.append(math.exp(lw - log_wg - base + 3 * beta * math.log(math.pi * eta)))
        s_val = float(hyp.site(sn + sx * eta))
        s_r.append(s_val / (8 * math.pi ** 2 * (sx ** 2 + sn ** 2) * eta ** 2))
        lk = specfun.log_kappa_hyperbolic(beta * eta, bp, budget, method="series")
        k_p.append(complex(np.exp(lk - 1j * beta * math.log(8 * math.pi * eta) + lg_printed)))
        k_c.append(math.exp(lk.real + beta * math.log(8 * math.pi * eta) + lg_real))
    ctrl = list(schedule.control)
    return StrongCouplingSweep(LimitSweep(ctrl, w_p, "W"), LimitSweep(ctrl, s_r, "S"),
                               LimitSweep(ctrl, k_p, "kappa"),
                               LimitSweep(ctrl, w_c, "W (corrected prefactor)"),
                               LimitSweep(ctrl, k_c, "kappa (real form)"))
