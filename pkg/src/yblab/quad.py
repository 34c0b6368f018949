"""Adaptive integration on intervals and lines, and bilateral integer sums.

Integrands are vectorised: ``f(x)`` receives a 1-d array of nodes and
returns an array whose last axis runs over the nodes. Leading axes are
integrated independently (vector-valued integrands), which lets the
verification code push a whole shell of integer spins through one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExhausted, TailNotDecaying
from .specfun import DEFAULT_BUDGET, PrecisionBudget

# Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval ends must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")


@dataclass
class QuadResult:
    value: complex | np.ndarray
    error_estimate: float
    evaluations: int
    truncation_used: float = float("nan")
    tail_exponent: float = float("nan")

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be >= 0")


@dataclass(frozen=True)
class TailPolicy:
    initial_cutoff: float = 8.0
    growth_factor: float = 2.0
    stop_rel: float = 1e-12

    def __post_init__(self):
        if self.growth_factor < 1.5:
            raise ValueError("growth_factor must be >= 1.5")
        if not self.initial_cutoff > 0:
            raise ValueError("initial_cutoff must be positive")


def _gk_panels(f, lo: np.ndarray, hi: np.ndarray):
    """Kronrod and Gauss estimates on each panel; shapes (..., npanels)."""
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    x = (c[:, None] + r[:, None] * _NODES[None, :]).ravel()
    fx = np.asarray(f(x))
    fx = fx.reshape(fx.shape[:-1] + (lo.size, 15))
    k = np.tensordot(fx, _WK, axes=([-1], [0])) * r
    g = np.tensordot(fx, _WG15, axes=([-1], [0])) * r
    return k, g


def _component_tol(value, rel_tol, abs_tol):
    return np.maximum(abs_tol, rel_tol * np.abs(value))


def integrate_finite(f, iv: Interval, budget: PrecisionBudget = DEFAULT_BUDGET,
                     points=None) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature over ``iv``.

    ``points`` are optional interior breakpoints (peaks, kinks). Error per
    component is |K15 - G7| summed over panels. Stops once every component
    satisfies err <= max(abs_tol, rel_tol |value|); otherwise bisects the
    worst quarter of panels. Raises BudgetExhausted with the best estimate.
    """
    edges = [iv.lo, iv.hi]
    if points is not None:
        edges += [p for p in np.ravel(points) if iv.lo < p < iv.hi]
    edges = np.unique(np.asarray(edges, dtype=float))
    lo, hi = edges[:-1], edges[1:]
    k, g = _gk_panels(f, lo, hi)
    evals = 15 * lo.size
    for _ in range(budget.max_refinements + 1):
        err = np.abs(k - g)
        value = k.sum(axis=-1)
        tot_err = err.sum(axis=-1)
        tol = _component_tol(value, budget.rel_tol, budget.abs_tol)
        if np.all(tot_err <= tol):
            return QuadResult(value=value, error_estimate=float(np.max(tot_err)), evaluations=evals)
        # panel badness: worst ratio of its error to the component tolerance
        ratio = err / np.asarray(tol)[..., None]
        bad = ratio.reshape(-1, lo.size).max(axis=0)
        nsplit = max(1, lo.size // 4)
        order = np.argsort(-bad, kind="stable")[:nsplit]
        order = order[bad[order] > 0]
        if order.size == 0:
            break
        keep = np.ones(lo.size, dtype=bool)
        keep[order] = False
        mid = 0.5 * (lo[order] + hi[order])
        if np.any(mid <= lo[order]) or np.any(mid >= hi[order]):
            break  # panels at machine resolution
        new_lo = np.concatenate([lo[order], mid])
        new_hi = np.concatenate([mid, hi[order]])
        k2, g2 = _gk_panels(f, new_lo, new_hi)
        evals += 15 * new_lo.size
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        k = np.concatenate([k[..., keep], k2], axis=-1)
        g = np.concatenate([g[..., keep], g2], axis=-1)
        srt = np.argsort(lo, kind="stable")
        lo, hi, k, g = lo[srt], hi[srt], k[..., srt], g[..., srt]
    value = k.sum(axis=-1)
    err = float(np.max(np.abs(k - g).sum(axis=-1)))
    raise BudgetExhausted(f"integrate_finite: tolerance not met (error {err:.3e})",
                          value=value, error_estimate=err, evaluations=evals)


def integrate_line(f, tail: TailPolicy = TailPolicy(), budget: PrecisionBudget = DEFAULT_BUDGET,
                   points=None, center: float = 0.0) -> QuadResult:
    """Integral over the real line by growing symmetric truncation.

    Integrates [c - T, c + T] and then adds shells [T, g T] on both sides
    until a shell changes every component by less than ``stop_rel`` of its
    value. The last two shells give a geometric estimate of the remaining
    tail, which is added to ``error_estimate``.
    """
    T = float(tail.initial_cutoff)
    core = integrate_finite(f, Interval(center - T, center + T), budget, points)
    value = np.asarray(core.value)
    err = core.error_estimate
    evals = core.evaluations
    prev_inc = None
    for _ in range(budget.max_refinements):
        T_new = T * tail.growth_factor
        scale = np.abs(value)
        shell_budget = PrecisionBudget(
            rel_tol=budget.rel_tol,
            abs_tol=max(budget.abs_tol, float(np.min(scale)) * budget.rel_tol * 1e-2),
            max_terms=budget.max_terms, max_refinements=budget.max_refinements)
        shell_pts = None if points is None else [p for p in np.ravel(points)
                                                  if T < abs(p - center) < T_new]
        left = integrate_finite(f, Interval(center - T_new, center - T), shell_budget, shell_pts)
        right = integrate_finite(f, Interval(center + T, center + T_new), shell_budget, shell_pts)
        inc = np.asarray(left.value) + np.asarray(right.value)
        value = value + inc
        err += left.error_estimate + right.error_estimate
        evals += left.evaluations + right.evaluations
        T = T_new
        if np.all(np.abs(inc) <= tail.stop_rel * np.abs(value) + budget.abs_tol):
            remaining = np.zeros_like(value)
            if prev_inc is not None:
                # shells of a power-law tail shrink geometrically: sum the rest
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = inc / prev_inc
                ok = np.isfinite(r) & (np.abs(np.imag(r)) < 1e-6 * np.abs(r)) \
                    & (np.real(r) > 0) & (np.real(r) < 1)
                r = np.where(ok, np.real(r), 0.0)
                remaining = inc * r / (1 - r)
            value = value + remaining
            return QuadResult(value=value if value.ndim else complex(value),
                              error_estimate=err + float(np.max(np.abs(remaining))),
                              evaluations=evals, truncation_used=T)
        prev_inc = inc
    raise TailNotDecaying(f"integrate_line: tail still significant at T = {T}",
                          value=value, error_estimate=err)


def sum_bilateral(term, tail: TailPolicy = TailPolicy(), budget: PrecisionBudget = DEFAULT_BUDGET,
                  fit_power_tail: bool = True) -> QuadResult:
    """Sum of term(n) over all integers n.

    ``term`` takes an integer array and returns values, or a pair
    ``(values, errors)``. The cutoff N grows geometrically; the shell sums
    of the last two growth steps determine a power-law tail C N^{1-s}.
    With ``fit_power_tail`` the fitted remainder is added to the value;
    its magnitude always enters ``error_estimate``.
    """
    def call(ns):
        out = term(ns)
        if isinstance(out, tuple):
            vals, errs = out
            return np.asarray(vals), float(np.sum(np.abs(errs)))
        return np.asarray(out), 0.0

    N = int(math.ceil(tail.initial_cutoff))
    vals, err = call(np.arange(-N, N + 1))
    total = vals.sum()
    evals = 2 * N + 1
    shells = []
    for _ in range(budget.max_refinements):
        N_new = int(math.ceil(N * tail.growth_factor))
        if 2 * N_new + 1 > budget.max_terms:
            raise BudgetExhausted(f"sum_bilateral: cutoff {N_new} exceeds max_terms = {budget.max_terms}",
                                  value=complex(total), error_estimate=err + abs(shells[-1][2] if shells else total))
        ns = np.concatenate([np.arange(-N_new, -N), np.arange(N + 1, N_new + 1)])
        v, e = call(ns)
        shell = v.sum()
        total = total + shell
        err += e
        evals += ns.size
        shells.append((N, N_new, shell))
        N = N_new
        if abs(shell) <= tail.stop_rel * abs(total) + budget.abs_tol:
            remaining, exponent = _fit_tail(shells, tail.growth_factor)
            if fit_power_tail:
                total = total + remaining
            return QuadResult(value=complex(total), error_estimate=err + abs(remaining),
                              evaluations=evals, truncation_used=float(N),
                              tail_exponent=exponent)
    raise TailNotDecaying(f"sum_bilateral: shell sums still significant at N = {N}",
                          value=complex(total), error_estimate=err)


def _fit_tail(shells, growth: float):
    """Remainder beyond the last shell assuming term ~ C n^{-s}."""
    if len(shells) < 2:
        return 0.0, float("nan")
    (a0, a1, s_prev), (b0, b1, s_last) = shells[-2], shells[-1]
    if s_prev == 0 or s_last == 0:
        return 0.0, float("nan")
    r = s_last / s_prev
    if not (np.isreal(r) or abs(np.imag(r)) < 1e-8 * abs(r)):
        return 0.0, float("nan")
    r = float(np.real(r))
    if not 0 < r < 1:
        return 0.0, float("nan")
    # shell sum ~ C'/(s-1) (N_lo^{1-s} - N_hi^{1-s}); solve for s by bisection
    def ratio(s):
        num = 1.0 - (b1 / b0) ** (1 - s)
        den = 1.0 - (a1 / a0) ** (1 - s)
        return (b0 / a0) ** (1 - s) * num / den
    lo_s, hi_s = 1.0 + 1e-9, 60.0
    if not (ratio(hi_s) < r < ratio(lo_s)):
        exponent = 1.0 - math.log(r) / math.log(growth)
    else:
        for _ in range(200):
            mid = 0.5 * (lo_s + hi_s)
            if ratio(mid) > r:
                lo_s = mid
            else:
                hi_s = mid
        exponent = 0.5 * (lo_s + hi_s)
    s = exponent
    # remainder / last shell = (N_hi/N_lo)^{1-s} / (1 - (N_hi/N_lo)^{1-s})
    t = (b1 / b0) ** (1 - s)
    remaining = s_last * t / (1.0 - t)
    return complex(remaining) if np.iscomplexobj(remaining) else float(np.real(remaining)), s
