"""Partition functions on small lattices: exact contraction and Metropolis sampling.

A lattice is a list of sites, some fixed (boundary) and some internal,
joined by edges that each carry a spectral value. The edge weight is
``W_a(s_i, s_j)``; every internal site carries ``S(s)``. On the square
lattice horizontal edges use ``alpha`` and vertical edges ``eta - alpha``.

Exact evaluation replaces every internal integral by a fixed quadrature
grid (Nystrom discretisation) and contracts the resulting tensor network.
"""

from __future__ import annotations

import math
import string
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, ErgodicityWarning, TooManyInternalSites, TruncationWarning
from .weights import EllipticModel, GammaModel, HyperbolicModel, Model, _real_log, real_log_edge

MAX_EXACT_INTERNAL = 4


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    spectral: float


@dataclass(frozen=True)
class LatticeSpec:
    """Sites ``0..n_sites-1``; ``fixed`` maps boundary site index to its spin."""

    n_sites: int
    fixed: dict
    edges: tuple
    rows: int = 0
    cols: int = 0

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        for e in self.edges:
            if not (0 <= e.i < self.n_sites and 0 <= e.j < self.n_sites) or e.i == e.j:
                raise ValueError(f"bad edge {e}")
        if any(not 0 <= k < self.n_sites for k in self.fixed):
            raise ValueError("fixed site index out of range")

    @property
    def internal(self) -> list:
        return [k for k in range(self.n_sites) if k not in self.fixed]

    @classmethod
    def square(cls, rows: int, cols: int, alpha: float, eta: float,
               boundary: Sequence | None = None, zero=None) -> "LatticeSpec":
        """rows x cols grid whose perimeter is fixed; internal block (rows-2) x (cols-2).

        ``boundary`` lists perimeter spins in row-major order of the
        perimeter sites; default is ``zero`` everywhere.
        """
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if not 0 < alpha < eta:
            raise DomainError(f"alpha = {alpha} outside (0, {eta})")
        idx = lambda r, c: r * cols + c
        perim = [idx(r, c) for r in range(rows) for c in range(cols)
                 if r in (0, rows - 1) or c in (0, cols - 1)]
        if boundary is None:
            boundary = [zero] * len(perim)
        if len(boundary) != len(perim):
            raise ValueError(f"boundary needs {len(perim)} spins, got {len(boundary)}")
        edges = []
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.append(Edge(idx(r, c), idx(r, c + 1), alpha))
                if r + 1 < rows:
                    edges.append(Edge(idx(r, c), idx(r + 1, c), eta - alpha))
        return cls(rows * cols, dict(zip(perim, boundary)), tuple(edges), rows, cols)

    @classmethod
    def star(cls, outer: Sequence, spectral: Sequence, eta: float) -> "LatticeSpec":
        """One internal site (index 0) joined to three fixed sites by crossed edges."""
        edges = tuple(Edge(k + 1, 0, eta - a) for k, a in enumerate(spectral))
        return cls(4, {k + 1: s for k, s in enumerate(outer)}, edges)

    def transposed(self, eta: float) -> "LatticeSpec":
        """Transpose a square lattice; horizontal and vertical spectral values swap."""
        if not self.rows:
            raise ValueError("only square-lattice specs can be transposed")
        R, C = self.rows, self.cols
        t = lambda k: (k % C) * R + (k // C)
        edges = tuple(Edge(t(e.i), t(e.j), e.spectral) for e in self.edges)
        return LatticeSpec(self.n_sites, {t(k): v for k, v in self.fixed.items()}, edges, C, R)


@dataclass(frozen=True)
class GridDiscretization:
    """Quadrature nodes and positive weights for one internal spin; n_max for gamma."""

    nodes: np.ndarray
    weights: np.ndarray
    n_max: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in shape")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")

    @classmethod
    def for_model(cls, m: Model, n_nodes: int | None = None, n_max: int = 8,
                  scale: float | None = None) -> "GridDiscretization":
        """Default grid for one internal spin.

        Elliptic: periodic trapezoid on [0, pi), 64 nodes. Hyperbolic:
        trapezoid on [-X, X], 128 nodes, where X = 30 / (4 pi Re eta) puts
        the tail of the e^{-4 pi eta |x|} site decay below 1e-10 (``scale``
        overrides X). Gamma: Gauss-Legendre, 64 nodes, with x = c t / (1 - t^2)
        for the algebraic tails (``scale`` overrides c = 2).
        """
        if isinstance(m, EllipticModel):
            n = n_nodes or 64
            x = np.arange(n) * (math.pi / n)
            return cls(x, np.full(n, math.pi / n))
        if isinstance(m, HyperbolicModel):
            n = n_nodes or 128
            X = scale if scale is not None else 30.0 / (4 * math.pi * float(np.real(m.eta)))
            x = np.linspace(-X, X, n)
            return cls(x, np.full(n, x[1] - x[0]))
        t, w = np.polynomial.legendre.leggauss(n_nodes or 64)
        c = scale if scale is not None else 2.0
        return cls(c * t / (1 - t * t), c * w * (1 + t * t) / (1 - t * t) ** 2, n_max)

    def states(self, m: Model):
        """(coordinates, log quadrature weight) of every discrete state of one site."""
        if isinstance(m, GammaModel):
            ns = np.arange(-self.n_max, self.n_max + 1)
            x = np.repeat(self.nodes, ns.size)
            n = np.tile(ns, self.nodes.size)
            return (x, n), np.repeat(np.log(self.weights), ns.size)
        return (self.nodes,), np.log(self.weights)


class Method(Enum):
    Exact = "Exact"
    MC = "MC"


@dataclass
class PartitionResult:
    log_z: float
    per_site: float
    method: Method
    error_estimate: float

    def __post_init__(self):
        if not (math.isfinite(self.log_z) and math.isfinite(self.per_site)):
            raise ValueError("partition result is not finite")


def _coords(m: Model, s) -> tuple:
    return (s.x, s.n) if isinstance(m, GammaModel) else (s.x,)


def _log_site(m: Model, *c) -> np.ndarray:
    with np.errstate(divide="ignore"):
        if isinstance(m, HyperbolicModel):
            x = np.asarray(c[0], dtype=float)
            return np.where(x == 0, -np.inf, m.log_site(np.where(x == 0, 1.0, x)))
        return np.log(np.asarray(m.site(*c), dtype=float))


def _unique(v: np.ndarray):
    """Distinct values of v up to ~1e-12 (splitting a value is harmless, merging is tiny)."""
    scale = max(float(np.max(np.abs(v))), 1.0)
    _, idx, inv = np.unique(np.round(v / scale, 12), return_index=True, return_inverse=True)
    return v.ravel()[idx], inv.reshape(v.shape)


def _pair_log(m: Model, a: float, coords) -> np.ndarray:
    """Real log W_a(state_i, state_j) on all pairs of discrete states.

    Hyperbolic and gamma weights split into a part depending on x + y and
    one on x - y, so each is evaluated only on the distinct values.
    """
    if isinstance(m, HyperbolicModel):
        x = coords[0]
        u, inv = _unique(np.concatenate([(x[:, None] + x[None, :]).ravel(),
                                         (x[:, None] - x[None, :]).ravel()]))
        lr = m.log_ratio(a, u)[inv].reshape(2, x.size, x.size)
        lw = lr[0] + lr[1] + 4 * math.pi * a * x[:, None] - m.log_kappa(a)
    elif isinstance(m, GammaModel):
        x, n = coords
        xs = np.unique(x)
        ns = np.unique(n)
        ix = np.searchsorted(xs, x)
        inn = np.searchsorted(ns, n)
        u, inv = _unique(np.concatenate([(xs[:, None] + xs[None, :]).ravel(),
                                         (xs[:, None] - xs[None, :]).ravel()]))
        ks = np.arange(2 * ns.min(), 2 * ns.max() + 1) if ns.size else np.zeros(0)
        ks = np.unique(np.concatenate([ks, -ks]))
        table = m.log_pair(a, u[:, None], ks[None, :])          # (distinct s, k)
        k0 = int(-ks.min())
        inv = inv.reshape(2, xs.size, xs.size)
        sp = inv[0][ix[:, None], ix[None, :]]
        sm = inv[1][ix[:, None], ix[None, :]]
        kp = (n[:, None] + n[None, :]).astype(int) + k0
        km = (n[None, :] - n[:, None]).astype(int) + k0
        lw = m.log_prefactor(a) + table[sp, kp] + table[sm, km]
    else:
        lw = m.log_edge(a, coords[0][:, None], coords[0][None, :])
    return _real_log(lw, f"{m.name} edge weight")


def _network(spec: LatticeSpec, m: Model, grid: GridDiscretization):
    """Log-factors of the discretised network: (site vectors, pair matrices, constant)."""
    internal = spec.internal
    pos = {k: a for a, k in enumerate(internal)}
    coords, logw = grid.states(m)
    site_vec = logw + _log_site(m, *coords)
    vectors = [site_vec.copy() for _ in internal]
    pairs = []
    const = 0.0
    pair_cache: dict = {}
    for e in spec.edges:
        fi, fj = e.i in spec.fixed, e.j in spec.fixed
        if fi and fj:
            const += float(real_log_edge(m, e.spectral, *_coords(m, spec.fixed[e.i]),
                                         *_coords(m, spec.fixed[e.j])))
        elif fi or fj:
            fixed_site, free = (e.i, e.j) if fi else (e.j, e.i)
            s = spec.fixed[fixed_site]
            if fi:
                lw = real_log_edge(m, e.spectral, *_coords(m, s), *coords)
            else:
                lw = real_log_edge(m, e.spectral, *coords, *_coords(m, s))
            vectors[pos[free]] = vectors[pos[free]] + lw
        else:
            if e.spectral not in pair_cache:
                pair_cache[e.spectral] = _pair_log(m, e.spectral, coords)
            pairs.append((pos[e.i], pos[e.j], pair_cache[e.spectral], e))
    return vectors, pairs, const


def _contract(vectors, pairs, vec_mult: dict | None = None, pair_mult: dict | None = None):
    """Contraction in max-shifted form: returns (log shift, scaled value).

    ``vec_mult`` / ``pair_mult`` multiply a site vector or pair matrix by an
    extra (non-log) factor, used for expectation values.
    """
    letters = string.ascii_letters
    ops, subs = [], []
    shift = 0.0
    for a, v in enumerate(vectors):
        mx = float(np.max(v))
        op = np.exp(v - mx)
        if vec_mult and a in vec_mult:
            op = op * vec_mult[a]
        ops.append(op)
        subs.append(letters[a])
        shift += mx
    for k, (a, b, lw, _) in enumerate(pairs):
        mx = float(np.max(lw))
        mat = np.exp(lw - mx)
        if pair_mult and k in pair_mult:
            mat = mat * pair_mult[k]
        ops.append(mat)
        subs.append(letters[a] + letters[b])
        shift += mx
    if not ops:
        return 0.0, 1.0
    return shift, float(np.einsum(",".join(subs) + "->", *ops, optimize="greedy"))


def _exact_log_z(spec: LatticeSpec, m: Model, grid: GridDiscretization) -> float:
    vectors, pairs, const = _network(spec, m, grid)
    if not vectors:
        return const
    shift, val = _contract(vectors, pairs)
    if not val > 0:
        raise ArithmeticError("partition function underflowed")
    return const + shift + math.log(val)


def exact_partition(spec: LatticeSpec, m: Model, grid: GridDiscretization | None = None,
                    truncation_tol: float = 1e-6) -> PartitionResult:
    """Discretised partition function; at most four internal sites.

    For the gamma model the truncation error is estimated by the change
    under n_max -> n_max + 4 and reported in ``error_estimate``.
    """
    n_int = len(spec.internal)
    if n_int > MAX_EXACT_INTERNAL:
        raise TooManyInternalSites(f"{n_int} internal sites (limit {MAX_EXACT_INTERNAL})")
    grid = grid or GridDiscretization.for_model(m)
    log_z = _exact_log_z(spec, m, grid)
    err = 0.0
    if isinstance(m, GammaModel) and n_int:
        wider = GridDiscretization(grid.nodes, grid.weights, grid.n_max + 4)
        err = abs(_exact_log_z(spec, m, wider) - log_z)
        if err > truncation_tol:
            warnings.warn(f"n_max = {grid.n_max} truncation changes log Z by {err:.2e}",
                          TruncationWarning, stacklevel=2)
    return PartitionResult(log_z, log_z / max(n_int, 1), Method.Exact, err)


def exact_edge_observable(spec: LatticeSpec, m: Model, grid: GridDiscretization | None = None
                          ) -> np.ndarray:
    """<log W_e> for every edge with at least one internal end, in spec.edges order."""
    grid = grid or GridDiscretization.for_model(m)
    vectors, pairs, _ = _network(spec, m, grid)
    coords, _ = grid.states(m)
    pos = {k: a for a, k in enumerate(spec.internal)}
    _, z = _contract(vectors, pairs)
    pair_index = {p[3]: k for k, p in enumerate(pairs)}
    out = []
    for e in spec.edges:
        fi, fj = e.i in spec.fixed, e.j in spec.fixed
        if fi and fj:
            continue
        if e in pair_index:
            k = pair_index[e]
            _, val = _contract(vectors, pairs, pair_mult={k: pairs[k][2]})
        else:
            fixed_site, free = (e.i, e.j) if fi else (e.j, e.i)
            s = spec.fixed[fixed_site]
            lw = (real_log_edge(m, e.spectral, *_coords(m, s), *coords) if fi
                  else real_log_edge(m, e.spectral, *coords, *_coords(m, s)))
            _, val = _contract(vectors, pairs, vec_mult={pos[free]: lw})
        out.append(val / z)
    return np.asarray(out)


def free_energy_trend(specs: Sequence[LatticeSpec], m: Model,
                      grid: GridDiscretization | None = None) -> list:
    """N^-1 log Z for each spec. Finite-size values only; no limit is asserted."""
    return [exact_partition(s, m, grid).per_site for s in specs]


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCConfig:
    sweeps: int = 4000
    burn_in: int = 500
    x_step: float = 0.5
    n_step_prob: float = 0.3
    seed: int = 0
    chains: int = 8

    def __post_init__(self):
        if not 0 <= self.burn_in < self.sweeps:
            raise ValueError("need 0 <= burn_in < sweeps")
        if not self.x_step > 0:
            raise ValueError("x_step must be positive")
        if not 0 <= self.n_step_prob < 1:
            raise ValueError("n_step_prob must lie in [0, 1)")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")


@dataclass
class Observables:
    edge_log_w: np.ndarray          # mean <log W_e> per non-frozen edge
    edge_stderr: np.ndarray
    acceptance: float
    autocorr_time: float
    samples: np.ndarray = field(repr=False)   # (sweeps - burn_in, chains, n_internal, k)
    series: np.ndarray = field(repr=False)    # (sweeps - burn_in, chains, n_edges) log W


def _integrated_autocorr(x: np.ndarray) -> float:
    """Integrated autocorrelation time of a (time, chains) series, Sokal window c = 5."""
    x = x - x.mean(axis=0)
    n = x.shape[0]
    var = float(np.mean(x * x))
    if var == 0 or n < 4:
        return 1.0
    f = np.fft.rfft(x, 2 * n, axis=0)
    acf = np.fft.irfft(f * np.conj(f), axis=0)[:n].mean(axis=1)
    acf = acf / acf[0]
    tau = 1.0
    for t in range(1, n):
        tau += 2 * acf[t]
        if t >= 5 * tau:
            break
    return max(float(tau), 1.0)


def mc_run(spec: LatticeSpec, m: Model, mc: MCConfig) -> Observables:
    """Single-site Metropolis over the internal spins, vectorised over chains."""
    internal = spec.internal
    if not internal:
        raise DomainError("lattice has no internal sites")
    gamma = isinstance(m, GammaModel)
    ell = isinstance(m, EllipticModel)
    pos = {k: a for a, k in enumerate(internal)}
    rng = np.random.default_rng(mc.seed)
    C, N = mc.chains, len(internal)
    x = np.zeros((C, N)) + (0.25 if not gamma else 0.1)
    n = np.zeros((C, N), dtype=int)
    nbrs = {k: [] for k in internal}
    live_edges = [e for e in spec.edges if not (e.i in spec.fixed and e.j in spec.fixed)]
    for e in live_edges:
        for a, b in ((e.i, e.j), (e.j, e.i)):
            if a in nbrs:
                nbrs[a].append((b, e.spectral, a == e.i))

    def spin_at(site, xs, ns):
        if site in spec.fixed:
            s = spec.fixed[site]
            return (np.full(C, s.x), np.full(C, s.n)) if gamma else (np.full(C, s.x),)
        a = pos[site]
        return (xs[:, a], ns[:, a]) if gamma else (xs[:, a],)

    def grouped_log_edge(terms):
        """Sum of real log W over (spectral, first-spin, second-spin) terms, one call per spectral value."""
        groups: dict = {}
        for a, s1, s2 in terms:
            groups.setdefault(a, []).append((s1, s2))
        acc = 0.0
        for a, pairs in groups.items():
            k = len(pairs[0][0])
            args = [np.stack([p[0][c] for p in pairs]) for c in range(k)]
            args += [np.stack([p[1][c] for p in pairs]) for c in range(k)]
            lw = real_log_edge(m, a, *args)
            if not np.all(np.isfinite(lw)):
                raise ArithmeticError("non-positive or non-finite weight encountered")
            acc = acc + lw.sum(axis=0)
        return acc

    def local_pair(site, old, cand, xs, ns):
        """Local log-weight of the current and the proposed spin, in one batch."""
        both = tuple(np.concatenate([o, c]) for o, c in zip(old, cand))
        terms = []
        for other, spec_val, first in nbrs[site]:
            oc = tuple(np.tile(v, 2) for v in spin_at(other, xs, ns))
            terms.append((spec_val, both, oc) if first else (spec_val, oc, both))
        acc = _log_site(m, *both) + grouped_log_edge(terms)
        return acc[:C], acc[C:]

    edge_groups: dict = {}
    for k, e in enumerate(live_edges):
        edge_groups.setdefault(e.spectral, []).append(k)

    def edge_logs(xs, ns):
        out = np.empty((C, len(live_edges)))
        for a, ks in edge_groups.items():
            s1 = [spin_at(live_edges[k].i, xs, ns) for k in ks]
            s2 = [spin_at(live_edges[k].j, xs, ns) for k in ks]
            dim = len(s1[0])
            args = [np.stack([v[c] for v in s1]) for c in range(dim)]
            args += [np.stack([v[c] for v in s2]) for c in range(dim)]
            out[:, ks] = real_log_edge(m, a, *args).T
        return out

    keep = mc.sweeps - mc.burn_in
    samples = np.empty((keep, C, N, 2 if gamma else 1))
    series = np.empty((keep, C, len(live_edges)))
    accepted = proposed = 0
    n_moved = False
    for sweep in range(mc.sweeps):
        for k in internal:
            a = pos[k]
            old = tuple(v.copy() for v in spin_at(k, x, n))
            xp = x[:, a] + mc.x_step * rng.standard_normal(C)
            if ell:
                xp = np.mod(xp, math.pi)
            if gamma:
                hop = rng.random(C) < mc.n_step_prob
                step = np.where(rng.random(C) < 0.5, -1, 1)
                np_ = n[:, a] + np.where(hop, step, 0)
                cand = (xp, np_)
            else:
                cand = (xp,)
            cur_k, new = local_pair(k, old, cand, x, n)
            with np.errstate(invalid="ignore"):
                ok = np.log(rng.random(C)) < new - cur_k
            x[:, a] = np.where(ok, xp, x[:, a])
            if gamma:
                moved = ok & (np_ != n[:, a])
                n_moved = n_moved or bool(moved.any())
                n[:, a] = np.where(ok, np_, n[:, a])
            accepted += int(ok.sum())
            proposed += C
        if sweep >= mc.burn_in:
            t = sweep - mc.burn_in
            samples[t, :, :, 0] = x
            if gamma:
                samples[t, :, :, 1] = n
            series[t] = edge_logs(x, n)
    acc_rate = accepted / proposed
    if acc_rate < 0.01:
        warnings.warn(f"acceptance {acc_rate:.3%} below 1%", ErgodicityWarning, stacklevel=2)
    if gamma and not n_moved:
        warnings.warn("integer spin components never moved", ErgodicityWarning, stacklevel=2)
    mean = series.mean(axis=(0, 1))
    tau = _integrated_autocorr(series.mean(axis=2))
    # per-edge autocorrelation error; the spread of chain means is added as
    # a check because heavy-tailed excursions can make either one optimistic
    taus = np.array([_integrated_autocorr(series[:, :, k]) for k in range(series.shape[2])])
    stderr = series.std(axis=(0, 1)) * np.sqrt(taus / (keep * C))
    if C > 1:
        chain_se = series.mean(axis=0).std(axis=0, ddof=1) / math.sqrt(C)
        stderr = np.maximum(stderr, chain_se)
    return Observables(mean, stderr, acc_rate, tau, samples, series)
