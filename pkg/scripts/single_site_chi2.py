"""Chi-squared test of single-site gamma MC samples against the exact marginal density."""

import argparse
import math

import numpy as np
from scipy import integrate, stats

from yblab.lattice import LatticeSpec, MCConfig, mc_run
from yblab.weights import DualSpin, GammaModel, real_log_edge

OUTER = (DualSpin(0.3, 1), DualSpin(-0.5, 0), DualSpin(1.1, -1))
BETA = (0.3, 0.3, 0.4)
X_EDGES = np.array([-np.inf, -1.5, -0.75, 0.0, 0.75, 1.5, np.inf])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--sweeps", type=int, default=6000)
    a = ap.parse_args()
    g = GammaModel()
    obs = mc_run(LatticeSpec.star(OUTER, BETA, 1.0), g,
                 MCConfig(sweeps=a.sweeps, burn_in=500, seed=a.seed, chains=16, x_step=1.0))
    thin = max(1, math.ceil(2 * obs.autocorr_time))
    s = obs.samples[::thin, :, 0, :].reshape(-1, 2)

    def density(x, n):
        lw = sum(real_log_edge(g, 1 - b, o.x, o.n, x, n) for o, b in zip(OUTER, BETA))
        return g.site(x, n) * np.exp(lw)

    cell = {(n, k): integrate.quad(lambda x: float(density(np.array(x), np.array(n))), lo, hi, limit=200)[0]
            for n in range(-40, 41) for k, (lo, hi) in enumerate(zip(X_EDGES[:-1], X_EDGES[1:]))}
    z = sum(cell.values())
    observed, expected = [], []
    for n in range(-3, 4):
        for k, (lo, hi) in enumerate(zip(X_EDGES[:-1], X_EDGES[1:])):
            observed.append(np.sum((s[:, 1] == n) & (s[:, 0] >= lo) & (s[:, 0] < hi)))
            expected.append(cell[(n, k)] / z * len(s))
    observed.append(len(s) - sum(observed))
    expected.append(len(s) - sum(expected))
    observed, expected = np.array(observed, float), np.array(expected)
    big = expected > 5
    res = stats.chisquare(np.append(observed[big], observed[~big].sum()),
                          np.append(expected[big], expected[~big].sum()))
    print(f"samples {len(s)} (thin {thin}), chi2 {res.statistic:.2f}, p = {res.pvalue:.3f}")


if __name__ == "__main__":
    main()
