"""Weak inversion residuals for the elliptic model over a grid of points and test functions."""

import argparse
import math
import time
from dataclasses import dataclass

import numpy as np

from yblab import verify
from yblab.cli import WEAK_POINTS
from yblab.weights import EllipticModel

FUNCTIONS = {
    "one": lambda y: np.ones_like(np.asarray(y, float)),
    "sin^2": lambda y: np.sin(y) ** 2,
    "cos 2y": lambda y: np.cos(2 * y),
    "sin 2y": lambda y: np.sin(2 * y),
    "exp": lambda y: np.exp(np.cos(2 * y) + 0.5 * np.sin(4 * y)),
}


@dataclass(frozen=True)
class WeakConfig:
    p: float = 0.3
    q: float = 0.3
    alpha_frac: float = 0.3
    points: tuple = WEAK_POINTS + (math.pi / 2 - 0.03,)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=WeakConfig.p)
    ap.add_argument("--q", type=float, default=WeakConfig.q)
    ap.add_argument("--alpha-frac", type=float, default=WeakConfig.alpha_frac)
    a = ap.parse_args()
    cfg = WeakConfig(a.p, a.q, a.alpha_frac)
    m = EllipticModel.from_nomes(cfg.p, cfg.q)
    print(f"{'x':>8} {'time':>7} " + " ".join(f"{k:>9}" for k in FUNCTIONS))
    for x in cfg.points:
        t0 = time.perf_counter()
        kern = verify.weak_inversion_kernel(m, cfg.alpha_frac * m.eta, x)
        dt = time.perf_counter() - t0
        print(f"{x:8.4f} {dt:6.2f}s " + " ".join(f"{kern.residual(f):9.1e}" for f in FUNCTIONS.values()))


if __name__ == "__main__":
    main()
