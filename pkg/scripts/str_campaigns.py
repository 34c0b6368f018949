"""Run star-triangle campaigns for all model families and print a summary per family."""

import cmath
import time

from yblab.cli import STR_DEFAULTS
from yblab.verify import str_campaign
from yblab.weights import EllipticModel, GammaModel, HyperbolicModel

GAMMA_R = 2.0

CASES = [
    ("elliptic p=q=0.3", EllipticModel.from_nomes(0.3, 0.3), STR_DEFAULTS["elliptic"], 1.0),
    ("elliptic p=0.3 q=0.5", EllipticModel.from_nomes(0.3, 0.5), STR_DEFAULTS["elliptic"], 1.0),
    ("hyperbolic b=1.3", HyperbolicModel.from_b(1.3), STR_DEFAULTS["hyperbolic"], 1.0),
    ("hyperbolic |b|=1", HyperbolicModel.from_b(cmath.exp(1j * (cmath.pi / 2 - 0.6))), STR_DEFAULTS["hyperbolic"], 1.0),
    ("gamma", GammaModel(), STR_DEFAULTS["gamma"], GAMMA_R),
]


def main():
    for label, m, d, r in CASES:
        t0 = time.perf_counter()
        reps = str_campaign(m, d["count"], d["tol"], seed=7, r_expected=r)
        dt = time.perf_counter() - t0
        worst = max(x.rel_residual for x in reps)
        print(f"{label:<22} {sum(x.passed for x in reps)}/{len(reps)} passed, max rel {worst:.2e}, {dt:.1f} s")


if __name__ == "__main__":
    main()
