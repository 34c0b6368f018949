"""Print deviation sequences for the hyperbolic and strong-coupling limit probes."""

from yblab.cli import HYPERBOLIC_LIMIT_EPS, HYPERBOLIC_LIMIT_PROBES, STRONG_LIMIT_DELTA, STRONG_LIMIT_PROBES
from yblab.verify import LimitSchedule, hyperbolic_limit_residual, strong_coupling_residual


def show(sw):
    print(f"  {sw.label:<28} {' '.join(f'{d:10.3e}' for d in sw.deviations)}  monotone={sw.monotone}")


def main():
    print("hyperbolic limit, eps =", HYPERBOLIC_LIMIT_EPS)
    for pr in HYPERBOLIC_LIMIT_PROBES:
        print(" probe", pr)
        s = hyperbolic_limit_residual(LimitSchedule(HYPERBOLIC_LIMIT_EPS, pr))
        for sw in (s.weight, s.weight_normalized, s.site):
            show(sw)
    print("strong coupling, delta =", STRONG_LIMIT_DELTA)
    for pr in STRONG_LIMIT_PROBES:
        print(" probe", pr)
        s = strong_coupling_residual(LimitSchedule(STRONG_LIMIT_DELTA, pr))
        for sw in (s.weight, s.weight_corrected, s.site, s.kappa, s.kappa_corrected):
            show(sw)


if __name__ == "__main__":
    main()
