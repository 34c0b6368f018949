"""Arbitrary-precision reference values used as frozen constants in the tests.

Each value is computed straight from a defining series, product or
integral with mpmath at 40 digits, independently of the yblab code.
Run: python scripts/oracles.py
"""

import mpmath as mp

mp.mp.dps = 40


def log_gamma_1pi():
    return mp.loggamma(1 + 1j)


def theta1_half_pi():
    return mp.jtheta(1, mp.pi / 2, mp.mpf("0.1"))


def kappa_elliptic(p, q, frac):
    p, q = mp.mpf(p), mp.mpf(q)
    eta = -(mp.log(p) + mp.log(q)) / 2
    a = frac * eta

    def term(n):
        return mp.exp(4 * a * n) / (n * (p**n - p**-n) * (q**n - q**-n) * (p**n * q**n + p**-n * q**-n))

    s = mp.nsum(lambda n: term(n) + term(-n), [1, mp.inf])
    return mp.exp(s)


def elliptic_gamma(z, p, q):
    z, p, q = mp.mpc(z), mp.mpf(p), mp.mpf(q)
    out = mp.mpf(1)
    for j in range(200):
        for k in range(200):
            x = q ** (2 * j + 1) * p ** (2 * k + 1)
            if x < mp.mpf(10) ** -45:
                break
            out *= (1 - mp.exp(2j * z) * x) / (1 - mp.exp(-2j * z) * x)
    return out


def ncqdl(z, b):
    """phi(z) from its contour integral on Im y = delta, delta below the first pole."""
    z, b = mp.mpc(z), mp.mpf(b)
    d = mp.pi * min(b, 1 / b) / 2
    f = lambda t: mp.exp(-2j * (t + 1j * d) * z) / ((t + 1j * d) * mp.sinh((t + 1j * d) * b) * mp.sinh((t + 1j * d) / b))
    return mp.exp(mp.quad(f, [-mp.inf, -5, 0, 5, mp.inf]) / 4)


def kappa_hyperbolic(alpha, b):
    alpha, b = mp.mpf(alpha), mp.mpf(b)
    eta = (b + 1 / b) / 2
    d = min(mp.pi * min(b, 1 / b), mp.pi / (4 * eta)) / 2
    y = lambda t: t + 1j * d
    f = lambda t: mp.exp(4 * y(t) * alpha) / (y(t) * mp.sinh(y(t) * b) * mp.sinh(y(t) / b) * mp.cosh(2 * y(t) * eta))
    integral = mp.quad(f, [-mp.inf, -5, 0, 5, mp.inf]) / 8
    return mp.exp(integral + 1j * mp.pi * alpha**2 - 1j * mp.pi * eta**2 / 3 + 1j * mp.pi / 24)


def gamma_edge(beta, x, n, y, m):
    beta = mp.mpf(beta)
    g = mp.gamma
    pre = g((1 + beta) / 2) / g((1 - beta) / 2)
    num = den = mp.mpf(1)
    for s, k in ((x + y, m + n), (x - y, m - n)):
        c, d = (1j * s - k) / 2, (1j * s + k) / 2
        num *= g((1 - beta) / 2 + c) * g((1 - beta) / 2 - c)
        den *= g((1 + beta) / 2 + d) * g((1 + beta) / 2 - d)
    return pre * num / den


if __name__ == "__main__":
    print("log_gamma(1+i)          ", mp.nstr(log_gamma_1pi(), 20))
    print("theta1(pi/2 | 0.1)      ", mp.nstr(theta1_half_pi(), 20))
    print("kappa_ell p=q=0.3 a=eta/4", mp.nstr(kappa_elliptic("0.3", "0.3", mp.mpf(1) / 4), 20))
    print("Phi(0.2+0.1i) p=.3 q=.5 ", mp.nstr(elliptic_gamma(mp.mpc("0.2", "0.1"), "0.3", "0.5"), 20))
    print("phi(0.2) b=1.3          ", mp.nstr(ncqdl("0.2", "1.3"), 20))
    print("phi(0.1+0.3i) b=1.1     ", mp.nstr(ncqdl(mp.mpc("0.1", "0.3"), "1.1"), 20))
    print("kappa_hyp b=1 a=0.25    ", mp.nstr(kappa_hyperbolic("0.25", 1), 20))
    print("kappa_hyp b=1.2 a=0.4   ", mp.nstr(kappa_hyperbolic("0.4", "1.2"), 20))
    print("W_gamma 1/2 at zeros    ", mp.nstr(gamma_edge("0.5", 0, 0, 0, 0), 20))
    print("W_gamma .35 (.7,1|-.4,2)", mp.nstr(gamma_edge("0.35", mp.mpf("0.7"), 1, mp.mpf("-0.4"), 2), 20))
