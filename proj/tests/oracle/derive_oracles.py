"""Independent reference values frozen into the C++ unit tests.

Run with python3; needs mpmath only. Every number printed here is pasted
into a test with the name shown.
"""
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 40


def ncdf(x, var=1):
    return mp.ncdf(x, 0, mp.sqrt(var))


def cantor_unit(depth):
    ivs = [(Fraction(0), Fraction(1))]
    for n in range(1, depth + 1):
        removed = Fraction(1, (n + 1) ** 2)
        nxt = []
        for lo, hi in ivs:
            keep = (hi - lo) * (1 - removed) / 2
            nxt += [(lo, lo + keep), (hi - keep, hi)]
        ivs = nxt
    return ivs


def cantor_gauss_mass(r, depth):
    s = mp.mpf(0)
    for lo, hi in cantor_unit(depth):
        a = -r + 2 * r * mp.mpf(lo.numerator) / lo.denominator
        b = -r + 2 * r * mp.mpf(hi.numerator) / hi.denominator
        s += ncdf(b) - ncdf(a)
    return s


def main():
    print("gaussian_cdf_1", mp.nstr(ncdf(1), 17))
    print("gaussian_mass_pm1", mp.nstr(ncdf(1) - ncdf(-1), 17))
    t0 = mp.mpf("0.5")
    xstar = mp.findroot(lambda x: mp.npdf(x, 0, mp.sqrt(t0)) - mp.npdf(x, 0, 1), 0.8)
    print("crossing_radius_half", mp.nstr(xstar, 17))
    # Cost N(0, t0) -> N(0, 1) at 0 as a t-integral of the heat kernel (d/dt Phi = p_t / 2),
    # cross-checked against the closed form E(-X)^+ = sigma / sqrt(2 pi).
    heat = mp.quad(lambda t: 1 / mp.sqrt(2 * mp.pi * t), [0.25, 1]) / 2
    closed = (1 - mp.mpf("0.5")) / mp.sqrt(2 * mp.pi)
    assert abs(heat - closed) < mp.mpf(10) ** -25
    print("cost_quarter_to_one_at_0", mp.nstr(heat, 17))
    r = mp.mpf("0.6")
    c = 1 - cantor_gauss_mass(r, 8)
    print("c_r06_depth8", mp.nstr(c, 17))
    phi0 = mp.quad(lambda t: 1 / mp.sqrt(2 * mp.pi * t), [t0, 1]) / (2 * c)
    print("cost_at_0_r06_depth8", mp.nstr(phi0, 17))
    print("unit_length_depth8", sum(hi - lo for lo, hi in cantor_unit(8)))
    # Hermite coefficients of the indicator of (a, inf): E[1{X>a} He_n(X)] = pdf(a) He_{n-1}(a).
    a = mp.mpf("0.3")
    for n in (1, 2, 5):
        print("hermite_step_coeff_%d" % n, mp.nstr(mp.npdf(a) * mp.hermite(n - 1, a / mp.sqrt(2)) * 2 ** (-(n - 1) / mp.mpf(2)) / mp.sqrt(mp.factorial(n)), 17))
    # Levy distance between F = N(0,1) and G = N(0.1,1): only the lower
    # condition F(x - d) - d <= G(x) binds; bisect on its worst violation.
    xs = [mp.mpf(i) / 400 for i in range(-2400, 2401)]
    def violation(d):
        return max(mp.ncdf(x - d) - mp.ncdf(x - mp.mpf("0.1")) - d for x in xs)
    lo, hi = mp.mpf(0), mp.mpf("0.1")
    for _ in range(60):
        mid = (lo + hi) / 2
        if violation(mid) > 0:
            lo = mid
        else:
            hi = mid
    print("levy_normal_shift_0.1", mp.nstr(hi, 12))

if __name__ == "__main__":
    main()
