"""Reference values for the Wilson interval, truncation tails and mixture ratios (60 digits)."""
from mpmath import mp, mpf, binomial, sqrt, erfinv, exp, log, nstr

mp.dps = 60


def wilson(successes, trials, confidence):
    z = sqrt(2) * erfinv(mpf(confidence))
    n = mpf(trials)
    p = mpf(successes) / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return centre - half, centre + half


def typical_tail(t, q, half_width):
    q = mpf(q)
    centre = t * q
    return sum(binomial(t, w) * q**w * (1 - q) ** (t - w) for w in range(t + 1) if abs(w - centre) > half_width)


def gaussian_mixture(x, ell, alpha):
    t = len(x)
    rate = mpf(ell) / t
    total = mpf(0)
    for s in range(1 << t):
        size = bin(s).count("1")
        shift = sum(alpha * x[j] - alpha**2 / 2 for j in range(t) if s >> j & 1)
        total += rate**size * (1 - rate) ** (t - size) * exp(shift)
    return total


if __name__ == "__main__":
    lo, hi = wilson(50, 100, mpf("0.99"))
    print("wilson(50,100,0.99)", nstr(lo, 25), nstr(hi, 25))
    lo, hi = wilson(3, 200, mpf("0.99"))
    print("wilson(3,200,0.99)", nstr(lo, 25), nstr(hi, 25))
    print("typical_tail(400,1/2,20)", nstr(typical_tail(400, "0.5", 20), 25))
    print("typical_tail(64,1/4,6)", nstr(typical_tail(64, "0.25", 6), 25))
    print("mixture t=4 ell=2 alpha=1/2 x=(1,-1,0,2)", nstr(gaussian_mixture([1, -1, 0, 2], 2, mpf("0.5")), 25))
