"""Reference KL(Binomial(n, 1/2) || discretized N(n/2, n/4)) at 60 significant digits.

Terms with P(i) < 1e-90 are dropped: |P ln(P/Q)| is then below 1e-80,
far under the 1e-9 relative tolerance of the values being checked.
"""
import sys
from mpmath import mp, mpf, binomial, ncdf, log, sqrt, nstr

mp.dps = 60


def kl_bits(n):
    sigma = sqrt(mpf(n)) / 2
    half = mpf(n) / 2
    two_n = mpf(2) ** n
    total = mpf(0)
    cutoff = mpf(10) ** -90
    for i in range(n // 2 + 1):
        p = binomial(n, i) / two_n
        if p < cutoff:
            continue
        q = ncdf((i + mpf(1) / 2 - half) / sigma) - ncdf((i - mpf(1) / 2 - half) / sigma)
        term = p * log(p / q)
        total += term if 2 * i == n else 2 * term
    return total / log(2)


def tail_mass(n, multiplier=10):
    width = multiplier * sqrt(log(n, 2)) * sqrt(mpf(n)) / 2
    two_n = mpf(2) ** n
    return sum(binomial(n, i) for i in range(n + 1) if abs(i - mpf(n) / 2) > width) / two_n


if __name__ == "__main__":
    ns = [int(a) for a in sys.argv[1:]] or [256, 1024, 4096, 16384, 65536]
    for n in ns:
        print(n, nstr(kl_bits(n), 30), flush=True)
