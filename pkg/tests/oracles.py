"""Slow independent references used to freeze expected values.

Everything here is deliberately naive: trial division, direct summation,
high-precision mpmath.  Library results are checked against these, never
the other way around.
"""

import math
from fractions import Fraction

import mpmath as mp
import sympy


def trial_spf(n: int) -> int:
    """Smallest prime factor by trial division."""
    if n < 2:
        raise ValueError(n)
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def trial_factorize(n: int) -> list[tuple[int, int]]:
    out = []
    while n > 1:
        p = trial_spf(n)
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def brute_crt(congruences, limit: int):
    """Smallest nonnegative x meeting every (a, m), by scanning; None if
    nothing below limit works."""
    for x in range(limit):
        if all(x % m == a for a, m in congruences):
            return x
    return None


def naive_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in trial_factorize(n)) if n > 1 else n == 1


def modified_value(chi, r: int, z: complex, n: int) -> complex:
    """chi_{r,z}(n) from a full factorization."""
    val = 1 + 0j
    for p, e in sympy.factorint(n).items():
        base = z if p == int(p) and int(p) == r else complex(chi(int(p)))
        val *= base**e
    return val


def direct_modified_sum(chi, r: int, z: complex, x: int) -> complex:
    """Sigma(x) by evaluating every n <= x from its factorization."""
    return sum(modified_value(chi, r, z, n) for n in range(1, x + 1))


def spec_value(spec, n: int) -> complex:
    """f(n) for a MultFnSpec via sympy factorization, no sieving."""
    from multsum.multfun import prime_unit_value

    val = 1 + 0j
    for p, e in sympy.factorint(n).items():
        val *= prime_unit_value(spec, int(p)) ** e
    if spec.scale_r:
        val *= n ** (-spec.scale_r)
    return val


def hurwitz_l(s: complex, chi, dps: int = 30) -> complex:
    """L(s, chi) through mpmath's Hurwitz zeta; valid for Re(s) > 0 when chi
    is non-principal."""
    with mp.workdps(dps):
        q = chi.modulus
        acc = mp.mpc(0)
        for a in range(1, q):
            c = complex(chi(a))
            if c:
                acc += mp.mpc(c) * mp.zeta(mp.mpc(s), mp.mpf(a) / q)
        return complex(mp.mpc(q) ** (-mp.mpc(s)) * acc)


def averaged_l(s: complex, chi, K: int = 200_000) -> complex:
    """L(s, chi) from brute partial sums averaged over one character period.

    A completely different scheme from Euler-Maclaurin: the period average
    cancels the leading oscillation of the tail, leaving O(K^{-Re s - 1}).
    """
    import numpy as np

    q = chi.modulus
    n = np.arange(1, K + q, dtype=np.float64)
    coef = chi.values[np.arange(1, K + q, dtype=np.int64) % q]
    terms = coef * np.exp(-complex(s) * np.log(n))
    partials = np.cumsum(terms)
    return complex(np.mean(partials[K - 1 : K - 1 + q]))


def mp_zeta(s: complex, dps: int = 30) -> complex:
    with mp.workdps(dps):
        return complex(mp.zeta(mp.mpc(s)))


def ruzsa_density(exceptions: dict[int, Fraction]) -> Fraction:
    """Mean density of One perturbed at finitely many primes, exactly:
    prod (1 - 1/p) / (1 - f(p)/p)."""
    c = Fraction(1)
    for p, w in exceptions.items():
        c *= (1 - Fraction(1, p)) / (1 - Fraction(w) / p)
    return c


def window_sum_modified(chi, r: int, z: complex, lo: int, hi: int) -> complex:
    """Sum of chi_{r,z}(n) over lo < n <= hi by full factorization."""
    return sum(modified_value(chi, r, z, n) for n in range(lo + 1, hi + 1))
