#!/usr/bin/env python3
"""Mean values, pretentious distance, and Euler-product checks.

Three short computations: a perturbed constant function whose mean value is
an exact Euler product over the perturbed primes; the pretentious distance
that measures how far one bounded multiplicative function is from another;
and a truncated Dirichlet series converging to its product factorization.
"""

from multsum.characters import character_by_index
from multsum.multfun import CharacterTwist, Liouville, One, iter_blocks, make_spec
from multsum.pretentious import distance, perturbation_constant
from multsum.series import l_chi, residual_check, zeta

LINE = "-" * 72


def main() -> None:
    print(LINE)
    print("perturbed mean value: f = 1 except f(2) = 1/2")
    print(LINE)
    f = make_spec(One(), exceptions={2: 0.5})
    c = perturbation_constant(make_spec(One()), f)
    print(f"  predicted density c = {c.real:.15f} (= 2/3 exactly)")
    total, pos, worst = 0.0, 1, 0.0
    for blk in iter_blocks(f, 10**6):
        for k, v in enumerate(blk.tolist()):
            total += v
            x = pos + k
            if x >= 10**3:
                worst = max(worst, abs(total - 2.0 * x / 3.0))
        pos += len(blk)
    print(f"  max |M_f(x) - (2/3)x| over [1e3, 1e6] = {worst:.4f}  (stays < 1)")

    print(LINE)
    print("pretentious distance over primes up to x")
    print(LINE)
    one, lam = make_spec(One()), make_spec(Liouville())
    chi4 = make_spec(CharacterTwist(character_by_index(4, 1)))
    for x in (10, 10**3, 10**6):
        d_far = distance(one, lam, x).value
        d_chi = distance(chi4, chi4, x).value
        print(f"  x = {x:>9,}: D(1, lambda) = {d_far:.4f}   D(chi, chi) = {d_chi:.1f}")
    print("  the 1-lambda distance keeps growing: lambda pretends to be nothing")

    print(LINE)
    print("series layer: closed forms and an Euler-factor residual")
    print(LINE)
    chi5 = character_by_index(5, "real")
    print(f"  zeta(2)      = {zeta(2.0).real:.12f}  (pi^2/6)")
    print(f"  L(1, chi4)   = {l_chi(1.0, character_by_index(4, 1)).real:.12f}"
          "  (pi/4)")
    g = make_spec(CharacterTwist(chi5), exceptions={2: -chi5(2)})
    print("  g = chi mod 5 flipped at 2: truncated sum vs product factorization")
    for N in (10**4, 10**5, 10**6):
        ck = residual_check(g, chi5, 2.0, N)
        print(f"    N = {N:>9,}: residual = {ck.residual:.3e}")


if __name__ == "__main__":
    main()
