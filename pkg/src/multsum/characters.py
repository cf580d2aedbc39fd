"""Dirichlet characters and modified characters.

A modified character agrees with a character chi of modulus q at every
prime except one redirected prime r coprime to q, where it takes a chosen
unimodular value z.  Its restricted partial sums satisfy an exact
self-similar recursion that makes sums at astronomically large x cheap,
and the recursion drives both the growth-witness construction and the
window-cancellation check that forces z = chi(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy

from . import arith
from .errors import CapacityError, SearchError
from .multfun import CharacterTwist, MultFnSpec, make_spec, unit_pow

CHARACTER_MODULUS_LIMIT = 10**6


@dataclass(eq=False)
class DirichletCharacter:
    """One character mod q, tabulated on residues 0..q-1.

    values[a] = chi(a); chi(n) for any n is values[n % q].  `exponents` is
    the dual tuple pairing with the unit group's generators, and `index` is
    the character's position in character_table(q) ordering (0 = principal).
    """

    modulus: int
    index: int
    values: np.ndarray
    exponents: tuple[int, ...]
    principal: bool
    real: bool
    conductor: int

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])


def _root_of_unity(k: int, order: int) -> complex:
    """exp(2*pi*i*k/order), exact when it lands on a fourth root of unity."""
    k %= order
    if 4 * k % order == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[4 * k // order]
    ang = 2.0 * math.pi * k / order
    return complex(math.cos(ang), math.sin(ang))


def _group_lcm(orders: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    lcm = 1
    for d in orders:
        lcm = lcm * d // math.gcd(lcm, d)
    return lcm, tuple(lcm // d for d in orders)


def _pairing_table(
    q: int, ug: arith.UnitGroup, cs: tuple[int, ...], weights: tuple[int, ...], lcm: int
) -> np.ndarray:
    """pair[a] = exponent of chi(a) as a power of exp(2*pi*i/lcm); -1 off
    the coprime residues."""
    pair = np.full(max(q, 1), -1, dtype=np.int64)
    for a, ts in ug.dlog.items():
        pair[a] = sum(c * t * w for c, t, w in zip(cs, ts, weights)) % lcm
    return pair


def _conductor(q: int, pair: np.ndarray, lcm: int) -> int:
    """Smallest d | q with chi trivial on every residue that is 1 mod d."""
    for d in range(1, q + 1):
        if q % d:
            continue
        if all(pair[a] <= 0 for a in range(1 % d, q, d)):
            return d
    return q


def _build_character(
    q: int, ug: arith.UnitGroup, cs: tuple[int, ...], index: int
) -> DirichletCharacter:
    lcm, weights = _group_lcm(ug.orders)
    pair = _pairing_table(q, ug, cs, weights, lcm)
    values = np.zeros(max(q, 1), dtype=np.complex128)
    for a in np.flatnonzero(pair >= 0):
        values[a] = _root_of_unity(int(pair[a]), lcm)
    return DirichletCharacter(
        modulus=q,
        index=index,
        values=values,
        exponents=cs,
        principal=all(c == 0 for c in cs),
        real=all(2 * c % d == 0 for c, d in zip(cs, ug.orders)),
        conductor=_conductor(q, pair, lcm),
    )


def _index_of(cs: tuple[int, ...], orders: tuple[int, ...]) -> int:
    idx = 0
    for c, d in zip(cs, orders):
        idx = idx * d + c
    return idx


def _decode_index(index: int, orders: tuple[int, ...]) -> tuple[int, ...]:
    cs: list[int] = []
    rem = index
    for d in reversed(orders):
        rem, c = divmod(rem, d)
        cs.append(c)
    if rem:
        raise ValueError("character index out of range")
    return tuple(reversed(cs))


def _check_modulus(q: int) -> None:
    if not 1 <= q <= CHARACTER_MODULUS_LIMIT:
        raise CapacityError(
            f"character modulus {q} outside 1..{CHARACTER_MODULUS_LIMIT}"
        )


def character_table(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q, index 0 principal.  Cost grows as
    phi(q)^2; meant for small moduli (single lookups scale further)."""
    _check_modulus(q)
    ug = arith.unit_group(q)
    duals: list[tuple[int, ...]] = [()]
    for d in ug.orders:
        duals = [tup + (c,) for tup in duals for c in range(d)]
    return [_build_character(q, ug, cs, i) for i, cs in enumerate(duals)]


def character_by_index(q: int, index: int | str) -> DirichletCharacter:
    """Look up one character by table position, or by "real" for the unique
    real non-principal character when there is exactly one."""
    _check_modulus(q)
    ug = arith.unit_group(q)
    if isinstance(index, str) and index.strip().lower() == "real":
        cands: list[tuple[int, ...]] = [()]
        for d in ug.orders:
            opts = [0] + ([d // 2] if d % 2 == 0 else [])
            cands = [tup + (c,) for tup in cands for c in opts]
        reals = [cs for cs in cands if any(cs)]
        if len(reals) != 1:
            raise ValueError(
                f"modulus {q} has {len(reals)} real non-principal characters; "
                "pick one by numeric index"
            )
        cs = reals[0]
        return _build_character(q, ug, cs, _index_of(cs, ug.orders))
    i = int(index)
    phi = arith.euler_phi(q)
    if not 0 <= i < phi:
        raise ValueError(f"character index {i} outside 0..{phi - 1} for q={q}")
    return _build_character(q, ug, _decode_index(i, ug.orders), i)


# ---------------------------------------------------------------------------
# modified characters


def modified_spec(chi: DirichletCharacter, r: int, z: complex) -> MultFnSpec:
    """Spec of the modified character: chi everywhere except value z at r."""
    _validate_modification(chi, r, z)
    return make_spec(CharacterTwist(chi=chi, t=0.0), exceptions={r: complex(z)})


def _validate_modification(chi: DirichletCharacter, r: int, z: complex) -> None:
    if not sympy.isprime(r):
        raise ValueError(f"redirected prime r={r} is not prime")
    if math.gcd(r, chi.modulus) != 1:
        raise ValueError(
            f"r={r} divides the modulus {chi.modulus}; restrict the character "
            "to the r-free part of the modulus first"
        )
    if abs(abs(complex(z)) - 1.0) > 1e-12:
        raise ValueError(f"z must be unimodular, got |z|={abs(complex(z)):.6g}")


@dataclass(eq=False)
class RecursionState:
    """Precomputed data for restricted partial sums of a modified character.

    s_table[j] = S(j) = sum_{n<=j, gcd(n,r)=1} chi(n) for 0 <= j <= r*q, so
    S(x) = (x // (r*q)) * s_period + s_table[x % (r*q)] in O(1), and the full
    modified sum needs one S value per power of r below x.
    """

    chi: DirichletCharacter
    r: int
    z: complex
    period: int
    s_table: np.ndarray
    s_period: complex
    exact: bool
    degenerate: bool  # z == chi(r): the modification changes nothing


def recursion_state(chi: DirichletCharacter, r: int, z: complex) -> RecursionState:
    _validate_modification(chi, r, z)
    z = complex(z)
    q = chi.modulus
    period = r * q
    vals = chi.values[np.arange(period + 1) % max(q, 1)].copy()
    vals[0] = 0
    vals[r::r] = 0
    s_table = np.cumsum(vals)
    exact = z in (1 + 0j, -1 + 0j, 1j, -1j) and all(
        complex(v) in (0j, 1 + 0j, -1 + 0j, 1j, -1j) for v in chi.values
    )
    degenerate = abs(z - chi(r)) <= 1e-12
    return RecursionState(
        chi=chi,
        r=r,
        z=z,
        period=period,
        s_table=s_table,
        s_period=complex(s_table[period]),
        exact=exact,
        degenerate=degenerate,
    )


def s_restricted(state: RecursionState, x: int) -> complex:
    """S(x) = sum_{n<=x, gcd(n,r)=1} chi(n), O(1) via the period table."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    k, j = divmod(x, state.period)
    if k and state.s_period != 0:
        return k * state.s_period + complex(state.s_table[j])
    return complex(state.s_table[j])


def sigma_recursion(state: RecursionState, x: int) -> complex:
    """Sigma(x) = sum_{n<=x} chi_mod(n) as sum_k z^k S(x // r^k); exact in
    integer arithmetic whenever all values are fourth roots of unity."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    total = 0j
    k = 0
    while x > 0:
        total += unit_pow(state.z, k) * s_restricted(state, x)
        x //= state.r
        k += 1
    return total


def sigma_many(state: RecursionState, xs: np.ndarray) -> np.ndarray:
    """Vectorized Sigma over an int64 array of nonnegative arguments."""
    xs = np.asarray(xs, dtype=np.int64)
    total = np.zeros(xs.shape, dtype=np.complex128)
    cur = xs.copy()
    k = 0
    while np.any(cur > 0):
        quot, rem = np.divmod(cur, state.period)
        sval = state.s_table[rem]
        if state.s_period != 0:
            sval = sval + quot * state.s_period
        total += unit_pow(state.z, k) * sval
        cur //= state.r
        k += 1
    return total


def iterate_check(state: RecursionState, x: int, y: int, K: int) -> complex:
    """Residual of the exact stacking identity
    Sigma(r^K x + y) - z^K Sigma(x) - Sigma(y), for q | x, q | y, y < r^K."""
    q = state.chi.modulus
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if x < 1 or x % q != 0:
        raise ValueError(f"x={x} must be a positive multiple of q={q}")
    if y < 0 or y % q != 0:
        raise ValueError(f"y={y} must be 0 or a positive multiple of q={q}")
    if y >= state.r**K:
        raise ValueError(f"y={y} must be < r^K = {state.r ** K}")
    lhs = sigma_recursion(state, state.r**K * x + y)
    rhs = unit_pow(state.z, K) * sigma_recursion(state, x) + sigma_recursion(state, y)
    return lhs - rhs


# ---------------------------------------------------------------------------
# growth witnesses


@dataclass(eq=False)
class GrowthWitness:
    """A point n <= X where |Sigma(n)| is provably large, built by stacking
    scaled copies of a seed block with Sigma != 0 along powers of r."""

    regime: str  # "witness" or "zero-sum"
    X: int
    A: int | None = None
    K: int | None = None
    seed_sigma: complex = 0j
    m_list: tuple[int, ...] = ()
    n: int | None = None
    predicted: complex = 0j
    measured: complex = 0j
    lower_bound: float = 0.0
    bound_ok: bool = False
    exact_match: bool = False


def growth_witness(
    state: RecursionState,
    X: int,
    density: float | None = None,
    a_max: int | None = None,
) -> GrowthWitness:
    """Build a growth witness at scale X.

    Seed blocks A = mq are scanned for Sigma(A) != 0 up to a_max (default
    1e4 * q); when every Sigma(mq) vanishes the result reports the zero-sum
    regime instead.  Copy positions m are capped at density * log(X)
    (default 1/(10*K*r)) and filtered so each phase z^(K*m) stays within
    1/100 of 1, which keeps the stacked sum within 1% of (J+1)*|Sigma(A)|.
    """
    if X < 1:
        raise ValueError(f"X must be >= 1, got {X}")
    q = state.chi.modulus
    if a_max is None:
        a_max = 10**4 * q
    seed = first_nonzero_sigma(state, max(a_max // q, 1))
    if seed is None:
        return GrowthWitness(regime="zero-sum", X=X)
    A = seed * q
    sigma_a = sigma_recursion(state, A)
    K = 1
    while state.r**K <= A:
        K += 1
    if density is None:
        density = 1.0 / (10.0 * K * state.r)
    m_cap = int(density * math.log(X))
    m_list: list[int] = []
    n = A
    tol = 1.0 / 100.0
    for m in range(1, m_cap + 1):
        if abs(unit_pow(state.z, K * m) - 1) > tol:
            continue
        step = state.r ** (m * K) * A
        if n + step > X:
            break
        m_list.append(m)
        n += step
    phases = sum(unit_pow(state.z, K * m) for m in m_list)
    predicted = sigma_a * (1 + phases)
    measured = sigma_recursion(state, n)
    j = len(m_list)
    lower = (1.0 - tol) * (j + 1) * abs(sigma_a)
    if state.exact:
        exact_match = measured == predicted
    else:
        exact_match = abs(measured - predicted) <= 1e-9 * (j + 1)
    return GrowthWitness(
        regime="witness",
        X=X,
        A=A,
        K=K,
        seed_sigma=sigma_a,
        m_list=tuple(m_list),
        n=n,
        predicted=predicted,
        measured=measured,
        lower_bound=lower,
        bound_ok=abs(measured) >= lower - 1e-9,
        exact_match=exact_match,
    )


def first_nonzero_sigma(
    state: RecursionState, M: int, chunk: int = 1 << 16
) -> int | None:
    """Smallest m <= M with Sigma(m q) != 0, or None when all of them vanish."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    q = state.chi.modulus
    tol = 0.0 if state.exact else 1e-9
    for lo in range(1, M + 1, chunk):
        hi = min(lo + chunk, M + 1)
        ms = np.arange(lo, hi, dtype=np.int64)
        sig = sigma_many(state, ms * q)
        hits = np.flatnonzero(np.abs(sig) > tol)
        if len(hits):
            return int(ms[hits[0]])
    return None


zero_sum_scan = first_nonzero_sigma


# ---------------------------------------------------------------------------
# the wraparound check that forces z = chi(r)


@dataclass(eq=False)
class RotationCheckResult:
    """Outcome of comparing two aligned length-q windows of modified values.

    The windows pair off term by term under n -> n + q*(l_m - k_m) except at
    one position; the surviving term is chi(s1)*(z - chi(r)) up to the
    common phase z^(m-1), so a nonzero gap certifies that bounded partial
    sums force z = chi(r).
    """

    m: int
    P: int
    s1: int
    s2: int
    k_m: int
    l_m: int
    window1: complex
    window2: complex
    gap: complex
    surviving: complex
    phase: complex
    cancellation_ok: bool
    forced: bool
    verdict: str


def final_rotation_check(
    chi: DirichletCharacter, r: int, z: complex, m: int, P: int
) -> RotationCheckResult:
    """Pair the window containing r^m*s1 with its shift by q*(l_m - k_m).

    Requires m >= 10*log(q)/log(r), and P a prime != r with P >= 10*q and
    P = r mod q.  Every term cancels against its partner except the one at
    n = r^m*s1, whose residue is chi(s1)*(z - chi(r)) times a phase.
    """
    _validate_modification(chi, r, z)
    z = complex(z)
    q = chi.modulus
    if m < 1 or (q > 1 and m < 10 * math.log(q) / math.log(r)):
        raise ValueError(f"m={m} below the floor 10*log(q)/log(r) for q={q}, r={r}")
    if not sympy.isprime(P):
        raise ValueError(f"P={P} is not prime")
    if P == r or P < 10 * q or (P - r) % q != 0:
        raise ValueError(f"P={P} must be a prime != r, >= 10q, congruent to r mod q")

    rm = r**m
    # s1: r^m * s1 = 1 mod q, s1 = 1 mod r
    s1_modq = pow(rm % q, -1, q) if q > 1 else 0
    s1, _ = arith.crt_solve([(s1_modq, q), (1 % r, r)])
    k_m = (rm * s1 - 1) // q
    # s2: r^(m-1) * P * s2 = 1 mod q, s2 = 1 mod r, bumped so the second
    # window sits strictly above the first
    s2_modq = pow(rm // r * P % q, -1, q) if q > 1 else 0
    s2, _ = arith.crt_solve([(s2_modq, q), (1 % r, r)])
    while rm // r * P * s2 <= rm * s1:
        s2 += q * r
    l_m = (rm // r * P * s2 - 1) // q
    if rm * s1 != q * k_m + 1 or rm // r * P * s2 != q * l_m + 1:
        raise AssertionError("window anchors drifted off the progression")

    def value(n: int) -> complex:
        v = 0
        while n % r == 0:
            n //= r
            v += 1
        return unit_pow(z, v) * chi(n)

    window1 = [value(q * k_m + j) for j in range(1, q + 1)]
    window2 = [value(q * l_m + j) for j in range(1, q + 1)]
    cancellation_ok = all(
        a == b
        for jj, (a, b) in enumerate(zip(window1, window2), start=1)
        if q * k_m + jj != rm * s1
    )
    w1 = sum(window1)
    w2 = sum(window2)
    gap = w1 - w2
    phase = unit_pow(z, m - 1)
    surviving = z * chi(s1) - chi(P) * chi(s2)
    forced = abs(surviving) > 1e-9
    verdict = (
        "bounded sums force z = chi(r)"
        if forced
        else "no obstruction: z already equals chi(r)"
    )
    return RotationCheckResult(
        m=m,
        P=P,
        s1=s1,
        s2=s2,
        k_m=k_m,
        l_m=l_m,
        window1=w1,
        window2=w2,
        gap=gap,
        surviving=surviving,
        phase=phase,
        cancellation_ok=cancellation_ok,
        forced=forced,
        verdict=verdict,
    )


def find_window_prime(chi: DirichletCharacter, r: int, bound: int = 10**7) -> int:
    """Smallest prime P >= 10q with P = r (mod q), P != r."""
    q = chi.modulus
    P = 10 * q + (r - 10 * q) % q if q > 1 else 10
    step = q if q > 1 else 1
    while P <= bound:
        if P != r and P >= 10 * q and sympy.isprime(P):
            return P
        P += step
    raise SearchError(f"no prime P = {r} mod {q} found below {bound}")
