"""Window experiments and long-range profiles.

The two window constructions locate, by CRT and scanning, pairs of short
intervals whose f-sums differ by an exactly computable quantity; the
profile helpers stream partial sums to 1e7..1e9 with dyadic or decade
checkpoints; the concentration experiment measures how tightly f sits on
its predicted value along an arithmetic progression.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

from . import arith
from .errors import SearchError
from .multfun import (
    CharacterTwist,
    MultFnSpec,
    RandomRademacher,
    eval_range,
    is_exact_spec,
    is_real_spec,
    make_spec,
    prime_unit_value,
    stream_profile,
    unit_pow,
)
from .pretentious import distance, f_of_q_sum

TRIAL_LIMIT = 10**6
BIG_LIMIT = 4 * 10**18  # int64-safe bound for certified arithmetic


def thread_cap() -> int:
    """Worker cap: MULTSUM_THREADS when set, else the CPU count."""
    raw = os.environ.get("MULTSUM_THREADS", "").strip()
    if raw:
        cap = int(raw)
        if cap < 1:
            raise ValueError(f"MULTSUM_THREADS must be >= 1, got {cap}")
        return cap
    return os.cpu_count() or 1


@lru_cache(maxsize=1)
def _trial_primes() -> np.ndarray:
    return arith.primes_upto(TRIAL_LIMIT)


def strip_small_factors(n: int) -> tuple[dict[int, int], int]:
    """Factor out all primes <= 1e6; returns ({p: e}, cofactor).

    The cofactor is 1, a prime, a prime square, or a product of two distinct
    primes, provided n <= BIG_LIMIT.
    """
    if not 1 <= n <= BIG_LIMIT:
        raise ValueError(f"n={n} outside 1..{BIG_LIMIT}")
    ps = _trial_primes()
    hits = ps[np.mod(n, ps) == 0]
    out: dict[int, int] = {}
    for p in hits.tolist():
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out[p] = e
    return out, n


def is_squarefree_big(n: int) -> bool:
    """Certified squarefree test for n <= 4e18 without full factorization."""
    small, cof = strip_small_factors(n)
    if any(e >= 2 for e in small.values()):
        return False
    if cof == 1:
        return True
    # cofactor has no prime below 1e6 and is at most 4e18, so it is a prime,
    # a semiprime, or a prime square; only the square is non-squarefree
    root = math.isqrt(cof)
    return root * root != cof


def factorize_big(n: int) -> list[tuple[int, int]]:
    """Full factorization for n <= 4e18: trial division then sympy on the
    bounded cofactor."""
    small, cof = strip_small_factors(n)
    out = sorted(small.items())
    if cof > 1:
        out.extend(sorted((int(p), int(e)) for p, e in sympy.factorint(cof).items()))
    return out


def value_from_factors(spec: MultFnSpec, factors: list[tuple[int, int]]) -> complex:
    """f at a number given by its factorization (no damping; scale_r must be 0)."""
    if spec.scale_r:
        raise ValueError("window experiments need an undamped spec")
    val = 1 + 0j
    for p, e in factors:
        val *= unit_pow(prime_unit_value(spec, p), e)
    return val


def deviation_primes(f: MultFnSpec, chi) -> set[int]:
    """Primes where f's unit value differs from chi (the set S)."""
    out = set()
    for p in set(f.exceptions) | {p for p, _ in arith._factor_small(chi.modulus)}:
        if prime_unit_value(f, p) != chi(p):
            out.add(p)
    return out


def _require_char_base(f: MultFnSpec, chi, who: str) -> None:
    """Window identities need f = chi off a finite set, so the base must be
    the same character, untwisted and undamped."""
    base = f.base
    if not isinstance(base, CharacterTwist) or base.t != 0 or f.scale_r != 0:
        raise ValueError(f"{who} must be an untwisted, undamped character variant")
    bc = base.chi
    if bc is not chi and not (
        bc.modulus == chi.modulus and np.array_equal(bc.values, chi.values)
    ):
        raise ValueError(f"{who}'s base character must match chi")


def _check_window_modulus(W: int, q: int, H: int) -> None:
    for p, e in arith._factor_small(q):
        v = 0
        m = W
        while m % p == 0:
            m //= p
            v += 1
        if v < e:
            raise ValueError(
                f"q={q} does not divide the window modulus; enlarge H so that "
                f"p={p} appears at least {e} times (have {v})"
            )


def _window_modulus(H: int, kind: str, w: int | None) -> int:
    if kind == "factorial":
        return math.factorial(H) ** 2
    if kind == "primorial":
        w = H if w is None else w
        if w < H:
            raise ValueError(f"primorial exponent w={w} must be >= H={H}")
        out = 1
        for p in arith.primes_upto(w).tolist():
            out *= p**w
        return out
    raise ValueError(f"unknown window modulus kind {kind!r}")


# ---------------------------------------------------------------------------
# rotation witness


@dataclass(eq=False)
class RotationWitness:
    """Two windows [Wm+1, Wm+H] and [Wm'+1, Wm'+H] whose f-sums differ by
    sum_j (1 - (f(p_j)conj(chi(p_j)))^{k_j}) * f(Wm + r_j), exactly."""

    H: int
    W: int
    plan: list[tuple[int, int, int]]
    m: int
    m_prime: int
    window_sum: complex
    window_prime_sum: complex
    measured: complex
    predicted: complex
    ok: bool
    elements: list[tuple[int, complex]]
    elements_prime: list[tuple[int, complex]]


def rotation_witness(
    f: MultFnSpec,
    chi,
    H: int,
    plan: list[tuple[int, int, int]],
    scan_limit: int = 10**6,
    modulus_kind: str = "factorial",
    w: int | None = None,
) -> RotationWitness:
    """Build the two-window rotation identity for f against chi.

    plan entries are (p, k, r): at residue r of the second window, prime p
    appears with exponent exactly k.  Primes in the plan must exceed H and
    deviate from chi; every other deviation prime above H is kept out of
    both windows by the residue-class construction.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    _require_char_base(f, chi, "f")
    W = _window_modulus(H, modulus_kind, w)
    q = chi.modulus
    _check_window_modulus(W, q, H)

    seen_p: set[int] = set()
    seen_r: set[int] = set()
    for p, k, r in plan:
        if not sympy.isprime(p) or p <= H:
            raise ValueError(f"plan prime {p} must be a prime larger than H={H}")
        if k < 1 or not 1 <= r <= H:
            raise ValueError(f"plan entry ({p},{k},{r}) out of range")
        if p in seen_p or r in seen_r:
            raise ValueError("plan primes and residues must be distinct")
        if chi(p) == 0:
            raise ValueError(f"plan prime {p} divides the character modulus")
        seen_p.add(p)
        seen_r.add(r)

    S = deviation_primes(f, chi)
    for p in sorted(S):
        if p <= H and math.gcd(p, q) != 1 and prime_unit_value(f, p) != 0:
            raise ValueError(
                f"deviation prime {p} <= H shares a factor with q and has a "
                "nonzero value; the window sums would not pair off"
            )
        if p <= max(H, w or 0) and W % p != 0:
            raise ValueError(f"deviation prime {p} must divide the window modulus")
    big_s = sorted(p for p in S if p > H)
    plan_ps = {p for p, _, _ in plan}
    for p, _, _ in plan:
        if p not in S:
            raise ValueError(
                f"plan prime {p} does not deviate from chi; its window term "
                "would vanish"
            )

    # the first window avoids every big deviation prime: m = 0 mod p keeps
    # W*m + r = r != 0 mod p for all r <= H < p
    m_congs = [(0, p) for p in big_s]
    m = _first_admissible(m_congs, lambda c: True, scan_limit)

    mp_congs = []
    for p, k, r in plan:
        pk1 = p ** (k + 1)
        a = (p**k - r) * pow(W % pk1, -1, pk1) % pk1
        mp_congs.append((a, pk1))
    mp_congs.extend((0, p) for p in big_s if p not in plan_ps)
    m_prime = _first_admissible(mp_congs, lambda c: True, scan_limit)

    def f_at(n: int) -> complex:
        return value_from_factors(f, factorize_big(n))

    vals = [(W * m + r, f_at(W * m + r)) for r in range(1, H + 1)]
    vals_p = [(W * m_prime + r, f_at(W * m_prime + r)) for r in range(1, H + 1)]

    # verify the construction did what the identity needs
    for n, _ in vals:
        if any(n % p == 0 for p in big_s):
            raise AssertionError(f"first window element {n} hit a deviation prime")
    planned = {r: (p, k) for p, k, r in plan}
    for idx, (n, _) in enumerate(vals_p, start=1):
        for p in big_s:
            v = 0
            nn = n
            while nn % p == 0:
                nn //= p
                v += 1
            want = planned.get(idx, (p, 0))[1] if planned.get(idx, (None,))[0] == p else 0
            if v != want:
                raise AssertionError(
                    f"second window element {n} has v_{p} = {v}, wanted {want}"
                )

    window_sum = sum(v for _, v in vals)
    window_prime_sum = sum(v for _, v in vals_p)
    measured = window_sum - window_prime_sum
    by_n = dict(vals)
    predicted = 0j
    for p, k, r in plan:
        ratio = prime_unit_value(f, p) * complex(np.conj(chi(p)))
        predicted += (1 - unit_pow(ratio, k)) * by_n[W * m + r]
    ok = (
        measured == predicted
        if is_exact_spec(f)
        else abs(measured - predicted) <= 1e-9
    )
    keep = H <= 64
    return RotationWitness(
        H=H,
        W=W,
        plan=list(plan),
        m=m,
        m_prime=m_prime,
        window_sum=window_sum,
        window_prime_sum=window_prime_sum,
        measured=measured,
        predicted=predicted,
        ok=ok,
        elements=vals if keep else [],
        elements_prime=vals_p if keep else [],
    )


def _first_admissible(congruences, accept, scan_limit: int) -> int:
    """Smallest m >= 1 in the CRT class satisfying accept(m)."""
    if congruences:
        a, M = arith.crt_solve(congruences)
    else:
        a, M = 0, 1
    count = 0
    m = a if a > 0 else a + M
    while count < scan_limit:
        if accept(m):
            return m
        m += M
        count += 1
    raise SearchError(
        f"no admissible m among the first {scan_limit} members of the class "
        f"{a} mod {M}"
    )


# ---------------------------------------------------------------------------
# squarefree pair


@dataclass(eq=False)
class SquarefreePair:
    """Two windows matched so that mu^2-weighted g-sums differ by
    sum_j (1 - g(p_j)chi(p_j)) g(r_j) = 2t * sign, exactly."""

    H: int
    W: int
    primes: list[int]
    residues: list[int]
    aux: dict[int, int]
    m: int
    m_prime: int
    window_sum: complex
    window_prime_sum: complex
    measured: complex
    predicted: complex
    sign: int
    ok: bool


def squarefree_pair(
    g: MultFnSpec,
    chi,
    H: int,
    primes: list[int],
    residues: list[int],
    scan_limit: int = 10**5,
) -> SquarefreePair:
    """Locate windows where mu^2(n)g(n) realizes the flipped-prime identity.

    residues r_j <= H must be squarefree with no prime factor deviating from
    chi, all of the same g-sign; primes p_j > H must carry g(p_j) = -chi(p_j).
    The first window makes every element at a residue r_j squarefree and
    coprime to the deviation set; the second forces p_j || element at r_j.
    """
    q = chi.modulus
    if not chi.real:
        raise ValueError("the squarefree pair construction needs a real character")
    _require_char_base(g, chi, "g")
    for p, w_ in g.exceptions.items():
        if w_ not in (1 + 0j, -1 + 0j):
            raise ValueError(f"g({p}) must be +-1, got {w_}")
    for p, _ in arith._factor_small(q):
        if p not in g.exceptions:
            raise ValueError(
                f"g must choose a +-1 value at p={p} dividing the modulus"
            )
    if len(primes) != len(residues) or not primes:
        raise ValueError("primes and residues must be matching nonempty lists")
    W = _window_modulus(H, "factorial", None)
    _check_window_modulus(W, q, H)
    S = deviation_primes(g, chi)
    sign = 0
    for r in residues:
        if not 1 <= r <= H or not is_squarefree_big(r):
            raise ValueError(f"residue {r} must be squarefree in 1..{H}")
        if any(p in S for p, _ in factorize_big(r)):
            raise ValueError(f"residue {r} touches the deviation set")
        s_r = int(value_from_factors(g, factorize_big(r)).real)
        if sign == 0:
            sign = s_r
        elif s_r != sign:
            raise ValueError("residues must share a common g-sign")
    if len(set(residues)) != len(residues) or len(set(primes)) != len(primes):
        raise ValueError("primes and residues must be distinct")
    for p in primes:
        if not sympy.isprime(p) or p <= H:
            raise ValueError(f"plan prime {p} must be a prime larger than H={H}")
        if p not in S or chi(p) == 0:
            raise ValueError(
                f"plan prime {p} must deviate from chi away from the modulus"
            )
        gp = prime_unit_value(g, p)
        if gp * chi(p) != -1:
            raise ValueError(f"g({p})chi({p}) must equal -1 for the 2t identity")

    big_s = sorted(p for p in S if p > H)
    res_set = set(residues)
    # auxiliary primes force mu^2 = 0 at squarefree non-plan residues
    aux: dict[int, int] = {}
    pool = iter(
        int(p)
        for p in arith.primes_upto(10**4).tolist()
        if p > H and p not in S and p not in primes
    )
    for r in range(1, H + 1):
        if r in res_set or not is_squarefree_big(r):
            continue
        aux[r] = next(pool)

    def aux_congs() -> list[tuple[int, int]]:
        out = []
        for r, A in aux.items():
            a2 = A * A
            out.append(((-r) * pow(W % a2, -1, a2) % a2, a2))
        return out

    m_congs = aux_congs() + [(0, p) for p in big_s]

    def m_ok(mm: int) -> bool:
        return all(is_squarefree_big(W * mm + r) for r in residues)

    m = _first_admissible(m_congs, m_ok, scan_limit)

    mp_congs = aux_congs() + [(0, p) for p in big_s if p not in primes]
    for p, r in zip(primes, residues):
        p2 = p * p
        mp_congs.append(((p - r) * pow(W % p2, -1, p2) % p2, p2))

    def mp_ok(mm: int) -> bool:
        return all(is_squarefree_big(W * mm + r) for r in residues)

    m_prime = _first_admissible(mp_congs, mp_ok, scan_limit)

    def windowed(mm: int) -> complex:
        total = 0j
        for r in range(1, H + 1):
            n = W * mm + r
            factors = factorize_big(n)
            if any(e >= 2 for _, e in factors):
                continue
            total += value_from_factors(g, factors)
        return total

    window_sum = windowed(m)
    window_prime_sum = windowed(m_prime)
    measured = window_sum - window_prime_sum
    predicted = 0j
    for p, r in zip(primes, residues):
        gp = prime_unit_value(g, p)
        predicted += (1 - gp * chi(p)) * value_from_factors(g, factorize_big(r))
    ok = measured == predicted if is_exact_spec(g) else abs(measured - predicted) <= 1e-9
    return SquarefreePair(
        H=H,
        W=W,
        primes=list(primes),
        residues=list(residues),
        aux=aux,
        m=m,
        m_prime=m_prime,
        window_sum=window_sum,
        window_prime_sum=window_prime_sum,
        measured=measured,
        predicted=predicted,
        sign=sign,
        ok=ok,
    )


# ---------------------------------------------------------------------------
# long-range profiles


@dataclass(eq=False)
class GrowthProfile:
    """Checkpointed discrepancy profile with a crude growth classification."""

    spec: MultFnSpec
    kind: str
    checkpoints: list[int]
    sums: list[complex]
    sups: list[float]
    slope: float
    regime: str


def dyadic_checkpoints(N: int) -> list[int]:
    out = [1 << k for k in range(N.bit_length()) if (1 << k) <= N]
    if out[-1] != N:
        out.append(N)
    return out


def decade_checkpoints(N: int) -> list[int]:
    out = [10**k for k in range(len(str(N))) if 10**k <= N]
    if out[-1] != N:
        out.append(N)
    return out


def growth_profile(
    f: MultFnSpec,
    N: int,
    kind: str = "plain",
    checkpoints: list[int] | None = None,
) -> GrowthProfile:
    """Stream the (optionally squarefree-masked) discrepancy profile to N."""
    if kind not in ("plain", "squarefree"):
        raise ValueError(f"unknown profile kind {kind!r}")
    if checkpoints is None:
        checkpoints = dyadic_checkpoints(N)
    prof = _masked_stream(f, N, checkpoints, kind == "squarefree")
    xs = np.log(np.array(prof.checkpoints, dtype=np.float64))
    ys = np.array(prof.sups, dtype=np.float64)
    half = len(xs) // 2
    if len(xs) - half >= 2:
        slope = float(np.polyfit(xs[half:], ys[half:], 1)[0])
    else:
        slope = 0.0
    final = prof.sups[-1]
    mid = prof.sups[len(prof.sups) // 2]
    if final >= 0.45 * N:
        regime = "linear"
    elif mid > 0 and final >= 2.0 * mid:
        regime = "growing"
    else:
        regime = "bounded"
    return GrowthProfile(
        spec=f,
        kind=kind,
        checkpoints=prof.checkpoints,
        sums=prof.sums,
        sups=prof.sups,
        slope=slope,
        regime=regime,
    )


def _masked_stream(f: MultFnSpec, N: int, checkpoints: list[int], mask: bool):
    if not mask:
        return stream_profile(f, N, checkpoints)
    from . import multfun as _mf

    _mf._check_checkpoints(checkpoints, N)
    base_primes = arith.primes_upto(math.isqrt(N))

    def blocks():
        pos = 1
        for blk in _mf.iter_blocks(f, N):
            hi = pos + len(blk)
            yield blk * arith.squarefree_block(pos, hi, base_primes)
            pos = hi

    return _mf._profile_scan(
        f, blocks(), checkpoints, is_exact_spec(f), is_real_spec(f)
    )


@dataclass(eq=False)
class RandomWalkSummary:
    """Median discrepancy profile over seeded random +-1 functions."""

    seeds: list[int]
    scale_r: float
    checkpoints: list[int]
    sups_per_seed: list[list[float]]
    median_sups: list[float]


def random_walk_mc(
    seeds: list[int] | int,
    scale_r: float,
    N: int,
    checkpoints: list[int] | None = None,
) -> RandomWalkSummary:
    """Profile f(n) = eps(n) n^(-scale_r) for hashed Rademacher eps over the
    given seeds (an int means range(seeds)); reports per-checkpoint medians.

    Seeds run in a thread pool capped by MULTSUM_THREADS; results are merged
    in seed order so the output never depends on scheduling.
    """
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    if not seeds:
        raise ValueError("need at least one seed")
    if checkpoints is None:
        checkpoints = decade_checkpoints(N)

    def one(seed: int) -> list[float]:
        spec = make_spec(RandomRademacher(seed=seed), scale_r=scale_r)
        return stream_profile(spec, N, checkpoints).sups

    cap = min(thread_cap(), len(seeds))
    if cap > 1:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            sups = list(pool.map(one, seeds))
    else:
        sups = [one(s) for s in seeds]
    medians = np.median(np.array(sups, dtype=np.float64), axis=0).tolist()
    return RandomWalkSummary(
        seeds=list(seeds),
        scale_r=scale_r,
        checkpoints=list(checkpoints),
        sups_per_seed=sups,
        median_sups=medians,
    )


# ---------------------------------------------------------------------------
# concentration along a progression


@dataclass(eq=False)
class ConcentrationReport:
    """How tightly f(Qn+a) tracks chi(a)(Qn)^{it} e^{F(Q)} on average."""

    x: int
    Q: int
    a: int
    t: float
    N0: int
    f_of_q: complex
    deviation: float
    driver: float


def concentration_experiment(
    f: MultFnSpec, chi, t: float, Q: int, a: int, x: int
) -> ConcentrationReport:
    """Average |f(Qn+a) - chi(a)(Qn)^{it} e^{F(Q)}| over n <= x, against the
    distance-based driver D(f, chi*n^{it}; N0, x) + N0^{-1/2}.

    Q must absorb the character modulus and every prime up to the reported
    N0 (the largest prime whose primorial divides Q).
    """
    q = chi.modulus
    if Q < 1 or Q % q != 0:
        raise ValueError(f"Q={Q} must be a positive multiple of q={q}")
    if not 1 <= a <= Q or math.gcd(a, Q) != 1:
        raise ValueError(f"a={a} must lie in 1..Q and be coprime to Q")
    N0 = 1
    for p in arith.primes_upto(200).tolist():
        if Q % p:
            break
        N0 = p
    fq = f_of_q_sum(f, chi, t, Q, x)
    rng = eval_range(f, Q * x + a)
    n = np.arange(1, x + 1, dtype=np.float64)
    samples = rng.values[np.arange(1, x + 1, dtype=np.int64) * Q + a]
    model = chi(a) * cmath.exp(fq)
    if t:
        model = model * np.exp(1j * t * np.log(Q * n))
    deviation = float(np.mean(np.abs(samples - model)))
    target = make_spec(CharacterTwist(chi=chi, t=t))
    drv = distance(f, target, x, y=N0).value + 1.0 / math.sqrt(N0)
    return ConcentrationReport(
        x=x,
        Q=Q,
        a=a,
        t=t,
        N0=N0,
        f_of_q=fq,
        deviation=deviation,
        driver=drv,
    )
