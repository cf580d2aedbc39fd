"""Completely multiplicative functions: finite descriptions, point and bulk
sieved evaluation, and running partial-sum profiles.

A function is described by a base rule (value at every prime), a finite set
of prime exceptions overriding the base, and an optional global n^(-r)
damping.  Values are evaluated in independent blocks so profiles up to 1e9
run in bounded memory, and sums over values that stay in {0, +-1, +-i} are
tracked in exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import arith
from .accum import NeumaierSum, compensated_cumsum
from .errors import CapacityError

EVAL_CAPACITY = 130_000_000  # largest materialized range (memory bound)
STREAM_LIMIT = 10**9  # largest streamed profile
BLOCK = 1 << 22

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAUSSIAN_UNITS = (1 + 0j, 1j, -1 + 0j, -1j)


# ---------------------------------------------------------------------------
# base rules


@dataclass(frozen=True)
class One:
    """f(p) = 1 at every prime."""


@dataclass(frozen=True)
class Liouville:
    """f(p) = -1 at every prime."""


@dataclass(frozen=True)
class RandomRademacher:
    """f(p) = +-1 chosen by a keyed hash of (seed, p); reproducible."""

    seed: int


@dataclass(frozen=True)
class CoprimeIndicator:
    """f(p) = 0 at primes dividing Q, else 1."""

    Q: int


@dataclass(eq=False)
class CharacterTwist:
    """f(p) = chi(p) * p^(it) for a Dirichlet character chi."""

    chi: object  # DirichletCharacter; duck-typed to avoid an import cycle
    t: float = 0.0


BaseRule = One | Liouville | RandomRademacher | CoprimeIndicator | CharacterTwist


@dataclass(eq=False)
class MultFnSpec:
    """Immutable description of a completely multiplicative function.

    f(n) = n^(-scale_r) * prod_p f0(p)^(v_p(n)) where f0 is the base rule's
    prime value, overridden at the exception primes.  Treat instances as
    frozen; they are shared by evaluators.
    """

    base: BaseRule
    scale_r: float = 0.0
    exceptions: dict[int, complex] = field(default_factory=dict)


def make_spec(
    base: BaseRule,
    scale_r: float = 0.0,
    exceptions: dict[int, complex] | None = None,
) -> MultFnSpec:
    """Validated MultFnSpec constructor."""
    exceptions = {int(p): complex(w) for p, w in (exceptions or {}).items()}
    for p, w in exceptions.items():
        if not _is_prime_small(p):
            raise ValueError(f"exception key {p} is not prime")
        if abs(w) > 1 + 1e-12:
            raise ValueError(
                f"exception value at p={p} has |w|={abs(w):.6g} > 1; values "
                "must stay in the closed unit disc"
            )
    if not (scale_r >= 0 and math.isfinite(scale_r)):
        raise ValueError(f"scale_r must be a finite nonnegative real, got {scale_r}")
    if isinstance(base, CoprimeIndicator) and base.Q < 1:
        raise ValueError(f"Q must be >= 1, got {base.Q}")
    if isinstance(base, CharacterTwist) and not math.isfinite(base.t):
        raise ValueError("twist exponent t must be finite")
    return MultFnSpec(base=base, scale_r=scale_r, exceptions=exceptions)


def _is_prime_small(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


def build_spec(config: str) -> MultFnSpec:
    """Parse the textual spec grammar.

    base[:key=value,...][;except=p~re~im,...][;scale_r=r]
    bases: one | liouville | rademacher | coprime | char
    keys:  q=, index= (int or "real"), t=, seed=, Q=
    e.g.  "char:q=4,index=1;except=3~1~0"  or  "one;except=2~0.5~0"
    """
    parts = [s.strip() for s in config.strip().split(";") if s.strip()]
    if not parts:
        raise ValueError("empty spec string")
    head = parts[0]
    name, _, arg_str = head.partition(":")
    name = name.strip().lower()
    args: dict[str, str] = {}
    if arg_str:
        for kv in arg_str.split(","):
            k, sep, v = kv.partition("=")
            if not sep:
                raise ValueError(f"malformed key=value pair {kv!r} in spec")
            args[k.strip().lower()] = v.strip()

    def _take(key: str, *aliases: str) -> str | None:
        for k in (key, *aliases):
            if k in args:
                return args.pop(k)
        return None

    if name == "one":
        base: BaseRule = One()
    elif name == "liouville":
        base = Liouville()
    elif name == "rademacher":
        base = RandomRademacher(seed=int(_take("seed") or 0))
    elif name == "coprime":
        q_val = _take("q")
        if q_val is None:
            raise ValueError("coprime base requires Q=")
        base = CoprimeIndicator(Q=int(q_val))
    elif name == "char":
        from .characters import character_by_index  # deferred: import cycle

        q_val = _take("q")
        idx = _take("index", "char_index")
        if q_val is None or idx is None:
            raise ValueError("char base requires q= and index=")
        chi = character_by_index(int(q_val), idx)
        base = CharacterTwist(chi=chi, t=float(_take("t") or 0.0))
    else:
        raise ValueError(f"unknown base {name!r}")
    if args:
        raise ValueError(f"unused keys {sorted(args)} for base {name!r}")

    scale_r = 0.0
    exceptions: dict[int, complex] = {}
    for part in parts[1:]:
        key, sep, val = part.partition("=")
        key = key.strip().lower()
        if not sep:
            raise ValueError(f"malformed spec clause {part!r}")
        if key == "scale_r":
            scale_r = float(val)
        elif key == "except":
            for ent in val.split(","):
                fields = ent.split("~")
                if len(fields) != 3:
                    raise ValueError(f"exception entry {ent!r} is not p~re~im")
                p, re_s, im_s = fields
                exceptions[int(p)] = complex(float(re_s), float(im_s))
        else:
            raise ValueError(f"unknown spec clause {key!r}")
    return make_spec(base, scale_r=scale_r, exceptions=exceptions)


def spec_config(spec: MultFnSpec) -> str:
    """Round-trippable textual form of a spec (build_spec grammar)."""
    b = spec.base
    if isinstance(b, One):
        head = "one"
    elif isinstance(b, Liouville):
        head = "liouville"
    elif isinstance(b, RandomRademacher):
        head = f"rademacher:seed={b.seed}"
    elif isinstance(b, CoprimeIndicator):
        head = f"coprime:Q={b.Q}"
    else:
        head = f"char:q={b.chi.modulus},index={b.chi.index}"
        if b.t:
            head += f",t={b.t!r}"
    out = head
    if spec.exceptions:
        ents = ",".join(
            f"{p}~{w.real!r}~{w.imag!r}" for p, w in sorted(spec.exceptions.items())
        )
        out += f";except={ents}"
    if spec.scale_r:
        out += f";scale_r={spec.scale_r!r}"
    return out


# ---------------------------------------------------------------------------
# scalar evaluation


def _splitmix64(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer; operates on uint64 scalars or arrays."""
    with np.errstate(over="ignore"):  # wraparound is the point
        x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9) & _MASK64
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB) & _MASK64
        return x ^ (x >> np.uint64(31))


def rademacher_signs(seed: int, ps: np.ndarray) -> np.ndarray:
    """+-1 signs at the primes ps, keyed by seed; independent of sieve size."""
    s = _splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    h = _splitmix64(ps.astype(np.uint64) ^ s)
    return np.where((h >> np.uint64(63)).astype(bool), -1.0, 1.0)


def unit_pow(w: complex, k: int) -> complex:
    """w^k by binary powering; exact for w in {0, +-1, +-i}."""
    if k == 0:
        return 1 + 0j
    if w == 0:
        return 0j
    re, im = w.real, w.imag
    if re == int(re) and im == int(im) and abs(w) == 1.0:
        if im == 0:
            return 1 + 0j if re > 0 or k % 2 == 0 else -1 + 0j
        quarter = 1 if im > 0 else 3
        return _GAUSSIAN_UNITS[quarter * k % 4]
    out = 1 + 0j
    b = w
    e = k
    while e:
        if e & 1:
            out *= b
        b *= b
        e >>= 1
    return out


def _base_prime_value(base: BaseRule, p: int) -> complex:
    if isinstance(base, One):
        return 1 + 0j
    if isinstance(base, Liouville):
        return -1 + 0j
    if isinstance(base, RandomRademacher):
        return complex(rademacher_signs(base.seed, np.array([p], dtype=np.int64))[0])
    if isinstance(base, CoprimeIndicator):
        return 0j if base.Q % p == 0 else 1 + 0j
    val = complex(base.chi.values[p % base.chi.modulus])
    if base.t:
        val *= complex(math.cos(base.t * math.log(p)), math.sin(base.t * math.log(p)))
    return val


def prime_unit_value(spec: MultFnSpec, p: int) -> complex:
    """f0(p): the unit-part prime value (exceptions applied, no n^(-r) damping)."""
    w = spec.exceptions.get(p)
    if w is not None:
        return w
    return _base_prime_value(spec.base, p)


def eval_at(spec: MultFnSpec, n: int, table: arith.SpfTable) -> complex:
    """f(n) by factorization; n must be within the spf table's range."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    val = 1 + 0j
    for p, e in arith.factorize(n, table):
        val *= unit_pow(prime_unit_value(spec, p), e)
    if spec.scale_r:
        val *= math.exp(-spec.scale_r * math.log(n))
    return val


def value_at_primes(spec: MultFnSpec, ps: np.ndarray) -> np.ndarray:
    """Full f(p) (damping included) at an ascending array of primes."""
    base = spec.base
    if isinstance(base, One):
        vals = np.ones(len(ps), dtype=np.complex128)
    elif isinstance(base, Liouville):
        vals = np.full(len(ps), -1.0 + 0j)
    elif isinstance(base, RandomRademacher):
        vals = rademacher_signs(base.seed, ps).astype(np.complex128)
    elif isinstance(base, CoprimeIndicator):
        vals = np.where(np.gcd(ps, base.Q) == 1, 1.0 + 0j, 0j)
    else:
        chi = base.chi
        vals = chi.values[np.mod(ps, chi.modulus)].astype(np.complex128)
        if base.t:
            vals = vals * np.exp(1j * base.t * np.log(ps.astype(np.float64)))
    for p, w in spec.exceptions.items():
        i = np.searchsorted(ps, p)
        if i < len(ps) and ps[i] == p:
            vals[i] = w
    if spec.scale_r:
        vals = vals * np.exp(-spec.scale_r * np.log(ps.astype(np.float64)))
    return vals


# ---------------------------------------------------------------------------
# mode detection


def _gaussian_value(w: complex) -> bool:
    return w in (0j, 1 + 0j, -1 + 0j, 1j, -1j)


def is_real_spec(spec: MultFnSpec) -> bool:
    """True when every value f(n) is real."""
    base = spec.base
    if isinstance(base, CharacterTwist):
        if base.t != 0 or not base.chi.real:
            return False
    return all(w.imag == 0 for w in spec.exceptions.values())


def is_exact_spec(spec: MultFnSpec) -> bool:
    """True when every value lies in {0, +-1, +-i}, so sums are exact integers."""
    if spec.scale_r != 0:
        return False
    base = spec.base
    if isinstance(base, CharacterTwist):
        if base.t != 0:
            return False
        if not all(_gaussian_value(complex(v)) for v in base.chi.values):
            return False
    return all(_gaussian_value(w) for w in spec.exceptions.values())


# ---------------------------------------------------------------------------
# block evaluation


def _stride_starts(lo: int, hi: int, step: int) -> int | None:
    """First multiple of step in [lo, hi), or None."""
    start = -(-lo // step) * step
    return start if start < hi else None


def _eval_block(spec: MultFnSpec, lo: int, hi: int, base_primes: np.ndarray) -> np.ndarray:
    """f(n) for n in [lo, hi) as a complex128 (or float64 when real) array.

    base_primes must cover sqrt(hi - 1).  Blocks are independent: nothing
    about earlier ranges is needed.
    """
    n = np.arange(lo, hi, dtype=np.int64)
    length = hi - lo
    base = spec.base
    real = is_real_spec(spec)
    dtype = np.float64 if real else np.complex128

    mult = np.ones(length, dtype=dtype)
    u = n.copy()  # n with exception primes divided out
    for p, w in sorted(spec.exceptions.items()):
        pk = p
        while pk < hi:
            start = _stride_starts(max(lo, pk), hi, pk)
            if start is not None:
                idx = slice(start - lo, length, pk)
                u[idx] //= p
                mult[idx] *= w.real if real else w
            if pk > hi // p:
                break
            pk *= p

    if isinstance(base, (Liouville, RandomRademacher)):
        omega = np.zeros(length, dtype=np.uint8)
        rem = u.copy()
        exc = spec.exceptions
        for p in base_primes:
            p = int(p)
            if p * p >= hi:
                break
            if p in exc:
                continue
            if isinstance(base, Liouville):
                minus = True
            else:
                minus = rademacher_signs(base.seed, np.array([p], dtype=np.int64))[0] < 0
            pk = p
            while pk < hi:
                start = _stride_starts(max(lo, pk), hi, pk)
                if start is not None:
                    idx = slice(start - lo, length, pk)
                    rem[idx] //= p
                    if minus:
                        omega[idx] += 1
                if pk > hi // p:
                    break
                pk *= p
        big = rem > 1  # leftover cofactors are single primes > sqrt(hi - 1)
        if isinstance(base, Liouville):
            omega[big] += 1
        else:
            signs = rademacher_signs(base.seed, rem[big])
            omega[big] += (signs < 0).astype(np.uint8)
        vals = np.where((omega & 1).astype(bool), -1.0, 1.0)
        out = mult * vals if real else mult * vals.astype(np.complex128)
    elif isinstance(base, One):
        out = mult
    elif isinstance(base, CoprimeIndicator):
        coprime = np.gcd(u, base.Q) == 1
        out = np.where(coprime, mult, 0)
    else:  # CharacterTwist
        chi = base.chi
        table = chi.values.real.astype(np.float64) if real else chi.values
        out = mult * table[np.mod(u, chi.modulus)]
        if base.t:
            out = out * np.exp(1j * base.t * np.log(u.astype(np.float64)))

    if spec.scale_r:
        out = out * np.exp(-spec.scale_r * np.log(n.astype(np.float64)))
    return out


def iter_blocks(spec: MultFnSpec, x: int, block: int = BLOCK) -> Iterator[np.ndarray]:
    """Yield f(1..x) in consecutive blocks of at most `block` values."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if x > STREAM_LIMIT:
        raise CapacityError(f"x={x} exceeds the streaming limit {STREAM_LIMIT}")
    base_primes = arith.primes_upto(math.isqrt(x))
    for lo in range(1, x + 1, block):
        hi = min(lo + block, x + 1)
        yield _eval_block(spec, lo, hi, base_primes)


@dataclass(eq=False)
class SievedRange:
    """f(1..N) materialized: values[n] = f(n), values[0] = 0."""

    spec: MultFnSpec
    N: int
    values: np.ndarray
    exact: bool
    real: bool


def eval_range(spec: MultFnSpec, N: int, block: int = BLOCK) -> SievedRange:
    """Materialize f(1..N).  Capacity: N <= EVAL_CAPACITY (memory bound)."""
    if not 1 <= N <= EVAL_CAPACITY:
        raise CapacityError(f"N={N} outside 1..{EVAL_CAPACITY} for eval_range")
    real = is_real_spec(spec)
    values = np.zeros(N + 1, dtype=np.float64 if real else np.complex128)
    pos = 1
    for blk in iter_blocks(spec, N, block):
        values[pos : pos + len(blk)] = blk
        pos += len(blk)
    return SievedRange(
        spec=spec, N=N, values=values, exact=is_exact_spec(spec), real=real
    )


# ---------------------------------------------------------------------------
# partial-sum profiles


@dataclass(eq=False)
class PartialSumProfile:
    """Running data of M_f(x) = sum_{n<=x} f(n) at requested checkpoints.

    sums[i] = M_f(checkpoints[i]); sups[i] = max_{y <= checkpoints[i]} |M_f(y)|.
    """

    spec: MultFnSpec
    checkpoints: list[int]
    sums: list[complex]
    sups: list[float]
    exact: bool


class _ProfileState:
    """Running partial-sum scan state; supports checkpointed resume."""

    def __init__(self, exact: bool, real: bool):
        self.exact = exact
        self.real = real
        self.n_done = 0
        self.sup = 0.0
        if exact:
            self.re_int = 0
            self.im_int = 0
        else:
            self.re = NeumaierSum()
            self.im = NeumaierSum()

    def current_sum(self) -> complex:
        if self.exact:
            return complex(self.re_int, self.im_int)
        return complex(self.re.total(), self.im.total())

    def feed(self, blk: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Consume one block; returns (prefix sums, |prefix| array) for it."""
        if self.exact:
            re = np.cumsum(blk.real) + self.re_int
            im = (np.cumsum(blk.imag) + self.im_int) if np.iscomplexobj(blk) else None
            self.re_int = int(round(re[-1]))
            if im is None:
                prefix = re.astype(np.complex128)
                absval = np.abs(re)
            else:
                self.im_int = int(round(im[-1]))
                prefix = re + 1j * im
                absval = np.hypot(re, im)
        else:
            re = compensated_cumsum(np.ascontiguousarray(blk.real), self.re)
            if np.iscomplexobj(blk):
                im = compensated_cumsum(np.ascontiguousarray(blk.imag), self.im)
                prefix = re + 1j * im
                absval = np.hypot(re, im)
            else:
                self.im.add(0.0)
                prefix = re.astype(np.complex128)
                absval = np.abs(re)
        blk_sup = float(np.max(absval)) if len(absval) else 0.0
        self.sup = max(self.sup, blk_sup)
        self.n_done += len(blk)
        return prefix, absval

    def snapshot(self) -> dict:
        """JSON-safe resume state; floats stored exactly as hex."""
        d = {"n_done": self.n_done, "sup": self.sup.hex(), "exact": self.exact,
             "real": self.real}
        if self.exact:
            d["re_int"] = self.re_int
            d["im_int"] = self.im_int
        else:
            d["re"] = [self.re.hi.hex(), self.re.lo.hex()]
            d["im"] = [self.im.hi.hex(), self.im.lo.hex()]
        return d

    @classmethod
    def restore(cls, d: dict) -> "_ProfileState":
        st = cls(bool(d["exact"]), bool(d["real"]))
        st.n_done = int(d["n_done"])
        st.sup = float.fromhex(d["sup"])
        if st.exact:
            st.re_int = int(d["re_int"])
            st.im_int = int(d["im_int"])
        else:
            st.re = NeumaierSum(*(float.fromhex(h) for h in d["re"]))
            st.im = NeumaierSum(*(float.fromhex(h) for h in d["im"]))
        return st


def partial_sum_profile(
    rng: SievedRange, checkpoints: list[int], block: int = BLOCK
) -> PartialSumProfile:
    """Profile over a materialized range; checkpoints ascending, <= rng.N."""
    _check_checkpoints(checkpoints, rng.N)

    def blocks() -> Iterator[np.ndarray]:
        for lo in range(1, rng.N + 1, block):
            yield rng.values[lo : min(lo + block, rng.N + 1)]

    return _profile_scan(rng.spec, blocks(), checkpoints, rng.exact, rng.real)


def stream_profile(
    spec: MultFnSpec,
    x: int,
    checkpoints: list[int],
    block: int = BLOCK,
    state: _ProfileState | None = None,
    on_checkpoint: Callable[[int, complex, float], None] | None = None,
) -> PartialSumProfile:
    """Profile f over 1..x without materializing values.

    `state` (from a previous run's snapshot) resumes mid-scan; rows already
    covered by the restored state are not re-emitted.
    """
    _check_checkpoints(checkpoints, x)
    exact, real = is_exact_spec(spec), is_real_spec(spec)
    if state is not None and (state.exact != exact or state.real != real):
        raise ValueError("resume state does not match the spec's value modes")
    start = state.n_done + 1 if state is not None else 1
    base_primes = arith.primes_upto(math.isqrt(x))

    def blocks() -> Iterator[np.ndarray]:
        for lo in range(start, x + 1, block):
            hi = min(lo + block, x + 1)
            yield _eval_block(spec, lo, hi, base_primes)

    if x > STREAM_LIMIT:
        raise CapacityError(f"x={x} exceeds the streaming limit {STREAM_LIMIT}")
    return _profile_scan(
        spec, blocks(), checkpoints, exact, real, state=state,
        on_checkpoint=on_checkpoint,
    )


def _check_checkpoints(checkpoints: list[int], x: int) -> None:
    if not checkpoints:
        raise ValueError("need at least one checkpoint")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if checkpoints[0] < 1 or checkpoints[-1] > x:
        raise ValueError(f"checkpoints must lie in 1..{x}")


def _profile_scan(
    spec: MultFnSpec,
    blocks: Iterator[np.ndarray],
    checkpoints: list[int],
    exact: bool,
    real: bool,
    state: _ProfileState | None = None,
    on_checkpoint: Callable[[int, complex, float], None] | None = None,
) -> PartialSumProfile:
    if state is None:
        state = _ProfileState(exact, real)
    sums: list[complex] = []
    sups: list[float] = []
    emitted: list[int] = []
    ck = 0
    while ck < len(checkpoints) and checkpoints[ck] <= state.n_done:
        ck += 1  # already covered by a resumed state
    for blk in blocks:
        lo = state.n_done + 1
        sup_before = state.sup
        prefix, absval = state.feed(blk)
        if ck < len(checkpoints) and checkpoints[ck] <= state.n_done:
            run_max = np.maximum.accumulate(absval)
            while ck < len(checkpoints) and checkpoints[ck] <= state.n_done:
                i = checkpoints[ck] - lo
                sup_here = max(sup_before, float(run_max[i]))
                s = complex(prefix[i])
                emitted.append(checkpoints[ck])
                sums.append(s)
                sups.append(sup_here)
                if on_checkpoint is not None:
                    on_checkpoint(checkpoints[ck], s, sup_here)
                ck += 1
    return PartialSumProfile(
        spec=spec, checkpoints=emitted, sums=sums, sups=sups, exact=exact
    )
