"""Tests for lab: witness constructions, profiles, seeded walks."""

import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from multsum import (
    CharacterTwist,
    Liouville,
    One,
    RandomRademacher,
    SearchError,
    character_by_index,
    concentration_experiment,
    decade_checkpoints,
    dyadic_checkpoints,
    eval_range,
    factorize_big,
    growth_profile,
    is_squarefree_big,
    make_spec,
    modified_spec,
    random_walk_mc,
    rotation_witness,
    squarefree_pair,
    thread_cap,
)


def test_is_squarefree_big_matches_naive():
    for n in list(range(1, 3000)) + [10**12, 10**12 + 39, 4 * 10**12]:
        assert is_squarefree_big(n) == oracles.naive_squarefree(n), n
    # cofactor shapes beyond the trial range: p^2, p*q, and p
    p, q = 1_000_003, 1_000_033
    assert not is_squarefree_big(p * p)
    assert is_squarefree_big(p * q)
    assert is_squarefree_big(7 * p)
    assert not is_squarefree_big(49 * p)


def test_factorize_big_matches_trial():
    for n in (2, 360, 97 * 89, 2**20, 10**12 + 39, 1_000_003 * 7):
        assert factorize_big(n) == oracles.trial_factorize(n), n


def test_rotation_witness_frozen(chi4):
    f = make_spec(CharacterTwist(chi4), exceptions={5: 1j})
    w = rotation_witness(f, chi4, 4, [(5, 1, 1)])
    assert (w.H, w.W) == (4, 576)
    assert (w.m, w.m_prime) == (5, 4)
    assert w.window_sum == 0
    assert w.window_prime_sum == -1 + 1j
    assert w.measured == w.predicted == 1 - 1j
    assert w.ok
    # doubling the planned valuation doubles the gap through the phase
    w2 = rotation_witness(f, chi4, 4, [(5, 2, 1)])
    assert (w2.m, w2.m_prime) == (5, 99)
    assert w2.measured == w2.predicted == 2
    assert w2.ok


def test_rotation_witness_elements_verified(chi4):
    """Window elements carry their values; both match direct factorization."""
    f = make_spec(CharacterTwist(chi4), exceptions={5: 1j})
    w = rotation_witness(f, chi4, 4, [(5, 1, 1)])
    assert len(w.elements) == len(w.elements_prime) == 4
    for off, (n, val) in enumerate(w.elements, start=1):
        assert n == w.W * w.m + off
        assert complex(val) == oracles.spec_value(f, n), n
    for off, (n, val) in enumerate(w.elements_prime, start=1):
        assert n == w.W * w.m_prime + off
        assert complex(val) == oracles.spec_value(f, n), n


def test_rotation_witness_primorial_window(chi4):
    f = make_spec(CharacterTwist(chi4), exceptions={5: 1j})
    w = rotation_witness(f, chi4, 4, [(5, 1, 1)], modulus_kind="primorial", w=4)
    assert w.W == (2 * 3) ** 4  # primes up to 4, each to the 4th power
    assert w.measured == w.predicted
    assert w.ok


def test_rotation_witness_validation(chi4, chi5):
    f = make_spec(CharacterTwist(chi4), exceptions={5: 1j})
    # an empty plan is legal; nothing survives the pairing
    trivial = rotation_witness(f, chi4, 4, [])
    assert trivial.measured == trivial.predicted == 0 and trivial.ok
    with pytest.raises(ValueError):
        rotation_witness(f, chi4, 4, [(3, 1, 1)])  # plan prime <= H
    with pytest.raises(ValueError):
        rotation_witness(f, chi4, 4, [(7, 1, 1)])  # 7 not a deviation prime
    with pytest.raises(ValueError):
        rotation_witness(f, chi4, 4, [(5, 0, 1)])  # valuation must be >= 1
    with pytest.raises(ValueError):
        rotation_witness(f, chi4, 4, [(5, 1, 5)])  # residue beyond H
    with pytest.raises(ValueError):
        rotation_witness(f, chi4, 4, [(5, 1, 1), (5, 1, 2)])  # repeated prime
    with pytest.raises(ValueError):
        rotation_witness(make_spec(One()), chi4, 4, [(5, 1, 1)])  # wrong base
    with pytest.raises(ValueError):
        rotation_witness(f, chi4, 4, [(5, 1, 1)], modulus_kind="primorial", w=3)


def test_squarefree_pair_frozen(chi5):
    g = make_spec(CharacterTwist(chi5), exceptions={5: 1, 7: 1, 11: -1})
    pair = squarefree_pair(g, chi5, 6, [7, 11], [1, 6])
    assert pair.W == 518400  # (6!)^2
    assert pair.m == 262278863
    assert pair.m_prime == 33444951945
    assert pair.aux == {2: 13, 3: 17, 5: 19}
    assert pair.window_sum == 2
    assert pair.window_prime_sum == -2
    assert pair.measured == pair.predicted == 4
    assert pair.sign == 1
    assert pair.ok


def test_squarefree_pair_membership(chi5):
    """Window elements are certified through their actual factorizations."""
    g = make_spec(CharacterTwist(chi5), exceptions={5: 1, 7: 1, 11: -1})
    pair = squarefree_pair(g, chi5, 6, [7, 11], [1, 6])
    for m in (pair.m, pair.m_prime):
        base = pair.W * m
        for r in range(1, 7):
            n = base + r
            assert is_squarefree_big(n) == (r in (1, 6)), (m, r)
            aux = pair.aux.get(r)
            if aux is not None:  # the square that kills this residue class
                assert n % (aux * aux) == 0, (m, r, aux)
    # the planned primes divide the primed window exactly once, and stay out
    # of the first window entirely (m = 0 mod p pushes them off the offsets)
    for p, r in ((7, 1), (11, 6)):
        n = pair.W * pair.m_prime + r
        assert n % p == 0 and n % (p * p) != 0, (p, r)
        assert pair.m % p == 0
        assert all((pair.W * pair.m + j) % p != 0 for j in range(1, 7))


def test_squarefree_pair_validation(chi4, chi5):
    g = make_spec(CharacterTwist(chi5), exceptions={5: 1, 7: 1, 11: -1})
    with pytest.raises(ValueError):
        squarefree_pair(g, chi5, 6, [7], [1, 2])  # residue g-signs +1 vs -1
    with pytest.raises(ValueError):
        squarefree_pair(g, chi5, 6, [13], [1])  # g(13)chi(13) = +1, not -1
    g_missing = make_spec(CharacterTwist(chi5), exceptions={7: 1})
    with pytest.raises(ValueError):
        squarefree_pair(g_missing, chi5, 6, [7], [1])  # g(5) unset at p | q
    complex_chi = character_by_index(5, 1)
    with pytest.raises(ValueError):
        squarefree_pair(
            make_spec(CharacterTwist(complex_chi), exceptions={5: 1}),
            complex_chi, 6, [7], [1],
        )
    with pytest.raises(ValueError):
        squarefree_pair(g, chi5, 6, [7], [5])  # residue hits a deviation prime


def test_growth_profile_plain_matches_brute(chi4):
    spec = modified_spec(chi4, 3, 1)
    prof = growth_profile(spec, 1 << 14)
    assert prof.kind == "plain"
    assert prof.checkpoints == dyadic_checkpoints(1 << 14)
    rng = eval_range(spec, 1 << 14)
    cum = np.cumsum(rng.values[1:])
    for x, s, sup in zip(prof.checkpoints, prof.sums, prof.sups):
        assert s == complex(cum[x - 1]), x
        assert sup == float(np.max(np.abs(cum[:x]))), x


def test_growth_profile_squarefree_matches_brute(chi5):
    g = make_spec(CharacterTwist(chi5), exceptions={2: 1})
    N = 4000
    cps = [100, 1000, 4000]
    prof = growth_profile(g, N, kind="squarefree", checkpoints=cps)
    vals = eval_range(g, N).values.copy()
    for n in range(1, N + 1):
        if not oracles.naive_squarefree(n):
            vals[n] = 0
    cum = np.cumsum(vals[1:])
    for x, s, sup in zip(cps, prof.sums, prof.sups):
        assert s == complex(cum[x - 1]), x
        assert sup == float(np.max(np.abs(cum[:x]))), x


def test_growth_profile_regimes():
    grows = growth_profile(make_spec(One()), 1 << 12)
    assert grows.regime == "linear"
    assert grows.slope > 0
    flat = growth_profile(modified_spec(character_by_index(4, 1), 3, -1), 1 << 14)
    assert flat.regime == "bounded"
    with pytest.raises(ValueError):
        growth_profile(make_spec(One()), 100, kind="cubefree")


def test_checkpoint_builders():
    assert dyadic_checkpoints(16) == [1, 2, 4, 8, 16]
    assert dyadic_checkpoints(20) == [1, 2, 4, 8, 16, 20]
    assert decade_checkpoints(1000) == [1, 10, 100, 1000]
    assert decade_checkpoints(2500) == [1, 10, 100, 1000, 2500]


def test_random_walk_mc_median():
    out = random_walk_mc(5, 0.0, 10**4)
    assert out.seeds == [0, 1, 2, 3, 4]
    assert out.checkpoints == decade_checkpoints(10**4)
    assert len(out.sups_per_seed) == 5
    med = np.median(np.array(out.sups_per_seed), axis=0)
    assert out.median_sups == med.tolist()
    # each seed's row is exactly its standalone profile
    solo = growth_profile(
        make_spec(RandomRademacher(seed=3)), 10**4,
        checkpoints=decade_checkpoints(10**4),
    )
    assert out.sups_per_seed[3] == solo.sups


def test_random_walk_mc_thread_count_invariance():
    """The merged output is bit-identical no matter the thread cap."""
    script = (
        "import json, multsum\n"
        "out = multsum.random_walk_mc(4, 0.25, 10**4)\n"
        "print(json.dumps(out.sups_per_seed))\n"
    )
    rows = []
    for threads in ("1", "4"):
        env = dict(os.environ, MULTSUM_THREADS=threads)
        r = subprocess.run(
            [sys.executable, "-c", script], capture_output=True, text=True, env=env
        )
        assert r.returncode == 0, r.stderr
        rows.append(r.stdout)
    assert rows[0] == rows[1]


def test_thread_cap_env(monkeypatch):
    monkeypatch.setenv("MULTSUM_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.setenv("MULTSUM_THREADS", "0")
    with pytest.raises(ValueError):
        thread_cap()
    monkeypatch.delenv("MULTSUM_THREADS", raising=False)
    assert thread_cap() >= 1


def test_random_walk_mc_validation():
    with pytest.raises(ValueError):
        random_walk_mc(0, 0.0, 100)
    with pytest.raises(ValueError):
        random_walk_mc([1, 2], -0.5, 100)


def test_concentration_exact_character(chi4):
    """f = chi itself: the window model is exact, deviation identically 0."""
    f = make_spec(CharacterTwist(chi4))
    rep = concentration_experiment(f, chi4, 0.0, 4, 1, 2000)
    assert rep.deviation == 0.0
    assert rep.f_of_q == 0
    assert rep.N0 == 2  # 2 | Q but 3 does not
    assert rep.deviation <= rep.driver


def test_concentration_perturbed(chi5):
    # flipping at 2 cannot show up on the window 10n + 3; flipping at 3 does
    hidden = make_spec(CharacterTwist(chi5), exceptions={2: -chi5(2)})
    rep0 = concentration_experiment(hidden, chi5, 0.0, 10, 3, 3000)
    assert rep0.deviation == 0.0 and rep0.f_of_q == 0

    f = make_spec(CharacterTwist(chi5), exceptions={3: -chi5(3)})
    rep = concentration_experiment(f, chi5, 0.0, 10, 3, 3000)
    assert rep.f_of_q == pytest.approx(-2 / 3)  # single term (1(-1) - 1)/3
    assert 0 < rep.deviation <= rep.driver


def test_concentration_validation(chi4):
    f = make_spec(CharacterTwist(chi4))
    with pytest.raises(ValueError):
        concentration_experiment(f, chi4, 0.0, 6, 1, 100)  # Q not multiple of 4
    with pytest.raises(ValueError):
        concentration_experiment(f, chi4, 0.0, 4, 2, 100)  # gcd(a, Q) != 1
    with pytest.raises(ValueError):
        concentration_experiment(f, chi4, 0.0, 4, 5, 100)  # a out of range
