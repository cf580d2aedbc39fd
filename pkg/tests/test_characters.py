"""Tests for characters: tables, modified sums, witnesses, window checks."""

import math

import numpy as np
import pytest

import oracles
from multsum import (
    CapacityError,
    character_by_index,
    character_table,
    eval_range,
    euler_phi,
    final_rotation_check,
    find_window_prime,
    first_nonzero_sigma,
    growth_witness,
    iterate_check,
    modified_spec,
    recursion_state,
    s_restricted,
    sigma_many,
    sigma_recursion,
    zero_sum_scan,
)

# (q, index, conductor, real) facts small enough to check by hand
CONDUCTOR_TABLE = [
    (1, 0, 1, True),
    (3, 1, 3, True),
    (4, 1, 4, True),
    (5, 1, 5, False),
    (5, 2, 5, True),
    (8, 2, 4, True),   # induced from the level-4 character
    (9, 3, 3, True),   # induced from the level-3 character
    (12, 1, 3, True),
    (12, 2, 4, True),
    (12, 3, 12, True),
]


def test_table_orthogonality():
    for q in (3, 4, 5, 8, 9, 12, 16, 21, 40):
        tab = character_table(q)
        phi = euler_phi(q)
        assert len(tab) == phi, q
        units = [a for a in range(q) if math.gcd(a, q) == 1]
        # row orthogonality: sum_a chi(a) conj(psi(a)) = phi [chi == psi]
        for i, chi in enumerate(tab):
            for j, psi in enumerate(tab):
                s = sum(chi(a) * psi(a).conjugate() for a in units)
                want = phi if i == j else 0.0
                assert abs(s - want) < 1e-10, (q, i, j, s)
        # column orthogonality: sum_chi chi(a) conj(chi(b)) = phi [a == b]
        for a in units:
            for b in units:
                s = sum(chi(a) * chi(b).conjugate() for chi in tab)
                want = phi if a == b else 0.0
                assert abs(s - want) < 1e-10, (q, a, b, s)


def test_character_values_periodic_multiplicative():
    for q in (4, 5, 9, 12):
        for chi in character_table(q):
            for a in range(q):
                if math.gcd(a, q) != 1:
                    assert chi(a) == 0, (q, chi.index, a)
                assert chi(a + q) == chi(a)
                for b in range(q):
                    assert abs(chi(a * b) - chi(a) * chi(b)) < 1e-12
            assert chi(1) == 1


def test_conductor_and_real_flags():
    for q, index, conductor, real in CONDUCTOR_TABLE:
        chi = character_by_index(q, index)
        got = (chi.conductor, chi.real, chi.principal)
        assert got == (conductor, real, index == 0), (q, index, got)


def test_character_by_index_lookup():
    assert character_by_index(4, "real").index == 1
    assert character_by_index(5, "real").index == 2
    assert character_by_index(3, "real").index == 1
    with pytest.raises(ValueError):
        character_by_index(8, "real")  # three real non-principal characters
    with pytest.raises(ValueError):
        character_by_index(1, "real")  # none at all
    with pytest.raises(ValueError):
        character_by_index(5, 4)
    with pytest.raises(ValueError):
        character_by_index(5, -1)
    with pytest.raises(CapacityError):
        character_by_index(10**9, 0)
    # table order and single lookups agree
    tab = character_table(9)
    for i, chi in enumerate(tab):
        assert np.allclose(character_by_index(9, i).values, chi.values)


def test_modified_spec_values(chi4, spf_small):
    spec = modified_spec(chi4, 3, 1j)
    rng = eval_range(spec, 400)
    for n in range(1, 401):
        want = oracles.modified_value(chi4, 3, 1j, n)
        assert abs(complex(rng.values[n]) - want) < 1e-12, n


def test_modification_validation(chi4, chi5):
    with pytest.raises(ValueError):
        modified_spec(chi4, 4, 1)  # r not prime
    with pytest.raises(ValueError):
        modified_spec(chi4, 2, 1)  # r divides q
    with pytest.raises(ValueError):
        modified_spec(chi4, 3, 2.0)  # z off the unit circle
    with pytest.raises(ValueError):
        recursion_state(chi5, 5, 1)


def test_s_restricted_values(chi4):
    st = recursion_state(chi4, 3, 1)
    assert s_restricted(st, 10) == 1  # frozen: chi4 over n <= 10 coprime to 3
    for x in (0, 1, 5, 11, 12, 13, 100, 1234):
        brute = sum(chi4(n) for n in range(1, x + 1) if n % 3 != 0)
        assert s_restricted(st, x) == brute, x
    with pytest.raises(ValueError):
        s_restricted(st, -1)


def test_sigma_recursion_frozen(chi4, chi5):
    assert sigma_recursion(recursion_state(chi4, 3, 1), 10) == 3
    assert sigma_recursion(recursion_state(chi4, 3, 1j), 10) == 1j
    assert sigma_recursion(recursion_state(chi5, 7, -1), 100) == 0


def test_sigma_recursion_matches_direct(chi4, chi5):
    combos = [
        (chi4, 3, 1),
        (chi4, 3, 1j),
        (chi4, 7, -1),
        (chi5, 3, -1j),
        (chi5, 7, 1),
        (character_by_index(5, 1), 3, 1j),
    ]
    for chi, r, z in combos:
        st = recursion_state(chi, r, z)
        for x in (0, 1, 2, 7, 50, 333, 500):
            want = oracles.direct_modified_sum(chi, r, z, x)
            got = sigma_recursion(st, x)
            assert abs(got - want) < 1e-12, (chi.modulus, r, z, x, got, want)


def test_sigma_many_matches_scalar(chi4):
    st = recursion_state(chi4, 3, 1j)
    xs = np.array([0, 1, 2, 3, 9, 10, 81, 1000, 10**6], dtype=np.int64)
    vec = sigma_many(st, xs)
    for x, v in zip(xs, vec):
        assert complex(v) == sigma_recursion(st, int(x)), int(x)


def test_iterate_check_exact_zero(chi4, chi5):
    rng = np.random.default_rng(20260818)
    for chi in (chi4, chi5):
        q = chi.modulus
        for r in (3, 7):
            if q % r == 0:
                continue
            for z in (1, -1, 1j):
                st = recursion_state(chi, r, z)
                for _ in range(40):
                    K = int(rng.integers(1, 6))
                    x = q * int(rng.integers(1, 50))
                    y_cap = max((r**K - 1) // q, 1)
                    y = q * int(rng.integers(0, min(y_cap, 50)))
                    if y >= r**K:
                        continue
                    assert iterate_check(st, x, y, K) == 0, (q, r, z, x, y, K)


def test_iterate_check_validation(chi4):
    st = recursion_state(chi4, 3, 1)
    with pytest.raises(ValueError):
        iterate_check(st, 4, 0, 0)  # K too small
    with pytest.raises(ValueError):
        iterate_check(st, 5, 0, 2)  # x not a multiple of q
    with pytest.raises(ValueError):
        iterate_check(st, 4, 6, 2)  # y not a multiple of q
    with pytest.raises(ValueError):
        iterate_check(st, 4, 12, 2)  # y >= r^K


def test_growth_witness_frozen(chi4):
    st = recursion_state(chi4, 3, 1)
    w = growth_witness(st, 1 << 24, density=2.0)
    assert w.regime == "witness"
    assert (w.A, w.K, w.seed_sigma) == (4, 2, 2)
    assert w.m_list == (1, 2, 3, 4, 5, 6)
    assert w.n == 2391484
    assert w.measured == w.predicted == 14
    assert w.exact_match and w.bound_ok
    assert w.lower_bound == pytest.approx(0.99 * 7 * 2)
    # the default density is conservative: no copies fit below 2^24
    w0 = growth_witness(st, 1 << 24)
    assert (w0.m_list, w0.n, w0.measured) == ((), 4, 2)
    assert w0.bound_ok and w0.exact_match


def test_growth_witness_zero_sum_regime(chi4):
    st = recursion_state(chi4, 3, chi4(3))
    assert st.degenerate
    w = growth_witness(st, 10**6, a_max=400)
    assert w.regime == "zero-sum"
    assert w.n is None


def test_first_nonzero_sigma(chi4):
    st = recursion_state(chi4, 3, 1)
    assert first_nonzero_sigma(st, 100) == 1
    assert zero_sum_scan is first_nonzero_sigma
    degenerate = recursion_state(chi4, 3, chi4(3))
    assert first_nonzero_sigma(degenerate, 200) is None
    with pytest.raises(ValueError):
        first_nonzero_sigma(st, 0)


def test_find_window_prime(chi4, chi5):
    assert find_window_prime(chi4, 3) == 43
    for chi, r in ((chi4, 3), (chi4, 7), (chi5, 3), (chi5, 7)):
        P = find_window_prime(chi, r)
        q = chi.modulus
        assert P != r and P >= 10 * q and (P - r) % q == 0
        assert oracles.trial_spf(P) == P


def test_final_rotation_check_frozen(chi4):
    res = final_rotation_check(chi4, 3, 1j, 13, 43)
    assert (res.s1, res.s2) == (7, 7)
    assert (res.k_m, res.l_m) == (2790065, 39990935)
    assert res.surviving == -1 - 1j
    assert res.phase == 1
    assert res.gap == -1 - 1j
    assert res.cancellation_ok and res.forced
    assert res.verdict == "bounded sums force z = chi(r)"
    # the two window sums match a direct factorization-based evaluation
    q = chi4.modulus
    w1 = oracles.window_sum_modified(chi4, 3, 1j, q * res.k_m, q * res.k_m + q)
    w2 = oracles.window_sum_modified(chi4, 3, 1j, q * res.l_m, q * res.l_m + q)
    assert res.window1 == w1 and res.window2 == w2


def test_final_rotation_check_unforced(chi4):
    res = final_rotation_check(chi4, 3, -1, 13, 43)  # z = chi(3): no change
    assert res.surviving == 0 and res.gap == 0
    assert not res.forced
    assert res.cancellation_ok
    assert res.verdict == "no obstruction: z already equals chi(r)"


def test_final_rotation_check_validation(chi4):
    with pytest.raises(ValueError):
        final_rotation_check(chi4, 3, 1j, 5, 43)  # m below the floor
    with pytest.raises(ValueError):
        final_rotation_check(chi4, 3, 1j, 13, 45)  # P not prime
    with pytest.raises(ValueError):
        final_rotation_check(chi4, 3, 1j, 13, 31)  # P != r mod q
    with pytest.raises(ValueError):
        final_rotation_check(chi4, 3, 1j, 13, 19)  # P < 10q
