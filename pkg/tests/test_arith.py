"""Tests for sieves, primality, primitive roots, characters, and the
primitive-root indicator expansion."""

import math


import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from perronkit import arith

PRIMES_TO_100 = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]


def mobius_by_divisor_inversion(limit: int) -> np.ndarray:
    """Independent Moebius oracle: solve sum_{d|n} mu(d) = [n == 1]
    by ascending divisor-sum elimination (no factorization involved)."""
    mu = np.zeros(limit + 1, dtype=np.int64)
    acc = np.zeros(limit + 1, dtype=np.int64)
    mu[1] = 1
    acc[2 :: 1] += 0  # keep shape explicit
    for d in range(1, limit + 1):
        if d == 1:
            mu[1] = 1
        else:
            mu[d] = (1 if d == 1 else 0) - acc[d]
        if 2 * d <= limit:
            acc[2 * d :: d] += mu[d]
    return mu


def log_of_bigint(n: int) -> float:
    """Natural log of an arbitrarily large positive integer."""
    bits = n.bit_length()
    if bits <= 900:
        return math.log(n)
    shift = bits - 53
    return math.log(n >> shift) + shift * math.log(2.0)


class TestBuildSieve:
    def test_frozen_small_values(self):
        t = arith.build_sieve(100)
        assert t.mobius[12] == 0
        assert t.mobius[30] == -1
        assert_allclose(t.mangoldt[8], math.log(2), rtol=1e-15)
        assert t.mobius[1] == 1 and t.mangoldt[1] == 0.0

    def test_against_sympy_scattered(self):
        t = arith.build_sieve(500_000)
        rng = np.random.default_rng(11)
        ns = np.concatenate([np.arange(1, 100), rng.integers(100, 500_000, 150)])
        for n in map(int, ns):
            assert t.mobius[n] == sympy.mobius(n)
            fac = sympy.factorint(n)
            lam = math.log(min(fac)) if len(fac) == 1 else 0.0
            assert abs(t.mangoldt[n] - lam) < 1e-12
            if n > 1:
                assert t.smallest_prime_factor[n] == min(fac)

    def test_primes_field(self):
        t = arith.build_sieve(10_000)
        assert t.primes[0] == 2 and t.primes[-1] == 9973
        assert len(t.primes) == 1229
        assert np.all(np.diff(t.primes) > 0)

    def test_mertens_against_divisor_inversion(self):
        limit = 100_000
        t = arith.build_sieve(limit)
        oracle = mobius_by_divisor_inversion(limit)
        assert np.array_equal(t.mobius.astype(np.int64)[1:], oracle[1:])
        mertens = np.cumsum(t.mobius.astype(np.int64))
        assert mertens[100] == 1
        assert mertens[10_000] == -23

    def test_mangoldt_sums_equal_log_lcm(self):
        t = arith.build_sieve(10_000)
        lcm = 1
        checkpoints = {10, 100, 1000, 10_000}
        psi = np.cumsum(t.mangoldt)
        for n in range(2, 10_001):
            lcm = math.lcm(lcm, n)
            if n in checkpoints:
                assert_allclose(psi[n], log_of_bigint(lcm), rtol=1e-11)

    def test_block_boundaries_are_seamless(self):
        # force multi-block construction and compare against one block
        small = arith.build_sieve(9_000)
        old_block = arith._BLOCK
        arith._BLOCK = 2048
        try:
            blocked = arith.build_sieve(9_000)
        finally:
            arith._BLOCK = old_block
        assert np.array_equal(small.mobius, blocked.mobius)
        assert np.array_equal(small.smallest_prime_factor, blocked.smallest_prime_factor)
        assert_allclose(small.mangoldt, blocked.mangoldt, rtol=0, atol=0)

    def test_rejects_bad_limit(self):
        with pytest.raises(ValueError):
            arith.build_sieve(1)
        with pytest.raises(ValueError):
            arith.build_sieve(-5)

    def test_allocation_failure_is_distinct(self, monkeypatch):
        def raise_memory(*args, **kwargs):
            raise MemoryError("boom")

        monkeypatch.setattr(arith.np, "zeros", raise_memory)
        with pytest.raises(MemoryError, match="sieve tables"):
            arith.build_sieve(10)


class TestPrimality:
    def test_known_values(self):
        assert arith.is_prime(2) and arith.is_prime(3) and arith.is_prime(97)
        assert not arith.is_prime(1) and not arith.is_prime(0) and not arith.is_prime(-7)
        assert not arith.is_prime(561)  # Carmichael
        assert not arith.is_prime(3215031751)  # strong pseudoprime to 2,3,5,7
        assert arith.is_prime(2**61 - 1)
        assert not arith.is_prime(2**61 + 1)

    def test_against_sympy(self):
        rng = np.random.default_rng(5)
        for n in map(int, rng.integers(2, 10**12, 200)):
            assert arith.is_prime(n) == sympy.isprime(n)


class TestEulerPhi:
    def test_against_sympy(self):
        for n in range(1, 200):
            assert arith.euler_phi(n) == sympy.totient(n)
        assert arith.euler_phi(2**20) == 2**19

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            arith.euler_phi(0)


class TestPrimitiveRoot:
    def test_examples_mod_7(self):
        assert arith.is_primitive_root(3, 7) is True
        assert arith.is_primitive_root(1, 7) is False
        count = sum(arith.is_primitive_root(a, 7) for a in range(1, 7))
        assert count == 2 == arith.euler_phi(6)

    def test_equals_brute_force_order(self):
        for q in [int(p) for p in arith._sieve_primes(200)]:
            for a in range(1, q):
                order = 1
                acc = a % q
                while acc != 1:
                    acc = acc * a % q
                    order += 1
                assert arith.is_primitive_root(a, q) == (order == q - 1), (a, q)

    def test_count_is_phi_of_q_minus_1(self):
        for q in [11, 13, 101, 499]:
            count = sum(arith.is_primitive_root(a, q) for a in range(1, q))
            assert count == arith.euler_phi(q - 1)

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            arith.is_primitive_root(7, 7)
        with pytest.raises(ValueError):
            arith.is_primitive_root(14, 7)
        with pytest.raises(ValueError):
            arith.is_primitive_root(3, 10)


class TestCharacters:
    def test_generator_is_least(self):
        assert arith.build_characters(7).generator == 3
        for q in [3, 5, 7, 11, 13, 97]:
            g = arith.build_characters(q).generator
            for a in range(1, g):
                assert not arith.is_primitive_root(a, q)
            assert arith.is_primitive_root(g, q)

    def test_dlog_bijection(self):
        t = arith.build_characters(101)
        ks = np.sort(t.dlog[1:])
        assert np.array_equal(ks, np.arange(100))
        assert t.dlog[0] == -1
        assert t.order == 100

    def test_principal_character(self):
        t = arith.build_characters(11)
        vals = arith.character_value(t, 0, np.arange(1, 11))
        assert_allclose(vals, np.ones(10), rtol=0, atol=1e-15)
        assert arith.character_value(t, 0, 22) == 0.0

    def test_nonprincipal_row_sum_vanishes(self):
        t = arith.build_characters(7)
        s = arith.character_value(t, 1, np.arange(1, 7)).sum()
        assert abs(s) < 1e-12

    def test_orthogonality(self):
        for q in [7, 23, 101]:
            t = arith.build_characters(q)
            a = np.arange(1, q)
            mat = np.stack([arith.character_value(t, j, a) for j in range(q - 1)])
            gram = mat @ mat.conj().T
            assert_allclose(gram, (q - 1) * np.eye(q - 1), rtol=0, atol=1e-9)

    def test_multiplicativity(self):
        t = arith.build_characters(13)
        rng = np.random.default_rng(2)
        for j in [1, 5, 11]:
            for _ in range(20):
                a, b = map(int, rng.integers(1, 13, 2))
                lhs = arith.character_value(t, j, a * b)
                rhs = arith.character_value(t, j, a) * arith.character_value(t, j, b)
                assert abs(lhs - rhs) < 1e-12

    def test_rejects_composite_and_even(self):
        for q in [1, 2, 9, 15, 561]:
            with pytest.raises(ValueError):
                arith.build_characters(q)


def ramanujan_coeff_oracle(q: int, j: int) -> float:
    """Closed form for the indicator coefficients: with n = q-1 and
    d = n / gcd(j, n), c_j = mu(d) * phi(n) / (phi(d) * n)."""
    n = q - 1
    d = n // math.gcd(j, n)
    return int(sympy.mobius(d)) * arith.euler_phi(n) / (arith.euler_phi(d) * n)


class TestIndicatorCoeffs:
    def test_principal_coefficient_mod_7(self):
        t = arith.build_characters(7)
        co = arith.indicator_coeffs(t)
        assert_allclose(co.c[0], 1.0 / 3.0, rtol=1e-15)
        assert co.pr_count == 2
        assert np.abs(co.c).sum() <= math.sqrt(2) + 1e-12

    def test_matches_ramanujan_closed_form(self):
        for q in [5, 7, 11, 43, 97]:
            co = arith.indicator_coeffs(arith.build_characters(q))
            oracle = np.array([ramanujan_coeff_oracle(q, j) for j in range(q - 1)])
            assert_allclose(co.c, oracle, rtol=0, atol=1e-12,
                            err_msg=f"coefficients mod {q}")

    def test_parseval_and_l1_bounds(self):
        for q in [int(p) for p in arith._sieve_primes(500) if p >= 3]:
            co = arith.indicator_coeffs(arith.build_characters(q))
            phi_n = arith.euler_phi(q - 1)
            assert_allclose(
                (np.abs(co.c) ** 2).sum(), phi_n / (q - 1), rtol=0, atol=1e-9,
                err_msg=f"power identity mod {q}",
            )
            assert np.abs(co.c).sum() <= math.sqrt(phi_n) + 1e-9, f"l1 bound mod {q}"

    def test_reconstruction_small_moduli(self):
        for q in [3, 7, 31, 211]:
            t = arith.build_characters(q)
            co = arith.indicator_coeffs(t)
            rec = arith.reconstruct_indicator(t, co, np.arange(1, q))
            expected = np.array(
                [1.0 if arith.is_primitive_root(a, q) else 0.0 for a in range(1, q)]
            )
            assert_allclose(rec, expected, rtol=0, atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(qi=st.integers(2, 24), a=st.integers(1, 10**6))
    def test_reconstruction_property(self, qi, a):
        q = PRIMES_TO_100[qi]
        if a % q == 0:
            a += 1
        t = arith.build_characters(q)
        co = arith.indicator_coeffs(t)
        val = arith.reconstruct_indicator(t, co, a)[0]
        expected = 1.0 if arith.is_primitive_root(a, q) else 0.0
        assert abs(val - expected) < 1e-9


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
