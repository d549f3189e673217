"""Integer and character arithmetic.

Sieves for the Moebius function, the von Mangoldt function, primes, and
smallest prime factors; deterministic primality testing; primitive-root
detection; Dirichlet character tables modulo a prime realized through a
discrete-log table; and the character-expansion coefficients of the
primitive-root indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_BLOCK = 1 << 22

# Deterministic Miller-Rabin witness set, sufficient for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True, eq=False)
class SieveTables:
    """Arithmetic tables for 0..limit (index = n)."""

    limit: int
    mobius: np.ndarray
    mangoldt: np.ndarray
    primes: np.ndarray
    smallest_prime_factor: np.ndarray


@dataclass(frozen=True, eq=False)
class CharacterTable:
    """Dirichlet characters modulo a prime q via a discrete-log table.

    chi_j(a) = e(j * dlog[a] / order) for a coprime to q, so character
    values are exact roots of unity computed on demand; dlog[0] = -1 is
    a sentinel for the excluded residue class.
    """

    q: int
    generator: int
    dlog: np.ndarray
    order: int


@dataclass(frozen=True, eq=False)
class IndicatorCoefficients:
    """Expansion of the primitive-root indicator over the characters.

    c[j] is the coefficient of chi_j; pr_count is the number of
    primitive roots modulo q, i.e. phi(q-1).
    """

    q: int
    c: np.ndarray
    pr_count: int


def _sieve_primes(limit: int) -> np.ndarray:
    """Primes up to limit by a plain boolean sieve (small limits only)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def build_sieve(limit: int) -> SieveTables:
    """Sieve tables up to limit (inclusive).

    Construction runs in fixed-size blocks so peak temporary memory stays
    bounded for large limits; the returned arrays are full-size.
    """
    limit = int(limit)
    if limit < 2:
        raise ValueError(f"sieve limit must be at least 2, got {limit}")
    try:
        spf = np.zeros(limit + 1, dtype=np.int64 if limit >= 2**31 else np.int32)
        mob = np.ones(limit + 1, dtype=np.int8)
        mangoldt = np.zeros(limit + 1, dtype=np.float64)
    except MemoryError as exc:
        raise MemoryError(f"cannot allocate sieve tables for limit {limit}") from exc
    mob[0] = 0

    root = math.isqrt(limit)
    small_primes = _sieve_primes(root)

    for lo in range(0, limit + 1, _BLOCK):
        hi = min(lo + _BLOCK, limit + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        spf_blk = np.zeros(hi - lo, dtype=spf.dtype)
        prod = np.ones(hi - lo, dtype=np.int64)
        mob_blk = mob[lo:hi]
        for p in small_primes:
            p = int(p)
            first = ((lo + p - 1) // p) * p
            if first < hi:
                sl = slice(first - lo, hi - lo, p)
                mob_blk[sl] = -mob_blk[sl]
                prod[sl] *= p
            # spf assignment can start at p*p: smaller multiples carry a
            # smaller prime factor
            start_sq = max(p * p, first)
            if start_sq < hi:
                sl = slice(start_sq - lo, hi - lo, p)
                view = spf_blk[sl]
                unset = view == 0
                if unset.any():
                    view[unset] = p
            sq = p * p
            first_sq = ((lo + sq - 1) // sq) * sq
            if first_sq < hi:
                mob_blk[first_sq - lo : hi - lo : sq] = 0
        # untouched entries >= 2 are prime (or have a prime factor > root,
        # impossible for spf since the cofactor would exceed the limit)
        fresh = (spf_blk == 0) & (n >= 2)
        spf_blk[fresh] = n[fresh]
        spf[lo:hi] = spf_blk
        # entries whose distinct small-prime product falls short carry one
        # prime factor above the root: one extra sign flip
        leftover = prod != n
        mob_blk[leftover] = -mob_blk[leftover]

    primes = np.flatnonzero(spf == np.arange(limit + 1, dtype=spf.dtype)).astype(np.int64)
    primes = primes[primes >= 2]
    mangoldt[primes] = np.log(primes.astype(np.float64))
    for p in small_primes:
        p = int(p)
        pk = p * p
        while pk <= limit:
            mangoldt[pk] = math.log(p)
            pk *= p
    return SieveTables(
        limit=limit,
        mobius=mob,
        mangoldt=mangoldt,
        primes=primes,
        smallest_prime_factor=spf,
    )


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for 64-bit-scale n."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors by trial division (desk-scale n)."""
    n = int(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def euler_phi(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError("euler_phi needs n >= 1")
    result = n
    for p in prime_factors(n):
        result -= result // p
    return result


def is_primitive_root(a: int, q: int) -> bool:
    """True iff a generates the multiplicative group modulo the prime q.

    Tests a^((q-1)/p) mod q != 1 for every prime p dividing q-1, which
    is equivalent to the order of a being exactly q-1.
    """
    q = int(q)
    if not is_prime(q):
        raise ValueError(f"q must be prime, got {q}")
    a = int(a) % q
    if a == 0:
        raise ValueError("a must not be divisible by q")
    if q == 2:
        return a == 1
    return all(pow(a, (q - 1) // p, q) != 1 for p in prime_factors(q - 1))


def build_characters(q: int) -> CharacterTable:
    """Character table modulo an odd prime q.

    The generator is the least primitive root (deterministic tables);
    dlog[a] is the exponent k with generator^k = a mod q.
    """
    q = int(q)
    if q < 3 or not is_prime(q):
        raise ValueError(f"q must be an odd prime, got {q}")
    factors = prime_factors(q - 1)
    g = None
    for a in range(2, q):
        if all(pow(a, (q - 1) // p, q) != 1 for p in factors):
            g = a
            break
    if g is None:
        raise AssertionError(f"no primitive root found for prime {q}")
    dlog = np.full(q, -1, dtype=np.int64)
    acc = 1
    for k in range(q - 1):
        dlog[acc] = k
        acc = acc * g % q
    return CharacterTable(q=q, generator=g, dlog=dlog, order=q - 1)


def character_value(table: CharacterTable, j: int, a) -> complex | np.ndarray:
    """chi_j evaluated at a (scalar or array); 0 on multiples of q."""
    a_arr = np.atleast_1d(np.asarray(a, dtype=np.int64)) % table.q
    k = table.dlog[a_arr]
    vals = np.where(
        k >= 0,
        np.exp(2j * np.pi * (j % table.order) * k / table.order),
        0.0,
    )
    if np.isscalar(a) or np.asarray(a).ndim == 0:
        return complex(vals[0])
    return vals


def indicator_coeffs(table: CharacterTable) -> IndicatorCoefficients:
    """Coefficients c_j = (1/(q-1)) * sum of conj(chi_j) over the
    primitive roots modulo q.

    A residue g^k is a primitive root iff gcd(k, q-1) = 1, so the sum
    runs over the reduced exponents.
    """
    q, order = table.q, table.order
    ks = np.array([k for k in range(order) if math.gcd(k, order) == 1], dtype=np.int64)
    j = np.arange(order, dtype=np.int64)
    phases = np.exp(-2j * np.pi * np.outer(j, ks) / order)
    c = phases.sum(axis=1) / order
    return IndicatorCoefficients(q=q, c=c, pr_count=len(ks))


def reconstruct_indicator(table: CharacterTable, coeffs: IndicatorCoefficients, a) -> np.ndarray:
    """Sum of c_j * chi_j(a): 1 on primitive roots, 0 elsewhere (up to
    roundoff), for a coprime to q."""
    a_arr = np.atleast_1d(np.asarray(a, dtype=np.int64)) % table.q
    k = table.dlog[a_arr]
    j = np.arange(table.order, dtype=np.int64)
    phases = np.exp(2j * np.pi * np.outer(k, j) / table.order)
    vals = phases @ coeffs.c
    vals[k < 0] = 0.0
    return vals
