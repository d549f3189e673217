"""Dirichlet series: coefficient streams, partial sums, sup bounds, and
evaluation at complex points.

The catalog covers the constant stream (zeta), the alternating stream
(eta), the Moebius and von Mangoldt streams, and character-twisted
variants.  Evaluation uses two independent engines:

* a certified Euler-Maclaurin zeta (and zeta derivative) for Re(s)
  bounded away from 0, vectorized and bucketed by the truncation point
  each s requires;
* accelerated alternating summation for eta on Re(s) > -1, with the
  acceleration coefficients generated in log space so the order can grow
  with |Im s| without overflow.

The Moebius and von Mangoldt streams are evaluated through 1/zeta and
-zeta'/zeta on Re(s) > 1; neither stream declares an analytic
continuation, so points with Re(s) <= 1 are rejected for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import arith

DEFAULT_TOL = 1e-10
_DIRECT_SUM_CAP = 4_000_000

# B_{2j} / (2j)! for j = 1..13 (the j = 13 entry drives the remainder
# bound of the 12-term Euler-Maclaurin tail).
_BERN = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138),
    Fraction(-236364091, 2730), Fraction(8553103, 6),
]
_EM_COEF = [float(b / math.factorial(2 * (j + 1))) for j, b in enumerate(_BERN)]
_EM_J = 12

_CVZ_RATE = math.log(3.0 + math.sqrt(8.0))


@dataclass(frozen=True, eq=False)
class SeriesDescriptor:
    """A Dirichlet series F(s) = sum of coeff(n) / n^s.

    coeff is vectorized over integer arrays.  poles lists
    (location, residue) pairs of the continued function; continuation,
    when present, evaluates F left of sigma_a with absolute error below
    the given tolerance.
    """

    name: str
    coeff: Callable[[np.ndarray], np.ndarray]
    sigma_c: float
    sigma_a: float
    sigma_0: float
    poles: tuple[tuple[complex, complex], ...]
    continuation: Callable[[np.ndarray, float], np.ndarray] | None


@dataclass(frozen=True)
class CahenBound:
    """Running supremum of |sum_{n<=N} a_n n^{-sigma}|.

    certified means a tail argument closes the supremum over all N (the
    value then dominates every partial sum, not only those inspected).
    """

    sigma: float
    value: float
    n_max_searched: int
    certified: bool


@lru_cache(maxsize=8)
def _sieve_for(limit: int) -> arith.SieveTables:
    return arith.build_sieve(limit)


def _sieve_block(lo: int, hi: int) -> arith.SieveTables:
    # round the limit up so repeated queries share one table
    limit = max(1 << 14, 1 << (hi - 1).bit_length())
    return _sieve_for(limit)


# ---------------------------------------------------------------------------
# Euler-Maclaurin zeta with certified truncation


@lru_cache(maxsize=4)
def _log_table(n: int) -> np.ndarray:
    return np.log(np.arange(1, n, dtype=np.float64))


def _em_required_n(s: np.ndarray, tol: float) -> np.ndarray:
    """Truncation point making the Euler-Maclaurin remainder (after
    _EM_J correction terms) provably below tol."""
    sigma = s.real
    log_c = math.log(abs(_EM_COEF[_EM_J]))
    acc = np.zeros(s.shape)
    for i in range(2 * _EM_J + 1):
        acc += np.log(np.abs(s + i))
    log_c = log_c + acc + np.log(np.abs(s + 2 * _EM_J + 1) / (sigma + 2 * _EM_J + 1))
    n_real = np.exp((log_c - math.log(tol)) / (sigma + 2 * _EM_J + 1))
    return np.maximum(16, np.ceil(n_real)).astype(np.int64)


def _em_zeta_batch(s: np.ndarray, n_trunc: int, deriv: bool) -> tuple[np.ndarray, np.ndarray | None]:
    """Euler-Maclaurin evaluation of zeta (and optionally zeta') at the
    points s, all sharing the truncation point n_trunc."""
    logs = _log_table(1 << max(4, int(n_trunc - 1).bit_length()))[: n_trunc - 1]
    z = np.zeros(s.shape, dtype=complex)
    zp = np.zeros(s.shape, dtype=complex) if deriv else None
    chunk = max(1, 4_000_000 // max(1, s.size))
    for lo in range(0, logs.size, chunk):
        ln = logs[lo : lo + chunk]
        mat = np.exp(-np.multiply.outer(s, ln))
        z += mat.sum(axis=-1)
        if deriv:
            zp -= mat @ ln
    ln_n = math.log(n_trunc)
    npow = np.exp(-s * ln_n)  # N^{-s}
    z += npow * n_trunc / (s - 1) + 0.5 * npow
    if deriv:
        zp += npow * n_trunc * (-ln_n / (s - 1) - 1 / (s - 1) ** 2) - 0.5 * ln_n * npow
    rising = np.ones(s.shape, dtype=complex)
    harmonic = np.zeros(s.shape, dtype=complex)
    for j in range(1, _EM_J + 1):
        if j == 1:
            rising = s.astype(complex)
            harmonic = 1.0 / s
        else:
            for i in (2 * j - 3, 2 * j - 2):
                rising = rising * (s + i)
                harmonic = harmonic + 1.0 / (s + i)
        term = _EM_COEF[j - 1] * rising * npow * float(n_trunc) ** (1 - 2 * j)
        z += term
        if deriv:
            zp += term * (harmonic - ln_n)
    return z, zp


def _em_zeta(s: np.ndarray, tol: float, deriv: bool = False) -> tuple[np.ndarray, np.ndarray | None]:
    """Vectorized zeta (and zeta') with certified absolute error <= tol,
    for Re(s) > 0.05 away from the pole at 1."""
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0.05):
        raise ValueError("Euler-Maclaurin evaluator needs Re(s) > 0.05")
    eff_tol = tol
    if deriv:
        # the differentiated remainder picks up a log(N) + harmonic factor
        eff_tol = tol / 60.0
    need = _em_required_n(s, eff_tol)
    z = np.zeros(s.shape, dtype=complex)
    zp = np.zeros(s.shape, dtype=complex) if deriv else None
    buckets = np.ceil(np.log2(need)).astype(np.int64)
    for b in np.unique(buckets):
        mask = buckets == b
        zb, zpb = _em_zeta_batch(s[mask], int(2**b), deriv)
        z[mask] = zb
        if deriv:
            zp[mask] = zpb
    return z, zp


def zeta(s, tol: float = 1e-13) -> complex | np.ndarray:
    """Riemann zeta via certified Euler-Maclaurin (Re(s) > 0.05)."""
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    z, _ = _em_zeta(arr, tol)
    if np.isscalar(s) or np.asarray(s).ndim == 0:
        return complex(z[0])
    return z


# ---------------------------------------------------------------------------
# Accelerated alternating summation (Chebyshev-style coefficients)


@lru_cache(maxsize=64)
def _alt_weights(n: int) -> np.ndarray:
    """Scaled acceleration weights w_k = c_k / d for order n.

    The recursion runs in signed log space, so orders in the thousands
    (needed for large |Im s|) neither overflow nor underflow; the ratios
    themselves stay O(1).
    """
    log_d = n * _CVZ_RATE + math.log1p((3.0 - math.sqrt(8.0)) ** (2 * n)) - math.log(2.0)
    # b_0 = -1, c_0 = -d
    log_b, sign_b = 0.0, -1.0
    log_c, sign_c = log_d, -1.0
    out = np.empty(n)
    for k in range(n):
        # c <- b - c
        if log_b > log_c:
            big, small, sign = log_b, log_c, sign_b
            other = -sign_c
        else:
            big, small, sign = log_c, log_b, -sign_c
            other = sign_b
        if sign == other:
            log_c = big + math.log1p(math.exp(small - big))
        else:
            diff = math.exp(small - big)
            log_c = big + (math.log1p(-diff) if diff < 1.0 else -math.inf)
        sign_c = sign
        out[k] = sign_c * math.exp(log_c - log_d)
        # b <- b * (k+n)(k-n) / ((k+1/2)(k+1))
        log_b += math.log(k + n) + math.log(n - k) - math.log(k + 0.5) - math.log(k + 1.0)
        sign_b = -sign_b
    return out


def _alt_order(t_max: float, sigma_min: float, tol: float) -> int:
    """Acceleration order with heuristic error factor below tol."""
    n = 24
    while True:
        growth = max(0.0, -sigma_min) * math.log(n)
        bound = math.pi * t_max / 2 + math.log(3.0 + 2.0 * t_max) + growth - n * _CVZ_RATE
        if bound <= math.log(tol):
            return n
        n = max(n + 8, int(n * 1.3))


def _alt_eta(s: np.ndarray, tol: float) -> np.ndarray:
    """Alternating zeta on Re(s) > -1 by accelerated summation.

    The truncation bound is certified by the order choice; float64
    roundoff adds a floor that grows roughly like order^{|sigma|} for
    sigma < 0 (the summands themselves grow), so high accuracy is only
    realistic right of the imaginary axis.
    """
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= -1.0):
        raise ValueError("alternating acceleration restricted to Re(s) > -1")
    flat = s.reshape(-1)
    res = np.empty(flat.shape, dtype=complex)
    # group points by the acceleration order they need (octaves of |t|)
    t_abs = np.abs(flat.imag)
    octave = np.ceil(np.log2(np.maximum(t_abs, 8.0))).astype(np.int64)
    for oc in np.unique(octave):
        mask = octave == oc
        sc = flat[mask]
        n = _alt_order(float(np.abs(sc.imag).max()), float(sc.real.min()), tol * 0.25)
        n = 32 * ((n + 31) // 32)
        w = _alt_weights(n)
        logs = np.log(np.arange(1.0, n + 1.0))
        vals = np.empty(sc.shape, dtype=complex)
        chunk = max(1, 4_000_000 // n)
        for lo in range(0, sc.size, chunk):
            vals[lo : lo + chunk] = np.exp(-np.multiply.outer(sc[lo : lo + chunk], logs)) @ w
        res[mask] = vals
    return res.reshape(s.shape)


# ---------------------------------------------------------------------------
# catalog streams


def _ones_coeff(n: np.ndarray) -> np.ndarray:
    return np.ones(np.shape(n))


def _eta_coeff(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    return np.where(n % 2 == 1, 1.0, -1.0)


def _mobius_coeff(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    table = _sieve_block(0, int(n.max()) if n.size else 2)
    return table.mobius[n].astype(np.float64)


def _mangoldt_coeff(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    table = _sieve_block(0, int(n.max()) if n.size else 2)
    return table.mangoldt[n]


def _ones_continuation(s: np.ndarray, tol: float) -> np.ndarray:
    """zeta left of the abscissa: eta(s) / (1 - 2^{1-s}), switching to
    the Euler-Maclaurin route near the removable zeros of the
    denominator (s = 1 + 2 pi i k / log 2)."""
    s = np.asarray(s, dtype=complex)
    den = 1.0 - np.exp((1.0 - s) * math.log(2.0))
    out = np.empty(s.shape, dtype=complex)
    safe = np.abs(den) >= 0.01
    if safe.any():
        local = np.abs(den[safe]) * 0.5
        eta_vals = _alt_eta(s[safe], tol * float(local.min()))
        out[safe] = eta_vals / den[safe]
    if (~safe).any():
        z, _ = _em_zeta(s[~safe], tol)
        out[~safe] = z
    return out


def _eta_continuation(s: np.ndarray, tol: float) -> np.ndarray:
    return _alt_eta(s, tol)


def catalog(
    name: str,
    *,
    base: str | None = None,
    table: arith.CharacterTable | None = None,
    j: int | None = None,
) -> SeriesDescriptor:
    """Descriptor for a named series.

    Known names: "ones", "eta", "mobius", "mangoldt", and "twisted"
    (which needs base in {"mobius", "mangoldt"}, a CharacterTable, and a
    character index j).  The Moebius and von Mangoldt streams carry the
    unconditional abscissas sigma_c = sigma_a = 1.
    """
    if name == "ones":
        return SeriesDescriptor(
            name="ones",
            coeff=_ones_coeff,
            sigma_c=1.0,
            sigma_a=1.0,
            sigma_0=1.0,
            poles=((1 + 0j, 1 + 0j),),
            continuation=_ones_continuation,
        )
    if name == "eta":
        return SeriesDescriptor(
            name="eta",
            coeff=_eta_coeff,
            sigma_c=0.0,
            sigma_a=1.0,
            sigma_0=0.0,
            poles=(),
            continuation=_eta_continuation,
        )
    if name == "mobius":
        return SeriesDescriptor(
            name="mobius",
            coeff=_mobius_coeff,
            sigma_c=1.0,
            sigma_a=1.0,
            sigma_0=1.0,
            poles=(),
            continuation=None,
        )
    if name == "mangoldt":
        return SeriesDescriptor(
            name="mangoldt",
            coeff=_mangoldt_coeff,
            sigma_c=1.0,
            sigma_a=1.0,
            sigma_0=1.0,
            poles=(),
            continuation=None,
        )
    if name == "twisted":
        if base not in ("mobius", "mangoldt") or table is None or j is None:
            raise ValueError(
                "twisted series needs base in {'mobius','mangoldt'}, a "
                "CharacterTable, and a character index j"
            )
        base_coeff = _mobius_coeff if base == "mobius" else _mangoldt_coeff
        jj = int(j) % table.order

        def twisted_coeff(n: np.ndarray, _b=base_coeff, _t=table, _j=jj) -> np.ndarray:
            n_arr = np.atleast_1d(np.asarray(n, dtype=np.int64))
            return _b(n_arr) * arith.character_value(_t, _j, n_arr)

        return SeriesDescriptor(
            name=f"twisted:{base}:q{table.q}:j{jj}",
            coeff=twisted_coeff,
            sigma_c=1.0,
            sigma_a=1.0,
            sigma_0=1.0,
            poles=(),
            continuation=None,
        )
    raise ValueError(f"unknown series name: {name!r}")


def partial_sum(d: SeriesDescriptor, x: float) -> float | complex:
    """Sum of coeff(n) over 1 <= n <= x (0 for x < 1)."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    n_top = int(math.floor(x))
    if n_top < 1:
        return 0.0
    total = 0.0 + 0.0j
    for lo in range(1, n_top + 1, 4_000_000):
        hi = min(lo + 4_000_000, n_top + 1)
        total += complex(np.sum(d.coeff(np.arange(lo, hi, dtype=np.int64))))
    if abs(total.imag) == 0.0:
        return total.real
    return total


def cahen_bound(d: SeriesDescriptor, sigma: float, n_max: int) -> CahenBound:
    """Running supremum of |sum_{n<=N} a_n n^{-sigma}| over N <= n_max.

    Certification: the alternating stream has decreasing terms, so the
    first term closes the supremum; nonnegative streams increase to
    F(sigma), which the evaluator supplies.  Other streams report the
    scanned maximum uncertified.
    """
    if sigma <= d.sigma_0:
        raise ValueError(f"sigma must exceed sigma_0 = {d.sigma_0}, got {sigma}")
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    best = 0.0
    carry = 0.0 + 0.0j
    for lo in range(1, n_max + 1, 4_000_000):
        hi = min(lo + 4_000_000, n_max + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        terms = d.coeff(n) * np.power(n.astype(np.float64), -sigma)
        sums = carry + np.cumsum(terms)
        best = max(best, float(np.abs(sums).max()))
        carry = sums[-1]
    if d.name == "eta":
        return CahenBound(sigma=sigma, value=best, n_max_searched=n_max, certified=True)
    if d.name in ("ones", "mangoldt"):
        # nonnegative terms: partial sums increase to the full series
        limit = abs(eval_F(d, complex(sigma), 1e-12))
        return CahenBound(
            sigma=sigma, value=max(best, limit), n_max_searched=n_max, certified=True
        )
    return CahenBound(sigma=sigma, value=best, n_max_searched=n_max, certified=False)


def _direct_sum(d: SeriesDescriptor, s: np.ndarray, tol: float) -> np.ndarray:
    """Direct summation for Re(s) > sigma_a with a certified integral
    tail bound; rejects points whose truncation would exceed the cap."""
    sigma_min = float(s.real.min())
    if sigma_min <= d.sigma_a:
        raise ValueError(f"direct summation needs Re(s) > sigma_a = {d.sigma_a}")
    # coefficient envelope: |a_n| <= 1 for unit streams, log n for the
    # von Mangoldt-based streams
    heavy = "mangoldt" in d.name
    n_top = 64
    while True:
        gap = sigma_min - 1.0
        tail = n_top ** (-gap) / gap
        if heavy:
            tail *= math.log(n_top) + 1.0 / gap
        if tail <= tol * 0.5 or n_top > _DIRECT_SUM_CAP:
            break
        n_top = int(n_top * 1.25) + 1
    if n_top > _DIRECT_SUM_CAP:
        raise ValueError(
            f"direct summation cannot certify tolerance {tol:g} at "
            f"Re(s) = {sigma_min:g} within {_DIRECT_SUM_CAP} terms "
            f"(achievable tail bound {tail:g})"
        )
    n = np.arange(1, n_top + 1, dtype=np.int64)
    coeff = np.asarray(d.coeff(n), dtype=complex)
    out = np.zeros(s.shape, dtype=complex)
    logs = np.log(n.astype(np.float64))
    chunk = max(1, 4_000_000 // max(1, s.size))
    for lo in range(0, n_top, chunk):
        out += np.exp(-np.multiply.outer(s, logs[lo : lo + chunk])) @ coeff[lo : lo + chunk]
    return out


def eval_F(d: SeriesDescriptor, s, tol: float = DEFAULT_TOL) -> complex | np.ndarray:
    """Evaluate F(s) with absolute error below tol (scalar or array).

    Catalog dispatch: the constant stream uses Euler-Maclaurin zeta on
    Re(s) > 1 and the alternating-quotient continuation left of it; the
    alternating stream accelerates on Re(s) > -1; the Moebius and von
    Mangoldt streams use 1/zeta and -zeta'/zeta on Re(s) > 1 only.
    Twisted or custom streams fall back to certified direct summation
    (or their declared continuation).  Points at declared poles are
    rejected.
    """
    scalar = np.isscalar(s) or np.asarray(s).ndim == 0
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    for loc, _res in d.poles:
        if np.any(np.abs(arr - loc) < 1e-12):
            raise ValueError(f"series {d.name} has a pole at {loc}")
    out = np.empty(arr.shape, dtype=complex)
    if d.name == "ones":
        right = arr.real > 1.0
        if right.any():
            z, _ = _em_zeta(arr[right], tol)
            out[right] = z
        if (~right).any():
            out[~right] = _ones_continuation(arr[~right], tol)
    elif d.name == "eta":
        out = _alt_eta(arr, tol)
    elif d.name == "mobius":
        if np.any(arr.real <= 1.0):
            raise ValueError("the Moebius stream has no continuation: need Re(s) > 1")
        sigma_min = float(arr.real.min())
        lower = _zeta_lower_bound(sigma_min)
        z, _ = _em_zeta(arr, tol * lower * lower * 0.5)
        out = 1.0 / z
    elif d.name == "mangoldt":
        if np.any(arr.real <= 1.0):
            raise ValueError("the von Mangoldt stream has no continuation: need Re(s) > 1")
        sigma_min = float(arr.real.min())
        lower = _zeta_lower_bound(sigma_min)
        # error of z'/z: (|z'| tol_z + |z| tol_z') / |z|^2, kept below tol
        sub_tol = tol * lower * 0.25 / (1.0 + _zeta_deriv_upper_bound(sigma_min) / lower)
        z, zp = _em_zeta(arr, sub_tol, deriv=True)
        out = -zp / z
    else:
        if np.all(arr.real > d.sigma_a):
            out = _direct_sum(d, arr, tol)
        elif d.continuation is not None:
            out = np.asarray(d.continuation(arr, tol), dtype=complex)
        else:
            raise ValueError(
                f"series {d.name}: no evaluation method at Re(s) <= {d.sigma_a}"
            )
    if scalar:
        return complex(out[0])
    return out


@lru_cache(maxsize=128)
def _zeta_lower_bound(sigma: float) -> float:
    """|zeta(sigma+it)| >= zeta(2 sigma) / zeta(sigma) for sigma > 1
    (Euler product: |zeta(s)| >= prod (1+p^-sigma)^{-1})."""
    z2, _ = _em_zeta(np.array([2.0 * sigma + 0j]), 1e-14)
    z1, _ = _em_zeta(np.array([sigma + 0j]), 1e-14)
    return float(z2[0].real / z1[0].real)


@lru_cache(maxsize=128)
def _zeta_deriv_upper_bound(sigma: float) -> float:
    """|zeta'(sigma+it)| <= sum log(n) n^{-sigma} = -zeta'(sigma)."""
    _, zp = _em_zeta(np.array([sigma + 0j]), 1e-12, deriv=True)
    return float(-zp[0].real)
