"""Prime primitive roots in short intervals: observed vs predicted.

For primes q in [Q, 2Q], the fraction of residues mod q that generate
the multiplicative group is phi(q-1)/(q-1).  The experiment enumerates
the primes (or integers) in a short window (x, x+y], computes weighted
counts of those landing on primitive-root residues for every modulus,
and compares each against density times the interval total.  Using the
actual interval total rather than y/log x removes prime-counting
fluctuation from the statistic, isolating equidistribution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import arith

_SIEVE_CAPACITY = 100_000_000
_MAX_Q = 10_000
_WEIGHTS = ("logp", "mobius", "unweighted", "mobius_integers")


@dataclass(frozen=True)
class ExperimentConfig:
    """Window and weighting for one experiment run.

    x defaults to Q**(3/2 + theta), the smallest admissible start; the
    window length y = x**(1/2 + delta) is derived, never supplied.  The
    weight names: logp sums log p over primes (prime powers excluded),
    mobius sums mu(p) = -1 over primes, unweighted counts primes, and
    mobius_integers sums mu(n) over every integer in the window.
    """

    Q: int
    delta: float = 1.0 / 3.0
    theta: float = 0.25
    x: float | None = None
    weight: str = "logp"
    y: float = field(init=False, default=0.0)

    def __post_init__(self) -> None:
        if int(self.Q) != self.Q or self.Q < 2:
            raise ValueError(f"Q must be an integer >= 2, got {self.Q}")
        object.__setattr__(self, "Q", int(self.Q))
        if self.delta > 1.0 / 3.0 + 1e-15:
            raise ValueError(f"delta must be at most 1/3, got {self.delta}")
        if self.theta > 0.25 + 1e-15:
            raise ValueError(f"theta must be at most 1/4, got {self.theta}")
        x_floor = float(self.Q) ** (1.5 + self.theta)
        if self.x is None:
            object.__setattr__(self, "x", x_floor)
        if self.x < x_floor * (1.0 - 1e-12):
            raise ValueError(
                f"x must be at least Q**(3/2 + theta) = {x_floor}, got {self.x}"
            )
        object.__setattr__(self, "y", float(self.x) ** (0.5 + self.delta))
        if self.y < 1.0:
            raise ValueError(f"window length y = {self.y} is below 1")
        if self.weight not in _WEIGHTS:
            raise ValueError(f"weight must be one of {_WEIGHTS}, got {self.weight!r}")


@dataclass(frozen=True)
class ModulusRow:
    """One modulus: weighted primitive-root count vs density prediction."""

    q: int
    observed: float
    predicted: float
    rel_dev: float


@dataclass(frozen=True)
class DecompositionReport:
    """Both sides of the character expansion of the primitive-root
    indicator, summed against each weight stream over an interval."""

    q: int
    interval: tuple[float, float]
    sides: dict
    max_abs_gap: float
    tolerance: float
    passed: bool


def _window_tables(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(values, is_prime, mobius, mangoldt) for the integers [lo, hi].

    Segmented: only primes up to sqrt(hi) are precomputed, so windows
    far from the origin cost O(hi - lo) memory.
    """
    if lo < 2:
        raise ValueError("window must start at 2 or later")
    size = hi - lo + 1
    values = np.arange(lo, hi + 1, dtype=np.int64)
    composite = np.zeros(size, dtype=bool)
    mobius = np.ones(size, dtype=np.int64)
    prod = np.ones(size, dtype=np.int64)
    mangoldt = np.zeros(size, dtype=np.float64)
    for p in arith._sieve_primes(math.isqrt(hi)):
        p = int(p)
        first = ((lo + p - 1) // p) * p
        if first <= hi:
            sl = slice(first - lo, size, p)
            mobius[sl] = -mobius[sl]
            prod[sl] *= p
        start = max(p * p, first)
        if start <= hi:
            composite[start - lo :: p] = True
        sq = p * p
        first_sq = ((lo + sq - 1) // sq) * sq
        if first_sq <= hi:
            mobius[first_sq - lo :: sq] = 0
        pk = sq
        while pk <= hi:
            if pk >= lo:
                mangoldt[pk - lo] = math.log(p)
            pk *= p
    is_prime = ~composite
    # a leftover cofactor above sqrt(hi) is a single extra prime
    mobius[prod != values] = -mobius[prod != values]
    mangoldt[is_prime] = np.log(values[is_prime].astype(np.float64))
    return values, is_prime, mobius, mangoldt


@lru_cache(maxsize=512)
def _primitive_root_mask(q: int) -> np.ndarray:
    """Boolean lookup over residues 0..q-1: True on generators.

    g**k generates iff gcd(k, q-1) = 1, so the discrete-log table turns
    membership into a vectorized gcd test (equivalent to testing
    a**((q-1)/r) != 1 for each prime r | q-1, but table-driven).
    """
    q = int(q)
    if q == 2:
        return np.array([False, True])
    table = arith.build_characters(q)
    mask = np.zeros(q, dtype=bool)
    units = table.dlog >= 0
    mask[units] = np.gcd(table.dlog[units], q - 1) == 1
    mask.setflags(write=False)
    return mask


def modulus_row(q: int, n_values, weights) -> ModulusRow:
    """Weighted count over primitive-root residues vs the density
    prediction phi(q-1)/(q-1) times the total weight."""
    q = int(q)
    if not arith.is_prime(q):
        raise ValueError(f"modulus must be prime, got {q}")
    n_arr = np.asarray(n_values, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    if n_arr.shape != w.shape:
        raise ValueError("values and weights must have matching shapes")
    density = arith.euler_phi(q - 1) / (q - 1)
    if n_arr.size == 0:
        return ModulusRow(q=q, observed=0.0, predicted=0.0, rel_dev=0.0)
    hit = _primitive_root_mask(q)[n_arr % q]
    observed = float(w[hit].sum())
    predicted = density * float(w.sum())
    rel_dev = abs(observed - predicted) / max(predicted, 1.0)
    return ModulusRow(q=q, observed=observed, predicted=predicted, rel_dev=rel_dev)


def _moduli(Q: int) -> list[int]:
    primes = arith.build_sieve(2 * Q).primes
    return [int(q) for q in primes if Q <= q <= 2 * Q]


def _window_selection(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """Values and weights entering the sums, plus the window prime count."""
    lo = math.floor(cfg.x) + 1
    hi = math.floor(cfg.x + cfg.y)
    if hi < max(lo, 2):
        return np.empty(0, dtype=np.int64), np.empty(0), 0
    values, is_prime, mobius, _ = _window_tables(max(lo, 2), hi)
    prime_count = int(is_prime.sum())
    if cfg.weight == "mobius_integers":
        return values, mobius.astype(np.float64), prime_count
    p = values[is_prime]
    if cfg.weight == "logp":
        return p, np.log(p.astype(np.float64)), prime_count
    if cfg.weight == "mobius":
        return p, -np.ones(p.size), prime_count
    return p, np.ones(p.size), prime_count


def run(
    cfg: ExperimentConfig, *, threshold: float = 0.1, threads: int = 1
) -> tuple[list[ModulusRow], dict]:
    """All modulus rows for primes q in [Q, 2Q], plus summary statistics.

    The window is enumerated once; moduli are independent and processed
    concurrently when threads > 1.  An empty prime interval is reported
    in the summary, not an error.  rel_dev > threshold feeds the
    exceptional-fraction statistic.
    """
    if cfg.Q > _MAX_Q:
        raise ValueError(f"Q exceeds the supported maximum {_MAX_Q}")
    if cfg.x + cfg.y > _SIEVE_CAPACITY:
        raise ValueError(f"x + y exceeds the sieve capacity {_SIEVE_CAPACITY:g}")
    values, weights, prime_count = _window_selection(cfg)
    moduli = _moduli(cfg.Q)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda q: modulus_row(q, values, weights), moduli))
    else:
        rows = [modulus_row(q, values, weights) for q in moduli]
    rows.sort(key=lambda r: r.q)
    devs = np.array([r.rel_dev for r in rows])
    count_above = int((devs > threshold).sum())
    summary = {
        "Q": cfg.Q,
        "weight": cfg.weight,
        "x": cfg.x,
        "y": cfg.y,
        "rows": len(rows),
        "prime_count": prime_count,
        "weight_total": float(np.asarray(weights).sum()) if len(weights) else 0.0,
        "mean_rel_dev": float(devs.mean()),
        "median_rel_dev": float(np.median(devs)),
        "max_rel_dev": float(devs.max()),
        "threshold": threshold,
        "count_above_threshold": count_above,
        "exceptional_fraction": count_above / len(rows),
        "empty_interval": bool(
            values.size == 0
            or (prime_count == 0 and cfg.weight != "mobius_integers")
        ),
    }
    return rows, summary


def exceptional_set(rows: list[ModulusRow], threshold: float) -> list[int]:
    """Moduli whose (strictly positive) deviation reaches the threshold."""
    return [r.q for r in rows if r.rel_dev > 0.0 and r.rel_dev >= threshold]


def rows_to_csv(rows: list[ModulusRow]) -> str:
    """Deterministic CSV rendering (q,observed,predicted,rel_dev)."""
    lines = ["q,observed,predicted,rel_dev"]
    for r in rows:
        lines.append(f"{r.q},{r.observed:.17g},{r.predicted:.17g},{r.rel_dev:.17g}")
    return "\n".join(lines) + "\n"


def indicator_decomposition_check(
    q: int, interval: tuple[float, float], b_streams: dict | None = None
) -> DecompositionReport:
    """Verify that summing a weight over primitive-root residues equals
    the character expansion: sum_chi c(chi) * sum_n chi(n) b_n.

    Default streams are the prime-power log weight and the squarefree
    sign weight on the integers of the interval; custom streams map a
    name to a callable producing weights from the integer values.  The
    tolerance is 1e-6 times the interval length.
    """
    q = int(q)
    if q < 3 or not arith.is_prime(q):
        raise ValueError(f"q must be an odd prime, got {q}")
    x0, x1 = float(interval[0]), float(interval[1])
    tolerance = 1e-6 * max(x1 - x0, 1.0)
    lo = math.floor(x0) + 1
    hi = math.floor(x1)
    if hi < max(lo, 2):
        names = list(b_streams) if b_streams else ["mangoldt", "mobius"]
        sides = {name: (0.0, 0.0) for name in names}
        return DecompositionReport(
            q=q, interval=(x0, x1), sides=sides, max_abs_gap=0.0,
            tolerance=tolerance, passed=True,
        )
    values, _, mobius, mangoldt = _window_tables(max(lo, 2), hi)
    if b_streams is None:
        streams = {"mangoldt": mangoldt, "mobius": mobius.astype(np.float64)}
    else:
        streams = {name: np.asarray(fn(values), dtype=np.float64)
                   for name, fn in b_streams.items()}

    table = arith.build_characters(q)
    coeffs = arith.indicator_coeffs(table)
    order = table.order
    k = table.dlog[values % q]
    unit = k >= 0
    pr_hit = _primitive_root_mask(q)[values % q]
    j = np.arange(order)
    phases = np.exp(2j * np.pi * np.outer(j, np.arange(order)) / order)

    sides = {}
    max_gap = 0.0
    for name, b in streams.items():
        lhs = float(b[pr_hit].sum())
        per_class = np.bincount(k[unit], weights=b[unit], minlength=order)
        rhs = complex(coeffs.c @ (phases @ per_class))
        sides[name] = (lhs, rhs.real)
        max_gap = max(max_gap, abs(lhs - rhs))
    return DecompositionReport(
        q=q, interval=(x0, x1), sides=sides, max_abs_gap=max_gap,
        tolerance=tolerance, passed=max_gap <= tolerance,
    )
