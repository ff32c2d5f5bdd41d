"""Desk-scale checks on smooth quartic Weyl sums.

Even moments of g(a; P, R) = sum over x in A(P, R) of e(a x^4) count
solutions of x_1^4 + ... + x_k^4 = y_1^4 + ... + y_k^4 by orthogonality, so
they can be computed exactly for small P.  Fractional moments cannot, and
nothing here says anything about the asymptotic statements; the module
checks structure only.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import NamedTuple

import numpy as np

from ._parallel import parallel_map
from .exact import as_rational

DEFAULT_BUDGET = 10**7
_INT64_MAX = np.iinfo(np.int64).max


class BudgetExceeded(RuntimeError):
    pass


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).tolist()


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def largest_prime_factors(n: int) -> np.ndarray:
    """lpf[m] = largest prime divisor of m for 2 <= m <= n; lpf[1] = 1."""
    lpf = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        lpf[1] = 1
    for p in primes_upto(n):
        lpf[p::p] = p  # ascending p, so the last write is the largest
    return lpf


def smallest_prime_factors(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        spf[1] = 1
    for p in reversed(primes_upto(n)):
        spf[p::p] = p
    return spf


@dataclass(frozen=True)
class SmoothSet:
    elements: tuple
    P: int
    R: int

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, n):
        return n in self.elements


@dataclass(frozen=True)
class RestrictedSmoothSet:
    elements: tuple
    L: int
    pi: int
    R: int

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def smooth_set(P: int, R: int) -> SmoothSet:
    """R-smooth integers in [1, P]; 1 is included."""
    if P < 1 or R < 1:
        raise ValueError("P and R must be positive")
    lpf = largest_prime_factors(P)
    elems = np.flatnonzero((lpf <= R) & (np.arange(P + 1) >= 1))
    return SmoothSet(tuple(int(x) for x in elems), P, R)


def restricted_smooth_set(L: int, pi: int, R: int) -> RestrictedSmoothSet:
    """n in (L, L*pi], R-smooth, divisible by pi, no prime factor below pi."""
    if not is_prime(pi):
        raise ValueError(f"{pi} is not prime")
    if pi > R:
        raise ValueError(f"pi = {pi} exceeds R = {R}")
    top = L * pi
    if top < 1:
        return RestrictedSmoothSet((), L, pi, R)
    lpf = largest_prime_factors(top)
    spf = smallest_prime_factors(top)
    out = [
        n for n in range(max(L + 1, 1), top + 1)
        if n % pi == 0 and lpf[n] <= R and spf[n] >= pi
    ]
    return RestrictedSmoothSet(tuple(out), L, pi, R)


@dataclass(frozen=True)
class MHQParams:
    """M = P^phi, H = P M^-4, Q = P M^-1, carried as exponents of P."""

    P: int
    phi: Fraction

    def __post_init__(self):
        phi = as_rational(self.phi)
        if not (0 <= phi <= Fraction(1, 4)):
            raise ValueError("phi must lie in [0, 1/4]")
        object.__setattr__(self, "phi", phi)

    @property
    def exponents(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.phi, 1 - 4 * self.phi, 1 - self.phi

    @property
    def values(self) -> tuple[float, float, float]:
        return tuple(self.P ** float(e) for e in self.exponents)


@dataclass(frozen=True)
class MomentCount:
    P: int
    R: int
    k: int
    count: int
    size: int  # |A(P, R)|


def _chunk_sums(chunk, fourth, k):
    """Counter of k-fold sums whose first summand index lies in ``chunk``."""
    if k == 1:
        base = fourth[list(chunk)]
        vals, counts = np.unique(base, return_counts=True)
        return vals, counts
    if fourth.dtype == object:
        c = Counter()
        for i in chunk:
            for rest in itertools.product(fourth.tolist(), repeat=k - 1):
                c[int(fourth[i]) + sum(rest)] += 1
        keys = sorted(c)
        return np.array(keys, dtype=object), np.array([c[x] for x in keys], dtype=np.int64)
    tail = fourth
    for _ in range(k - 2):
        tail = (tail[:, None] + fourth[None, :]).ravel()
    sums = (fourth[list(chunk)][:, None] + tail[None, :]).ravel()
    return np.unique(sums, return_counts=True)


def _merge(parts):
    vals = np.concatenate([v for v, _ in parts])
    counts = np.concatenate([c for _, c in parts])
    if vals.dtype == object:
        total = Counter()
        for v, c in zip(vals.tolist(), counts.tolist()):
            total[v] += c
        keys = sorted(total)
        return np.array(keys, dtype=object), np.array([total[x] for x in keys], dtype=np.int64)
    keys, inverse = np.unique(vals, return_inverse=True)
    merged = np.zeros(len(keys), dtype=np.int64)
    np.add.at(merged, inverse, counts)
    return keys, merged


def sum_histogram(values, k: int, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Sorted distinct k-fold sums of fourth powers and their multiplicities.

    Sums are ordered tuples.  Values switch to Python ints when k * max^4
    would overflow int64.
    """
    values = list(values)
    n = len(values)
    if n == 0:
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    top = max(values)
    dtype = np.int64 if k * top**4 <= _INT64_MAX else object
    fourth = np.array([v**4 for v in values], dtype=dtype)
    nchunks = max(1, min(workers, n))
    chunks = [range(i, n, nchunks) for i in range(nchunks)]
    parts = parallel_map(partial(_chunk_sums, fourth=fourth, k=k), chunks, workers)
    return parts[0] if len(parts) == 1 else _merge(parts)


def moment_count(P: int, R: int, k: int, *, workers: int = 1,
                 budget: int = DEFAULT_BUDGET) -> MomentCount:
    """Exact 2k-th moment of the smooth quartic Weyl sum.

    Builds the histogram of k-fold sums (n^k work) and returns the sum of
    squared multiplicities.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    A = smooth_set(P, R)
    n = len(A)
    if n**k > budget:
        raise BudgetExceeded(f"|A|^k = {n}^{k} exceeds budget {budget}")
    _, counts = sum_histogram(A.elements, k, workers)
    if n ** (2 * k) <= _INT64_MAX:
        count = int(np.dot(counts, counts))
    else:
        count = sum(c * c for c in counts.tolist())
    return MomentCount(P, R, k, count, n)


def brute_force_count(values, k: int, cap: int = 10**6) -> int:
    """Test oracle: enumerate all 2k-tuples directly."""
    values = list(values)
    if len(values) ** (2 * k) > cap:
        raise BudgetExceeded("oracle capped at 1e6 tuples")
    q = [v**4 for v in values]
    return sum(
        1 for t in itertools.product(q, repeat=2 * k) if sum(t[:k]) == sum(t[k:])
    )


def psi(z: int, h: int, m: int) -> int:
    """Difference polynomial 8hz(z^2 + h^2 m^8)."""
    return 8 * h * z * (z * z + h * h * m**8)


def psi_direct(z: int, h: int, m: int) -> int:
    num = (z + h * m**4) ** 4 - (z - h * m**4) ** 4
    q, r = divmod(num, m**4)
    if r:
        raise ArithmeticError("non-integral difference quotient")
    return q


class SubstitutionCheck(NamedTuple):
    pair_count: int
    image_count: int
    identity_ok: bool


def difference_substitution_check(P: int, u: int) -> SubstitutionCheck:
    """Exercise (x, y) -> (z, h) = (x + y, (x - y)/u^4) on x = y mod u^4.

    Checks injectivity, 1 <= z <= 2P, 1 <= h <= P/u^4, 2x = z + h u^4 and
    16(x^4 - y^4) = u^4 psi(z, h, u).
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    u4 = u**4
    images = set()
    pairs = 0
    ok = True
    for x in range(1, P + 1):
        for y in range(x - u4, 0, -u4):
            pairs += 1
            z, h = x + y, (x - y) // u4
            images.add((z, h))
            ok = ok and 1 <= z <= 2 * P and 1 <= h * u4 <= P
            ok = ok and 2 * x == z + h * u4 and 2 * y == z - h * u4
            ok = ok and 16 * (x**4 - y**4) == u4 * psi(z, h, u)
    ok = ok and len(images) == pairs
    return SubstitutionCheck(pairs, len(images), ok)


def empirical_exponent(P_list, k: int, R: int | None = None, *, workers: int = 1,
                       budget: int = DEFAULT_BUDGET) -> float:
    """Least-squares slope of log(moment count) against log P.

    ``R=None`` means R = P at every bound.
    """
    P_list = list(P_list)
    if len(P_list) < 3:
        raise ValueError("need at least three bounds")
    if any(b <= a for a, b in zip(P_list, P_list[1:])):
        raise ValueError("bounds must be strictly ascending")
    counts = [moment_count(P, P if R is None else R, k, workers=workers, budget=budget).count
              for P in P_list]
    slope, _ = np.polyfit(np.log(P_list), np.log(counts), 1)
    return float(slope)
