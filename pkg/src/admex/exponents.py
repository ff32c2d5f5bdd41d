"""Admissible-exponent calculus for biquadratic smooth Weyl sums.

An exponent ``delta`` at moment order ``s`` asserts that the s-th moment of
the smooth quartic Weyl sum is ``<< P^(s - 4 + delta)``.  Records of this kind
live in an :class:`ExponentTable`, which answers Hölder-interpolation
queries through its lower convex envelope.  The convexity-breaking step
(:func:`lemma42_star`) and the Keil-Zhao threshold (:func:`kz_threshold`)
operate on exact rationals only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from .exact import as_rational, parse_decimal

S_MIN = Fraction(4)
S_MAX = Fraction(12)
DELTA_CAP = Fraction(8)

KINDS = ("baseline", "interpolated", "lemma42", "keil_zhao")

DELTA_8 = parse_decimal("0.594193")
DELTA_10 = parse_decimal("0.1991466")
DELTA_12 = Fraction(0)

# lower and upper slack of the two-sided hypothesis on (d10u, d12_2u)
HYP_SLACK = Fraction(4, 5)


class HypothesisError(ValueError):
    """The inputs violate 2*d10u - 4/5 <= d12_2u <= 2*d10u."""


class DomainError(ValueError):
    """A query or record lies outside the supported range of moment orders."""


@dataclass(frozen=True)
class ExponentRecord:
    """One admissible (or strictly-admissible) exponent.

    ``strict`` means only values strictly above ``delta`` are known to be
    admissible.  ``parents`` lists the moment orders whose values fed the
    derivation; ``label`` is a short citation such as ``"lemma42 u=1"``.
    """

    s: Fraction
    delta: Fraction
    kind: str
    strict: bool = False
    parents: tuple = ()
    label: str = ""
    feedback: bool = False
    conditional: bool = False

    def __post_init__(self):
        object.__setattr__(self, "s", as_rational(self.s))
        object.__setattr__(self, "delta", as_rational(self.delta))
        if not (S_MIN <= self.s <= S_MAX):
            raise DomainError(f"moment order {self.s} outside [4, 12]")
        if not (0 <= self.delta <= DELTA_CAP):
            raise ValueError(f"exponent {self.delta} outside [0, 8]")
        if self.kind not in KINDS:
            raise ValueError(f"unknown record kind {self.kind!r}")


@dataclass(frozen=True)
class ExponentTable:
    """Immutable set of records, at most one per moment order.

    Use :meth:`with_record` to obtain an enriched copy.
    """

    records: tuple = ()
    _by_s: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        best = {}
        for rec in self.records:
            cur = best.get(rec.s)
            if cur is None or rec.delta < cur.delta:
                best[rec.s] = rec
        ordered = tuple(best[s] for s in sorted(best))
        object.__setattr__(self, "records", ordered)
        object.__setattr__(self, "_by_s", dict(best))
        for rec in ordered:
            for p in rec.parents:
                if p == rec.s:
                    raise ValueError(f"record at {rec.s} lists itself as parent")

    @classmethod
    def from_records(cls, records: Iterable[ExponentRecord]) -> "ExponentTable":
        return cls(tuple(records))

    def with_record(self, rec: ExponentRecord) -> "ExponentTable":
        return ExponentTable(self.records + (rec,))

    def get(self, s) -> ExponentRecord | None:
        return self._by_s.get(as_rational(s))

    def __contains__(self, s) -> bool:
        return as_rational(s) in self._by_s

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    @property
    def span(self) -> tuple[Fraction, Fraction]:
        if not self.records:
            raise DomainError("empty exponent table")
        return self.records[0].s, self.records[-1].s

    def envelope(self, s) -> Fraction:
        return interpolate(self, s)

    def envelope_source(self, s) -> tuple[ExponentRecord, ExponentRecord]:
        """The bracketing pair realising the envelope at s (equal at a record)."""
        return _envelope(self, as_rational(s))[1]


def baseline_table() -> ExponentTable:
    """The three classical exponents at s = 8, 10 and 12."""
    return ExponentTable.from_records(
        ExponentRecord(s, d, "baseline", label="baseline")
        for s, d in ((8, DELTA_8), (10, DELTA_10), (12, DELTA_12))
    )


def _envelope(table: ExponentTable, s: Fraction):
    lo, hi = table.span
    if not (lo <= s <= hi):
        raise DomainError(f"s = {s} outside record span [{lo}, {hi}]")
    recs = table.records
    best, pair = None, None
    exact = table.get(s)
    if exact is not None:
        best, pair = exact.delta, (exact, exact)
    # 1-D lower convex hull: the minimum over all bracketing chords
    left = [r for r in recs if r.s < s]
    right = [r for r in recs if r.s > s]
    for a in left:
        for b in right:
            val = ((b.s - s) * a.delta + (s - a.s) * b.delta) / (b.s - a.s)
            if best is None or val < best:
                best, pair = val, (a, b)
    return best, pair


def interpolate(table: ExponentTable, s) -> Fraction:
    """Lower convex envelope of ``table`` evaluated at moment order s.

    Between two admissible exponents at a < b, Hölder's inequality gives
    ((b - s) * d_a + (s - a) * d_b) / (b - a) at any a <= s <= b, since the
    trivial part s - 4 of the moment exponent is linear in s.
    """
    return _envelope(table, as_rational(s))[0]


class Lemma42Inputs(NamedTuple):
    u: Fraction
    d10u: Fraction
    d12_2u: Fraction

    @classmethod
    def make(cls, u, d10u, d12_2u) -> "Lemma42Inputs":
        return cls(as_rational(u), as_rational(d10u), as_rational(d12_2u))


def check_hypothesis_43(inputs: Lemma42Inputs) -> bool:
    _, a, b = inputs
    return 2 * a - HYP_SLACK <= b <= 2 * a


def _require_hypothesis(inputs: Lemma42Inputs):
    if not check_hypothesis_43(inputs):
        _, a, b = inputs
        raise HypothesisError(
            f"need 2*d10u - 4/5 <= d12_2u <= 2*d10u, got d10u={a}, d12_2u={b}"
        )


def lemma42_star(inputs: Lemma42Inputs) -> Fraction:
    """Threshold above which the exponent at 12 - u is admissible.

    Given admissible exponents d10u at 10 - u and d12_2u at 12 - 2u, returns
    3*d12_2u / (8 - 2*d10u + d12_2u).  The bound is an infimum; only values
    strictly larger are admissible.
    """
    _require_hypothesis(inputs)
    _, a, b = inputs
    den = 8 - 2 * a + b
    if den <= 0:
        raise HypothesisError(f"nonpositive denominator {den}")
    return 3 * b / den


def phi0(inputs: Lemma42Inputs) -> Fraction:
    """Balancing exponent for M = P^phi in the mean-value estimate.

    Always lands in [1/6, 1/4] under the hypothesis; anything else means the
    arithmetic has gone wrong, so it raises rather than returning.
    """
    _require_hypothesis(inputs)
    _, a, b = inputs
    half_b = b / 2
    value = (1 + half_b - a) / (4 + half_b - a)
    if not (Fraction(1, 6) <= value <= Fraction(1, 4)):
        raise ArithmeticError(f"phi0 = {value} escaped [1/6, 1/4]")
    return value


class KZThreshold(NamedTuple):
    """u0 = s + 16*delta_s; exponent 0 is admissible for every w > u0 when valid."""

    u0: Fraction
    valid: bool
    superseded: bool
    reason: str = ""


def kz_threshold(s, delta_s) -> KZThreshold:
    s, delta_s = as_rational(s), as_rational(delta_s)
    u0 = s + 16 * delta_s
    if s < 8:
        return KZThreshold(u0, False, False, "s < 8")
    if delta_s >= Fraction(1, 8):
        return KZThreshold(u0, False, False, "delta_s >= 1/8")
    if u0 <= 10:
        return KZThreshold(u0, False, False, "s + 16*delta_s <= 10")
    return KZThreshold(u0, True, u0 >= S_MAX, "")
