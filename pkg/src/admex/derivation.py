"""The derivation pipeline: dyadic recursion pass, curves, Keil-Zhao search.

Two arithmetic modes are supported.  In ``paper`` mode every newly derived
exponent is rounded up to ``round_places`` decimals before it is inserted,
which turns the strict infimum into a closed admissible value that later
steps may consume.  In ``exact`` mode the
infimum itself is carried forward; such records are flagged conditional.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import NamedTuple

from ._parallel import parallel_map
from .exact import as_rational, ceil_to
from .exponents import (
    DELTA_8,
    DELTA_10,
    DomainError,
    ExponentRecord,
    ExponentTable,
    HypothesisError,
    Lemma42Inputs,
    baseline_table,
    check_hypothesis_43,
    interpolate,
    kz_threshold,
    lemma42_star,
    phi0,
)

log = logging.getLogger(__name__)

MODES = ("paper", "exact")
CONVERGENCE_TOL = Fraction(1, 10**12)


def dyadic_points(depth: int) -> list[Fraction]:
    """The first ``depth`` points s = 12 - 2^-j, starting at j = 0 (s = 11)."""
    return [12 - Fraction(1, 2**j) for j in range(depth)]


def default_kz_grid(depth: int = 3, step: Fraction = Fraction(1, 100)) -> tuple:
    pts = set(dyadic_points(depth))
    n = int(1 / step)
    pts.update(11 + i * step for i in range(n + 1) if 11 + i * step <= 12)
    return tuple(sorted(pts))


@dataclass(frozen=True)
class DerivationConfig:
    mode: str = "paper"
    dyadic_depth: int = 3
    round_places: int = 7
    kz_grid: tuple = None
    grid_step: Fraction = Fraction(1, 100)
    composed_curve: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dyadic_depth < 1:
            raise ValueError("dyadic_depth must be >= 1")
        if self.round_places < 1:
            raise ValueError("round_places must be >= 1")
        step = as_rational(self.grid_step)
        if not (0 < step <= 1):
            raise ValueError("grid step must lie in (0, 1]")
        object.__setattr__(self, "grid_step", step)
        if self.kz_grid is None:
            grid = default_kz_grid(self.dyadic_depth, step)
        else:
            grid = tuple(sorted({as_rational(x) for x in self.kz_grid}))
        if any(not (8 <= g <= 12) for g in grid):
            raise ValueError("kz_grid must lie inside [8, 12]")
        object.__setattr__(self, "kz_grid", grid)

    @property
    def paper(self) -> bool:
        return self.mode == "paper"


@dataclass(frozen=True)
class Derivation:
    """Full trace of one application of the recursion, for reports."""

    s: Fraction
    u: Fraction
    d10u: Fraction
    d12_2u: Fraction
    sources: tuple  # ((s_left, s_right) realising d10u, same for d12_2u)
    phi0: Fraction
    star: Fraction
    record: ExponentRecord
    hypothesis: tuple = field(default=())  # (lower, d12_2u, upper)


def trace_at(table: ExponentTable, s_target) -> Derivation:
    """Apply the recursion at s_target with inputs read off the envelope."""
    s = as_rational(s_target)
    if not (10 <= s < 12):
        raise DomainError(f"derivation needs 10 <= s < 12, got {s}")
    u = 12 - s
    lo_s, hi_s = 10 - u, 12 - 2 * u
    inputs = Lemma42Inputs(u, interpolate(table, lo_s), interpolate(table, hi_s))
    lo_src = table.envelope_source(lo_s)
    hi_src = table.envelope_source(hi_s)
    if not check_hypothesis_43(inputs):
        raise HypothesisError(
            f"hypothesis fails at s={s}: d10u={inputs.d10u}, d12_2u={inputs.d12_2u}"
        )
    star = lemma42_star(inputs)
    used = {r.s: r for pair in (lo_src, hi_src) for r in pair}
    parents = tuple(sorted(used))
    record = ExponentRecord(
        s,
        star,
        "lemma42",
        strict=True,
        parents=parents,
        label=f"lemma42 u={u}",
        conditional=any(r.strict for r in used.values()),
    )
    return Derivation(
        s=s,
        u=u,
        d10u=inputs.d10u,
        d12_2u=inputs.d12_2u,
        sources=(tuple(r.s for r in lo_src), tuple(r.s for r in hi_src)),
        phi0=phi0(inputs),
        star=star,
        record=record,
        hypothesis=(2 * inputs.d10u - Fraction(4, 5), inputs.d12_2u, 2 * inputs.d10u),
    )


def derive_at(table: ExponentTable, s_target) -> ExponentRecord:
    return trace_at(table, s_target).record


def close_record(rec: ExponentRecord, places: int) -> ExponentRecord:
    """Round a strict infimum up so the stored value is itself admissible."""
    return ExponentRecord(
        rec.s,
        ceil_to(rec.delta, places),
        rec.kind,
        strict=False,
        parents=rec.parents,
        label=f"{rec.label}, rounded up at {places} places",
        feedback=rec.feedback,
        conditional=rec.conditional,
    )


def _settle(rec: ExponentRecord, config: DerivationConfig) -> ExponentRecord:
    return close_record(rec, config.round_places) if config.paper else rec


def dyadic_pass(config: DerivationConfig | None = None, table: ExponentTable | None = None,
                *, feedback: bool = False) -> ExponentTable:
    """Derive s = 11, 11.5, 11.75, ... in ascending order.

    Each result is inserted before the next step so later steps see it.
    """
    config = config or DerivationConfig()
    table = table if table is not None else baseline_table()
    for s in dyadic_points(config.dyadic_depth):
        rec = _settle(derive_at(table, s), config)
        if feedback:
            rec = ExponentRecord(rec.s, rec.delta, rec.kind, rec.strict, rec.parents,
                                 rec.label + ", feedback", feedback=True,
                                 conditional=rec.conditional)
        current = table.get(s)
        if current is None or rec.delta < current.delta:
            table = table.with_record(rec)
        log.debug("s=%s delta=%s", s, rec.delta)
    return table


def curve_value(table: ExponentTable, s, config: DerivationConfig | None = None,
                *, composed: bool = False) -> Fraction:
    """Best bound available at s: envelope, or a fresh derivation if lower.

    By default the derivation reads both inputs off the envelope.  With
    ``composed=True`` the input at 12 - 2u = s - u is itself a curve value
    when it lies in [10, 12), the way the closed form on [11.5, 11.75]
    consumes the one on [11, 11.5].  Composed values are never larger.
    """
    config = config or DerivationConfig()
    s = as_rational(s)
    if not (10 <= s <= 12):
        raise DomainError(f"curve defined on [10, 12], got {s}")
    return _curve(table, s, config, composed)


def _curve(table, s, config, composed):
    best = interpolate(table, s)
    if s == 12:
        return best
    u = 12 - s
    inner = s - u
    d10u = interpolate(table, 10 - u)
    candidates = [interpolate(table, inner)]
    if composed and 10 <= inner:
        candidates.append(_curve(table, inner, config, composed))
    for d12_2u in candidates:
        inputs = Lemma42Inputs(u, d10u, d12_2u)
        if not check_hypothesis_43(inputs):
            continue
        star = lemma42_star(inputs)
        if config.paper:
            star = ceil_to(star, config.round_places)
        best = min(best, star)
    return best


class Comparison(NamedTuple):
    direct: Fraction
    interpolated: Fraction


THM43_INTERCEPT = DELTA_10
THM43_SLOPE = Fraction(1184747, 10**7)


def compare_direct(t) -> Comparison:
    """Direct recursion at 10 + t (with u = 2 - t) versus linear interpolation.

    The direct route uses convexity inputs only:
    (3*d8 - 3t(d8 - d10)) / (8 - d8).
    """
    t = as_rational(t)
    if not (0 <= t <= 1):
        raise ValueError("t must lie in [0, 1]")
    direct = (3 * DELTA_8 - 3 * t * (DELTA_8 - DELTA_10)) / (8 - DELTA_8)
    return Comparison(direct, THM43_INTERCEPT - THM43_SLOPE * t)


class KZResult(NamedTuple):
    s_star: Fraction
    u_star: Fraction
    delta: Fraction
    superseded: bool


def _kz_candidate(s, table, config):
    try:
        if s >= 10:
            delta = curve_value(table, s, config, composed=config.composed_curve)
        else:
            delta = interpolate(table, s)
    except DomainError:
        return None
    res = kz_threshold(s, delta)
    return (s, res.u0, delta, res.superseded) if res.valid else None


def optimize_kz(table: ExponentTable, config: DerivationConfig | None = None,
                workers: int = 1) -> KZResult:
    """Minimise s + 16*delta_s over the grid and the dyadic points.

    Ties resolve to the smallest s so the answer is order-independent.
    """
    config = config or DerivationConfig()
    grid = sorted(set(config.kz_grid) | set(dyadic_points(config.dyadic_depth)))
    found = [c for c in parallel_map(partial(_kz_candidate, table=table, config=config),
                                     grid, workers) if c is not None]
    if not found:
        raise DomainError("no valid Keil-Zhao candidate on the grid")
    s, u0, delta, superseded = min(found, key=lambda c: (c[1], c[0]))
    return KZResult(s, u0, delta, superseded)


def kz_record(result: KZResult) -> ExponentRecord:
    """Exponent 0 at u*, valid strictly beyond it."""
    return ExponentRecord(
        min(result.u_star, Fraction(12)),
        0,
        "keil_zhao",
        strict=True,
        parents=(result.s_star,) if result.s_star != result.u_star else (),
        label=f"keil-zhao from s={result.s_star}",
    )


def probe_grid(step=Fraction(1, 16)) -> list[Fraction]:
    n = int(4 / step)
    return [8 + i * step for i in range(n + 1)]


def fixed_point_history(config: DerivationConfig, max_rounds: int, *,
                        enable_experimental: bool = False) -> list[ExponentTable]:
    """Tables produced by feeding each dyadic pass back into the next.

    Experimental: nothing establishes that the limit is admissible, so every
    record improved after the first round is flagged ``feedback``.
    """
    if not enable_experimental:
        raise RuntimeError("fixed_point is experimental; pass enable_experimental=True")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    probes = probe_grid()
    history = [dyadic_pass(config)]
    for _ in range(max_rounds - 1):
        prev = history[-1]
        nxt = dyadic_pass(config, prev, feedback=True)
        history.append(nxt)
        drops = (interpolate(prev, p) - interpolate(nxt, p) for p in probes)
        if all(d <= CONVERGENCE_TOL for d in drops):
            break
    return history


def fixed_point(config: DerivationConfig, max_rounds: int, *,
                enable_experimental: bool = False) -> ExponentTable:
    return fixed_point_history(config, max_rounds,
                               enable_experimental=enable_experimental)[-1]


def log_ratio(num, den, base=2) -> float:
    """log(num/den) / log(base)."""
    return math.log(Fraction(num, den)) / math.log(base)


def decay_constant() -> float:
    """log(38/15)/log 2, the lower bound for the decay exponent in the Waring application."""
    return log_ratio(38, 15)
