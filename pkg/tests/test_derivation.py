import math
from fractions import Fraction

import pytest

from admex.derivation import (
    DerivationConfig,
    compare_direct,
    curve_value,
    decay_constant,
    derive_at,
    dyadic_pass,
    dyadic_points,
    fixed_point,
    fixed_point_history,
    kz_record,
    log_ratio,
    optimize_kz,
    probe_grid,
    trace_at,
)
from admex.exact import parse_decimal as D, render_ceiling
from admex.exponents import (
    DELTA_8,
    DELTA_10,
    DomainError,
    ExponentRecord,
    ExponentTable,
    baseline_table,
    interpolate,
    kz_threshold,
)

D11, D115, D1175 = D("0.0806719"), D("0.0323341"), D("0.0128731")
TOL = Fraction(1, 10**6)


@pytest.fixture(scope="module")
def paper_table():
    return dyadic_pass(DerivationConfig())


def with_records(*pairs):
    t = baseline_table()
    for s, d in pairs:
        t = t.with_record(ExponentRecord(s, d, "lemma42"))
    return t


def test_dyadic_points():
    assert dyadic_points(3) == [11, Fraction(23, 2), Fraction(47, 4)]


@pytest.mark.parametrize(
    "table, s, shown",
    [
        (with_records(), 11, "0.0806719"),
        (with_records((11, D11)), Fraction(23, 2), "0.0323341"),
        (with_records((11, D11), (Fraction(23, 2), D115)), Fraction(47, 4), "0.0128731"),
    ],
)
def test_derive_at_dyadic_constants(table, s, shown):
    rec = derive_at(table, s)
    assert rec.kind == "lemma42" and rec.strict
    assert render_ceiling(rec.delta, 7) == shown


def test_derive_at_provenance_and_range():
    tr = trace_at(baseline_table(), 11)
    assert tr.sources == ((8, 10), (10, 10))
    assert tr.record.parents == (8, 10)
    assert tr.d10u == (DELTA_8 + DELTA_10) / 2
    with pytest.raises(DomainError):
        derive_at(baseline_table(), 12)
    with pytest.raises(DomainError):
        derive_at(baseline_table(), Fraction(19, 2))


def test_dyadic_pass_paper_mode(paper_table):
    shown = {r.s: render_ceiling(r.delta, 7) for r in paper_table}
    assert shown[10] == "0.1991466"
    assert shown[11] == "0.0806719"
    assert shown[Fraction(23, 2)] == "0.0323341"
    assert shown[Fraction(47, 4)] == "0.0128731"
    # paper mode stores the rounded value itself
    assert paper_table.get(11).delta == D11 and not paper_table.get(11).strict


def test_dyadic_pass_depth_one():
    t = dyadic_pass(DerivationConfig(dyadic_depth=1))
    assert sorted(r.s for r in t) == [8, 10, 11, 12]


def test_exact_mode_below_paper_mode():
    paper = dyadic_pass(DerivationConfig(dyadic_depth=6))
    exact = dyadic_pass(DerivationConfig(mode="exact", dyadic_depth=6))
    for s in dyadic_points(6):
        assert exact.get(s).delta <= paper.get(s).delta
        assert exact.get(s).strict
    assert exact.get(Fraction(23, 2)).conditional
    assert not exact.get(11).conditional


def thm44_exact(t):
    """The recursion at 11 + t with Hölder inputs, solved in closed form."""
    return (3 * DELTA_10 - 6 * t * (DELTA_10 - D11)) / (
        8 - DELTA_8 + (DELTA_8 - 3 * DELTA_10 + 2 * D11) * t
    )


def thm44_decimal(t):
    return (D("0.0806719") - D("0.0959852") * t) / (1 + D("0.0213477") * t)


def thm45_decimal(t):
    return (D("0.0323341") - D("0.0769435") * t) / (
        1 + D("0.0693668") * t + D("0.0022534") * t * t
    )


@pytest.mark.parametrize("t", [Fraction(i, 16) for i in range(9)])
def test_curve_thm44(paper_table, t):
    # the closed form is exactly what the machinery computes from Delta_11
    rec = derive_at(with_records((11, D11)), 11 + t)
    assert rec.delta == thm44_exact(t)
    assert curve_value(paper_table, 11 + t) <= thm44_decimal(t) + TOL


@pytest.mark.parametrize("t", [Fraction(i, 32) for i in range(9)])
def test_curve_thm45_needs_composition(paper_table, t):
    s = Fraction(23, 2) + t
    composed = curve_value(paper_table, s, composed=True)
    assert composed <= thm45_decimal(t) + TOL
    assert composed <= curve_value(paper_table, s)


@pytest.mark.parametrize("t", [Fraction(i, 10) for i in range(11)])
def test_curve_thm43(paper_table, t):
    assert curve_value(paper_table, 10 + t) <= DELTA_10 - D("0.1184747") * t


def test_curve_endpoints(paper_table):
    assert curve_value(paper_table, 10) == DELTA_10
    assert curve_value(paper_table, 12) == 0
    bound = thm44_decimal(Fraction(1, 4)) + TOL
    assert curve_value(paper_table, Fraction(45, 4)) <= bound
    with pytest.raises(DomainError):
        curve_value(paper_table, Fraction(99, 10))


def test_curve_dominates_convexity(paper_table):
    base = baseline_table()
    for i in range(201):
        s = 10 + Fraction(i, 100)
        assert curve_value(paper_table, s) <= interpolate(base, s)


def test_compare_direct():
    c0 = compare_direct(0)
    assert c0.direct == 3 * DELTA_8 / (8 - DELTA_8)
    assert c0.direct < D("0.2407002")
    assert render_ceiling(c0.direct, 7) == "0.2407002"
    assert c0.interpolated == DELTA_10
    c1 = compare_direct(1)
    assert abs(c1.direct - c1.interpolated) <= TOL
    assert c1.direct == 3 * DELTA_10 / (8 - DELTA_8)
    half = compare_direct(Fraction(1, 2))
    assert half.direct - half.interpolated > 0
    for t in (Fraction(i, 20) for i in range(21)):
        c = compare_direct(t)
        assert c.direct < D("0.2407002") - D("0.1600283") * t
    with pytest.raises(ValueError):
        compare_direct(2)


def test_compare_direct_gap_shrinks():
    ts = [Fraction(i, 100) for i in range(101)]
    gaps = [compare_direct(t).direct - compare_direct(t).interpolated for t in ts]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    # nonnegative except in the last rounding unit before t = 1
    assert all(g > 0 for g in gaps[:-1])
    assert abs(gaps[-1]) < Fraction(1, 10**7)


def test_direct_route_matches_recursion():
    """compare_direct's closed form is the recursion at u = 2 - t on baseline inputs."""
    for t in (Fraction(i, 8) for i in range(9)):
        rec = derive_at(baseline_table(), 10 + t)
        assert rec.delta >= compare_direct(t).direct


def test_optimize_kz(paper_table):
    r = optimize_kz(paper_table, DerivationConfig())
    assert r.s_star == Fraction(47, 4)
    assert r.u_star == Fraction(47, 4) + 16 * D1175 == D("11.9559696")
    assert render_ceiling(r.u_star, 5) == "11.95597"
    assert not r.superseded


def test_optimize_kz_candidate_at_half(paper_table):
    cfg = DerivationConfig(kz_grid=(Fraction(23, 2),))
    r = kz_threshold(Fraction(23, 2), curve_value(paper_table, Fraction(23, 2), cfg))
    assert r.u0 == D("12.0173456")
    assert optimize_kz(paper_table, cfg).s_star == Fraction(47, 4)


def test_optimize_kz_trivial_table():
    t = ExponentTable((ExponentRecord(12, 0, "baseline"),))
    r = optimize_kz(t, DerivationConfig())
    assert (r.s_star, r.u_star, r.superseded) == (12, 12, True)


def test_optimize_kz_no_candidate():
    t = ExponentTable((ExponentRecord(8, 1, "baseline"),))
    with pytest.raises(DomainError):
        optimize_kz(t, DerivationConfig(kz_grid=(8,)))


@pytest.mark.parametrize("depth", [3, 5, 8])
def test_optimum_stays_at_1175_for_deeper_passes(depth):
    cfg = DerivationConfig(dyadic_depth=depth)
    r = optimize_kz(dyadic_pass(cfg), cfg)
    assert r.s_star == Fraction(47, 4)


def test_composed_curve_never_worse(paper_table):
    for i in range(101):
        s = 11 + Fraction(i, 100)
        assert curve_value(paper_table, s, composed=True) <= curve_value(paper_table, s)


def test_composed_curve_moves_optimum(paper_table):
    """Composing the curves beyond 11.75 edges past the dyadic optimum."""
    cfg = DerivationConfig(composed_curve=True)
    r = optimize_kz(paper_table, cfg)
    assert r.s_star == Fraction(59, 5)
    assert render_ceiling(r.u_star, 7) == "11.9556272"
    assert r.u_star < D("11.9559696")
    # hand route: Delta_11.6 from the closed form on [11.5, 11.75], Delta_9.8 by Hölder
    d116 = thm45_decimal(Fraction(1, 10))
    d98 = (DELTA_8 + 9 * DELTA_10) / 10
    assert abs(3 * d116 / (8 + d116 - 2 * d98) - r.delta) < TOL


def test_optimize_kz_parallel_matches_serial(paper_table):
    cfg = DerivationConfig()
    assert optimize_kz(paper_table, cfg, workers=2) == optimize_kz(paper_table, cfg)


def test_kz_record():
    r = optimize_kz(dyadic_pass(DerivationConfig()), DerivationConfig())
    rec = kz_record(r)
    assert rec.kind == "keil_zhao" and rec.strict and rec.delta == 0
    assert rec.parents == (Fraction(47, 4),)


def test_fixed_point_gated():
    with pytest.raises(RuntimeError):
        fixed_point(DerivationConfig(), 2)


def test_fixed_point_one_round_is_dyadic_pass():
    cfg = DerivationConfig()
    assert fixed_point(cfg, 1, enable_experimental=True) == dyadic_pass(cfg)


@pytest.mark.parametrize("mode", ["paper", "exact"])
def test_fixed_point_monotone_chain(mode):
    cfg = DerivationConfig(mode=mode, dyadic_depth=3)
    history = fixed_point_history(cfg, 6, enable_experimental=True)
    assert 1 <= len(history) <= 6
    for prev, nxt in zip(history, history[1:]):
        for s in dyadic_points(3):
            assert nxt.get(s).delta <= prev.get(s).delta
        for p in probe_grid():
            assert interpolate(nxt, p) <= interpolate(prev, p)
    for rec in history[-1]:
        if rec != history[0].get(rec.s):
            assert rec.feedback


def test_fixed_point_feedback_flag_on_improvement():
    # seed a deliberately weak Delta_11 so the second round improves it
    seeded = baseline_table().with_record(ExponentRecord(11, D("0.09"), "lemma42"))
    rnd = dyadic_pass(DerivationConfig(dyadic_depth=1), seeded, feedback=True)
    assert rnd.get(11).feedback and rnd.get(11).delta == D11


def test_decay_constant():
    assert 1.341 < decay_constant() < 1.342
    assert f"{decay_constant():.10f}".startswith("1.3410369178")
    assert log_ratio(2, 1) == 1
    assert math.isclose(log_ratio(4, 1), 2, abs_tol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        DerivationConfig(mode="fast")
    with pytest.raises(ValueError):
        DerivationConfig(dyadic_depth=0)
    with pytest.raises(ValueError):
        DerivationConfig(kz_grid=(7,))
    cfg = DerivationConfig()
    assert Fraction(1101, 100) in cfg.kz_grid and 12 in cfg.kz_grid
