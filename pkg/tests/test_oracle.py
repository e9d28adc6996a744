import pytest

from surfcob.moves import apply_plan, validate_plan
from surfcob.oracle import (
    OracleOverflow, cross_validate, enumerate_plans, reachable_set, seed_universe, sweep,
)
from surfcob.surface import N, O, Surface, p_odd, parse_surface


def S(*cs):
    return Surface.of(*cs)


def test_reachable_from_projective_plane():
    r = reachable_set(S(N(1)), (1, 1, 0))
    assert S(N(1), N(1), N(1)) in r.reachable
    assert S(N(1), O(0)) in r.reachable
    # empty, D4, trivial D2 on P, D4 + {trivial on P, trivial/split/compress on K}
    assert r.plan_count == 7
    assert set(r.reachable) == {S(N(1)), S(N(1), N(2)), S(O(0), N(1)),
                                S(O(0), N(1), N(2)), S(N(1), N(1), N(1))}
    assert r.ok


@pytest.mark.parametrize("budgets", [(0, 2, 2), (0, 3, 1), (0, 1, 3)])
def test_sphere_never_reaches_odd_components(budgets):
    r = reachable_set(S(O(0)), budgets)
    assert all(p_odd(s) == 0 for s in r.reachable)
    assert r.counterexamples == []


@pytest.mark.parametrize("fa", ["S", "K + N3", "T + P"])
def test_zero_budgets(fa):
    s = parse_surface(fa)
    r = reachable_set(s, (0, 0, 0))
    assert r.reachable == [s] and r.plan_count == 1


@pytest.mark.parametrize("fa, budgets", [
    ("P", (1, 1, 1)), ("K", (2, 1, 1)), ("T + P", (1, 2, 1)), ("S + S", (0, 1, 2)),
    ("N3", (2, 2, 0)),
])
def test_counting_matches_literal_enumeration(fa, budgets):
    s = parse_surface(fa)
    plans = list(enumerate_plans(s, budgets))
    assert all(validate_plan(p).ok for p in plans)
    assert len(set(plans)) == len(plans)
    r = reachable_set(s, budgets)
    assert r.plan_count == len(plans)
    assert set(r.reachable) == {apply_plan(p).final for p in plans}


def test_monotone_in_budgets():
    fa = S(N(2))
    small = set(reachable_set(fa, (1, 1, 1)).reachable)
    for bigger in [(2, 1, 1), (1, 2, 1), (1, 1, 2), (2, 2, 2)]:
        assert small <= set(reachable_set(fa, bigger).reachable)


def test_witnesses_reach_their_surface():
    r = reachable_set(S(N(2), O(1)), (2, 2, 1), keep_witnesses=True)
    assert set(r.witnesses) == set(r.reachable)
    for fb, plan in r.witnesses.items():
        assert apply_plan(plan).final == fb


def test_overflow_guard():
    with pytest.raises(OracleOverflow):
        reachable_set(S(N(3), N(3)), (6, 3, 3), max_states=1000)


@pytest.mark.parametrize("fa, fb, budgets, found", [
    ("P", "3*P", (1, 1, 0), True),
    ("S", "P + P", (4, 4, 4), False),
    ("K", "K", (0, 0, 0), True),
    ("K", "K + S", (0, 0, 0), False),
])
def test_cross_validate(fa, fb, budgets, found):
    a = cross_validate(parse_surface(fa), parse_surface(fb), budgets)
    assert a.agree and a.planner_found == found
    if found:
        assert apply_plan(a.witness).final == parse_surface(fb)


def test_seed_universe():
    u = seed_universe()
    assert len(u) == 7 + 28
    assert len(set(u)) == len(u)
    assert all(1 <= len(s) <= 2 and max(c.genus for c in s) <= 3 for s in u)


def test_small_sweep():
    r = sweep(seed_universe(1, 2), d2=2, d1=2)
    assert r.starts == 5 and r.ok and r.pairs > 0
    assert sweep(seed_universe(1, 1), d2=1, d1=1, jobs=2).to_dict() == \
        sweep(seed_universe(1, 1), d2=1, d1=1).to_dict()
