import itertools
import json

import pytest
from hypothesis import given, strategies as st

from surfcob.moves import (
    Compress, D4Family, Delta, Merge, MoveError, Plan, PlanError, PlanFormatError,
    SelfPlain, SelfTwisted, SeparatingSplit, TrivialSplit, TwoHandle, apply_d1, apply_d2,
    apply_d4, apply_plan, enumerate_d2_outcomes, manifold_connected, outcome_parts,
    plan_from_dict, plan_to_dict, validate_plan,
)
from surfcob.surface import N, O, Surface, SurfaceSyntaxError, connected_sum

from strategies import components, surfaces


def S(*cs):
    return Surface.of(*cs)


def _outcome_oracle(c, bound=12):
    """Brute-force every candidate effect of a 2-handle on ``c``.

    One resulting component X: chi(X) = chi(c) + 2, and X cannot be
    non-orientable when c is orientable. Two components {A, B}: they must
    sum back to c. {S, c} is the trivial split.
    """
    cands = [O(g) for g in range(bound)] + [N(k) for k in range(1, bound)]
    out = set()
    for x in cands:
        if x.euler == c.euler + 2 and (x.orientable or not c.orientable):
            out.add(Compress(x))
    for a, b in itertools.combinations_with_replacement(cands, 2):
        if connected_sum(a, b) == c:
            out.add(TrivialSplit() if O(0) in (a, b) else SeparatingSplit(a, b))
    return out


@pytest.mark.parametrize("c, expected", [
    (N(2), {TrivialSplit(), SeparatingSplit(N(1), N(1)), Compress(O(0))}),
    (N(1), {TrivialSplit()}),
    (O(1), {TrivialSplit(), Compress(O(0))}),
])
def test_d2_outcome_examples(c, expected):
    assert set(enumerate_d2_outcomes(c)) == expected == _outcome_oracle(c)


@pytest.mark.parametrize("c", [O(g) for g in range(8)] + [N(k) for k in range(1, 9)])
def test_d2_outcomes_match_oracle(c):
    got = enumerate_d2_outcomes(c)
    assert len(got) == len(set(got))
    assert set(got) == _outcome_oracle(c)


@given(components(10))
def test_d2_outcome_laws(c):
    for o in enumerate_d2_outcomes(c):
        parts = outcome_parts(c, o)
        assert sum(x.euler for x in parts) == c.euler + 2
        dp = sum(x.p for x in parts) - c.p
        assert dp <= 0 and dp % 2 == 0
        if isinstance(o, SeparatingSplit):
            assert connected_sum(o.left, o.right) == c


def test_split_is_unordered():
    assert SeparatingSplit(N(2), O(1)) == SeparatingSplit(O(1), N(2))


# -- D4 ----------------------------------------------------------------------

def test_apply_d4_examples():
    assert apply_d4(S(N(1)), N(1)) == S(N(1), N(2))
    assert apply_d4(S(N(3), O(1)), N(3)) == S(O(1), N(2), N(3))
    with pytest.raises(MoveError) as err:
        apply_d4(S(O(2)), O(2))
    assert err.value.code == "orientable_target"
    with pytest.raises(MoveError) as err:
        apply_d4(S(N(1), N(2)), N(1), used=1)
    assert err.value.code == "capacity"


# -- D2 / D1 -----------------------------------------------------------------

def test_apply_d2_examples():
    assert apply_d2(S(N(1), N(2)), 1, SeparatingSplit(N(1), N(1))) == S(N(1), N(1), N(1))
    assert apply_d2(S(O(0)), 0, TrivialSplit()) == S(O(0), O(0))
    assert apply_d2(S(N(4)), 0, Compress(O(1))) == S(O(1))
    with pytest.raises(MoveError) as err:
        apply_d2(S(O(1)), 0, SeparatingSplit(N(1), N(1)))
    assert err.value.code == "outcome"


def test_apply_d1_examples():
    assert apply_d1(S(N(1), N(1)), Merge(0, 1)) == S(N(2))
    assert apply_d1(S(O(0)), SelfPlain(0)) == S(O(1))
    assert apply_d1(S(O(1)), SelfTwisted(0)) == S(N(4))
    assert apply_d1(S(N(3)), SelfTwisted(0)) == S(N(5))
    with pytest.raises(MoveError) as err:
        apply_d1(S(N(1), N(1)), Merge(1, 1))
    assert err.value.code == "merge_self"
    with pytest.raises(MoveError):
        apply_d1(S(N(1)), SelfPlain(3))


@given(surfaces(max_components=5), st.data())
def test_d2_delta_laws(s, data):
    i = data.draw(st.integers(0, len(s) - 1))
    o = data.draw(st.sampled_from(enumerate_d2_outcomes(s[i])))
    d = Delta.between(s, apply_d2(s, i, o))
    assert d.chi == 2
    assert d.p <= 0 and d.p % 2 == 0
    assert d.p_odd % 2 == 0
    assert d.components in (0, 1)


@given(surfaces(max_components=5), st.data())
def test_d1_delta_laws(s, data):
    moves = [SelfPlain(i) for i in range(len(s))] + [SelfTwisted(i) for i in range(len(s))]
    moves += [Merge(i, j) for i in range(len(s)) for j in range(len(s)) if i != j]
    m = data.draw(st.sampled_from(moves))
    d = Delta.between(s, apply_d1(s, m))
    assert d.chi == -2
    assert d.p_odd in (0, -2)
    assert d.components in (0, -1)


# -- plans -------------------------------------------------------------------

def test_apply_plan_examples():
    t = apply_plan(Plan(S(N(1)), (D4Family(0),), (TwoHandle(1, SeparatingSplit(N(1), N(1))),)))
    assert t.final == S(N(1), N(1), N(1))
    assert t.after_d4 == S(N(1), N(2))
    assert t.after_d2 == t.final

    t = apply_plan(Plan(S(O(0))))
    assert t.final == S(O(0)) and t.surfaces == [S(O(0))]

    split = SeparatingSplit(N(1), N(1))
    t = apply_plan(Plan(S(N(2)), (D4Family(0), D4Family(0)),
                        (TwoHandle(0, split), TwoHandle(2, split))))
    assert t.after_d4 == S(N(2), N(2), N(2))
    assert t.final == S(N(2), N(1), N(1), N(1), N(1))


def test_trace_deltas_recompute():
    plan = Plan(S(N(2), O(1)), (D4Family(1), D4Family(1)),
                (TwoHandle(2, Compress(O(0))), TwoHandle(1, TrivialSplit())),
                (Merge(0, 3), SelfTwisted(0)))
    t = apply_plan(plan)
    assert len(t.surfaces) == plan.move_count + 1
    for before, after, d in zip(t.surfaces, t.surfaces[1:], t.deltas):
        assert d == Delta.between(before, after)
    assert t.after_d4 == t.surfaces[2]
    assert t.after_d2 == t.surfaces[4]


def test_snapshots_without_middle_stage():
    t = apply_plan(Plan(S(N(1)), (D4Family(0),), (), (Merge(0, 1),)))
    assert t.after_d4 == t.after_d2 == S(N(1), N(2))
    assert t.final == S(N(3))


def test_validate_plan():
    bad = validate_plan(Plan(S(N(1)), (D4Family(0), D4Family(0))))
    assert not bad.ok and bad.code == "capacity" and bad.stage == "d4" and bad.index == 1
    assert "2 > P = 1" in bad.message
    assert validate_plan(Plan(S(N(3), O(2)))).ok
    bad = validate_plan(Plan(S(O(1)), (), (TwoHandle(0, SeparatingSplit(N(1), N(1))),)))
    assert not bad.ok and bad.code == "outcome"
    bad = validate_plan(Plan(S(O(1), N(1)), (D4Family(0),)))
    assert bad.code == "orientable_target"
    assert validate_plan(Plan(Surface())).code == "empty_start"
    with pytest.raises(PlanError) as err:
        apply_plan(Plan(S(N(1)), (), (), (SelfPlain(4),)))
    assert err.value.stage == "d1" and err.value.code == "index"


def test_capacity_is_per_component():
    # P(F_a) = 2 in total, but the N1 component only holds one band
    assert not validate_plan(Plan(S(N(1), N(1)), (D4Family(0), D4Family(0)))).ok
    assert validate_plan(Plan(S(N(1), N(1)), (D4Family(0), D4Family(1)))).ok


def test_manifold_connected():
    assert manifold_connected(Plan(S(N(3)), (D4Family(0),), (TwoHandle(0, TrivialSplit()),))) \
        == "connected"
    assert manifold_connected(Plan(S(O(0), O(0)))) == "disconnected"
    assert manifold_connected(Plan(S(N(1), N(1)), (), (), (Merge(0, 1),))) == "connected"
    # the merge joins two pieces of the same F_a component
    p = Plan(S(O(0), O(0)), (), (TwoHandle(0, TrivialSplit()),), (Merge(0, 1),))
    assert manifold_connected(p) == "disconnected"
    assert manifold_connected(Plan(S(N(1)), (D4Family(0),) * 2)) == "unknown"


def test_provenance_follows_split_children():
    # F_a = S + N1: splitting index 0 (S) gives two spheres from component 0
    p = Plan(S(O(0), N(1)), (D4Family(1),), (TwoHandle(0, TrivialSplit()),),
             (Merge(0, 3),))
    t = apply_plan(p)
    assert manifold_connected(p) == "connected"
    assert set(t.provenance) == {0}


# -- JSON --------------------------------------------------------------------

SAMPLE = Plan(S(N(2), O(1)), (D4Family(1),),
              (TwoHandle(2, SeparatingSplit(N(1), N(1))), TwoHandle(0, Compress(O(0))),
               TwoHandle(1, TrivialSplit())),
              (Merge(0, 2), SelfPlain(1), SelfTwisted(0)))


def test_plan_json_round_trip():
    d = plan_to_dict(SAMPLE)
    assert plan_from_dict(json.loads(json.dumps(d))) == SAMPLE
    assert d["d2"][0] == {"component": 2, "outcome": {"kind": "split", "left": "P", "right": "P"}}
    assert d["d1"][0] == {"kind": "merge", "components": [0, 2]}
    assert d["start"] == "T + K"


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d.pop("d1"),
    lambda d: d["d2"][0].update(note="x"),
    lambda d: d["d2"][0]["outcome"].update(kind="twist"),
    lambda d: d["d1"][0].update(kind="glue"),
    lambda d: d["d1"][0].update(components=[0]),
    lambda d: d.update(d4=["0"]),
    lambda d: d.update(d4=[True]),
    lambda d: d["d2"][1]["outcome"].pop("result"),
])
def test_plan_json_rejects_schema_violations(mutate):
    d = plan_to_dict(SAMPLE)
    mutate(d)
    with pytest.raises(PlanFormatError):
        plan_from_dict(d)


def test_plan_json_bad_notation():
    d = plan_to_dict(SAMPLE)
    d["start"] = "N0"
    with pytest.raises(SurfaceSyntaxError):
        plan_from_dict(d)
