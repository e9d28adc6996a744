"""Exhaustive enumeration of staged plans.

Nothing here is goal-directed: every valid plan within the budgets is
expanded, so a pruning mistake in the planner cannot hide behind the same
mistake here. Plans that reach the same state are merged while their
number is kept, which makes desk-scale sweeps cheap without losing the
exact plan count.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .conditions import check_class_m, INFEASIBLE
from .moves import (
    D4Family,
    Merge,
    Plan,
    SelfPlain,
    SelfTwisted,
    TwoHandle,
    apply_d1,
    apply_d2,
    apply_d4,
    enumerate_d2_outcomes,
)
from .planner import BudgetError, Budgets, check_budgets, plan_search
from .surface import (
    Component,
    N,
    O,
    Surface,
    format_surface,
    p_invariant,
    p_odd,
)

MAX_STATES = 3_000_000


class OracleOverflow(RuntimeError):
    """The enumeration grew past the state guard."""


@dataclass(frozen=True)
class _State:
    stage: int
    surface: Surface
    used: tuple[int, ...]
    n2: int
    n1: int
    # P(F_s1), P(F_s3), P_o(F_s3) once the corresponding stage has been left
    p_s1: int | None = None
    p_s3: int | None = None
    po_s3: int | None = None


@dataclass
class ReachabilityReport:
    start: Surface
    budgets: Budgets
    reachable: list[Surface]
    plan_count: int
    counterexamples: list[tuple[Surface, str]] = field(default_factory=list)
    parity_violations: list[Surface] = field(default_factory=list)
    chain_violations: list[Surface] = field(default_factory=list)
    witnesses: dict[Surface, Plan] = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return not (self.counterexamples or self.parity_violations or self.chain_violations)

    def to_dict(self) -> dict[str, Any]:
        return {
            "start": format_surface(self.start),
            "budgets": list(self.budgets),
            "reachable": [format_surface(s) for s in self.reachable],
            "plan_count": self.plan_count,
            "counterexamples": [{"surface": format_surface(s), "condition": c}
                                for s, c in self.counterexamples],
            "parity_violations": [format_surface(s) for s in self.parity_violations],
            "chain_violations": [format_surface(s) for s in self.chain_violations],
        }


def _leave(st: _State, new_stage: int) -> dict[str, int]:
    """Snapshot fields to set when moving from ``st.stage`` to ``new_stage``."""
    out = {}
    s = st.surface
    if st.stage == 0 and new_stage >= 1:
        out["p_s1"] = p_invariant(s)
    if st.stage <= 1 and new_stage == 2:
        out["p_s3"] = p_invariant(s)
        out["po_s3"] = p_odd(s)
    return out


def _expand(st: _State, fa: Surface, budgets: Budgets) -> Iterator[tuple[Any, _State]]:
    """All (move, next state) pairs, one per distinct move encoding."""
    b4, b2, b1 = budgets
    s = st.surface
    if st.stage == 0 and sum(st.used) < b4:
        for j, c in enumerate(fa):
            if not c.orientable and st.used[j] < c.p:
                used = st.used[:j] + (st.used[j] + 1,) + st.used[j + 1:]
                yield D4Family(j), _State(0, apply_d4(s, c, st.used[j]), used, st.n2, st.n1)
    if st.stage <= 1 and st.n2 < b2:
        snap = _leave(st, 1)
        for i, c in enumerate(s):
            for o in enumerate_d2_outcomes(c):
                yield TwoHandle(i, o), _State(
                    1, apply_d2(s, i, o), st.used, st.n2 + 1, st.n1,
                    snap.get("p_s1", st.p_s1), None, None)
    if st.n1 < b1:
        snap = _leave(st, 2)
        moves: list[Any] = []
        for i in range(len(s)):
            moves += [SelfPlain(i), SelfTwisted(i)]
            moves += [Merge(i, j) for j in range(i + 1, len(s))]
        for m in moves:
            yield m, _State(2, apply_d1(s, m), st.used, st.n2, st.n1 + 1,
                            snap.get("p_s1", st.p_s1), snap.get("p_s3", st.p_s3),
                            snap.get("po_s3", st.po_s3))


def _chain_ok(st: _State, fa: Surface) -> bool:
    s = st.surface
    p_s1 = p_invariant(s) if st.p_s1 is None else st.p_s1
    p_s3 = p_invariant(s) if st.stage < 2 else st.p_s3
    po_s3 = p_odd(s) if st.stage < 2 else st.po_s3
    pa = p_invariant(fa)
    return (p_odd(s) <= po_s3 <= p_s3 <= p_s1 == pa + 2 * sum(st.used) <= 3 * pa)


def reachable_set(fa: Surface, budgets: Budgets, max_states: int = MAX_STATES,
                  keep_witnesses: bool = False) -> ReachabilityReport:
    """Every surface ending some valid staged plan within ``budgets``.

    Also checks, for every plan, the class-M conditions and the chain of
    intermediate P / P_o values against ``fa``.
    """
    budgets = check_budgets(budgets)
    if fa.is_empty:
        raise ValueError("start surface must be nonempty")
    root = _State(0, fa, (0,) * len(fa), 0, 0)
    layer: dict[_State, int] = {root: 1}
    witness: dict[_State, Plan] = {root: Plan(fa)} if keep_witnesses else {}
    finals: dict[Surface, _State] = {}
    witnesses: dict[Surface, Plan] = {}
    plan_count = 0
    chain_bad: set[Surface] = set()
    total_states = 0
    for _ in range(sum(budgets) + 1):
        if not layer:
            break
        nxt: dict[_State, int] = defaultdict(int)
        nxt_witness: dict[_State, Plan] = {}
        for st, count in layer.items():
            plan_count += count
            finals.setdefault(st.surface, st)
            if keep_witnesses:
                witnesses.setdefault(st.surface, witness[st])
            if not _chain_ok(st, fa):
                chain_bad.add(st.surface)
            for move, child in _expand(st, fa, budgets):
                nxt[child] += count
                if keep_witnesses and child not in nxt_witness:
                    nxt_witness[child] = _extend(witness[st], move)
        total_states += len(nxt)
        if total_states > max_states:
            raise OracleOverflow(f"more than {max_states} states; lower the budgets")
        layer, witness = nxt, nxt_witness

    reachable = sorted(finals)
    report = ReachabilityReport(fa, budgets, reachable, plan_count,
                                chain_violations=sorted(chain_bad), witnesses=witnesses)
    for fb in reachable:
        verdict = check_class_m(fa, fb)
        if verdict.status == INFEASIBLE:
            report.counterexamples.append((fb, verdict.failed[0].name))
        if (p_odd(fb) - p_odd(fa)) % 2:
            report.parity_violations.append(fb)
    return report


def _extend(plan: Plan, move: Any) -> Plan:
    if isinstance(move, D4Family):
        return Plan(plan.start, plan.d4_moves + (move,), plan.d2_moves, plan.d1_moves)
    if isinstance(move, TwoHandle):
        return Plan(plan.start, plan.d4_moves, plan.d2_moves + (move,), plan.d1_moves)
    return Plan(plan.start, plan.d4_moves, plan.d2_moves, plan.d1_moves + (move,))


def enumerate_plans(fa: Surface, budgets: Budgets) -> Iterator[Plan]:
    """Yield every valid staged plan within ``budgets``, one by one.

    Only practical for tiny budgets; used to cross-check the counts of
    :func:`reachable_set`.
    """
    budgets = check_budgets(budgets)
    stack = [(_State(0, fa, (0,) * len(fa), 0, 0), Plan(fa))]
    while stack:
        st, plan = stack.pop()
        yield plan
        for move, child in _expand(st, fa, budgets):
            stack.append((child, _extend(plan, move)))


# -- cross-validation and sweeps ----------------------------------------------

@dataclass
class Agreement:
    start: Surface
    target: Surface
    budgets: Budgets
    planner_found: bool
    oracle_member: bool
    planner_status: str
    witness: Plan | None = None

    @property
    def agree(self) -> bool:
        return self.planner_found == self.oracle_member

    def to_dict(self) -> dict[str, Any]:
        from .moves import plan_to_dict
        return {"start": format_surface(self.start), "target": format_surface(self.target),
                "budgets": list(self.budgets), "agree": self.agree,
                "planner_found": self.planner_found, "oracle_member": self.oracle_member,
                "planner_status": self.planner_status,
                "witness": None if self.witness is None else plan_to_dict(self.witness)}


def cross_validate(fa: Surface, fb: Surface, budgets: Budgets,
                   report: ReachabilityReport | None = None) -> Agreement:
    """Compare planner feasibility with membership in the exhaustive reachable set.

    ``report`` may be passed to reuse one enumeration for many targets.
    """
    if report is None:
        report = reachable_set(fa, budgets, keep_witnesses=True)
    member = fb in set(report.reachable)
    try:
        res = plan_search(fa, fb, budgets)
        status = res.status
        found = res.certificate is not None
        witness = res.certificate.plan if found else report.witnesses.get(fb)
    except BudgetError:
        status, found, witness = "infeasible", False, None
    return Agreement(fa, fb, tuple(budgets), found, member, status, witness)


def components_up_to(max_genus: int) -> list[Component]:
    return [O(g) for g in range(max_genus + 1)] + [N(k) for k in range(1, max_genus + 1)]


def seed_universe(max_components: int = 2, max_genus: int = 3) -> list[Surface]:
    """All surfaces with 1..max_components components of genus <= max_genus."""
    comps = components_up_to(max_genus)
    out = []
    for n in range(1, max_components + 1):
        out += [Surface(c) for c in itertools.combinations_with_replacement(comps, n)]
    return sorted(out, key=lambda s: (len(s), s.sort_key))


@dataclass
class SweepReport:
    starts: int = 0
    pairs: int = 0
    plans: int = 0
    counterexamples: list[tuple[Surface, Surface, str]] = field(default_factory=list)
    parity_violations: list[tuple[Surface, Surface]] = field(default_factory=list)
    chain_violations: list[tuple[Surface, Surface]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.counterexamples or self.parity_violations or self.chain_violations)

    def add(self, r: ReachabilityReport) -> None:
        self.starts += 1
        self.pairs += len(r.reachable)
        self.plans += r.plan_count
        self.counterexamples += [(r.start, fb, c) for fb, c in r.counterexamples]
        self.parity_violations += [(r.start, fb) for fb in r.parity_violations]
        self.chain_violations += [(r.start, fb) for fb in r.chain_violations]

    def to_dict(self) -> dict[str, Any]:
        return {
            "starts": self.starts, "pairs": self.pairs, "plans": self.plans,
            "counterexamples": [{"start": format_surface(a), "surface": format_surface(b),
                                 "condition": c} for a, b, c in self.counterexamples],
            "parity_violations": [[format_surface(a), format_surface(b)]
                                  for a, b in self.parity_violations],
            "chain_violations": [[format_surface(a), format_surface(b)]
                                 for a, b in self.chain_violations],
        }


def sweep_budgets(fa: Surface, d2: int, d1: int) -> Budgets:
    return (p_invariant(fa), d2, d1)


def _sweep_one(args: tuple[Surface, int, int]) -> ReachabilityReport:
    fa, d2, d1 = args
    return reachable_set(fa, sweep_budgets(fa, d2, d1))


def sweep(universe: Iterable[Surface], d2: int = 3, d1: int = 3, jobs: int = 1) -> SweepReport:
    """Check every reachable pair from each start, with the D4 budget at full capacity.

    Reachable sets are monotone in the budgets, so one enumeration per start
    at the maximal budgets covers every smaller budget too.
    """
    work = [(fa, d2, d1) for fa in universe]
    out = SweepReport()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_sweep_one, work))
    else:
        reports = [_sweep_one(w) for w in work]
    for r in reports:
        out.add(r)
    return out
