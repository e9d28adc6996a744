"""Search for class-M plans and the explicit Klein-bottle construction.

:func:`plan_search` runs a staged breadth-first search from ``F_a`` to
``F_b``; the first plan found at the smallest total move count wins, with
successors generated in a fixed canonical order so results are
reproducible. :func:`construct_theorem2` builds the ``F_a ⊔ p·ℝP²`` plans
directly without searching.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator

from .conditions import Verdict, check_class_m, INFEASIBLE
from .moves import (
    STAGES,
    Compress,
    D4Family,
    Merge,
    Move,
    Plan,
    SelfPlain,
    SelfTwisted,
    SeparatingSplit,
    Trace,
    TwoHandle,
    apply_d1,
    apply_d2,
    apply_d4,
    apply_plan,
    enumerate_d2_outcomes,
    manifold_connected,
    plan_from_dict,
    plan_to_dict,
    validate_plan,
)
from .surface import (
    N,
    O,
    Surface,
    euler_characteristic,
    format_surface,
    p_invariant,
    p_odd,
    parse_surface,
)

Budgets = tuple[int, int, int]


class BudgetError(ValueError):
    pass


def default_budgets(fa: Surface) -> Budgets:
    p = p_invariant(fa)
    return (p, p + 2, p + 2)


def check_budgets(budgets: Budgets) -> Budgets:
    if len(budgets) != 3 or any(not isinstance(b, int) or b < 0 for b in budgets):
        raise BudgetError(f"budgets must be three non-negative integers, got {budgets!r}")
    return tuple(budgets)  # type: ignore[return-value]


@dataclass(frozen=True)
class Chain:
    """The five quantities of the class-M bound, plus ``P(F_a) + 2 l4``."""

    po_b: int
    po_s3: int
    p_s3: int
    p_s1: int
    p_a_plus_2l4: int
    three_p_a: int

    @classmethod
    def from_trace(cls, trace: Trace, l4: int) -> Chain:
        return cls(p_odd(trace.final), p_odd(trace.after_d2), p_invariant(trace.after_d2),
                   p_invariant(trace.after_d4), p_invariant(trace.start) + 2 * l4,
                   3 * p_invariant(trace.start))

    def holds(self) -> bool:
        return (self.po_b <= self.po_s3 <= self.p_s3 <= self.p_s1
                and self.p_s1 == self.p_a_plus_2l4 <= self.three_p_a)

    def to_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


@dataclass
class PlanCertificate:
    plan: Plan
    trace: Trace
    verdict: Verdict
    chain: Chain
    connectivity: str
    # set when the certified surface differs from the one the recipe was asked for
    discrepancy: str | None = None
    requested: Surface | None = None

    @classmethod
    def build(cls, plan: Plan, requested: Surface | None = None,
              discrepancy: str | None = None) -> PlanCertificate:
        trace = apply_plan(plan)
        return cls(plan, trace, check_class_m(plan.start, trace.final),
                   Chain.from_trace(trace, len(plan.d4_moves)),
                   manifold_connected(plan), discrepancy, requested)

    @property
    def final(self) -> Surface:
        return self.trace.final

    def to_dict(self) -> dict[str, Any]:
        t = self.trace
        return {
            "plan": plan_to_dict(self.plan),
            "trace": {
                "surfaces": [format_surface(s) for s in t.surfaces],
                "after_d4": format_surface(t.after_d4),
                "after_d2": format_surface(t.after_d2),
                "final": format_surface(t.final),
                "deltas": [d.__dict__ for d in t.deltas],
            },
            "verdict": self.verdict.to_dict(),
            "theorem1_chain": self.chain.to_dict(),
            "connectivity": self.connectivity,
            "degenerate": self.plan.is_degenerate,
            "discrepancy": self.discrepancy,
            "requested": None if self.requested is None else format_surface(self.requested),
        }


def verify_record(record: dict[str, Any]) -> list[str]:
    """Re-check a bare plan, a certificate, or a search result; returns problems found.

    Schema errors raise PlanFormatError / SurfaceSyntaxError instead.
    """
    if "status" in record and "certificate" in record:
        if record["certificate"] is None:
            return [f"search result carries no certificate (status {record['status']})"]
        record = record["certificate"]
    plan = plan_from_dict(record["plan"] if "plan" in record else record)
    check = validate_plan(plan)
    if not check.ok:
        return [f"invalid plan: {check.message} ({check.code})"]
    if "plan" not in record:
        return []
    problems = []
    cert = PlanCertificate.build(plan)
    recorded = record.get("trace", {})
    surfaces = [format_surface(s) for s in cert.trace.surfaces]
    if recorded.get("surfaces") is not None:
        if [format_surface(parse_surface(s)) for s in recorded["surfaces"]] != surfaces:
            problems.append("recorded trace surfaces do not match recomputation")
    for key, value in (("after_d4", cert.trace.after_d4), ("after_d2", cert.trace.after_d2),
                       ("final", cert.trace.final)):
        if key in recorded and parse_surface(recorded[key]) != value:
            problems.append(f"recorded {key} does not match recomputation")
    if "theorem1_chain" in record and record["theorem1_chain"] != cert.chain.to_dict():
        problems.append("recorded theorem1_chain does not match recomputation")
    req = record.get("requested")
    if req is not None and record.get("discrepancy") is None and parse_surface(req) != cert.final:
        problems.append("final surface differs from the requested surface")
    if not cert.chain.holds():
        problems.append("chain inequalities fail")
    return problems


# -- search ------------------------------------------------------------------

@dataclass
class SearchResult:
    status: str  # feasible | infeasible | unknown
    certificate: PlanCertificate | None = None
    reason: str | None = None
    expanded: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "reason": self.reason, "expanded": self.expanded,
                "certificate": None if self.certificate is None else self.certificate.to_dict()}


@dataclass
class _Node:
    stage: int
    surface: Surface
    used: tuple[int, ...]
    n2: int
    n1: int
    parent: _Node | None = field(default=None, repr=False)
    move: Move | None = None


def _successors(node: _Node, fa: Surface, budgets: Budgets) -> Iterator[tuple[int, Move, Surface]]:
    b4, b2, b1 = budgets
    s = node.surface
    if node.stage == 0 and sum(node.used) < b4:
        for j, c in enumerate(fa):
            if not c.orientable and node.used[j] < c.p:
                yield 0, D4Family(j), apply_d4(s, c, node.used[j])
    if node.stage <= 1 and node.n2 < b2:
        for i, c in enumerate(s):
            if i and s[i - 1] == c:
                continue
            for o in enumerate_d2_outcomes(c):
                yield 1, TwoHandle(i, o), apply_d2(s, i, o)
    if node.n1 < b1:
        for i, c in enumerate(s):
            if i and s[i - 1] == c:
                continue
            for m in (SelfPlain(i), SelfTwisted(i)):
                yield 2, m, apply_d1(s, m)
            for j in range(i + 1, len(s)):
                if j > i + 1 and s[j - 1] == s[j]:
                    continue
                m = Merge(i, j)
                yield 2, m, apply_d1(s, m)


def _can_reach(node: _Node, fb: Surface, chi_b: int, budgets: Budgets) -> bool:
    """Necessary conditions, derived from the per-move delta laws."""
    b4, b2, b1 = budgets
    s = node.surface
    r2 = b2 - node.n2 if node.stage <= 1 else 0
    r1 = b1 - node.n1
    r4 = b4 - sum(node.used) if node.stage == 0 else 0
    dchi = chi_b - euler_characteristic(s)
    if not -2 * r1 <= dchi <= 2 * r2:
        return False
    dcomp = len(fb) - len(s)
    if not -r1 <= dcomp <= r4 + r2:
        return False
    if node.stage == 2:
        # only 1-handles remain: chi drops by exactly 2 per move, P_o never rises
        if dcomp < dchi // 2 or p_odd(fb) > p_odd(s):
            return False
    return True


def _plan_of(node: _Node, fa: Surface) -> Plan:
    moves: list[Move] = []
    while node.parent is not None:
        moves.append(node.move)
        node = node.parent
    moves.reverse()
    return Plan(fa,
                tuple(m for m in moves if isinstance(m, D4Family)),
                tuple(m for m in moves if isinstance(m, TwoHandle)),
                tuple(m for m in moves if isinstance(m, (Merge, SelfPlain, SelfTwisted))))


def plan_search(fa: Surface, fb: Surface, budgets: Budgets | None = None,
                max_states: int = 2_000_000) -> SearchResult:
    """Find a class-M plan from ``fa`` to ``fb`` within per-stage move budgets.

    ``infeasible`` means the class-M conditions fail or Euler-characteristic
    accounting rules out every plan within ``budgets``; ``unknown`` means the
    search space was exhausted without hitting ``fb``.
    """
    verdict = check_class_m(fa, fb)  # raises on empty input
    budgets = check_budgets(default_budgets(fa) if budgets is None else budgets)
    if verdict.status == INFEASIBLE:
        return SearchResult("infeasible", reason=verdict.failed[0].name)
    if budgets == (0, 0, 0) and fa != fb:
        raise BudgetError("zero budgets cannot change the surface")
    b4, b2, b1 = budgets
    budgets = (min(b4, p_invariant(fa)), b2, b1)
    chi_a, chi_b = euler_characteristic(fa), euler_characteristic(fb)
    if not -2 * b1 <= chi_b - chi_a <= 2 * b2:
        return SearchResult("infeasible", reason="chi_accounting")

    root = _Node(0, fa, (0,) * len(fa), 0, 0)
    seen = {(0, fa, root.used)}
    queue = deque([root])
    expanded = 0
    while queue:
        node = queue.popleft()
        expanded += 1
        if node.surface == fb:
            cert = PlanCertificate.build(_plan_of(node, fa), requested=fb)
            return SearchResult("feasible", cert, expanded=expanded)
        for stage, move, after in _successors(node, fa, budgets):
            used = node.used
            if stage == 0:
                used = used[:move.fa_component_index] + (used[move.fa_component_index] + 1,) \
                    + used[move.fa_component_index + 1:]
            key = (stage, after, used)
            if key in seen:
                continue
            child = _Node(stage, after, used, node.n2 + (stage == 1), node.n1 + (stage == 2),
                          node, move)
            if not _can_reach(child, fb, chi_b, budgets):
                continue
            seen.add(key)
            if len(seen) > max_states:
                return SearchResult("unknown", reason="state limit reached", expanded=expanded)
            queue.append(child)
    return SearchResult("unknown", reason="budgets exhausted", expanded=expanded)


# -- explicit construction ---------------------------------------------------

def construct_theorem2(fa: Surface, p: int, p_prime: int) -> PlanCertificate:
    """Plan from a connected non-orientable ``fa`` to ``fa ⊔ p·ℝP²``.

    Uses ``p_prime`` D4 families on ``fa`` and one 2-handle on each Klein
    bottle they create: ``p/2`` of those split it into two projective
    planes, the rest compress it to a sphere. For ``p_prime > p/2`` the
    leftover spheres make the certified surface differ from the requested
    one; the certificate records this in ``discrepancy``.
    """
    if len(fa) != 1 or fa[0].orientable:
        raise ValueError("F_a must be a single non-orientable component")
    k = fa[0].genus
    if p % 2 or not 1 <= p <= 2 * k:
        raise ValueError(f"p must be even with 1 <= p <= {2 * k}, got {p}")
    if not p // 2 <= p_prime <= k:
        raise ValueError(f"p_prime must satisfy {p // 2} <= p_prime <= {k}, got {p_prime}")

    d4 = tuple(D4Family(0) for _ in range(p_prime))
    surface = fa
    for _ in d4:
        surface = apply_d4(surface, fa[0])
    outcomes = [SeparatingSplit(N(1), N(1))] * (p // 2) + [Compress(O(0))] * (p_prime - p // 2)
    d2 = []
    for o in outcomes:
        # every N2 present descends from the same F_a component; take the last
        i = max(i for i, c in enumerate(surface) if c == N(2))
        d2.append(TwoHandle(i, o))
        surface = apply_d2(surface, i, o)

    requested = fa.add(*[N(1)] * p)
    discrepancy = None
    if p_prime > p // 2:
        discrepancy = (
            f"extended mode: {p_prime} D4 families and {p_prime} 2-handles raise chi by "
            f"{2 * p_prime}, but {format_surface(requested)} needs +{p}; "
            f"certified surface carries {p_prime - p // 2} extra sphere(s)")
    return PlanCertificate.build(Plan(fa, d4, tuple(d2)), requested, discrepancy)


__all__ = [
    "BudgetError", "Budgets", "Chain", "PlanCertificate", "SearchResult", "STAGES",
    "check_budgets", "construct_theorem2", "default_budgets", "plan_search", "verify_record",
]
