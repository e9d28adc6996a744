"""Handle moves on level surfaces and staged class-M plans.

A plan starts from ``F_a`` and attaches, in this fixed order:

* D4 families: a circle of critical points whose Möbius band sits in a
  component of the original ``F_a``; the component survives and a Klein
  bottle is split off.
* 2-handles: split a component (trivially, along a separating circle) or
  compress it along a two-sided non-separating circle.
* 1-handles: tube two components together, or add a plain or twisted tube
  to one component.

Intermediate surfaces are kept canonical, so every index in a move refers
to the canonical order of the surface the move is applied to.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from .surface import (
    Component,
    N,
    O,
    Surface,
    SurfaceSyntaxError,
    connected_sum,
    euler_characteristic,
    format_surface,
    p_invariant,
    p_odd,
    parse_component,
    parse_surface,
)

STAGES = ("d4", "d2", "d1")


class MoveError(ValueError):
    """An inapplicable move. ``code`` is a stable machine-readable reason."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class PlanError(MoveError):
    def __init__(self, stage: str, index: int, err: MoveError):
        super().__init__(err.code, f"{stage}[{index}]: {err}")
        self.stage = stage
        self.index = index


class PlanFormatError(ValueError):
    """Malformed plan JSON."""


# -- 2-handle outcomes -------------------------------------------------------

@dataclass(frozen=True)
class TrivialSplit:
    """Attach along a circle bounding a disk: a sphere splits off."""


@dataclass(frozen=True)
class SeparatingSplit:
    left: Component
    right: Component

    def __post_init__(self):
        if self.right < self.left:
            left, right = self.right, self.left
            object.__setattr__(self, "left", left)
            object.__setattr__(self, "right", right)


@dataclass(frozen=True)
class Compress:
    result: Component


TwoHandleOutcome = Union[TrivialSplit, SeparatingSplit, Compress]


def outcome_parts(c: Component, outcome: TwoHandleOutcome) -> tuple[Component, ...]:
    if isinstance(outcome, TrivialSplit):
        return (c, O(0))
    if isinstance(outcome, SeparatingSplit):
        return (outcome.left, outcome.right)
    return (outcome.result,)


def enumerate_d2_outcomes(c: Component) -> list[TwoHandleOutcome]:
    """Every level-surface effect of a 2-handle attached to ``c``.

    The split ``{O0, c}`` is reported only as :class:`TrivialSplit`. On a
    projective plane every two-sided circle bounds a disk, so only the
    trivial split is possible there.
    """
    out: list[TwoHandleOutcome] = [TrivialSplit()]
    g = c.genus
    if c.orientable:
        out += [SeparatingSplit(O(a), O(g - a)) for a in range(1, g // 2 + 1)]
        if g >= 1:
            out.append(Compress(O(g - 1)))
        return out
    out += [SeparatingSplit(N(a), N(g - a)) for a in range(1, g // 2 + 1)]
    out += [SeparatingSplit(O(h), N(g - 2 * h)) for h in range(1, (g - 1) // 2 + 1)]
    if g >= 3:
        out.append(Compress(N(g - 2)))
    if g % 2 == 0:
        out.append(Compress(O((g - 2) // 2)))
    return out


# -- moves -------------------------------------------------------------------

@dataclass(frozen=True)
class D4Family:
    fa_component_index: int


@dataclass(frozen=True)
class TwoHandle:
    component_index: int
    outcome: TwoHandleOutcome


@dataclass(frozen=True)
class Merge:
    first: int
    second: int


@dataclass(frozen=True)
class SelfPlain:
    component_index: int


@dataclass(frozen=True)
class SelfTwisted:
    component_index: int


OneHandle = Union[Merge, SelfPlain, SelfTwisted]
Move = Union[D4Family, TwoHandle, Merge, SelfPlain, SelfTwisted]


def _check_index(s: Surface, i: int) -> Component:
    if not 0 <= i < len(s):
        raise MoveError("index", f"component index {i} out of range for {format_surface(s)}")
    return s[i]


def apply_d4(current: Surface, target: Component, used: int = 0) -> Surface:
    """Attach a D4 family whose Möbius band lies in ``target``.

    ``used`` is how many D4 families already have their band in the same
    component of ``F_a``.
    """
    if target.orientable:
        raise MoveError("orientable_target",
                        f"{target.name} is orientable and carries no Möbius band")
    if used >= target.p:
        raise MoveError("capacity",
                        f"capacity: {used + 1} > P = {target.p} on {target.name}")
    if target not in current.components:
        raise MoveError("not_in_surface", f"{target.name} is not a component of {current}")
    return current.add(N(2))


def d1_result(current: Surface, move: OneHandle) -> tuple[tuple[int, ...], Component]:
    """(indices consumed, component produced) for a 1-handle."""
    if isinstance(move, Merge):
        if move.first == move.second:
            raise MoveError("merge_self", "merge needs two distinct components")
        a = _check_index(current, move.first)
        b = _check_index(current, move.second)
        return (move.first, move.second), connected_sum(a, b)
    c = _check_index(current, move.component_index)
    if isinstance(move, SelfPlain):
        new = O(c.genus + 1) if c.orientable else N(c.genus + 2)
    elif c.orientable:
        new = N(2 * c.genus + 2)
    else:
        new = N(c.genus + 2)
    return (move.component_index,), new


def apply_d2(current: Surface, component_index: int, outcome: TwoHandleOutcome) -> Surface:
    c = _check_index(current, component_index)
    if outcome not in enumerate_d2_outcomes(c):
        raise MoveError("outcome", f"outcome {outcome} is not possible on {c.name}")
    return current.replace(component_index, outcome_parts(c, outcome))


def apply_d1(current: Surface, action: OneHandle) -> Surface:
    used, new = d1_result(current, action)
    rest = [c for i, c in enumerate(current) if i not in used]
    return Surface(tuple(rest) + (new,))


# -- plans and traces --------------------------------------------------------

@dataclass(frozen=True)
class Plan:
    start: Surface
    d4_moves: tuple[D4Family, ...] = ()
    d2_moves: tuple[TwoHandle, ...] = ()
    d1_moves: tuple[OneHandle, ...] = ()

    def staged(self) -> list[tuple[str, int, Move]]:
        out: list[tuple[str, int, Move]] = []
        for stage, moves in zip(STAGES, (self.d4_moves, self.d2_moves, self.d1_moves)):
            out += [(stage, i, m) for i, m in enumerate(moves)]
        return out

    @property
    def move_count(self) -> int:
        return len(self.d4_moves) + len(self.d2_moves) + len(self.d1_moves)

    @property
    def is_degenerate(self) -> bool:
        """No handles at all: the product cobordism, which has no critical value."""
        return self.move_count == 0


@dataclass(frozen=True)
class Delta:
    p: int
    p_odd: int
    chi: int
    components: int

    @classmethod
    def between(cls, before: Surface, after: Surface) -> Delta:
        return cls(p_invariant(after) - p_invariant(before),
                   p_odd(after) - p_odd(before),
                   euler_characteristic(after) - euler_characteristic(before),
                   len(after) - len(before))


@dataclass
class Trace:
    surfaces: list[Surface]
    after_d4: Surface
    after_d2: Surface
    deltas: list[Delta] = field(default_factory=list)
    # per final component: smallest F_a index in its connectivity class
    provenance: list[int] = field(default_factory=list)

    @property
    def start(self) -> Surface:
        return self.surfaces[0]

    @property
    def final(self) -> Surface:
        return self.surfaces[-1]


def _tracked_sort(items: list[tuple[Component, int]]) -> list[tuple[Component, int]]:
    return sorted(items, key=lambda it: (it[0].sort_key, it[1]))


def _run(plan: Plan):
    """Apply a plan; returns (trace, labelled final components, merge edges).

    Components carry the index of the F_a component they descend from.
    Equal components are ordered by that label, so indices in a plan are
    unambiguous.
    """
    start = plan.start
    if start.is_empty:
        raise PlanError("start", 0, MoveError("empty_start", "start surface is empty"))
    items = [(c, i) for i, c in enumerate(start)]
    surfaces = [start]
    deltas: list[Delta] = []
    merges: list[tuple[int, int]] = []
    used = [0] * len(start)
    entering: dict[str, Surface] = {}

    for stage, idx, move in plan.staged():
        for st in STAGES[1:STAGES.index(stage) + 1]:
            entering.setdefault(st, surfaces[-1])
        before = surfaces[-1]
        try:
            if stage == "d4":
                j = move.fa_component_index
                if not 0 <= j < len(start):
                    raise MoveError("index", f"F_a component index {j} out of range")
                after = apply_d4(before, start[j], used[j])
                used[j] += 1
                items = _tracked_sort(items + [(N(2), j)])
            elif stage == "d2":
                after = apply_d2(before, move.component_index, move.outcome)
                c, label = items[move.component_index]
                rest = items[:move.component_index] + items[move.component_index + 1:]
                items = _tracked_sort(rest + [(x, label) for x in outcome_parts(c, move.outcome)])
            else:
                consumed, new = d1_result(before, move)
                after = apply_d1(before, move)
                labels = [items[i][1] for i in consumed]
                if len(labels) == 2:
                    merges.append((labels[0], labels[1]))
                rest = [it for i, it in enumerate(items) if i not in consumed]
                items = _tracked_sort(rest + [(new, min(labels))])
        except MoveError as err:
            raise PlanError(stage, idx, err) from None
        assert tuple(c for c, _ in items) == after.components
        surfaces.append(after)
        deltas.append(Delta.between(before, after))

    for st in STAGES[1:]:
        entering.setdefault(st, surfaces[-1])
    trace = Trace(surfaces, after_d4=entering["d2"], after_d2=entering["d1"], deltas=deltas)
    return trace, items, merges


def apply_plan(plan: Plan) -> Trace:
    trace, items, merges = _run(plan)
    roots = _union_find(len(plan.start), merges)
    trace.provenance = [roots[label] for _, label in items]
    return trace


@dataclass(frozen=True)
class PlanCheck:
    ok: bool
    code: str = "ok"
    message: str = ""
    stage: str | None = None
    index: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "code": self.code, "message": self.message,
                "stage": self.stage, "index": self.index}


def validate_plan(plan: Plan) -> PlanCheck:
    """Check D4 capacity, index ranges and outcome membership; first violation wins."""
    try:
        _run(plan)
    except PlanError as err:
        return PlanCheck(False, err.code, str(err), err.stage, err.index)
    return PlanCheck(True)


def _union_find(n: int, edges: list[tuple[int, int]]) -> list[int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(x) for x in range(n)]


def manifold_connected(plan: Plan) -> str:
    """``connected``, ``disconnected`` or ``unknown`` (plan does not validate).

    Every handle except a merging 1-handle lives over a single component of
    ``F_a``, so the cobordism's components are the classes of ``F_a``
    components joined by merges.
    """
    try:
        _, _, merges = _run(plan)
    except PlanError:
        return "unknown"
    roots = _union_find(len(plan.start), merges)
    return "connected" if len(set(roots)) == 1 else "disconnected"


# -- JSON --------------------------------------------------------------------

def _expect_keys(obj: Any, required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise PlanFormatError(f"{where}: expected an object")
    extra = set(obj) - required
    missing = required - set(obj)
    if extra:
        raise PlanFormatError(f"{where}: unknown field(s) {sorted(extra)}")
    if missing:
        raise PlanFormatError(f"{where}: missing field(s) {sorted(missing)}")


def _int(v: Any, where: str) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise PlanFormatError(f"{where}: expected an integer")
    return v


def outcome_to_dict(o: TwoHandleOutcome) -> dict[str, str]:
    if isinstance(o, TrivialSplit):
        return {"kind": "trivial"}
    if isinstance(o, SeparatingSplit):
        return {"kind": "split", "left": o.left.notation(), "right": o.right.notation()}
    return {"kind": "compress", "result": o.result.notation()}


def outcome_from_dict(d: Any, where: str = "outcome") -> TwoHandleOutcome:
    if not isinstance(d, dict) or "kind" not in d:
        raise PlanFormatError(f"{where}: expected an object with 'kind'")
    kind = d["kind"]
    try:
        if kind == "trivial":
            _expect_keys(d, {"kind"}, where)
            return TrivialSplit()
        if kind == "split":
            _expect_keys(d, {"kind", "left", "right"}, where)
            return SeparatingSplit(parse_component(d["left"]), parse_component(d["right"]))
        if kind == "compress":
            _expect_keys(d, {"kind", "result"}, where)
            return Compress(parse_component(d["result"]))
    except TypeError:
        raise PlanFormatError(f"{where}: components must be notation strings") from None
    raise PlanFormatError(f"{where}: unknown outcome kind {kind!r}")


def _d1_to_dict(m: OneHandle) -> dict[str, Any]:
    if isinstance(m, Merge):
        return {"kind": "merge", "components": [m.first, m.second]}
    kind = "self_plain" if isinstance(m, SelfPlain) else "self_twisted"
    return {"kind": kind, "component": m.component_index}


def _d1_from_dict(d: Any, where: str) -> OneHandle:
    if not isinstance(d, dict) or "kind" not in d:
        raise PlanFormatError(f"{where}: expected an object with 'kind'")
    kind = d["kind"]
    if kind == "merge":
        _expect_keys(d, {"kind", "components"}, where)
        pair = d["components"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise PlanFormatError(f"{where}: 'components' must be a pair of indices")
        return Merge(_int(pair[0], where), _int(pair[1], where))
    if kind in ("self_plain", "self_twisted"):
        _expect_keys(d, {"kind", "component"}, where)
        cls = SelfPlain if kind == "self_plain" else SelfTwisted
        return cls(_int(d["component"], where))
    raise PlanFormatError(f"{where}: unknown 1-handle kind {kind!r}")


def plan_to_dict(plan: Plan) -> dict[str, Any]:
    return {
        "start": format_surface(plan.start),
        "d4": [m.fa_component_index for m in plan.d4_moves],
        "d2": [{"component": m.component_index, "outcome": outcome_to_dict(m.outcome)}
               for m in plan.d2_moves],
        "d1": [_d1_to_dict(m) for m in plan.d1_moves],
    }


def plan_from_dict(d: Any) -> Plan:
    """Strict inverse of :func:`plan_to_dict`.

    Raises PlanFormatError for schema violations; bad notation surfaces as
    SurfaceSyntaxError.
    """
    _expect_keys(d, {"start", "d4", "d2", "d1"}, "plan")
    if not isinstance(d["start"], str):
        raise PlanFormatError("plan.start: expected a notation string")
    for key in ("d4", "d2", "d1"):
        if not isinstance(d[key], list):
            raise PlanFormatError(f"plan.{key}: expected a list")
    start = parse_surface(d["start"])
    d4 = tuple(D4Family(_int(i, f"d4[{k}]")) for k, i in enumerate(d["d4"]))
    d2 = []
    for k, item in enumerate(d["d2"]):
        where = f"d2[{k}]"
        _expect_keys(item, {"component", "outcome"}, where)
        d2.append(TwoHandle(_int(item["component"], where),
                            outcome_from_dict(item["outcome"], where + ".outcome")))
    d1 = tuple(_d1_from_dict(item, f"d1[{k}]") for k, item in enumerate(d["d1"]))
    return Plan(start, d4, tuple(d2), d1)


__all__ = [
    "Compress", "D4Family", "Delta", "Merge", "MoveError", "Plan", "PlanCheck",
    "PlanError", "PlanFormatError", "SelfPlain", "SelfTwisted", "SeparatingSplit",
    "SurfaceSyntaxError", "Trace", "TrivialSplit", "TwoHandle", "apply_d1", "apply_d2",
    "apply_d4", "apply_plan", "enumerate_d2_outcomes", "manifold_connected",
    "outcome_parts", "plan_from_dict", "plan_to_dict", "validate_plan",
]
