"""Necessary conditions for a class-M reconstruction, and the Morse case.

Both checkers compare the same three quantities. For class-M Morse-Bott
functions the bounds are ``3 P``; for Morse functions they are ``P`` and
the conditions are also sufficient, so only the Morse checker ever reports
``feasible``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .surface import Surface, p_invariant, p_odd

INFEASIBLE = "infeasible"
PASSES_NECESSARY = "passes_necessary"
FEASIBLE = "feasible"


class EmptySurfaceError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    left: int
    relation: str
    right: int
    holds: bool

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "left": self.left, "relation": self.relation,
                "right": self.right, "holds": self.holds}


@dataclass(frozen=True)
class Verdict:
    status: str
    mode: str
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.holds]

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status, "mode": self.mode,
                "checks": [c.to_dict() for c in self.checks]}


def _checks(fa: Surface, fb: Surface, factor: int) -> tuple[Check, ...]:
    if fa.is_empty or fb.is_empty:
        raise EmptySurfaceError("boundary surfaces must be nonempty")
    pa, pb = p_invariant(fa), p_invariant(fb)
    oa, ob = p_odd(fa), p_odd(fb)
    suffix = "3p" if factor == 3 else "p"
    diff = ob - oa
    return (
        # left is the difference, right the modulus
        Check("parity", diff, "even", 2, diff % 2 == 0),
        Check(f"po_b_le_{suffix}a", ob, "<=", factor * pa, ob <= factor * pa),
        Check(f"po_a_le_{suffix}b", oa, "<=", factor * pb, oa <= factor * pb),
    )


def check_class_m(fa: Surface, fb: Surface) -> Verdict:
    checks = _checks(fa, fb, 3)
    ok = all(c.holds for c in checks)
    return Verdict(PASSES_NECESSARY if ok else INFEASIBLE, "class-m", checks)


def check_morse(fa: Surface, fb: Surface) -> Verdict:
    checks = _checks(fa, fb, 1)
    ok = all(c.holds for c in checks)
    return Verdict(FEASIBLE if ok else INFEASIBLE, "morse", checks)
