"""Classified closed surfaces and their invariants.

A connected closed surface is determined by orientability and genus; a
(possibly disconnected) surface is a multiset of such components kept in a
canonical order. Everything downstream works on these abstract
classifications only.

Notation grammar (used for every CLI argument and JSON field)::

    surface := term ("+" term)*
    term    := [count "*"] atom
    atom    := "S" | "T" | "P" | "K" | "O" digits | "N" digits

with ``S = O0``, ``T = O1``, ``P = N1``, ``K = N2``. The empty surface is
written ``empty``.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator


class SurfaceSyntaxError(ValueError):
    """Raised for malformed surface notation; ``position`` is a 0-based offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


@dataclass(frozen=True)
class Component:
    orientable: bool
    genus: int

    def __post_init__(self):
        if self.genus < 0:
            raise ValueError("genus must be non-negative")
        if not self.orientable and self.genus < 1:
            raise ValueError("non-orientable genus must be >= 1")

    @property
    def euler(self) -> int:
        return 2 - 2 * self.genus if self.orientable else 2 - self.genus

    @property
    def p(self) -> int:
        """Non-orientable genus, 0 for orientable components."""
        return 0 if self.orientable else self.genus

    @property
    def sort_key(self) -> tuple[int, int]:
        return (0 if self.orientable else 1, self.genus)

    def __lt__(self, other: Component) -> bool:
        return self.sort_key < other.sort_key

    @property
    def name(self) -> str:
        """Explicit ``O<g>`` / ``N<k>`` name."""
        return f"{'O' if self.orientable else 'N'}{self.genus}"

    def notation(self) -> str:
        return _SHORT.get((self.orientable, self.genus), self.name)

    def __repr__(self) -> str:
        return self.name


def O(g: int) -> Component:
    return Component(True, g)


def N(k: int) -> Component:
    return Component(False, k)


_SHORT = {(True, 0): "S", (True, 1): "T", (False, 1): "P", (False, 2): "K"}
_ATOMS = {"S": O(0), "T": O(1), "P": N(1), "K": N(2)}


@dataclass(frozen=True)
class Surface:
    """A multiset of components; always stored sorted (orientable first, then genus)."""

    components: tuple[Component, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(sorted(self.components)))

    @classmethod
    def of(cls, *components: Component) -> Surface:
        return cls(tuple(components))

    def __iter__(self) -> Iterator[Component]:
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> Component:
        return self.components[i]

    def __lt__(self, other: Surface) -> bool:
        return self.sort_key < other.sort_key

    @property
    def sort_key(self) -> tuple:
        return tuple(c.sort_key for c in self.components)

    @property
    def is_empty(self) -> bool:
        return not self.components

    def replace(self, index: int, new: Iterable[Component]) -> Surface:
        """Drop the component at ``index`` and add ``new`` in its place."""
        rest = self.components[:index] + self.components[index + 1:]
        return Surface(rest + tuple(new))

    def add(self, *new: Component) -> Surface:
        return Surface(self.components + new)

    def counts(self) -> Counter:
        return Counter(self.components)

    def __str__(self) -> str:
        return format_surface(self)

    def __repr__(self) -> str:
        return f"Surface[{', '.join(c.name for c in self.components)}]"


def p_invariant(s: Surface) -> int:
    return sum(c.p for c in s)


def p_odd(s: Surface) -> int:
    return sum(1 for c in s if c.p % 2 == 1)


def euler_characteristic(s: Surface) -> int:
    return sum(c.euler for c in s)


def mobius_capacity(s: Surface) -> int:
    """Maximum number of disjoint one-sided circles that embed in ``s``.

    Each non-orientable component of genus k carries up to k of them and an
    orientable component carries none, so the total is P(s).
    """
    return p_invariant(s)


def connected_sum(a: Component, b: Component) -> Component:
    if a.orientable and b.orientable:
        return O(a.genus + b.genus)
    return N(2 * a.genus * a.orientable + a.p + 2 * b.genus * b.orientable + b.p)


_TOKEN = re.compile(r"\s*(?:(\d+)\s*\*\s*)?([STPK]|[ON](\d+))\s*")


def parse_surface(text: str) -> Surface:
    if text.strip() == "empty":
        return Surface()
    comps: list[Component] = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SurfaceSyntaxError("expected a surface term", text, _skip_ws(text, pos))
        count = int(m.group(1)) if m.group(1) is not None else 1
        if count < 1:
            raise SurfaceSyntaxError("repetition count must be >= 1", text, m.start(1))
        atom = m.group(2)
        if atom in _ATOMS:
            c = _ATOMS[atom]
        else:
            genus = int(m.group(3))
            if atom[0] == "N" and genus < 1:
                raise SurfaceSyntaxError(
                    "non-orientable genus must be >= 1", text, m.start(2))
            c = Component(atom[0] == "O", genus)
        comps.extend([c] * count)
        pos = m.end()
        if pos == len(text):
            return Surface(tuple(comps))
        if text[pos] != "+":
            raise SurfaceSyntaxError("expected '+'", text, pos)
        pos += 1


def parse_component(text: str) -> Component:
    s = parse_surface(text)
    if len(s) != 1:
        raise SurfaceSyntaxError("expected a single connected component", text, 0)
    return s[0]


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def format_surface(s: Surface) -> str:
    if s.is_empty:
        return "empty"
    return " + ".join(c.notation() for c in s)
