"""Field graphs, atoms and terms.

A field graph is a finite stand-in for a (possibly infinite) set of field
access paths. An atom puts a base (a variable or an atomic type) in front of
a field graph, and a term is a finite set of atoms read as a disjunction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Any, FrozenSet, Hashable, Iterable, Optional, Tuple

Edge = Tuple[str, str]


@dataclass(frozen=True, order=True)
class Var:
    """A program variable used as the base of an atom."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FieldGraph:
    """Either the empty graph (``head is None``) or ``<head | edges | tail>``."""

    head: Optional[str] = None
    edges: FrozenSet[Edge] = field(default_factory=frozenset)
    tail: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.head is None) != (self.tail is None):
            raise ValueError("field graph needs both head and tail, or neither")
        if self.head is None and self.edges:
            raise ValueError("the empty field graph has no edges")
        if not isinstance(self.edges, frozenset):
            object.__setattr__(self, "edges", frozenset(self.edges))
        if __debug__ and self.head is not None and not _well_formed(self):
            raise ValueError(f"node off every head-to-tail path in {self}")

    @classmethod
    def single(cls, f: str) -> "FieldGraph":
        return cls(f, frozenset(), f)

    @property
    def is_empty(self) -> bool:
        return self.head is None

    @property
    def nodes(self) -> FrozenSet[str]:
        if self.head is None:
            return frozenset()
        out = {self.head, self.tail}
        for a, b in self.edges:
            out.add(a)
            out.add(b)
        return frozenset(out)

    def __str__(self) -> str:
        if self.head is None:
            return "ε"
        edges = ",".join(f"({a},{b})" for a, b in sorted(self.edges))
        return f"⟨{self.head} | {edges} | {self.tail}⟩"


EMPTY = FieldGraph()


def _reach(start: str, succ: dict) -> set:
    seen = {start}
    todo = [start]
    while todo:
        n = todo.pop()
        for m in succ.get(n, ()):
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return seen


def _well_formed(g: FieldGraph) -> bool:
    fwd: dict = {}
    bwd: dict = {}
    for a, b in g.edges:
        fwd.setdefault(a, []).append(b)
        bwd.setdefault(b, []).append(a)
    on_path = _reach(g.head, fwd) & _reach(g.tail, bwd)
    return g.nodes <= on_path


def is_well_formed(g: FieldGraph) -> bool:
    return g.is_empty or _well_formed(g)


def fg_concat(g: FieldGraph, g2: FieldGraph) -> FieldGraph:
    """Concatenate two field graphs; the empty graph is a two-sided unit."""
    if g2.is_empty:
        return g
    if g.is_empty:
        return g2
    return FieldGraph(g.head, g.edges | {(g.tail, g2.head)} | g2.edges, g2.tail)


def fg_paths_upto(g: FieldGraph, k: int) -> set:
    """Enumerate the access paths of ``g`` that have at most ``k`` fields.

    Paths are tuples of field names. A graph with edges only represents walks
    that use at least one edge, so ``<f | (f,f) | f>`` yields ``f.f``,
    ``f.f.f``, ... but not ``f`` itself.
    """
    if g.is_empty:
        return {()}
    out = set()
    if not g.edges:
        if k >= 1:
            out.add((g.head,))
        return out
    succ: dict = {}
    for a, b in g.edges:
        succ.setdefault(a, []).append(b)
    stack = [(g.head,)]
    while stack:
        path = stack.pop()
        if len(path) >= 2 and path[-1] == g.tail:
            out.add(path)
        if len(path) < k:
            for nxt in succ.get(path[-1], ()):
                stack.append(path + (nxt,))
    return out


@dataclass(frozen=True)
class Atom:
    """``base.graph`` where base is a :class:`Var` or an atomic type."""

    base: Hashable
    graph: FieldGraph = EMPTY

    def __str__(self) -> str:
        g = self.graph
        if g.is_empty:
            return str(self.base)
        if not g.edges:
            return f"{self.base}.{g.head}"
        return f"{self.base}.{g}"


Term = FrozenSet[Atom]
BOTTOM: Term = frozenset()


def is_var(base: Any) -> bool:
    return isinstance(base, Var)


def atom_sort_key(a: Atom) -> tuple:
    return (0 if is_var(a.base) else 1, str(a.base), not a.graph.is_empty, str(a.graph))


def term(*atoms: Any) -> Term:
    """Build a term; bare bases are wrapped as empty-graph atoms."""
    return frozenset(a if isinstance(a, Atom) else Atom(a) for a in atoms)


def term_join(u: AbstractSet[Atom], v: AbstractSet[Atom]) -> Term:
    return frozenset(u) | frozenset(v)


def term_concat(u: Iterable[Atom], g: FieldGraph) -> Term:
    return frozenset(Atom(a.base, fg_concat(a.graph, g)) for a in u)


def render_term(u: Iterable[Atom]) -> str:
    atoms = sorted(u, key=atom_sort_key)
    if not atoms:
        return "⊥"
    return " ∨ ".join(str(a) for a in atoms)


def term_atoms(u: Iterable[Atom]) -> list:
    """Sorted atom renderings, the list form used in JSON output."""
    return [str(a) for a in sorted(u, key=atom_sort_key)]
