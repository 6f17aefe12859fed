"""Featherweight Java abstract syntax and class-hierarchy queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple, Union

OBJECT = "Object"
NULLTYPE = "NullType"
THIS = "this"


class UnknownName(KeyError):
    """Unknown class, field or method."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "lookup failed"


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarE:
    name: str


@dataclass(frozen=True)
class Let:
    var: str
    cls: str  # FJ class of the bound value
    value: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class If:
    left: str
    right: str
    then: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Null:
    pass


@dataclass(frozen=True)
class New:
    label: str
    cls: str


@dataclass(frozen=True)
class Cast:
    cls: str
    expr: "Expr"


@dataclass(frozen=True)
class Call:
    recv: str
    cls: str  # static class of the receiver
    method: str
    args: Tuple[str, ...]


@dataclass(frozen=True)
class GetField:
    recv: str
    cls: str
    field: str


@dataclass(frozen=True)
class SetField:
    recv: str
    cls: str
    field: str
    value: str


Expr = Union[VarE, Let, If, Null, New, Cast, Call, GetField, SetField]


def subexprs(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over ``e``."""
    yield e
    if isinstance(e, Let):
        yield from subexprs(e.value)
        yield from subexprs(e.body)
    elif isinstance(e, If):
        yield from subexprs(e.then)
        yield from subexprs(e.orelse)
    elif isinstance(e, Cast):
        yield from subexprs(e.expr)


def free_vars(e: Expr) -> FrozenSet[str]:
    if isinstance(e, VarE):
        return frozenset({e.name})
    if isinstance(e, Let):
        return free_vars(e.value) | (free_vars(e.body) - {e.var})
    if isinstance(e, If):
        return frozenset({e.left, e.right}) | free_vars(e.then) | free_vars(e.orelse)
    if isinstance(e, Cast):
        return free_vars(e.expr)
    if isinstance(e, Call):
        return frozenset({e.recv, *e.args})
    if isinstance(e, GetField):
        return frozenset({e.recv})
    if isinstance(e, SetField):
        return frozenset({e.recv, e.value})
    return frozenset()


def bound_vars(e: Expr) -> List[str]:
    return [s.var for s in subexprs(e) if isinstance(s, Let)]


def rename(e: Expr, m: Mapping[str, str]) -> Expr:
    """Rename variables (free and bound) according to ``m``."""
    r = lambda x: m.get(x, x)  # noqa: E731
    if isinstance(e, VarE):
        return VarE(r(e.name))
    if isinstance(e, Let):
        return Let(r(e.var), e.cls, rename(e.value, m), rename(e.body, m))
    if isinstance(e, If):
        return If(r(e.left), r(e.right), rename(e.then, m), rename(e.orelse, m))
    if isinstance(e, Cast):
        return Cast(e.cls, rename(e.expr, m))
    if isinstance(e, Call):
        return Call(r(e.recv), e.cls, e.method, tuple(r(y) for y in e.args))
    if isinstance(e, GetField):
        return GetField(r(e.recv), e.cls, e.field)
    if isinstance(e, SetField):
        return SetField(r(e.recv), e.cls, e.field, r(e.value))
    return e


# ---------------------------------------------------------------------------
# Declarations and programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: Tuple[Tuple[str, str], ...]  # (name, class)
    ret: str
    body: Expr

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(p for p, _ in self.params)


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: Optional[str]
    fields: Mapping[str, str] = field(default_factory=dict)
    methods: Mapping[str, MethodDecl] = field(default_factory=dict)


@dataclass(frozen=True)
class Program:
    """Classes by name (``Object`` included) and the class built at each label."""

    classes: Mapping[str, ClassDecl]
    label_class: Mapping[str, str] = field(default_factory=dict)

    @property
    def user_classes(self) -> List[str]:
        return [c for c in self.classes if c != OBJECT]

    def check_class(self, c: str) -> None:
        if c != NULLTYPE and c not in self.classes:
            raise UnknownName(f"unknown class {c!r}")

    def ancestors(self, c: str) -> List[str]:
        """``c`` and its superclasses, most derived first."""
        self.check_class(c)
        out = []
        while c is not None:
            out.append(c)
            c = self.classes[c].superclass
        return out

    def direct_subclasses(self, c: str) -> List[str]:
        return [d for d, decl in self.classes.items() if decl.superclass == c]

    def subclass_pairs(self) -> List[Tuple[str, str]]:
        """All (D, C) with D an immediate subclass of C."""
        return [(d, decl.superclass) for d, decl in self.classes.items() if decl.superclass]


def subtype(p: Program, c: str, d: str) -> bool:
    p.check_class(c)
    p.check_class(d)
    if c == NULLTYPE:
        return True
    if d == NULLTYPE:
        return False
    return d in p.ancestors(c)


def fields_of(p: Program, c: str) -> Dict[str, str]:
    """Every field of ``c`` (inherited ones included) with its declared class."""
    p.check_class(c)
    if c == NULLTYPE:
        return {}
    out: Dict[str, str] = {}
    for a in reversed(p.ancestors(c)):
        out.update(p.classes[a].fields)
    return out


def methods_of(p: Program, c: str) -> List[str]:
    p.check_class(c)
    if c == NULLTYPE:
        return []
    seen: Dict[str, None] = {}
    for a in reversed(p.ancestors(c)):
        for m in p.classes[a].methods:
            seen[m] = None
    return list(seen)


def method_decl(p: Program, c: str, m: str) -> Tuple[str, MethodDecl]:
    """The most derived definition of ``m`` at or above ``c`` and its owner."""
    p.check_class(c)
    if c != NULLTYPE:
        for a in p.ancestors(c):
            if m in p.classes[a].methods:
                return a, p.classes[a].methods[m]
    raise UnknownName(f"class {c!r} has no method {m!r}")


def mtable_lookup(p: Program, c: str, m: str) -> Tuple[Tuple[str, ...], Expr]:
    _, decl = method_decl(p, c, m)
    return decl.param_names, decl.body


def labels_of(p: Program) -> List[str]:
    return sorted(p.label_class)


def common_superclass(p: Program, c: str, d: str) -> str:
    if subtype(p, c, d):
        return d
    if subtype(p, d, c):
        return c
    up = set(p.ancestors(d))
    for a in p.ancestors(c):
        if a in up:
            return a
    return OBJECT


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------


def _pp(e: Expr, ind: int) -> str:
    pad = "  " * ind
    if isinstance(e, VarE):
        return e.name
    if isinstance(e, Null):
        return "null"
    if isinstance(e, New):
        return f"new[{e.label}] {e.cls}()"
    if isinstance(e, Cast):
        return f"({e.cls}) ({_pp(e.expr, ind)})"
    if isinstance(e, Call):
        return f"{e.recv}.{e.method}({', '.join(e.args)})"
    if isinstance(e, GetField):
        return f"{e.recv}.{e.field}"
    if isinstance(e, SetField):
        return f"{e.recv}.{e.field} := {e.value}"
    if isinstance(e, Let):
        return f"let {e.var} : {e.cls} = {_pp(e.value, ind + 1)} in\n{pad}{_pp(e.body, ind)}"
    if isinstance(e, If):
        inner = "  " * (ind + 1)
        return (f"if ({e.left} == {e.right}) {{\n{inner}{_pp(e.then, ind + 1)}\n{pad}}} "
                f"else {{\n{inner}{_pp(e.orelse, ind + 1)}\n{pad}}}")
    raise TypeError(f"not an expression: {e!r}")


def pretty_expr(e: Expr, indent: int = 0) -> str:
    return _pp(e, indent)


def pretty_program(p: Program) -> str:
    """Render ``p`` in the concrete syntax accepted by the parser."""
    chunks = []
    for c in p.user_classes:
        decl = p.classes[c]
        lines = [f"class {c} extends {decl.superclass} {{"]
        for f, fc in decl.fields.items():
            lines.append(f"  {fc} {f};")
        for m in decl.methods.values():
            params = ", ".join(f"{pc} {x}" for x, pc in m.params)
            lines.append(f"  {m.ret} {m.name}({params}) {{")
            lines.append(f"    {pretty_expr(m.body, 2)}")
            lines.append("  }")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
