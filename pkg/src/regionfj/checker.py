"""An independent checker for region typings against a class table.

It computes the least region set derivable for an expression under the
typing rules (var, null, new, cast, if, let, call, get, set) and collects
every violated side condition of the set rule. It never consults method
summaries, so it can be used to validate what inference produced.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional

from .inference import ClassTable, canonical_method
from .regions import NULL, Region
from .syntax import Call, Cast, Expr, GetField, If, Let, New, Null, Program, SetField, THIS, VarE

RegionSet = FrozenSet[Region]


@dataclass(frozen=True)
class CheckDiagnostic:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


def _fmt(rs) -> str:
    return "{" + ", ".join(str(r) for r in sorted(rs, key=lambda r: (r.label is not None, r.label or ""))) + "}"


def check_expr(gamma: Mapping[str, RegionSet], e: Expr, ct: ClassTable,
               diags: Optional[List[CheckDiagnostic]] = None, where: str = "expr") -> RegionSet:
    """Least type of ``e`` under ``gamma``; violations are appended to ``diags``.

    The set rule only constrains receiver regions that can actually hold
    the field: regions whose objects lack it (``Null`` above all) denote
    dereferences that fail at run time and are skipped.
    """
    if diags is None:
        diags = []
    universe = ct.universe

    def look(g: Dict[str, RegionSet], x: str) -> RegionSet:
        if x not in g:
            diags.append(CheckDiagnostic(where, f"unbound variable {x!r}"))
            return frozenset()
        return g[x]

    def go(g: Dict[str, RegionSet], e: Expr) -> RegionSet:
        if isinstance(e, VarE):
            return look(g, e.name)
        if isinstance(e, Null):
            return frozenset({NULL})
        if isinstance(e, New):
            return frozenset({Region(e.label)})
        if isinstance(e, Cast):
            return go(g, e.expr)
        if isinstance(e, Let):
            r = go(g, e.value)
            return go({**g, e.var: r}, e.body)
        if isinstance(e, If):
            both = look(g, e.left) & look(g, e.right)
            return go({**g, e.left: both, e.right: both}, e.then) | go(g, e.orelse)
        if isinstance(e, GetField):
            out = frozenset()
            for r in look(g, e.recv):
                out |= ct.field_type(e.cls, r, e.field)
            return out
        if isinstance(e, SetField):
            s = look(g, e.value)
            for r in sorted(look(g, e.recv), key=str):
                if e.field not in universe.fld_of(r):
                    continue
                missing = s - ct.field_type(e.cls, r, e.field)
                if missing:
                    diags.append(CheckDiagnostic(
                        where, f"{e.recv}.{e.field} := {e.value}: {_fmt(missing)} not in "
                               f"F({e.cls}, {r}, {e.field})"))
            return s
        if isinstance(e, Call):
            out = frozenset()
            recv = look(g, e.recv)
            args = [look(g, y) for y in e.args]
            for r in recv:
                for s in itertools.product(*args):
                    m = ct.method_type(e.cls, r, e.method, s)
                    if m is None:
                        diags.append(CheckDiagnostic(
                            where, f"no method typing for {e.cls}.{e.method} at {r}"
                                   f"({', '.join(map(str, s))})"))
                        continue
                    out |= m
            return out
        raise TypeError(f"not an expression: {e!r}")

    return go(dict(gamma), e)


def check_well_typed(p: Program, ct: ClassTable) -> List[CheckDiagnostic]:
    """Diagnostics for every method context whose typing is not derivable."""
    diags: List[CheckDiagnostic] = []
    bodies = {}
    for (c, r, m, args), declared in sorted(ct.M.items(), key=lambda kv: _mkey(kv[0])):
        cm = bodies.get((c, m))
        if cm is None:
            cm = bodies[(c, m)] = canonical_method(p, c, m)
        where = f"{c}.{m} at this={r}" + "".join(f", {x}={s}" for x, s in zip(cm.params, args))
        if len(args) != len(cm.params):
            diags.append(CheckDiagnostic(where, "argument arity mismatch"))
            continue
        gamma = {THIS: frozenset({r})}
        gamma.update({x: frozenset({s}) for x, s in zip(cm.params, args)})
        got = check_expr(gamma, cm.body, ct, diags, where)
        extra = got - declared
        if extra:
            diags.append(CheckDiagnostic(where, f"body has type {_fmt(got)}, "
                                                f"not within declared {_fmt(declared)}"))
    return diags


def _mkey(k):
    c, r, m, args = k
    return (c, m, str(r), tuple(map(str, args)))


def minimal_types(p: Program, ct: ClassTable) -> Dict[tuple, RegionSet]:
    """The checker's least type for every context in the method typing."""
    out = {}
    for (c, r, m, args) in ct.M:
        cm = canonical_method(p, c, m)
        gamma = {THIS: frozenset({r})}
        gamma.update({x: frozenset({s}) for x, s in zip(cm.params, args)})
        out[(c, r, m, args)] = check_expr(gamma, cm.body, ct, [])
    return out
