"""Abstract environment transformations and their instantiation.

An :class:`AbstractTransformation` holds variable assignments ``x :↦ u`` and
field constraints ``b.G :≥ v``. It denotes a monotone map on typing
environments (:func:`apply`), and supports composition and join so that
statement summaries can be assembled into method summaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import (
    AbstractSet,
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Mapping,
    Optional,
    Tuple,
    Union,
)

from .graphs import (
    BOTTOM,
    Atom,
    FieldGraph,
    Term,
    Var,
    is_var,
    render_term,
    term_concat,
)

RegionSet = FrozenSet[Hashable]
FieldKey = Tuple[Hashable, str]
FieldsOf = Union[Callable[[Hashable], AbstractSet[str]], Mapping[Hashable, AbstractSet[str]], None]
Key = Union[str, Var, Atom]


def _fields_fn(fld: FieldsOf) -> Optional[Callable[[Hashable], AbstractSet[str]]]:
    if fld is None or callable(fld):
        return fld
    return lambda a: fld.get(a, frozenset())


def _has_field(fld, a: Hashable, f: str) -> bool:
    return fld is None or f in fld(a)


# ---------------------------------------------------------------------------
# Abstract transformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbstractTransformation:
    """A finite set of assignments and constraints with pairwise distinct keys.

    Identity assignments and bottom constraints are never stored; the
    constructor drops them so every instance is in normal form.
    """

    assigns: Mapping[str, Term] = field(default_factory=dict)
    constraints: Mapping[Atom, Term] = field(default_factory=dict)

    def __post_init__(self) -> None:
        assigns = {}
        for x, u in self.assigns.items():
            x = x.name if isinstance(x, Var) else x
            u = frozenset(u)
            if u != frozenset({Atom(Var(x))}):
                assigns[x] = u
        constraints = {}
        for k, v in self.constraints.items():
            if k.graph.is_empty:
                raise ValueError(f"constraint key {k} has an empty field graph")
            v = frozenset(v)
            if v:
                constraints[k] = v
        object.__setattr__(self, "assigns", assigns)
        object.__setattr__(self, "constraints", constraints)

    def __hash__(self) -> int:
        return hash((frozenset(self.assigns.items()), frozenset(self.constraints.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractTransformation):
            return NotImplemented
        return self.assigns == other.assigns and self.constraints == other.constraints

    @property
    def domain(self) -> frozenset:
        return frozenset(self.assigns) | frozenset(self.constraints)

    def __str__(self) -> str:
        parts = [f"{x} :↦ {render_term(self.assigns[x])}" for x in sorted(self.assigns)]
        keys = sorted(self.constraints, key=str)
        parts += [f"{k} :≥ {render_term(self.constraints[k])}" for k in keys]
        return "[" + ", ".join(parts) + "]"

    __repr__ = __str__


IDENTITY = AbstractTransformation()


def bottom_transformation(variables: Iterable[str]) -> AbstractTransformation:
    """The least transformation over ``variables``: every variable to ⊥."""
    return AbstractTransformation({x: BOTTOM for x in variables})


def at_lookup(sigma: AbstractTransformation, key: Key) -> Term:
    """Read ``sigma`` as a total function on keys."""
    if isinstance(key, Atom):
        if key.graph.is_empty:
            if not is_var(key.base):
                raise ValueError("a type is not a key")
            key = key.base
        else:
            return sigma.constraints.get(key, BOTTOM)
    name = key.name if isinstance(key, Var) else key
    return sigma.assigns.get(name, frozenset({Atom(Var(name))}))


def is_normal(sigma: AbstractTransformation) -> bool:
    """True when no identity assignment or bottom constraint is stored."""
    for x, u in sigma.assigns.items():
        if u == frozenset({Atom(Var(x))}):
            return False
    for k, v in sigma.constraints.items():
        if not v or k.graph.is_empty:
            return False
    return True


def subst_term(u: Iterable[Atom], theta: AbstractTransformation,
               opaque: AbstractSet[str] = frozenset()) -> Term:
    """Replace each variable base assigned by ``theta`` with its term.

    Variables listed in ``opaque`` are left untouched even if assigned.
    """
    out = set()
    for a in u:
        b = a.base
        if is_var(b) and b.name in theta.assigns and b.name not in opaque:
            out |= term_concat(theta.assigns[b.name], a.graph)
        else:
            out.add(a)
    return frozenset(out)


def subst_constraint(key: Atom, value: Iterable[Atom], theta: AbstractTransformation,
                     opaque: AbstractSet[str] = frozenset()) -> Dict[Atom, Term]:
    """Substitute a constraint; the key may split into several keys or none."""
    new_value = subst_term(value, theta, opaque)
    return {k: new_value for k in subst_term((key,), theta, opaque)}


def compose(sigma: AbstractTransformation, theta: AbstractTransformation,
            opaque: AbstractSet[str] = frozenset()) -> AbstractTransformation:
    """The transformation running ``theta`` first and then ``sigma``."""
    assigns = {x: subst_term(u, theta, opaque) for x, u in sigma.assigns.items()}
    for y, s in theta.assigns.items():
        if y not in sigma.assigns:
            assigns[y] = s
    constraints: Dict[Atom, Term] = {}
    for k, v in sigma.constraints.items():
        for k2, v2 in subst_constraint(k, v, theta, opaque).items():
            constraints[k2] = constraints.get(k2, BOTTOM) | v2
    for k, v in theta.constraints.items():
        constraints[k] = constraints.get(k, BOTTOM) | v
    return AbstractTransformation(assigns, constraints)


def join(sigma: AbstractTransformation, theta: AbstractTransformation) -> AbstractTransformation:
    assigns = {}
    for x in set(sigma.assigns) | set(theta.assigns):
        assigns[x] = at_lookup(sigma, x) | at_lookup(theta, x)
    constraints = dict(sigma.constraints)
    for k, v in theta.constraints.items():
        constraints[k] = constraints.get(k, BOTTOM) | v
    return AbstractTransformation(assigns, constraints)


def at_leq(sigma: AbstractTransformation, theta: AbstractTransformation) -> bool:
    """Componentwise inclusion under the total-function reading."""
    for x in set(sigma.assigns) | set(theta.assigns):
        if not at_lookup(sigma, x) <= at_lookup(theta, x):
            return False
    return all(v <= theta.constraints.get(k, BOTTOM) for k, v in sigma.constraints.items())


# ---------------------------------------------------------------------------
# Environments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Environment:
    """Variable typing plus field typing; absent entries read as ⊥.

    Only nonempty entries are stored, so two environments are equal exactly
    when they agree on every key.
    """

    vars: Mapping[str, RegionSet] = field(default_factory=dict)
    fields: Mapping[FieldKey, RegionSet] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", {x: frozenset(v) for x, v in self.vars.items() if v})
        object.__setattr__(self, "fields", {k: frozenset(v) for k, v in self.fields.items() if v})

    def var_type(self, x: str) -> RegionSet:
        return self.vars.get(x, frozenset())

    def field_type(self, a: Hashable, f: str) -> RegionSet:
        return self.fields.get((a, f), frozenset())

    def __str__(self) -> str:
        parts = [f"{x}: {_render_set(self.vars[x])}" for x in sorted(self.vars)]
        keys = sorted(self.fields, key=lambda k: (str(k[0]), k[1]))
        parts += [f"{a}.{f}: {_render_set(self.fields[(a, f)])}" for a, f in keys]
        return "(" + ", ".join(parts) + ")"

    __repr__ = __str__


def _render_set(s: AbstractSet[Hashable]) -> str:
    if not s:
        return "⊥"
    return " ∨ ".join(sorted(str(r) for r in s))


def env_leq(e1: Environment, e2: Environment) -> bool:
    return all(v <= e2.var_type(x) for x, v in e1.vars.items()) and all(
        v <= e2.fields.get(k, frozenset()) for k, v in e1.fields.items()
    )


def env_join(e1: Environment, e2: Environment) -> Environment:
    vs = dict(e1.vars)
    for x, v in e2.vars.items():
        vs[x] = vs.get(x, frozenset()) | v
    fs = dict(e1.fields)
    for k, v in e2.fields.items():
        fs[k] = fs.get(k, frozenset()) | v
    return Environment(vs, fs)


def reachable_fields(start: FieldKey, edges: AbstractSet[Tuple[str, str]], env: Environment,
                     fld: FieldsOf = None) -> FrozenSet[FieldKey]:
    """Least set containing ``start`` closed under field-typed edge steps."""
    fld = _fields_fn(fld)
    succ: Dict[str, list] = {}
    for f, g in edges:
        succ.setdefault(f, []).append(g)
    seen = {start}
    todo = [start]
    while todo:
        b, f = todo.pop()
        gs = succ.get(f)
        if not gs:
            continue
        for c in env.field_type(b, f):
            for g in gs:
                nxt = (c, g)
                if nxt not in seen and _has_field(fld, c, g):
                    seen.add(nxt)
                    todo.append(nxt)
    return frozenset(seen)


def _inst_type_atom(a: Hashable, g: FieldGraph, env: Environment, fld) -> RegionSet:
    if g.is_empty:
        return frozenset({a})
    out: set = set()
    for b, t in reachable_fields((a, g.head), g.edges, env, fld):
        if t == g.tail:
            out |= env.field_type(b, t)
    return frozenset(out)


def instantiate_atom(a: Atom, env: Environment, fld: FieldsOf = None) -> RegionSet:
    fld = _fields_fn(fld)
    if is_var(a.base):
        out: set = set()
        for t in env.var_type(a.base.name):
            out |= _inst_type_atom(t, a.graph, env, fld)
        return frozenset(out)
    return _inst_type_atom(a.base, a.graph, env, fld)


def instantiate_term(u: Iterable[Atom], env: Environment, fld: FieldsOf = None) -> RegionSet:
    fld = _fields_fn(fld)
    out: set = set()
    for a in u:
        out |= instantiate_atom(a, env, fld)
    return frozenset(out)


def step(sigma: AbstractTransformation, env: Environment, fld: FieldsOf = None) -> Environment:
    """One application of the environment update induced by ``sigma``."""
    fld = _fields_fn(fld)
    vs = dict(env.vars)
    for x, u in sigma.assigns.items():
        vs[x] = instantiate_term(u, env, fld)
    fs = dict(env.fields)
    for key, u in sigma.constraints.items():
        value = instantiate_term(u, env, fld)
        if not value:
            continue
        g = key.graph
        for b in instantiate_atom(Atom(key.base), env, fld):
            for a, f in reachable_fields((b, g.head), g.edges, env, fld):
                if f == g.tail and _has_field(fld, a, f):
                    fs[(a, f)] = fs.get((a, f), frozenset()) | value
    return Environment(vs, fs)


def apply_counted(sigma: AbstractTransformation, env: Environment,
                  fld: FieldsOf = None) -> Tuple[Environment, int]:
    """Fixed point of :func:`step`, plus the number of productive updates.

    Each round recomputes from the original variable typing and the field
    typing of the previous round, so variables are never updated twice.
    """
    fld = _fields_fn(fld)
    current = env
    updates = 0
    while True:
        nxt = step(sigma, Environment(env.vars, current.fields), fld)
        if nxt == current:
            return current, updates
        current = nxt
        updates += 1


def apply(sigma: AbstractTransformation, env: Environment, fld: FieldsOf = None) -> Environment:
    return apply_counted(sigma, env, fld)[0]


def free_variables(sigma: AbstractTransformation) -> FrozenSet[str]:
    """Variables that occur as keys or as atom bases in ``sigma``."""
    out = set(sigma.assigns)
    for u in sigma.assigns.values():
        out |= {a.base.name for a in u if is_var(a.base)}
    for k, v in sigma.constraints.items():
        if is_var(k.base):
            out.add(k.base.name)
        out |= {a.base.name for a in v if is_var(a.base)}
    return frozenset(out)


def term_variables(u: Iterable[Atom]) -> FrozenSet[str]:
    return frozenset(a.base.name for a in u if is_var(a.base))


def sorted_constraints(sigma: AbstractTransformation) -> list:
    return sorted(sigma.constraints.items(), key=lambda kv: str(kv[0]))


__all__ = [
    "AbstractTransformation", "Environment", "IDENTITY", "RegionSet", "at_leq", "at_lookup",
    "apply", "apply_counted", "bottom_transformation", "compose", "env_join", "env_leq",
    "free_variables", "instantiate_atom", "instantiate_term", "is_normal", "join",
    "reachable_fields", "sorted_constraints", "step", "subst_constraint", "subst_term",
    "term_variables",
]
