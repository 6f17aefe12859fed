"""Region inference: method summaries first, then the class table.

The pipeline has two fixed points. :func:`compute_method_table` builds one
summary ``(σ, u)`` per method by abstract interpretation of its body, where a
call site reuses the callee's summary instead of re-reading the callee.
:func:`compute_class_table` then instantiates each summary in every calling
context ``(C, r, m, s̄)`` to obtain field and method region typings.

Two details keep the summaries sound in the presence of the call rule,
which composes the callee's transformation with the argument binding and
therefore also writes to the callee's frame variables (``this`` and the
parameters). Those writes are harmless for the callee but would clobber the
caller's own frame, so

* inside a method body, frame variables are never substituted when let
  bindings are composed (they are passed as ``opaque`` to :func:`compose`);
* when a summary is instantiated, the result term is read against the
  original variable typing and the updated field typing.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .graphs import BOTTOM, Atom, FieldGraph, Term, Var, term
from .regions import NULL, Region, RegionUniverse, region_universe
from .syntax import (
    Call,
    Cast,
    Expr,
    GetField,
    If,
    Let,
    MethodDecl,
    New,
    Null,
    Program,
    SetField,
    THIS,
    VarE,
    bound_vars,
    fields_of,
    method_decl,
    methods_of,
    rename,
    subexprs,
    subtype,
)
from .transform import (
    AbstractTransformation,
    Environment,
    IDENTITY,
    apply_counted,
    compose,
    instantiate_term,
    join,
    subst_term,
)

Summary = Tuple[AbstractTransformation, Term]
MethodKey = Tuple[str, str]  # (class, method)
EMPTY_SUMMARY: Summary = (IDENTITY, BOTTOM)

DEFAULT_MAX_ITER = 10_000
DEFAULT_MAX_CONTEXTS = 100_000


class SummaryError(LookupError):
    """A call site refers to a method with no summary entry."""


class CapExceeded(RuntimeError):
    """An iteration or context cap was hit before reaching a fixed point."""


# ---------------------------------------------------------------------------
# Canonical method bodies
# ---------------------------------------------------------------------------

_CANON = re.compile(r"p\d+$")


@dataclass(frozen=True)
class CanonicalMethod:
    owner: str
    name: str
    params: Tuple[str, ...]
    body: Expr

    @property
    def frame(self) -> FrozenSet[str]:
        return frozenset((THIS,) + self.params)


def canonicalize(decl: MethodDecl, owner: str) -> CanonicalMethod:
    """Rename parameters positionally to ``p1 … pn``.

    Let-bound names that already look canonical are moved out of the way
    first so the renaming cannot capture them.
    """
    params = tuple(f"p{i + 1}" for i in range(len(decl.params)))
    taken = set(bound_vars(decl.body)) | set(decl.param_names) | set(params)
    mapping: Dict[str, str] = {}
    for x in bound_vars(decl.body):
        if _CANON.match(x):
            k = 1
            while f"{x}_{k}" in taken:
                k += 1
            mapping[x] = f"{x}_{k}"
            taken.add(mapping[x])
    mapping.update(zip(decl.param_names, params))
    return CanonicalMethod(owner, decl.name, params, rename(decl.body, mapping))


def canonical_method(p: Program, c: str, m: str) -> CanonicalMethod:
    owner, decl = method_decl(p, c, m)
    return canonicalize(decl, owner)


def method_entries(p: Program) -> List[MethodKey]:
    """Every (C, m) with m available in C, inherited methods included."""
    return [(c, m) for c in p.user_classes for m in methods_of(p, c)]


def declarations(p: Program) -> List[MethodKey]:
    """Every (owner, m) pair with a method body, in declaration order."""
    return [(c, m) for c in p.user_classes for m in p.classes[c].methods]


# ---------------------------------------------------------------------------
# Expression summaries
# ---------------------------------------------------------------------------


def pair_compose(s: Summary, theta: AbstractTransformation,
                 opaque: FrozenSet[str] = frozenset()) -> Summary:
    return compose(s[0], theta, opaque), subst_term(s[1], theta, opaque)


def pair_join(s: Summary, t: Summary) -> Summary:
    return join(s[0], t[0]), s[1] | t[1]


def summarize_expr(e: Expr, table: Mapping[MethodKey, Summary],
                   params: Optional[Mapping[MethodKey, Tuple[str, ...]]] = None,
                   opaque: FrozenSet[str] = frozenset(),
                   on_call=None) -> Summary:
    """The pair ``⟦e⟧`` under the summary table ``table``.

    ``params`` gives the callee parameter names used in the call clause (the
    canonical ``p1 … pn`` when omitted). ``on_call`` is invoked with each
    ``(C, m)`` looked up, which the driver uses for dependency tracking.
    """

    def go(e: Expr) -> Summary:
        if isinstance(e, VarE):
            return IDENTITY, term(Var(e.name))
        if isinstance(e, Null):
            return IDENTITY, term(NULL)
        if isinstance(e, New):
            return IDENTITY, term(Region(e.label))
        if isinstance(e, Cast):
            return go(e.expr)
        if isinstance(e, GetField):
            return IDENTITY, term(Atom(Var(e.recv), FieldGraph.single(e.field)))
        if isinstance(e, SetField):
            key = Atom(Var(e.recv), FieldGraph.single(e.field))
            return AbstractTransformation({}, {key: term(Var(e.value))}), term(Var(e.value))
        if isinstance(e, If):
            return pair_join(go(e.then), go(e.orelse))
        if isinstance(e, Let):
            theta, t = go(e.value)
            bind = compose(AbstractTransformation({e.var: t}), theta, opaque)
            return pair_compose(go(e.body), bind, opaque)
        if isinstance(e, Call):
            key = (e.cls, e.method)
            if on_call is not None:
                on_call(key)
            if key not in table:
                raise SummaryError(f"no summary for {e.cls}.{e.method}")
            names = params[key] if params is not None and key in params else \
                tuple(f"p{i + 1}" for i in range(len(e.args)))
            binding = {THIS: term(Var(e.recv))}
            binding.update({x: term(Var(y)) for x, y in zip(names, e.args)})
            return pair_compose(table[key], AbstractTransformation(binding))
        raise TypeError(f"not an expression: {e!r}")

    return go(e)


def restrict(s: Summary, keep: Iterable[str]) -> Summary:
    """Drop assignments to variables outside ``keep`` (local temporaries)."""
    keep = frozenset(keep)
    sigma = AbstractTransformation({x: u for x, u in s[0].assigns.items() if x in keep},
                                   s[0].constraints)
    return sigma, s[1]


def summarize_method(cm: CanonicalMethod, table: Mapping[MethodKey, Summary],
                     on_call=None) -> Summary:
    raw = summarize_expr(cm.body, table, opaque=cm.frame, on_call=on_call)
    return restrict(raw, cm.frame)


# ---------------------------------------------------------------------------
# Abstract method table
# ---------------------------------------------------------------------------


@dataclass
class MethodStats:
    visits: int = 0
    productive: int = 0
    contexts: int = 0
    call_sites: int = 0


@dataclass
class SummaryTable:
    """Summaries per (C, m) plus the per-declaration bookkeeping behind them."""

    entries: Dict[MethodKey, Summary]
    params: Dict[MethodKey, Tuple[str, ...]]
    decl_of: Dict[MethodKey, MethodKey]
    stats: Dict[MethodKey, MethodStats] = field(default_factory=dict)
    rounds: int = 0
    round_bound: int = 0

    def __getitem__(self, key: MethodKey) -> Summary:
        return self.entries[key]

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _decls_below(p: Program, entries: List[MethodKey]) -> Dict[MethodKey, FrozenSet[MethodKey]]:
    """For each (C, m), the bodies that the subclass closure joins into it."""
    out = {}
    for c, m in entries:
        ds = set()
        for d in p.user_classes:
            if subtype(p, d, c):
                ds.add((method_decl(p, d, m)[0], m))
        out[(c, m)] = frozenset(ds)
    return out


def _sccs(nodes: List[MethodKey], succ: Mapping[MethodKey, Set[MethodKey]]) -> List[List[MethodKey]]:
    """Strongly connected components, callees before callers."""
    index: Dict[MethodKey, int] = {}
    low: Dict[MethodKey, int] = {}
    stack: List[MethodKey] = []
    on: Set[MethodKey] = set()
    out: List[List[MethodKey]] = []
    counter = itertools.count()

    def visit(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on.add(v)
        for w in sorted(succ.get(v, ())):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(sorted(comp))

    for v in nodes:
        if v not in index:
            visit(v)
    return out


def _field_names(p: Program) -> Set[str]:
    return {f for c in p.user_classes for f in p.classes[c].fields}


def graph_count(nfields: int) -> int:
    """How many field graphs exist over ``nfields`` names, ε included."""
    return 1 + nfields * nfields * 2 ** (nfields * nfields)


def summary_height(cm: CanonicalMethod, nfields: int, nregions: int) -> int:
    """Length bound for strictly increasing chains of summaries of ``cm``."""
    variables = len(cm.frame)
    atoms = (variables + nregions) * graph_count(nfields)
    keys = variables + atoms
    return keys * atoms + atoms


def compute_method_table(p: Program, max_iter: int = DEFAULT_MAX_ITER) -> SummaryTable:
    """Least summaries for every method, solved one call-graph component at a time."""
    entries = method_entries(p)
    decls = declarations(p)
    canon = {d: canonicalize(p.classes[d[0]].methods[d[1]], d[0]) for d in decls}
    below = _decls_below(p, entries)
    params = {k: canonical_method(p, *k).params for k in entries}
    decl_of = {k: (method_decl(p, *k)[0], k[1]) for k in entries}

    callees: Dict[MethodKey, Set[MethodKey]] = {}
    sites: Dict[MethodKey, int] = {d: 0 for d in decls}
    for d, cm in canon.items():
        called = set()
        for sub in _walk_calls(cm.body):
            called |= below.get((sub.cls, sub.method), frozenset())
            for callee in below.get((sub.cls, sub.method), frozenset()):
                sites[callee] += 1
        callees[d] = called

    body_summary: Dict[MethodKey, Summary] = {d: EMPTY_SUMMARY for d in decls}
    stats = {d: MethodStats(call_sites=sites[d]) for d in decls}

    def entry(k: MethodKey) -> Summary:
        acc = EMPTY_SUMMARY
        for d in sorted(below[k]):
            acc = pair_join(acc, body_summary[d])
        return acc

    nfields = len(_field_names(p))
    nregions = 1 + len(p.label_class)
    bound = 0
    rounds = 0
    for comp in _sccs(decls, callees):
        recursive = len(comp) > 1 or comp[0] in callees[comp[0]]
        bound += sum(summary_height(canon[d], nfields, nregions) for d in comp) + 1
        while True:
            rounds += 1
            if rounds > max_iter:
                raise CapExceeded(f"method table did not stabilize within {max_iter} rounds")
            table = {k: entry(k) for k in entries}
            changed = False
            for d in comp:
                stats[d].visits += 1
                new = pair_join(body_summary[d], summarize_method(canon[d], table))
                if new != body_summary[d]:
                    body_summary[d] = new
                    stats[d].productive += 1
                    changed = True
            if not changed or not recursive:
                break

    return SummaryTable({k: entry(k) for k in entries}, params, decl_of, stats, rounds, bound)


def _walk_calls(e: Expr) -> Iterable[Call]:
    return (s for s in subexprs(e) if isinstance(s, Call))


# ---------------------------------------------------------------------------
# Class table
# ---------------------------------------------------------------------------

FKey = Tuple[str, Region, str]
MKey = Tuple[str, Region, str, Tuple[Region, ...]]


@dataclass
class ClassTable:
    F: Dict[FKey, FrozenSet[Region]]
    M: Dict[MKey, FrozenSet[Region]]
    universe: RegionUniverse
    rounds: int = 0
    round_bound: int = 0

    def field_type(self, c: str, r: Region, f: str) -> FrozenSet[Region]:
        return self.F.get((c, r, f), frozenset())

    def method_type(self, c: str, r: Region, m: str, args: Tuple[Region, ...]) -> Optional[FrozenSet[Region]]:
        return self.M.get((c, r, m, tuple(args)))


def contexts(p: Program, universe: RegionUniverse, max_contexts: int = DEFAULT_MAX_CONTEXTS) -> List[MKey]:
    """Every (C, r, m, s̄) over the region universe; raises past the cap."""
    regions = universe.regions
    total = 0
    for c, m in method_entries(p):
        total += len(regions) ** (1 + len(method_decl(p, c, m)[1].params))
    if total > max_contexts:
        raise CapExceeded(f"{total} calling contexts exceed the cap of {max_contexts}")
    out = []
    for c, m in method_entries(p):
        n = len(method_decl(p, c, m)[1].params)
        for r in regions:
            for args in itertools.product(regions, repeat=n):
                out.append((c, r, m, args))
    return out


def _label_class(universe: RegionUniverse, r: Region) -> Optional[str]:
    cs = universe.cls_of(r)
    return next(iter(cs)) if cs else None


def _env_fields(universe: RegionUniverse, F: Mapping[FKey, FrozenSet[Region]]) -> Dict[Tuple[Region, str], FrozenSet[Region]]:
    out = {}
    for r in universe.regions:
        c = _label_class(universe, r)
        for f in universe.fld_of(r):
            v = F.get((c, r, f), frozenset())
            if v:
                out[(r, f)] = v
    return out


def _close_fields(p: Program, F: Dict[FKey, FrozenSet[Region]], universe: RegionUniverse) -> None:
    """Join F(C,r,f) and F(D,r,f) for every subclass pair until stable."""
    pairs = [(d, c) for d, c in p.subclass_pairs()]
    changed = True
    while changed:
        changed = False
        for d, c in pairs:
            for f in fields_of(p, c):
                for r in universe.regions:
                    a, b = F.get((c, r, f), frozenset()), F.get((d, r, f), frozenset())
                    if a != b:
                        F[(c, r, f)] = F[(d, r, f)] = a | b
                        changed = True


def compute_class_table(p: Program, T: SummaryTable, max_iter: int = DEFAULT_MAX_ITER,
                        max_contexts: int = DEFAULT_MAX_CONTEXTS) -> ClassTable:
    universe = region_universe(p)
    ctxs = contexts(p, universe, max_contexts)
    fld = universe.fld_of

    F: Dict[FKey, FrozenSet[Region]] = {}
    for c in p.user_classes:
        for f in fields_of(p, c):
            for r in universe.regions:
                F[(c, r, f)] = frozenset()
    # objects start with every field null
    for r in universe.regions:
        c = _label_class(universe, r)
        for f in universe.fld_of(r):
            F[(c, r, f)] = frozenset({NULL})
    _close_fields(p, F, universe)
    M: Dict[MKey, FrozenSet[Region]] = {k: frozenset() for k in ctxs}

    for d, st in T.stats.items():
        st.contexts = 0
    for c, r, m, args in ctxs:
        T.stats[T.decl_of[(c, m)]].contexts += 1

    nreg = len(universe.regions)
    bound = (len(F) + len(M)) * nreg + 1
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_iter:
            raise CapExceeded(f"class table did not stabilize within {max_iter} rounds")
        before_F, before_M = dict(F), dict(M)
        for c, r, m, args in ctxs:
            sigma, u = T[(c, m)]
            gamma = {THIS: frozenset({r})}
            gamma.update({x: frozenset({s}) for x, s in zip(T.params[(c, m)], args)})
            env, _ = apply_counted(sigma, Environment(gamma, _env_fields(universe, F)), fld)
            for (rr, f), v in env.fields.items():
                key = (_label_class(universe, rr), rr, f)
                F[key] = F.get(key, frozenset()) | v
            ret = instantiate_term(u, Environment(gamma, env.fields), fld)
            M[(c, r, m, args)] = M[(c, r, m, args)] | ret
        _close_fields(p, F, universe)
        if F == before_F and M == before_M:
            break
    return ClassTable(F, M, universe, rounds, bound)


def infer(p: Program, max_iter: int = DEFAULT_MAX_ITER,
          max_contexts: int = DEFAULT_MAX_CONTEXTS) -> Tuple[SummaryTable, ClassTable]:
    T = compute_method_table(p, max_iter)
    return T, compute_class_table(p, T, max_iter, max_contexts)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def analysis_stats(p: Program, max_iter: int = DEFAULT_MAX_ITER,
                   max_contexts: int = DEFAULT_MAX_CONTEXTS) -> dict:
    T, ct = infer(p, max_iter, max_contexts)
    return stats_of(T, ct)


def stats_of(T: SummaryTable, ct: ClassTable) -> dict:
    methods = []
    for (c, m), st in sorted(T.stats.items()):
        methods.append({
            "class": c,
            "method": m,
            "bodyVisits": st.visits,
            "productiveIterations": st.productive,
            "contexts": st.contexts,
            "callSites": st.call_sites,
        })
    return {
        "methods": methods,
        "methodTableRounds": T.rounds,
        "methodTableBound": T.round_bound,
        "classTableRounds": ct.rounds,
        "classTableBound": ct.round_bound,
        "contexts": len(ct.M),
    }
