"""Concrete syntax for FJ programs.

The surface language is Java-like: ``new[l] C()``, ``let x = e1 in e2``,
``if (a == b) {e1} else {e2}``, ``x.f``, ``x.f := y``, ``x.m(y1, ...)``,
``(C) e`` and ``e1; e2``. Operands that are not variables are bound to fresh
temporaries, let-bound names are made unique per method, and receiver
classes are filled in from declared classes. See ``docs/grammar.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from .syntax import (
    NULLTYPE,
    OBJECT,
    THIS,
    Call,
    Cast,
    ClassDecl,
    Expr,
    GetField,
    If,
    Let,
    MethodDecl,
    New,
    Null,
    Program,
    SetField,
    VarE,
    common_superclass,
    fields_of,
    method_decl,
    subexprs,
    subtype,
)

KEYWORDS = {"class", "extends", "let", "in", "if", "else", "new", "null", "return"}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class FJSyntaxError(Exception):
    """Raised with every diagnostic found while reading a program."""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = sorted(diagnostics, key=lambda d: (d.line, d.col))
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class _Abort(Exception):
    pass


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|[{}()\[\];,.=:])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(src: str) -> List[Token]:
    out: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise FJSyntaxError([Diagnostic(line, pos - line_start + 1,
                                            f"unexpected character {src[pos]!r}")])
        kind = m.lastgroup
        text = m.group()
        if kind == "ident":
            out.append(Token("kw" if text in KEYWORDS else "ident", text, line, pos - line_start + 1))
        elif kind == "op":
            out.append(Token("op", text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ---------------------------------------------------------------------------
# Surface syntax
# ---------------------------------------------------------------------------


@dataclass
class S:
    kind: str
    pos: Tuple[int, int]
    a: object = None
    b: object = None
    c: object = None
    d: object = None


@dataclass
class _Method:
    name: str
    params: List[Tuple[str, str, Tuple[int, int]]]
    ret: str
    body: S
    pos: Tuple[int, int]


@dataclass
class _Class:
    name: str
    superclass: str
    fields: List[Tuple[str, str, Tuple[int, int]]]
    methods: List[_Method]
    pos: Tuple[int, int]
    super_pos: Tuple[int, int]


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise FJSyntaxError([Diagnostic(tok.line, tok.col, msg)])

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {got!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            got = self.tok.text or "end of input"
            self.error(f"expected {what}, found {got!r}")
        t = self.tok
        self.i += 1
        return t

    # declarations

    def program(self) -> List[_Class]:
        classes = []
        while self.tok.kind != "eof":
            classes.append(self.class_decl())
        return classes

    def class_decl(self) -> _Class:
        kw = self.expect("class")
        name = self.ident("class name")
        sup, sup_pos = OBJECT, (name.line, name.col)
        if self.at("extends"):
            self.i += 1
            t = self.ident("superclass name")
            sup, sup_pos = t.text, (t.line, t.col)
        self.expect("{")
        fields, methods = [], []
        while not self.at("}"):
            ty = self.ident("type")
            nm = self.ident("member name")
            if self.at(";"):
                self.i += 1
                fields.append((nm.text, ty.text, (nm.line, nm.col)))
            else:
                methods.append(self.method_rest(ty, nm))
        self.expect("}")
        return _Class(name.text, sup, fields, methods, (kw.line, kw.col), sup_pos)

    def method_rest(self, ty: Token, nm: Token) -> _Method:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pt = self.ident("parameter type")
                pn = self.ident("parameter name")
                params.append((pn.text, pt.text, (pn.line, pn.col)))
                if not self.at(","):
                    break
                self.i += 1
        self.expect(")")
        self.expect("{")
        body = self.expr()
        self.expect("}")
        return _Method(nm.text, params, ty.text, body, (nm.line, nm.col))

    # expressions

    def expr(self) -> S:
        nxt, eq = self.peek(1), self.peek(2)
        if (self.tok.kind == "ident" and nxt.kind == "ident"
                and eq.kind == "op" and eq.text == "="):
            cls = self.tok
            self.i += 3
            if nxt.text == THIS:
                self.error("cannot rebind 'this'", nxt)
            value = self.stmt()
            self.expect(";")
            body = self.expr()
            return S("let", (nxt.line, nxt.col), nxt.text, (cls.text, (cls.line, cls.col)),
                     value, body)
        first = self.stmt()
        if self.at(";"):
            t = self.tok
            self.i += 1
            if self.at("}") or self.at("in") or self.at(")") or self.tok.kind == "eof":
                return first
            return S("seq", (t.line, t.col), first, self.expr())
        return first

    def stmt(self) -> S:
        t = self.tok
        pos = (t.line, t.col)
        if self.at("return"):
            self.i += 1
            return self.stmt()
        if self.at("let"):
            self.i += 1
            name = self.ident("variable name")
            if name.text == THIS:
                self.error("cannot rebind 'this'", name)
            cls = None
            if self.at(":"):
                self.i += 1
                cls = self.ident("class name")
            self.expect("=")
            value = self.expr()
            self.expect("in")
            body = self.expr()
            return S("let", (name.line, name.col), name.text, cls and (cls.text, (cls.line, cls.col)),
                     value, body)
        if self.at("if"):
            self.i += 1
            self.expect("(")
            left = self.postfix()
            self.expect("==")
            right = self.postfix()
            self.expect(")")
            self.expect("{")
            then = self.expr()
            self.expect("}")
            self.expect("else")
            self.expect("{")
            orelse = self.expr()
            self.expect("}")
            return S("if", pos, left, right, then, orelse)
        target = self.postfix()
        if self.at(":="):
            op = self.tok
            if target.kind != "get":
                self.error("left side of ':=' must be a field access", op)
            self.i += 1
            value = self.stmt()
            return S("set", target.pos, target.a, target.b, value)
        return target

    def postfix(self) -> S:
        e = self.primary()
        while self.at("."):
            self.i += 1
            name = self.ident("field or method name")
            pos = (name.line, name.col)
            if self.at("("):
                self.i += 1
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.stmt())
                        if not self.at(","):
                            break
                        self.i += 1
                self.expect(")")
                e = S("call", pos, e, name.text, args)
            else:
                e = S("get", pos, e, name.text)
        return e

    def primary(self) -> S:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "ident":
            self.i += 1
            return S("var", pos, t.text)
        if self.at("null"):
            self.i += 1
            return S("null", pos)
        if self.at("new"):
            self.i += 1
            self.expect("[")
            label = self.ident("label")
            self.expect("]")
            cls = self.ident("class name")
            self.expect("(")
            self.expect(")")
            return S("new", pos, label.text, cls.text, (label.line, label.col))
        if self.at("("):
            nxt, after = self.peek(1), self.peek(2)
            if (nxt.kind == "ident" and after.kind == "op" and after.text == ")"
                    and self._starts_primary(self.peek(3))):
                self.i += 3
                return S("cast", pos, nxt.text, self.postfix())
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        got = t.text or "end of input"
        self.error(f"expected an expression, found {got!r}")

    @staticmethod
    def _starts_primary(t: Token) -> bool:
        return t.kind == "ident" or (t.kind in ("kw", "op") and t.text in ("null", "new", "("))


# ---------------------------------------------------------------------------
# Elaboration to core expressions
# ---------------------------------------------------------------------------


def _surface_names(e: S, out: Set[str]) -> None:
    if e.kind in ("var",):
        out.add(e.a)
    if e.kind == "let":
        out.add(e.a)
    for child in (e.a, e.b, e.c, e.d):
        if isinstance(child, S):
            _surface_names(child, out)
        elif isinstance(child, list):
            for x in child:
                if isinstance(x, S):
                    _surface_names(x, out)


class _Elaborator:
    def __init__(self, prog: Program, diags: List[Diagnostic], labels: Dict[str, Tuple[int, int]]):
        self.prog = prog
        self.diags = diags
        self.labels = labels

    def err(self, pos, msg):
        self.diags.append(Diagnostic(pos[0], pos[1], msg))
        raise _Abort()

    def method(self, cls: str, m: _Method, param_names: List[str]) -> Expr:
        reserved: Set[str] = {THIS, *param_names}
        _surface_names(m.body, reserved)
        self.used: Set[str] = {THIS, *param_names}
        self.reserved = reserved
        self.counter = 0
        scope = {THIS: (THIS, cls)}
        for (x, c, _), x2 in zip(m.params, param_names):
            scope[x] = (x2, c)
        e, _ = self.elab(m.body, scope)
        return e

    def fresh_temp(self) -> str:
        while True:
            self.counter += 1
            name = f"_t{self.counter}"
            if name not in self.reserved and name not in self.used:
                self.used.add(name)
                return name

    def binder(self, name: str) -> str:
        if name not in self.used:
            self.used.add(name)
            return name
        k = 1
        while f"{name}_{k}" in self.used or f"{name}_{k}" in self.reserved:
            k += 1
        out = f"{name}_{k}"
        self.used.add(out)
        return out

    def check_class(self, c: str, pos) -> None:
        if c != NULLTYPE and c not in self.prog.classes:
            self.err(pos, f"unknown class {c!r}")

    def implicit_this(self, e: S, scope) -> S:
        # a bare field name reads as this.f, as in Java
        if e.kind == "var" and e.a not in scope:
            if e.a in fields_of(self.prog, scope[THIS][1]):
                return S("get", e.pos, S("var", e.pos, THIS), e.a)
            self.err(e.pos, f"unknown variable {e.a!r}")
        return e

    def atomize(self, e: S, scope, binds: list) -> Tuple[str, str]:
        e = self.implicit_this(e, scope)
        if e.kind == "var":
            return scope[e.a]
        core, c = self.elab(e, scope)
        t = self.fresh_temp()
        binds.append((t, c, core))
        return t, c

    @staticmethod
    def wrap(binds: list, e: Expr) -> Expr:
        for t, c, core in reversed(binds):
            e = Let(t, c, core, e)
        return e

    def elab(self, e: S, scope) -> Tuple[Expr, str]:
        e = self.implicit_this(e, scope)
        k = e.kind
        if k == "var":
            name, c = scope[e.a]
            return VarE(name), c
        if k == "null":
            return Null(), NULLTYPE
        if k == "new":
            label, c, lpos = e.a, e.b, e.c
            if c == NULLTYPE:
                self.err(e.pos, "NullType not instantiable")
            self.check_class(c, e.pos)
            if label in self.labels:
                first = self.labels[label]
                self.err(lpos, f"duplicate label {label!r} (first used at {first[0]}:{first[1]})")
            self.labels[label] = lpos
            return New(label, c), c
        if k == "cast":
            if e.a == NULLTYPE:
                self.err(e.pos, "cannot cast to NullType")
            self.check_class(e.a, e.pos)
            inner, _ = self.elab(e.b, scope)
            return Cast(e.a, inner), e.a
        if k == "seq":
            first, c1 = self.elab(e.a, scope)
            rest, c2 = self.elab(e.b, scope)
            return Let(self.fresh_temp(), c1, first, rest), c2
        if k == "let":
            value, vc = self.elab(e.c, scope)
            if e.b is not None:
                ann, apos = e.b
                self.check_class(ann, apos)
                if not subtype(self.prog, vc, ann):
                    self.err(apos, f"let-bound value of class {vc!r} is not a {ann!r}")
                vc = ann
            name = self.binder(e.a)
            inner = dict(scope)
            inner[e.a] = (name, vc)
            body, bc = self.elab(e.d, inner)
            return Let(name, vc, value, body), bc
        if k == "if":
            binds: list = []
            left, lc = self.atomize(e.a, scope, binds)
            right, rc = self.atomize(e.b, scope, binds)
            then, tc = self.elab(e.c, scope)
            orelse, oc = self.elab(e.d, scope)
            return self.wrap(binds, If(left, right, then, orelse)), common_superclass(self.prog, tc, oc)
        if k == "get":
            binds = []
            recv, c = self.atomize(e.a, scope, binds)
            fs = fields_of(self.prog, c)
            if e.b not in fs:
                self.err(e.pos, f"class {c!r} has no field {e.b!r}")
            return self.wrap(binds, GetField(recv, c, e.b)), fs[e.b]
        if k == "set":
            binds = []
            recv, c = self.atomize(e.a, scope, binds)
            fs = fields_of(self.prog, c)
            if e.b not in fs:
                self.err(e.pos, f"class {c!r} has no field {e.b!r}")
            value, vc = self.atomize(e.c, scope, binds)
            return self.wrap(binds, SetField(recv, c, e.b, value)), vc
        if k == "call":
            binds = []
            recv, c = self.atomize(e.a, scope, binds)
            try:
                _, decl = method_decl(self.prog, c, e.b)
            except KeyError:
                self.err(e.pos, f"class {c!r} has no method {e.b!r}")
            if len(decl.params) != len(e.c):
                self.err(e.pos, f"method {e.b!r} expects {len(decl.params)} argument(s), "
                                f"got {len(e.c)}")
            args = tuple(self.atomize(a, scope, binds)[0] for a in e.c)
            return self.wrap(binds, Call(recv, c, e.b, args)), decl.ret
        raise AssertionError(k)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def parse_program(source: str) -> Program:
    """Parse and check ``source``; raises :class:`FJSyntaxError` on any problem."""
    classes = _Parser(tokenize(source)).program()
    diags: List[Diagnostic] = []

    def diag(pos, msg):
        diags.append(Diagnostic(pos[0], pos[1], msg))

    by_name: Dict[str, _Class] = {}
    for c in classes:
        if c.name in (OBJECT, NULLTYPE):
            diag(c.pos, f"cannot redeclare built-in class {c.name!r}")
        elif c.name in by_name:
            diag(c.pos, f"duplicate class {c.name!r}")
        else:
            by_name[c.name] = c
    for c in by_name.values():
        if c.superclass == NULLTYPE:
            diag(c.super_pos, "cannot extend NullType")
            c.superclass = OBJECT
        elif c.superclass != OBJECT and c.superclass not in by_name:
            diag(c.super_pos, f"unknown class {c.superclass!r}")
            c.superclass = OBJECT
    for c in by_name.values():
        seen, cur = set(), c.name
        while cur != OBJECT:
            if cur in seen:
                diag(c.pos, f"cyclic inheritance involving {c.name!r}")
                c.superclass = OBJECT
                break
            seen.add(cur)
            cur = by_name[cur].superclass
    if diags:
        raise FJSyntaxError(diags)

    decls: Dict[str, ClassDecl] = {OBJECT: ClassDecl(OBJECT, None)}
    for c in by_name.values():
        decls[c.name] = ClassDecl(c.name, c.superclass, {}, {})
    skeleton = Program(decls)

    def check_class(name, pos) -> bool:
        if name != NULLTYPE and name not in decls:
            diag(pos, f"unknown class {name!r}")
            return False
        return True

    # fields and method signatures first, so bodies can refer to any class
    for c in by_name.values():
        for f, fc, pos in c.fields:
            check_class(fc, pos)
            if f in decls[c.name].fields:
                diag(pos, f"duplicate field {f!r} in class {c.name!r}")
            else:
                decls[c.name].fields[f] = fc
    for c in by_name.values():
        inherited = fields_of(skeleton, c.superclass)
        for f, _, pos in c.fields:
            if f in inherited and f in decls[c.name].fields:
                diag(pos, f"field {f!r} shadows an inherited field")

    sigs: Dict[Tuple[str, str], List[str]] = {}
    for c in by_name.values():
        for m in c.methods:
            check_class(m.ret, m.pos)
            if m.name in decls[c.name].methods:
                diag(m.pos, f"duplicate method {m.name!r} in class {c.name!r}")
                continue
            names: List[str] = []
            for x, pc, ppos in m.params:
                check_class(pc, ppos)
                if x == THIS:
                    diag(ppos, "parameter may not be named 'this'")
                elif x in names:
                    diag(ppos, f"duplicate parameter {x!r}")
                names.append(x)
            sigs[(c.name, m.name)] = names
            decls[c.name].methods[m.name] = MethodDecl(
                m.name, tuple((x, pc) for x, pc, _ in m.params), m.ret, Null())
    for c in by_name.values():
        for m in c.methods:
            if c.superclass == OBJECT:
                continue
            try:
                _, sup = method_decl(skeleton, c.superclass, m.name)
            except KeyError:
                continue
            if len(sup.params) != len(m.params):
                diag(m.pos, f"override of {m.name!r} changes the number of parameters")
    if diags:
        raise FJSyntaxError(diags)

    labels: Dict[str, Tuple[int, int]] = {}
    label_class: Dict[str, str] = {}
    elab = _Elaborator(skeleton, diags, labels)
    for c in by_name.values():
        for m in c.methods:
            try:
                body = elab.method(c.name, m, sigs[(c.name, m.name)])
            except _Abort:
                continue
            old = decls[c.name].methods[m.name]
            decls[c.name].methods[m.name] = MethodDecl(old.name, old.params, old.ret, body)
    if diags:
        raise FJSyntaxError(diags)
    for c in decls.values():
        for m in c.methods.values():
            _collect_labels(m.body, label_class)
    return Program(decls, label_class)


def _collect_labels(e: Expr, out: Dict[str, str]) -> None:
    for s in subexprs(e):
        if isinstance(s, New):
            out[s.label] = s.cls
