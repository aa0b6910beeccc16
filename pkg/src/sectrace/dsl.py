"""A small language for 1- and 2-morphism expressions in the 2-vector-space backend.

Syntax (``--`` starts a comment; a statement ends at a newline outside brackets)::

    object A            object I = 1
    onemor Phi : A -> A = [[1, 0], [2, 1]]
    twomor alpha : Phi . Psi => Psi . Phi
    def Tr = ev(A) . (Phi (x) id(Aop)) . coev(A)
    Tr

1-expressions: ``id(X)``, ``ev(X)``, ``coev(X)``, ``serre_r(X)``, ``serre_l(X)``,
``swap(X, Y)``, ``radj(e)``, ``ladj(e)``, names; ``.`` composes right to left,
``(x)`` tensors.  Object references are names or tensors of names; a name
``Xop`` not declared itself refers to the dual of ``X``.

2-expressions add ``id2(e)``, ``unit_r(e)``, ``counit_r(e)``, ``unit_l(e)``,
``counit_l(e)``, ``cyclic(e1, e2)`` and declared 2-morphism names.  ``.`` is
horizontal composition (1-expressions inside it act as identities), ``(x)``
tensors, and ``x ; y`` is vertical composition, first ``x`` then ``y``.

Precedence from loosest: ``;``, ``.``, ``(x)``.

A 1-expression denotes a flat chain of atomic 1-morphisms, so composition is
strictly associative; tensors and adjoints of composites are atoms.  A
2-expression denotes a 2-morphism between the right-nested composites of its
boundary chains.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Union

from .kv2vect import (
    KVObject,
    KVOneMor,
    KVTwoMor,
    chain_labels,
    coev,
    compose1,
    compose_chain,
    compose_labels,
    ev,
    identity1,
    identity2,
    invert_permutation2,
    left_adjoint,
    op,
    right_adjoint,
    serre,
    tensor,
    tensor_all,
    transpose1,
    vcompose2,
)
from .linalg import QQ, Field
from . import loops


class DSLSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


class DSLTypeError(TypeError):
    def __init__(self, msg: str, loc: tuple | None = None):
        where = f"{loc[0]}:{loc[1]}: " if loc else ""
        super().__init__(where + msg)
        self.loc = loc


# --- syntax trees ----------------------------------------------------------------------------

_loc = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ObjName:
    name: str
    loc: tuple | None = _loc


@dataclass(frozen=True)
class ObjTensor:
    items: tuple
    loc: tuple | None = _loc


ObjRef = Union[ObjName, ObjTensor]


@dataclass(frozen=True)
class Id:
    obj: ObjRef
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Ev:
    obj: ObjRef
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Coev:
    obj: ObjRef
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Serre:
    obj: ObjRef
    side: str  # "r" or "l"
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Swap:
    left: ObjRef
    right: ObjRef
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Gen:
    """A declared 1- or 2-morphism, or a ``def`` name."""

    name: str
    loc: tuple | None = _loc


@dataclass(frozen=True)
class RAdj:
    expr: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class LAdj:
    expr: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Compose:
    """``.``; horizontal composition when any item is a 2-expression."""

    items: tuple
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Tensor:
    items: tuple
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Id2:
    expr: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Unit:
    expr: object
    side: str
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Counit:
    expr: object
    side: str
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Cyclic:
    left: object
    right: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class VComp:
    items: tuple
    loc: tuple | None = _loc


HComp = Compose
Gen1 = Gen2 = Gen


# statements


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    rank: int | None = None
    loc: tuple | None = _loc


@dataclass(frozen=True)
class OneMorDecl:
    name: str
    source: ObjRef
    target: ObjRef
    dims: tuple | None = None
    loc: tuple | None = _loc


@dataclass(frozen=True)
class TwoMorDecl:
    name: str
    source: object
    target: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Def:
    name: str
    expr: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class ExprStmt:
    expr: object
    loc: tuple | None = _loc


@dataclass(frozen=True)
class Program:
    statements: tuple

    @property
    def expressions(self) -> list:
        return [s.expr for s in self.statements if isinstance(s, ExprStmt)]


# --- tokenizer -------------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>--[^\n]*)
  | (?P<nl>\n)
  | (?P<tensor>\(x\))
  | (?P<arrow>->)
  | (?P<darrow>=>)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9']*)
  | (?P<sym>[().,;:=\[\]-])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos, line, col = 0, 1, 1
    depth = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            if depth == 0:
                toks.append(Tok("nl", s, line, col))
            line, col = line + 1, 1
        elif kind not in ("ws", "comment"):
            if kind == "sym":
                kind = s
                if s in "([":
                    depth += 1
                elif s in ")]":
                    depth = max(0, depth - 1)
            toks.append(Tok(kind, s, line, col))
            col += len(s)
        else:
            col += len(s)
        pos = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


KEYWORDS_1 = {"id", "ev", "coev", "serre_r", "serre_l", "radj", "ladj", "swap"}
KEYWORDS_2 = {"id2", "unit_r", "counit_r", "unit_l", "counit_l", "cyclic"}
DECLS = {"object", "onemor", "twomor", "def"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise DSLSyntaxError(msg, tok.line, tok.col)

    def eat(self, kind: str, text: str | None = None) -> Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            self.error(f"expected {want!r}, found {t.text or t.kind!r}")
        self.i += 1
        return t

    def at(self, kind, text=None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    # objects
    def objref(self):
        items = [self.objatom()]
        while self.at("tensor"):
            self.eat("tensor")
            items.append(self.objatom())
        if len(items) == 1:
            return items[0]
        return ObjTensor(tuple(items), items[0].loc)

    def objatom(self):
        t = self.tok
        if self.at("("):
            self.eat("(")
            r = self.objref()
            self.eat(")")
            return r
        if t.kind == "int" and t.text == "1":
            self.eat("int")
            return ObjName("1", (t.line, t.col))
        name = self.eat("name")
        return ObjName(name.text, (name.line, name.col))

    # expressions
    def expr(self):
        t = self.tok
        items = [self.hexpr()]
        while self.at(";"):
            self.eat(";")
            items.append(self.hexpr())
        return items[0] if len(items) == 1 else VComp(tuple(items), (t.line, t.col))

    def hexpr(self):
        t = self.tok
        items = [self.texpr()]
        while self.at("."):
            self.eat(".")
            items.append(self.texpr())
        return items[0] if len(items) == 1 else Compose(tuple(items), (t.line, t.col))

    def texpr(self):
        t = self.tok
        items = [self.atom()]
        while self.at("tensor"):
            self.eat("tensor")
            items.append(self.atom())
        return items[0] if len(items) == 1 else Tensor(tuple(items), (t.line, t.col))

    def atom(self):
        t = self.tok
        loc = (t.line, t.col)
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        if t.kind != "name":
            self.error(f"expected an expression, found {t.text or t.kind!r}")
        self.eat("name")
        kw = t.text
        if kw in KEYWORDS_1 | KEYWORDS_2 and self.at("("):
            self.eat("(")
            if kw in ("id", "ev", "coev", "serre_r", "serre_l"):
                o = self.objref()
                self.eat(")")
                return {"id": Id, "ev": Ev, "coev": Coev}[kw](o, loc) if kw in ("id", "ev", "coev") else Serre(o, kw[-1], loc)
            if kw == "swap":
                x = self.objref()
                self.eat(",")
                y = self.objref()
                self.eat(")")
                return Swap(x, y, loc)
            if kw == "cyclic":
                x = self.expr()
                self.eat(",")
                y = self.expr()
                self.eat(")")
                return Cyclic(x, y, loc)
            e = self.expr()
            self.eat(")")
            if kw == "radj":
                return RAdj(e, loc)
            if kw == "ladj":
                return LAdj(e, loc)
            if kw == "id2":
                return Id2(e, loc)
            side = kw[-1]
            return (Unit if kw.startswith("unit") else Counit)(e, side, loc)
        if kw in KEYWORDS_1 | KEYWORDS_2:
            self.error(f"{kw} needs an argument list", t)
        return Gen(kw, loc)

    # statements
    def program(self):
        stmts = []
        while True:
            while self.at("nl"):
                self.eat("nl")
            if self.at("eof"):
                break
            stmts.append(self.statement())
            if not (self.at("nl") or self.at("eof")):
                self.error(f"unexpected {self.tok.text!r} after statement")
        return Program(tuple(stmts))

    def statement(self):
        t = self.tok
        loc = (t.line, t.col)
        if t.kind == "name" and t.text in DECLS and self.toks[self.i + 1].kind == "name":
            self.eat("name")
            name = self.eat("name").text
            if t.text == "object":
                rank = None
                if self.at("="):
                    self.eat("=")
                    rank = int(self.eat("int").text)
                return ObjectDecl(name, rank, loc)
            if t.text == "def":
                self.eat("=")
                return Def(name, self.expr(), loc)
            self.eat(":")
            if t.text == "onemor":
                src = self.objref()
                self.eat("arrow")
                tgt = self.objref()
                dims = None
                if self.at("="):
                    self.eat("=")
                    dims = self.matrix_literal()
                return OneMorDecl(name, src, tgt, dims, loc)
            src = self.hexpr()
            self.eat("darrow")
            tgt = self.hexpr()
            return TwoMorDecl(name, src, tgt, loc)
        return ExprStmt(self.expr(), loc)

    def matrix_literal(self):
        self.eat("[")
        rows = []
        while not self.at("]"):
            self.eat("[")
            row = []
            while not self.at("]"):
                row.append(int(self.eat("int").text))
                if self.at(","):
                    self.eat(",")
            self.eat("]")
            rows.append(tuple(row))
            if self.at(","):
                self.eat(",")
        self.eat("]")
        return tuple(rows)


def parse(text: str):
    """Parse a single expression."""
    p = _Parser(text)
    while p.at("nl"):
        p.eat("nl")
    e = p.expr()
    while p.at("nl"):
        p.eat("nl")
    if not p.at("eof"):
        p.error(f"unexpected {p.tok.text!r} after expression")
    return e


def parse_program(text: str) -> Program:
    return _Parser(text).program()


# --- printing --------------------------------------------------------------------------------

_PREC = {VComp: 0, Compose: 1, Tensor: 2}


def print_obj(o) -> str:
    if isinstance(o, ObjName):
        return o.name
    return " (x) ".join(print_obj(x) if isinstance(x, ObjName) else f"({print_obj(x)})" for x in o.items)


def print_expr(e) -> str:
    if isinstance(e, (VComp, Compose, Tensor)):
        sep = {VComp: " ; ", Compose: " . ", Tensor: " (x) "}[type(e)]
        mine = _PREC[type(e)]
        parts = []
        for x in e.items:
            s = print_expr(x)
            if type(x) in _PREC and _PREC[type(x)] <= mine:
                s = f"({s})"
            parts.append(s)
        return sep.join(parts)
    if isinstance(e, Gen):
        return e.name
    if isinstance(e, Id):
        return f"id({print_obj(e.obj)})"
    if isinstance(e, Ev):
        return f"ev({print_obj(e.obj)})"
    if isinstance(e, Coev):
        return f"coev({print_obj(e.obj)})"
    if isinstance(e, Serre):
        return f"serre_{e.side}({print_obj(e.obj)})"
    if isinstance(e, Swap):
        return f"swap({print_obj(e.left)}, {print_obj(e.right)})"
    if isinstance(e, RAdj):
        return f"radj({print_expr(e.expr)})"
    if isinstance(e, LAdj):
        return f"ladj({print_expr(e.expr)})"
    if isinstance(e, Id2):
        return f"id2({print_expr(e.expr)})"
    if isinstance(e, Unit):
        return f"unit_{e.side}({print_expr(e.expr)})"
    if isinstance(e, Counit):
        return f"counit_{e.side}({print_expr(e.expr)})"
    if isinstance(e, Cyclic):
        return f"cyclic({print_expr(e.left)}, {print_expr(e.right)})"
    raise TypeError(f"not an expression node: {e!r}")


def print_statement(s) -> str:
    if isinstance(s, ObjectDecl):
        return f"object {s.name}" + (f" = {s.rank}" if s.rank is not None else "")
    if isinstance(s, OneMorDecl):
        out = f"onemor {s.name} : {print_obj(s.source)} -> {print_obj(s.target)}"
        if s.dims is not None:
            out += " = " + json.dumps([list(r) for r in s.dims])
        return out
    if isinstance(s, TwoMorDecl):
        return f"twomor {s.name} : {print_expr(s.source)} => {print_expr(s.target)}"
    if isinstance(s, Def):
        return f"def {s.name} = {print_expr(s.expr)}"
    if isinstance(s, ExprStmt):
        return print_expr(s.expr)
    raise TypeError(f"not a statement: {s!r}")


def print_program(p: Program) -> str:
    return "\n".join(print_statement(s) for s in p.statements) + "\n"


# --- environments ----------------------------------------------------------------------------


@dataclass
class Environment:
    objects: dict = field(default_factory=dict)
    onemors: dict = field(default_factory=dict)
    twomors: dict = field(default_factory=dict)  # name -> (KVTwoMor, src chain | None, tgt chain | None)
    defs: dict = field(default_factory=dict)
    field: Field = QQ

    def __post_init__(self):
        self.objects.setdefault("1", KVObject(1))

    def _check_fresh(self, name, loc=None):
        if name in self.objects or name in self.onemors or name in self.twomors or name in self.defs:
            raise DSLTypeError(f"name {name!r} is already declared", loc)

    def add_object(self, name: str, obj: KVObject):
        self._check_fresh(name)
        self.objects[name] = obj

    def add_onemor(self, name: str, f: KVOneMor):
        self._check_fresh(name)
        self.onemors[name] = f

    def add_twomor(self, name: str, t: KVTwoMor):
        self._check_fresh(name)
        self.twomors[name] = (t, None, None)

    def copy(self) -> "Environment":
        return Environment(dict(self.objects), dict(self.onemors), dict(self.twomors), dict(self.defs), self.field)

    @classmethod
    def from_json(cls, doc: dict, fld: Field = QQ) -> "Environment":
        """``{"objects": {A: rank}, "onemors": {Phi: {"source", "target", "dims"}},
        "twomors": {alpha: {"source": onemor name, "target": onemor name, "blocks": ...}}}``."""
        env = cls(field=fld)
        for name, rank in doc.get("objects", {}).items():
            env.add_object(name, KVObject(int(rank)))
        for name, spec in doc.get("onemors", {}).items():
            src = env.objects[spec["source"]] if "source" in spec else None
            dims = tuple(tuple(r) for r in spec["dims"])
            src = src or KVObject(len(dims[0]) if dims else 0)
            tgt = env.objects[spec["target"]] if "target" in spec else KVObject(len(dims))
            env.add_onemor(name, KVOneMor(src, tgt, dims))
        for name, spec in doc.get("twomors", {}).items():
            from .linalg import Matrix
            s = _resolve_onemor_spec(env, spec["source"])
            t = _resolve_onemor_spec(env, spec["target"])
            blocks = tuple(
                tuple(Matrix.from_rows([[fld(v) for v in r] for r in spec["blocks"][i][j]], fld, ncols=s.dims[i][j])
                      for j in range(s.source.rank))
                for i in range(s.target.rank)
            )
            env.add_twomor(name, KVTwoMor(s, t, blocks, fld))
        return env


def _resolve_onemor_spec(env, spec):
    if isinstance(spec, str):
        return evaluate(parse(spec), env)
    raise DSLTypeError(f"cannot read 1-morphism from {spec!r}")


# --- denotations -----------------------------------------------------------------------------


@dataclass(frozen=True)
class D1:
    chain: tuple
    source: KVObject
    target: KVObject

    def value(self) -> KVOneMor:
        return compose_chain(self.chain, self.source)


@dataclass(frozen=True)
class D2:
    src: tuple
    tgt: tuple
    source: KVObject
    target: KVObject
    theta: KVTwoMor | None = None


@dataclass(frozen=True)
class Typed:
    """Boundary annotation of a node: ``level`` 1 or 2 and its boundary data."""

    node: object
    level: int
    source: KVObject
    target: KVObject
    src_chain: tuple = ()
    tgt_chain: tuple = ()
    children: tuple = ()


def _obj(env: Environment, o) -> KVObject:
    if isinstance(o, ObjTensor):
        return tensor_all([_obj(env, x) for x in o.items])
    name = o.name
    if name in env.objects:
        return env.objects[name]
    if name.endswith("op") and name[:-2] in env.objects:
        return op(env.objects[name[:-2]])
    raise DSLTypeError(f"unknown object {name!r}", o.loc)


def _swap(x: KVObject, y: KVObject) -> KVOneMor:
    """``X (x) Y -> Y (x) X``."""
    m, n = x.rank, y.rank
    src, tgt = KVObject(m * n), KVObject(m * n)
    dims = [[0] * (m * n) for _ in range(m * n)]
    for i in range(m):
        for j in range(n):
            dims[j * m + i][i * n + j] = 1
    return KVOneMor(src, tgt, tuple(map(tuple, dims)))


def _reassoc(left: tuple, right: tuple, fld: Field) -> KVTwoMor:
    """``compose1(compose_chain(left), compose_chain(right)) => compose_chain(left + right)``."""
    L, R = compose_chain(left), compose_chain(right)
    src, tgt = compose1(L, R), compose_chain(left + right)
    cells = {}
    for i in range(src.target.rank):
        for k in range(src.source.rank):
            tpos = {lab: n for n, lab in enumerate(chain_labels(left + right, i, k))}
            cell = {}
            for pos, (j, tl, tr) in enumerate(compose_labels(L, R, i, k)):
                li, lt = chain_labels(left, i, j)[tl]
                ri, rt = chain_labels(right, j, k)[tr]
                cell[(tpos[(li + (j,) + ri, lt + rt)], pos)] = 1
            cells[(i, k)] = cell
    return KVTwoMor.from_cells(src, tgt, cells, fld)


class _Evaluator:
    def __init__(self, env: Environment, values: bool):
        self.env = env
        self.values = values
        self.fld = env.field
        self._stack: list[str] = []

    def run(self, e):
        if isinstance(e, Gen):
            return self.gen(e)
        method = getattr(self, "on_" + type(e).__name__, None)
        if method is None:
            raise DSLTypeError(f"unknown node kind {type(e).__name__}", getattr(e, "loc", None))
        return method(e)

    # 1-level atoms
    def atom(self, f: KVOneMor) -> D1:
        return D1((f,), f.source, f.target)

    def on_Id(self, e):
        a = _obj(self.env, e.obj)
        return D1((), a, a)

    def on_Serre(self, e):
        a = _obj(self.env, e.obj)
        ell, r = serre(a)
        f = ell if e.side == "l" else r
        return D1((), a, a) if f == identity1(a) else self.atom(f)

    def on_Ev(self, e):
        return self.atom(ev(_obj(self.env, e.obj)))

    def on_Coev(self, e):
        return self.atom(coev(_obj(self.env, e.obj)))

    def on_Swap(self, e):
        return self.atom(_swap(_obj(self.env, e.left), _obj(self.env, e.right)))

    def gen(self, e):
        env = self.env
        if e.name in env.defs:
            if e.name in self._stack:
                raise DSLTypeError(f"definition {e.name!r} refers to itself", e.loc)
            self._stack.append(e.name)
            try:
                return self.run(env.defs[e.name])
            finally:
                self._stack.pop()
        if e.name in env.onemors:
            return self.atom(env.onemors[e.name])
        if e.name in env.twomors:
            t, s, g = env.twomors[e.name]
            s = s if s is not None else (t.source,)
            g = g if g is not None else (t.target,)
            return D2(s, g, t.source.source, t.source.target, t if self.values else None)
        raise DSLTypeError(f"unknown name {e.name!r}", e.loc)

    def one(self, e) -> D1:
        d = self.run(e)
        if not isinstance(d, D1):
            raise DSLTypeError("expected a 1-morphism expression", getattr(e, "loc", None))
        return d

    def on_RAdj(self, e):
        d = self.one(e.expr)
        return self.atom(transpose1(d.value()))

    def on_LAdj(self, e):
        d = self.one(e.expr)
        return self.atom(transpose1(d.value()))

    # composition
    def on_Compose(self, e):
        ds = [self.run(x) for x in e.items]
        for n, (g, f) in enumerate(zip(ds, ds[1:])):
            if g.source != f.target:
                raise DSLTypeError(
                    f"cannot compose: item {n + 1} has source rank {g.source.rank}, "
                    f"item {n + 2} has target rank {f.target.rank}",
                    e.items[n + 1].loc if hasattr(e.items[n + 1], "loc") else e.loc,
                )
        if all(isinstance(d, D1) for d in ds):
            chain = tuple(a for d in ds for a in d.chain)
            return D1(chain, ds[-1].source, ds[0].target)
        src = tuple(a for d in ds for a in (d.chain if isinstance(d, D1) else d.src))
        tgt = tuple(a for d in ds for a in (d.chain if isinstance(d, D1) else d.tgt))
        theta = None
        if self.values:
            from .trace import open_composite
            steps = []
            off = 0
            for d in ds:
                if isinstance(d, D1):
                    off += len(d.chain)
                    continue
                steps.append((off, len(d.src), d.theta, d.tgt))
                off += len(d.tgt)
            _, theta = open_composite(src, steps, self.fld, ds[0].target)
        return D2(src, tgt, ds[-1].source, ds[0].target, theta)

    def on_Tensor(self, e):
        ds = [self.run(x) for x in e.items]
        if all(isinstance(d, D1) for d in ds):
            return self.atom(tensor_all([d.value() for d in ds]))
        srcs, tgts, thetas = [], [], []
        for d in ds:
            if isinstance(d, D1):
                v = d.value()
                srcs.append(v)
                tgts.append(v)
                thetas.append(identity2(v, self.fld) if self.values else None)
            else:
                srcs.append(compose_chain(d.src, d.source))
                tgts.append(compose_chain(d.tgt, d.source))
                thetas.append(d.theta)
        s, t = tensor_all(srcs), tensor_all(tgts)
        theta = tensor_all(thetas) if self.values else None
        return D2((s,), (t,), s.source, s.target, theta)

    def on_VComp(self, e):
        ds = [self.two(x) for x in e.items]
        for n, (x, y) in enumerate(zip(ds, ds[1:])):
            if x.tgt != y.src or x.source != y.source or x.target != y.target:
                raise DSLTypeError(
                    f"vertical composition: step {n + 1} ends at {_show(x.tgt, x.source)} "
                    f"but step {n + 2} starts at {_show(y.src, y.source)}",
                    e.loc,
                )
        theta = None
        if self.values:
            theta = ds[0].theta
            for d in ds[1:]:
                theta = vcompose2(d.theta, theta)
        return D2(ds[0].src, ds[-1].tgt, ds[0].source, ds[0].target, theta)

    def two(self, e) -> D2:
        d = self.run(e)
        if isinstance(d, D1):
            return D2(d.chain, d.chain, d.source, d.target, identity2(d.value(), self.fld) if self.values else None)
        return d

    # 2-level atoms
    def on_Id2(self, e):
        d = self.one(e.expr)
        return D2(d.chain, d.chain, d.source, d.target, identity2(d.value(), self.fld) if self.values else None)

    def _nonempty(self, d, e):
        if not d.chain:
            raise DSLTypeError("adjunction data of an identity: use id2", e.loc)
        return d.value()

    def on_Unit(self, e):
        d = self.one(e.expr)
        F = self._nonempty(d, e)
        if e.side == "r":  # id_A => F^r o F
            fr, eta, _ = right_adjoint(F, self.fld)
            return D2((), (fr,) + d.chain, d.source, d.source, eta if self.values else None)
        fl, eta, _ = left_adjoint(F, self.fld)  # id_B => F o F^l
        theta = vcompose2(_reassoc(d.chain, (fl,), self.fld), eta) if self.values else None
        return D2((), d.chain + (fl,), d.target, d.target, theta)

    def on_Counit(self, e):
        d = self.one(e.expr)
        F = self._nonempty(d, e)
        if e.side == "r":  # F o F^r => id_B
            fr, _, eps = right_adjoint(F, self.fld)
            theta = vcompose2(eps, invert_permutation2(_reassoc(d.chain, (fr,), self.fld))) if self.values else None
            return D2(d.chain + (fr,), (), d.target, d.target, theta)
        fl, _, eps = left_adjoint(F, self.fld)  # F^l o F => id_A
        return D2((fl,) + d.chain, (), d.source, d.source, eps if self.values else None)

    def on_Cyclic(self, e):
        x, y = self.one(e.left), self.one(e.right)
        if x.source != y.target or y.source != x.target:
            raise DSLTypeError("cyclic needs Phi: A -> B and Psi: B -> A", e.loc)
        b, a = x.target, x.source

        def trace_chain(chain, obj):
            return (ev(obj), tensor(compose_chain(chain, obj), identity1(obj)), coev(obj))

        src = trace_chain(x.chain + y.chain, b)
        tgt = trace_chain(y.chain + x.chain, a)
        unit = KVObject(1)
        theta = None
        if self.values:
            state = (loops.Loop(b, x.chain + y.chain),)
            m = loops.rotate(state, 0, len(x.chain), self.fld)[1]
            theta = KVTwoMor(compose_chain(src), compose_chain(tgt), ((m,),), self.fld)
        return D2(src, tgt, unit, unit, theta)


def _show(chain, obj) -> str:
    if not chain:
        return f"id(rank {obj.rank})"
    return " . ".join(f"[{f.target.rank}<-{f.source.rank}]" for f in chain)


# --- declarations and entry points -----------------------------------------------------------


def load_program(prog: Program, env: Environment | None = None) -> Environment:
    """Process declarations and ``def``s into a (copied) environment."""
    env = env.copy() if env is not None else Environment()
    ev_ = _Evaluator(env, values=False)
    for s in prog.statements:
        if isinstance(s, ObjectDecl):
            if s.name in env.objects:
                if s.rank is not None and env.objects[s.name].rank != s.rank:
                    raise DSLTypeError(f"object {s.name} declared with rank {s.rank}, environment has {env.objects[s.name].rank}", s.loc)
                continue
            if s.rank is None:
                raise DSLTypeError(f"object {s.name} has no rank in the environment", s.loc)
            env.objects[s.name] = KVObject(s.rank)
        elif isinstance(s, OneMorDecl):
            src, tgt = _obj(env, s.source), _obj(env, s.target)
            if s.name in env.onemors:
                f = env.onemors[s.name]
            elif s.dims is not None:
                f = KVOneMor(src, tgt, s.dims)
                env.onemors[s.name] = f
            else:
                raise DSLTypeError(f"1-morphism {s.name} has no value in the environment", s.loc)
            if f.source != src or f.target != tgt:
                raise DSLTypeError(f"1-morphism {s.name} does not have the declared boundary", s.loc)
        elif isinstance(s, TwoMorDecl):
            a, b = ev_.one(s.source), ev_.one(s.target)
            if s.name not in env.twomors:
                raise DSLTypeError(f"2-morphism {s.name} has no value in the environment", s.loc)
            t = env.twomors[s.name][0]
            if t.source != a.value() or t.target != b.value():
                raise DSLTypeError(f"2-morphism {s.name} does not have the declared boundary", s.loc)
            env.twomors[s.name] = (t, a.chain, b.chain)
        elif isinstance(s, Def):
            if s.name in env.defs or s.name in env.onemors or s.name in env.twomors:
                raise DSLTypeError(f"name {s.name!r} is already declared", s.loc)
            env.defs[s.name] = s.expr
    return env


def _children(e) -> tuple:
    if isinstance(e, (Compose, Tensor, VComp)):
        return e.items
    if isinstance(e, Cyclic):
        return (e.left, e.right)
    if isinstance(e, (RAdj, LAdj, Id2, Unit, Counit)):
        return (e.expr,)
    return ()


def typecheck(expr, env: Environment) -> Typed:
    """Annotate ``expr`` and its sub-expressions with boundaries; raises on the first mismatch."""
    ev_ = _Evaluator(env, values=False)

    def walk(e):
        d = ev_.run(e)
        kids = tuple(walk(x) for x in _children(e))
        if isinstance(d, D1):
            return Typed(e, 1, d.source, d.target, d.chain, d.chain, kids)
        return Typed(e, 2, d.source, d.target, d.src, d.tgt, kids)

    return walk(expr)


def evaluate(expr, env: Environment):
    """``KVOneMor`` for a 1-expression, ``KVTwoMor`` for a 2-expression."""
    d = _Evaluator(env, values=True).run(expr)
    if isinstance(d, D1):
        return d.value()
    return d.theta


def run_program(text: str, env: Environment | None = None) -> list:
    prog = parse_program(text)
    env = load_program(prog, env)
    return [evaluate(e, env) for e in prog.expressions]


# --- library: the Morse functor and the secondary trace as programs --------------------------

PAIR_PREAMBLE = """\
object A
onemor Phi_a : A -> A
onemor Phi_b : A -> A
twomor alpha : Phi_a . Phi_b => Phi_b . Phi_a
def Ar = radj(Phi_a)
def Br = radj(Phi_b)
"""

# strands 1..4 carry A, Aop, A, Aop; S brings strand 4 next to strand 1
FOUR_STRAND_PREAMBLE = """\
def S = id(A) (x) swap(Aop (x) A, Aop)
def Sinv = id(A) (x) swap(Aop, Aop (x) A)
def Ev = (ev(A) (x) ev(A)) . S
def Coev = coev(A) (x) coev(A)
def l3 = id(A) (x) id(Aop) (x) serre_l(A) (x) id(Aop)
def r3 = id(A) (x) id(Aop) (x) serre_r(A) (x) id(Aop)
def cut14 = Sinv . ((coev(A) . ev(A)) (x) id(Aop) (x) id(A)) . S
def cut14L = Sinv . ((coev(A) . ladj(coev(A))) (x) id(Aop) (x) id(A)) . S
def cut12 = (coev(A) . ev(A)) (x) id(A) (x) id(Aop)
def cut12R = (radj(ev(A)) . ev(A)) (x) id(A) (x) id(Aop)
"""


def _s1(e: str) -> str:
    return f"(({e}) (x) id(Aop) (x) id(A) (x) id(Aop))"


def _loop(e: str) -> str:
    return f"ev(A) . (({e}) (x) id(Aop)) . ladj(ev(A))"


# every named downset, as a closed 1-expression from the unit to itself
T_OBJECT_FORMULAS: dict[str, str] = {
    "empty": "id(1)",
    "m": "Ev . l3 . Coev",
    "m_a": f"Ev . {_s1('Ar . Phi_a')} . l3 . Coev",
    "m_b": f"Ev . {_s1('Br . Phi_b')} . l3 . Coev",
    "m_a|m_b": f"Ev . {_s1('Br . Phi_b . Ar . Phi_a')} . l3 . Coev",
    "cross": f"Ev . {_s1('Br . Ar . Phi_b . Phi_a')} . l3 . Coev",
    "s_a": f"Ev . {_s1('Ar')} . cut14L . l3 . {_s1('Phi_a')} . Coev",
    "s_b": f"Ev . {_s1('Br')} . cut12R . l3 . {_s1('Phi_b')} . Coev",
    "s_a|m_b": f"Ev . {_s1('Br . Phi_b . Ar')} . cut14 . {_s1('Phi_a')} . Coev",
    "m_a|s_b": f"Ev . {_s1('Br')} . cut12 . {_s1('Phi_b . Ar . Phi_a')} . Coev",
    "s_a|cross": f"Ev . {_s1('Br . Ar . Phi_b')} . cut14 . {_s1('Phi_a')} . Coev",
    "cross|s_b": f"Ev . {_s1('Br')} . cut12 . {_s1('Ar . Phi_b . Phi_a')} . Coev",
    "s_a|s_b": f"Ev . {_s1('Br')} . cut12R . {_s1('Phi_b . Ar')} . l3 . cut14L . {_s1('Phi_a')} . Coev",
    "s_a|cross|s_b": f"Ev . {_s1('Br')} . cut12R . {_s1('Ar . Phi_b')} . l3 . cut14L . {_s1('Phi_a')} . Coev",
    "M_a": f"Ev . {_s1('Ar')} . cut14L . l3 . {_s1('Phi_a')} . Coev",
    "M_b": f"Ev . {_s1('Br')} . cut12R . l3 . {_s1('Phi_b')} . Coev",
    "M_a|s_b": f"Ev . cut12 . {_s1('Ar')} . r3 . cut14 . {_s1('Phi_a')} . Coev",
    "s_a|M_b": f"Ev . {_s1('Br')} . cut12 . r3 . {_s1('Phi_b')} . cut14 . Coev",
    "M_a|M_b": "Ev . cut12 . r3 . cut14 . Coev",
    "M": "id(1)",
}

# the same objects written on a single strand, where the shape allows it
T_OBJECT_LOOPS: dict[str, str] = {
    "m": _loop("id(A)"),
    "m_a": _loop("Ar . Phi_a"),
    "m_b": _loop("Br . Phi_b"),
    "m_a|m_b": _loop("Br . Phi_b . Ar . Phi_a"),
    "cross": _loop("Br . Ar . Phi_b . Phi_a"),
    "M_a|M_b": "ev(A) . radj(ev(A))",
}

SECONDARY_TRACE_PROGRAM = PAIR_PREAMBLE + """\
def Vb = ev(A) . (Phi_b (x) id(Aop)) . coev(A)
def grow = ev(A) . ((unit_r(Phi_a) . Phi_b) (x) id(Aop)) . coev(A)
def commute = ev(A) . ((Ar . alpha) (x) id(Aop)) . coev(A)
def turn = cyclic(Ar, Phi_b . Phi_a)
def shrink = ev(A) . ((Phi_b . counit_r(Phi_a)) (x) id(Aop)) . coev(A)
def phi = grow ; commute ; turn ; shrink
phi
unit_l(Vb) ; (phi . ladj(Vb)) ; counit_r(Vb)
"""


def pair_environment(pair) -> Environment:
    """Environment binding ``A``, ``Phi_a``, ``Phi_b``, ``alpha`` to a commuting pair."""
    env = Environment(field=pair.field)
    env.add_object("A", pair.obj)
    env.add_onemor("Phi_a", pair.phi_a)
    env.add_onemor("Phi_b", pair.phi_b)
    env.add_twomor("alpha", pair.alpha)
    return env


def t_object_dims(pair, four_strand: bool = True) -> dict[str, int]:
    """Evaluate each transcribed object; every value is a 1x1 grid, reported by its entry."""
    env = load_program(parse_program(PAIR_PREAMBLE + FOUR_STRAND_PREAMBLE), pair_environment(pair))
    table = T_OBJECT_FORMULAS if four_strand else T_OBJECT_LOOPS
    out = {}
    for name, text in table.items():
        f = evaluate(parse(text), env)
        if (f.source.rank, f.target.rank) != (1, 1):
            raise DSLTypeError(f"{name}: not an endomorphism of the unit")
        out[name] = f.dims[0][0]
    return out


def secondary_trace_dsl(pair):
    """``(trace map matrix, scalar)`` computed by :data:`SECONDARY_TRACE_PROGRAM`."""
    phi, tr = run_program(SECONDARY_TRACE_PROGRAM, pair_environment(pair))
    return phi.blocks[0][0], tr.blocks[0][0].to_lists()[0][0] if tr.blocks[0][0].rows else pair.field.zero
