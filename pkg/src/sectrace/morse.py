"""The functor T on saturated subsets of the torus critical poset.

The poset has the nine points ``(z1, z2)`` with ``z in {-1, i, 1}``, ordered
as the product of two chains ``-1 < i < 1``.  Its downward-closed subsets form
a lattice with 20 elements, every one of which carries a name below; T sends
each to a state of loops (see :mod:`sectrace.loops`) and each cover
``p < q`` (one point added) to a generating linear map.  Longer inclusions are
composites along a chain of covers, and the value does not depend on the chain.

Loops are written as chains, leftmost factor applied last.  ``a, ar, b, br``
stand for ``phi_a, phi_a^r, phi_b, phi_b^r``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

from . import loops
from .kv2vect import right_adjoint
from .linalg import Matrix, identity, kron, mat_mul
from .trace import (
    CommutingPair,
    TraceSpace,
    induced_commutor,
    secondary_trace_a,
    secondary_trace_b,
    swap_matrix,
    trace_duality,
    trace_map,
)

# coordinates: 0 = -1, 1 = i, 2 = 1
COORD = {-1: 0, "i": 1, 1: 2}
COORD_NAME = {0: "-1", 1: "i", 2: "1"}


class UnsupportedSetError(ValueError):
    pass


class MorseCheckError(AssertionError):
    """A structural identity of the factorization failed; carries a dump."""

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


def pt(z1, z2) -> tuple[int, int]:
    return COORD[z1], COORD[z2]


@dataclass(frozen=True)
class CriticalPoset:
    points: tuple = tuple(product(range(3), range(3)))

    @cached_property
    def covers(self) -> tuple:
        out = []
        for x, y in self.points:
            if x < 2:
                out.append(((x, y), (x + 1, y)))
            if y < 2:
                out.append(((x, y), (x, y + 1)))
        return tuple(sorted(out))

    def leq(self, p, q) -> bool:
        return p[0] <= q[0] and p[1] <= q[1]

    def critical_value(self, p) -> int:
        return p[0] + p[1] - 2

    @staticmethod
    def show(p) -> str:
        return f"({COORD_NAME[p[0]]},{COORD_NAME[p[1]]})"


POSET = CriticalPoset()


@dataclass(frozen=True)
class SaturatedSet:
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        for x in self.members:
            for y in POSET.points:
                if POSET.leq(y, x) and y not in self.members:
                    raise ValueError(f"not downward closed: {POSET.show(x)} without {POSET.show(y)}")

    def __le__(self, other):
        return self.members <= other.members

    def __lt__(self, other):
        return self.members < other.members

    def __len__(self):
        return len(self.members)

    @property
    def name(self) -> str | None:
        return NAME_OF.get(self.members)

    def __repr__(self):
        return f"SaturatedSet({self.name or sorted(POSET.show(p) for p in self.members)})"


def _is_downset(s: frozenset) -> bool:
    return all(y in s for x in s for y in POSET.points if POSET.leq(y, x))


def saturated_sets() -> list[SaturatedSet]:
    """All downward-closed subsets, by brute force over the 2^9 subsets."""
    pts = POSET.points
    out = []
    for mask in range(1 << len(pts)):
        s = frozenset(p for n, p in enumerate(pts) if mask >> n & 1)
        if _is_downset(s):
            out.append(SaturatedSet(s))
    out.sort(key=lambda s: (len(s), sorted(s.members)))
    return out


def _named() -> dict[str, frozenset]:
    P = frozenset(POSET.points)
    m = {pt(-1, -1)}
    m_a = m | {pt("i", -1)}
    m_b = m | {pt(-1, "i")}
    cross = m_a | m_b | {pt("i", "i")}
    s_a = m_a | {pt(1, -1)}
    s_b = m_b | {pt(-1, 1)}
    # M_a is the largest set below which s_a u cross is terminal
    M_a = s_a | cross | {pt(1, "i")}
    M_b = cross | s_b | {pt("i", 1)}
    sets = {
        "empty": set(),
        "m": m,
        "m_a": m_a,
        "m_b": m_b,
        "m_a|m_b": m_a | m_b,
        "cross": cross,
        "s_a": s_a,
        "s_b": s_b,
        "s_a|m_b": s_a | m_b,
        "m_a|s_b": m_a | s_b,
        "s_a|cross": s_a | cross,
        "cross|s_b": cross | s_b,
        "s_a|s_b": s_a | s_b,
        "s_a|cross|s_b": s_a | cross | s_b,
        "M_a": M_a,
        "M_b": M_b,
        "M_a|s_b": M_a | s_b,
        "s_a|M_b": s_a | M_b,
        "M_a|M_b": M_a | M_b,
        "M": P,
    }
    return {k: frozenset(v) for k, v in sets.items()}


NAMED = _named()
NAME_OF = {v: k for k, v in NAMED.items()}


def named(name: str) -> SaturatedSet:
    try:
        return SaturatedSet(NAMED[name])
    except KeyError:
        raise UnsupportedSetError(f"no saturated set named {name!r}") from None


def _name(p) -> str:
    if isinstance(p, str):
        if p not in NAMED:
            raise UnsupportedSetError(f"no saturated set named {p!r}")
        return p
    members = p.members if isinstance(p, SaturatedSet) else frozenset(p)
    if members not in NAME_OF:
        raise UnsupportedSetError(f"T is not defined on {sorted(POSET.show(x) for x in members)}")
    return NAME_OF[members]


# --- values on objects ------------------------------------------------------------------------

# each state is a tuple of loops, each loop a tuple of factor symbols
OBJECTS: dict[str, tuple] = {
    "empty": (),
    "m": ((),),
    "m_a": (("ar", "a"),),
    "m_b": (("br", "b"),),
    "m_a|m_b": (("br", "b", "ar", "a"),),
    "cross": (("br", "ar", "b", "a"),),
    "s_a": (("ar",), ("a",)),
    "s_b": (("br",), ("b",)),
    "s_a|m_b": (("br", "b", "ar"), ("a",)),
    "m_a|s_b": (("br",), ("b", "ar", "a")),
    "s_a|cross": (("br", "ar", "b"), ("a",)),
    "cross|s_b": (("br",), ("ar", "b", "a")),
    "s_a|s_b": (("b", "ar", "br", "a"),),
    "s_a|cross|s_b": (("ar", "b", "br", "a"),),
    "M_a": (("ar",), ("a",)),
    "M_b": (("br",), ("b",)),
    "M_a|s_b": (("ar", "a"),),
    "s_a|M_b": (("b", "br"),),
    "M_a|M_b": ((),),
    "M": (),
}

# generating maps, one per added point.  Ops:
#   ("birth",) ("death", i) ("unit", i, s, k) ("counit", i, s, k) ("comm", i, s)
#   ("rot", i, r) ("cut", i, p, q) [outer loop first] ("merge", i1, p, i2, q)
STEPS: dict[tuple[str, str], tuple] = {
    ("empty", "m"): (("birth",),),
    ("m", "m_a"): (("unit", 0, 0, "a"),),
    ("m", "m_b"): (("unit", 0, 0, "b"),),
    ("m_a", "m_a|m_b"): (("unit", 0, 0, "b"),),
    ("m_b", "m_a|m_b"): (("unit", 0, 2, "a"),),
    ("m_a|m_b", "cross"): (("comm", 0, 1),),
    # saddles: cut a loop in two
    ("m_a", "s_a"): (("cut", 0, 1, 2),),
    ("m_b", "s_b"): (("cut", 0, 1, 2),),
    ("m_a|m_b", "s_a|m_b"): (("cut", 0, 3, 4),),
    ("m_a|m_b", "m_a|s_b"): (("cut", 0, 1, 4),),
    ("cross", "s_a|cross"): (("cut", 0, 3, 4),),
    ("cross", "cross|s_b"): (("cut", 0, 1, 4),),
    ("s_a", "s_a|m_b"): (("unit", 0, 0, "b"),),
    ("s_b", "m_a|s_b"): (("unit", 1, 1, "a"),),
    ("s_a|m_b", "s_a|cross"): (("comm", 0, 1),),
    ("m_a|s_b", "cross|s_b"): (("comm", 1, 0),),
    # saddles on two loops: merge them
    ("s_a|m_b", "s_a|s_b"): (("merge", 0, 1, 1, 0), ("rot", 0, 2)),
    ("m_a|s_b", "s_a|s_b"): (("merge", 1, 2, 0, 0),),
    ("s_a|cross", "s_a|cross|s_b"): (("merge", 0, 1, 1, 0), ("rot", 0, 2)),
    ("cross|s_b", "s_a|cross|s_b"): (("merge", 1, 2, 0, 0),),
    ("s_a|s_b", "s_a|cross|s_b"): (("comm", 0, 0),),
    # stratified maxima: carry the other endomorphism around (rotation), then its counit
    ("s_a|cross", "M_a"): (("rot", 0, 1), ("counit", 0, 1, "b")),
    ("cross|s_b", "M_b"): (("rot", 1, 1), ("counit", 1, 1, "a")),
    ("s_a|cross|s_b", "M_a|s_b"): (("counit", 0, 1, "b"),),
    ("s_a|cross|s_b", "s_a|M_b"): (("rot", 0, 3), ("counit", 0, 0, "a")),
    ("M_a", "M_a|s_b"): (("merge", 0, 1, 1, 0),),
    ("M_b", "s_a|M_b"): (("merge", 1, 1, 0, 0),),
    ("M_a|s_b", "M_a|M_b"): (("rot", 0, 1), ("counit", 0, 0, "a")),
    ("s_a|M_b", "M_a|M_b"): (("counit", 0, 0, "b"),),
    ("M_a|M_b", "M"): (("death", 0),),
}


def _covers_graph() -> dict[str, list[str]]:
    g: dict[str, list[str]] = {k: [] for k in NAMED}
    for p, q in STEPS:
        g[p].append(q)
    return g


GRAPH = _covers_graph()


def chains_between(p: str, q: str) -> list[list[str]]:
    """Every chain of covers from ``p`` to ``q``."""
    if p == q:
        return [[p]]
    out = []
    for r in GRAPH[p]:
        if NAMED[r] <= NAMED[q]:
            out.extend([p] + c for c in chains_between(r, q))
    return out


class MorseFunctor:
    """T for one commuting pair; step matrices are cached."""

    def __init__(self, pair: CommutingPair):
        self.pair = pair
        self.fld = pair.field
        a, b = pair.phi_a, pair.phi_b
        ar, eta_a, eps_a = right_adjoint(a, self.fld)
        br, eta_b, eps_b = right_adjoint(b, self.fld)
        self.sym = {"a": a, "ar": ar, "b": b, "br": br}
        self.unit = {"a": eta_a, "b": eta_b}
        self.counit = {"a": eps_a, "b": eps_b}
        self.comm = induced_commutor(pair)  # b ar => ar b
        self._steps: dict = {}

    def state(self, name: str) -> tuple:
        return tuple(loops.Loop(self.pair.obj, tuple(self.sym[s] for s in lp)) for lp in OBJECTS[_name(name)])

    def obj(self, p) -> TraceSpace:
        st = self.state(_name(p))
        counts: dict = {}
        for lab in loops.state_basis(st):
            key = tuple(segs[0] for segs, _ in lab)
            counts[key] = counts.get(key, 0) + 1
        return TraceSpace(loops.state_dim(st), tuple(sorted(counts.items())))

    def step(self, p: str, q: str) -> Matrix:
        key = (p, q)
        if key in self._steps:
            return self._steps[key]
        if key not in STEPS:
            raise UnsupportedSetError(f"{p} -> {q} is not a generating step")
        pipe = loops.Pipeline(self.state(p), self.fld)
        S = self.sym
        for op in STEPS[key]:
            kind, args = op[0], op[1:]
            if kind == "birth":
                pipe.birth(self.pair.obj)
            elif kind == "death":
                pipe.death(*args)
            elif kind == "unit":
                i, s, k = args
                pipe.whisker(i, s, 0, self.unit[k], (S[k + "r"], S[k]), f"unit_{k}")
            elif kind == "counit":
                i, s, k = args
                pipe.whisker(i, s, 2, self.counit[k], (), f"counit_{k}")
            elif kind == "comm":
                i, s = args
                pipe.whisker(i, s, 2, self.comm, (S["ar"], S["b"]), "comm")
            elif kind == "rot":
                pipe.rotate(*args)
            elif kind == "cut":
                i, p_, q_ = args
                pipe.cut(i, p_, q_, inner_first=False)
            elif kind == "merge":
                pipe.merge(*args)
        if pipe.state != self.state(q):
            raise MorseCheckError(f"step {p} -> {q} lands in the wrong state")
        m = pipe.matrix()
        self._steps[key] = m
        return m

    def along(self, chain: list[str]) -> Matrix:
        out = identity(loops.state_dim(self.state(chain[0])), self.fld)
        for p, q in zip(chain, chain[1:]):
            out = mat_mul(self.step(p, q), out)
        return out

    def morphism(self, p, q, check_paths: bool = False) -> Matrix:
        p, q = _name(p), _name(q)
        if not NAMED[p] <= NAMED[q]:
            raise ValueError(f"{p} is not contained in {q}")
        chains = chains_between(p, q)
        if not chains:
            raise UnsupportedSetError(f"{p} -> {q} has no decomposition into generating steps")
        first = self.along(chains[0])
        if check_paths:
            for c in chains[1:]:
                if self.along(c) != first:
                    raise MorseCheckError(f"T({p}, {q}) depends on the chain", {"chain": c})
        return first


def T_object(p, pair: CommutingPair) -> TraceSpace:
    return MorseFunctor(pair).obj(p)


def T_morphism(p, q, pair: CommutingPair, check_paths: bool = False) -> Matrix:
    return MorseFunctor(pair).morphism(p, q, check_paths)


# --- the main comparison ----------------------------------------------------------------------


@dataclass
class MainReport:
    via_a: object
    via_b: object
    secondary_a: object
    secondary_b: object
    checks: dict = field(default_factory=dict)
    dump: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        vals = {self.via_a, self.via_b, self.secondary_a, self.secondary_b}
        return len(vals) == 1 and all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "T(empty,M) via s_a": str(self.via_a),
            "T(empty,M) via s_b": str(self.via_b),
            "secondary_trace_a": str(self.secondary_a),
            "secondary_trace_b": str(self.secondary_b),
            "checks": dict(self.checks),
            **({"dump": self.dump} if self.dump else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _dump_pair(pair: CommutingPair) -> dict:
    return {
        "rank": pair.obj.rank,
        "phi_a": [list(r) for r in pair.phi_a.dims],
        "phi_b": [list(r) for r in pair.phi_b.dims],
        "alpha": [[blk.to_lists() for blk in row] for row in pair.alpha.blocks],
        "field": repr(pair.field),
    }


def verify_main(pair: CommutingPair, raise_on_failure: bool = False) -> MainReport:
    F = MorseFunctor(pair)
    fld = F.fld
    a, b = pair.phi_a, pair.phi_b
    ar, br = F.sym["ar"], F.sym["br"]
    mats = {}
    for k in "ab":
        for p, q in (("empty", f"s_{k}"), (f"s_{k}", f"M_{k}"), (f"M_{k}", "M")):
            mats[(p, q)] = F.morphism(p, q)
    via = {}
    for k in "ab":
        v = mat_mul(mats[(f"M_{k}", "M")], mat_mul(mats[(f"s_{k}", f"M_{k}")], mats[("empty", f"s_{k}")]))
        via[k] = v[0, 0]
    checks = {}
    for k, phi in (("a", a), ("b", b)):
        coev_m, ev_m = trace_duality(phi, fld)
        n = loops.state_dim((loops.Loop(pair.obj, (phi,)),))
        checks[f"T(empty,s_{k}) is the coevaluation"] = mats[("empty", f"s_{k}")] == mat_mul(swap_matrix(n, n, fld), coev_m)
        checks[f"T(M_{k},M) is the evaluation"] = mats[(f"M_{k}", "M")] == ev_m
    phi_a_side = trace_map(b, F.comm, ar, ar)
    na = loops.state_dim((loops.Loop(pair.obj, (a,)),))
    checks["T(s_a,M_a) is the trace map on Tr(phi_a^r)"] = mats[("s_a", "M_a")] == kron(phi_a_side, identity(na, fld))
    phi_b_side = trace_map(a, pair.alpha, b, b)
    nb = loops.state_dim((loops.Loop(pair.obj, (br,)),))
    checks["T(s_b,M_b) is the trace map on Tr(phi_b)"] = mats[("s_b", "M_b")] == kron(identity(nb, fld), phi_b_side)
    rep = MainReport(via["a"], via["b"], secondary_trace_a(pair), secondary_trace_b(pair), checks)
    if not rep.ok:
        rep.dump = {
            "pair": _dump_pair(pair),
            "steps": {f"{p}->{q}": m.to_lists() for (p, q), m in mats.items()},
        }
        if raise_on_failure:
            raise MorseCheckError("main comparison failed", rep.to_dict())
    return rep


def check_functoriality(pair: CommutingPair) -> dict[str, bool]:
    """Path independence of T(p, q) for every inclusion of named sets."""
    F = MorseFunctor(pair)
    out = {}
    for p in NAMED:
        for q in NAMED:
            if p != q and NAMED[p] <= NAMED[q]:
                mats = [F.along(c) for c in chains_between(p, q)]
                out[f"{p}->{q}"] = all(m == mats[0] for m in mats[1:])
    return out
