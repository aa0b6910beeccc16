"""2-characters of permutation actions and a discrete Lefschetz identity.

A finite group acting on a finite set ``X`` acts on ``Vect(X)`` by permutation
1-morphisms; the secondary trace of a commuting pair ``(g, h)`` is then the
number of common fixed points.  An equivariant vector bundle over ``X`` gives
a commuting pair of a permutation and a diagonal 1-morphism, whose secondary
traces are the two sides of the Lefschetz formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Sequence

from .kv2vect import KVObject, KVOneMor, KVTwoMor, compose1, identity2
from .linalg import QQ, Field, Matrix, mat_trace
from .trace import CommutingPair, secondary_trace_a, secondary_trace_b


class GroupLawError(ValueError):
    pass


class NotCommutingError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteGroup:
    """Cayley table with ``0`` the identity."""

    mul: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        mul = tuple(tuple(r) for r in self.mul)
        object.__setattr__(self, "mul", mul)
        n = len(mul)
        if n == 0 or any(len(r) != n for r in mul):
            raise GroupLawError("Cayley table must be square and non-empty")
        for g in range(n):
            for h in range(n):
                if not 0 <= mul[g][h] < n:
                    raise GroupLawError(f"product {g}*{h} = {mul[g][h]} out of range")
        for g in range(n):
            if mul[0][g] != g or mul[g][0] != g:
                raise GroupLawError(f"0 is not an identity for element {g}")
        for g in range(n):
            for h in range(n):
                gh = mul[g][h]
                for k in range(n):
                    if mul[gh][k] != mul[g][mul[h][k]]:
                        raise GroupLawError(f"associativity fails at ({g}, {h}, {k})")
        inv = []
        for g in range(n):
            hs = [h for h in range(n) if mul[g][h] == 0]
            if len(hs) != 1 or mul[hs[0]][g] != 0:
                raise GroupLawError(f"element {g} has no two-sided inverse")
            inv.append(hs[0])
        object.__setattr__(self, "inv", tuple(inv))

    @property
    def order(self) -> int:
        return len(self.mul)

    def __call__(self, g: int, h: int) -> int:
        return self.mul[g][h]

    def commute(self, g: int, h: int) -> bool:
        return self.mul[g][h] == self.mul[h][g]

    def commuting_pairs(self) -> list[tuple[int, int]]:
        n = self.order
        return [(g, h) for g in range(n) for h in range(n) if self.commute(g, h)]

    def conj(self, k: int, g: int) -> int:
        return self.mul[self.mul[k][g]][self.inv[k]]

    @classmethod
    def from_permutations(cls, gens: Sequence[Sequence[int]], name: str = "") -> tuple["FiniteGroup", list[tuple[int, ...]]]:
        """Close ``gens`` under composition; returns the group and its elements as permutations.

        Product convention: ``(g*h)(x) = g(h(x))``.
        """
        gens = [tuple(g) for g in gens]
        if not gens:
            raise GroupLawError("need at least one generator")
        size = len(gens[0])
        for g in gens:
            if sorted(g) != list(range(size)):
                raise GroupLawError(f"{list(g)} is not a permutation of 0..{size - 1}")
        e = tuple(range(size))
        elems = [e]
        seen = {e: 0}
        frontier = [e]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = tuple(g[x[i]] for i in range(size))
                    if y not in seen:
                        seen[y] = len(elems)
                        elems.append(y)
                        nxt.append(y)
            frontier = nxt
        mul = [[seen[tuple(a[b[i]] for i in range(size))] for b in elems] for a in elems]
        return cls(tuple(map(tuple, mul)), name), elems


@dataclass(frozen=True)
class GroupAction:
    group: FiniteGroup
    set_size: int
    perm: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        perm = tuple(tuple(p) for p in self.perm)
        object.__setattr__(self, "perm", perm)
        G, n = self.group, self.set_size
        if len(perm) != G.order:
            raise GroupLawError("need one permutation per group element")
        for g, p in enumerate(perm):
            if sorted(p) != list(range(n)):
                raise GroupLawError(f"perm[{g}] is not a bijection of 0..{n - 1}")
        if perm[0] != tuple(range(n)):
            raise GroupLawError("the identity must act trivially")
        for g in range(G.order):
            for h in range(G.order):
                composed = tuple(perm[g][perm[h][x]] for x in range(n))
                if perm[G(g, h)] != composed:
                    raise GroupLawError(f"perm[{g}*{h}] != perm[{g}] o perm[{h}]")

    @classmethod
    def regular(cls, group: FiniteGroup) -> "GroupAction":
        """Left translation of the group on itself."""
        return cls(group, group.order, tuple(tuple(group(g, x) for x in range(group.order)) for g in range(group.order)))


# --- standard examples --------------------------------------------------------------------------


def symmetric3() -> GroupAction:
    G, elems = FiniteGroup.from_permutations([(1, 0, 2), (1, 2, 0)], "S3")
    return GroupAction(G, 3, elems)


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup(tuple(tuple((g + h) % n for h in range(n)) for g in range(n)), f"Z/{n}")


def klein_four() -> FiniteGroup:
    return FiniteGroup(tuple(tuple(g ^ h for h in range(4)) for g in range(4)), "Z/2xZ/2")


def dihedral4() -> GroupAction:
    """Symmetries of a square acting on its vertices 0..3 (in cyclic order)."""
    G, elems = FiniteGroup.from_permutations([(1, 2, 3, 0), (0, 3, 2, 1)], "D4")
    return GroupAction(G, 4, elems)


def trivial_action(n: int) -> GroupAction:
    return GroupAction(FiniteGroup(((0,),), "1"), n, (tuple(range(n)),))


def standard_actions() -> dict[str, GroupAction]:
    return {
        "S3": symmetric3(),
        "Z4": GroupAction.regular(cyclic_group(4)),
        "V4": GroupAction.regular(klein_four()),
        "D4": dihedral4(),
    }


# --- 2-characters -------------------------------------------------------------------------------


def linearize(action: GroupAction, g: int) -> KVOneMor:
    """Permutation 1-morphism with ``dims[perm[g](x)][x] = 1``."""
    if not 0 <= g < action.group.order:
        raise IndexError(f"no group element {g}")
    n = action.set_size
    p = action.perm[g]
    obj = KVObject(n)
    return KVOneMor(obj, obj, tuple(tuple(int(p[x] == y) for x in range(n)) for y in range(n)))


def commutor(action: GroupAction, g: int, h: int, fld: Field = QQ) -> KVTwoMor:
    """The identity 2-morphism ``lin(g) o lin(h) => lin(h) o lin(g)`` for commuting ``g, h``."""
    if not action.group.commute(g, h):
        raise NotCommutingError(f"elements {g} and {h} do not commute")
    src = compose1(linearize(action, g), linearize(action, h))
    tgt = compose1(linearize(action, h), linearize(action, g))
    assert src == tgt
    return identity2(src, fld)


def commuting_pair(action: GroupAction, g: int, h: int, fld: Field = QQ) -> CommutingPair:
    return CommutingPair(linearize(action, g), linearize(action, h), commutor(action, g, h, fld))


def char2(action: GroupAction, g: int, h: int, fld: Field = QQ):
    """Secondary trace of ``g`` acting on the trace of ``h``."""
    return secondary_trace_b(commuting_pair(action, g, h, fld))


def fixed_point_oracle(action: GroupAction, g: int, h: int) -> int:
    if not action.group.commute(g, h):
        raise NotCommutingError(f"elements {g} and {h} do not commute")
    pg, ph = action.perm[g], action.perm[h]
    return sum(1 for x in range(action.set_size) if pg[x] == x and ph[x] == x)


@dataclass
class Char2Table:
    action: GroupAction
    field: Field
    values: dict = field(default_factory=dict)
    oracle_ok: dict = field(default_factory=dict)
    report: "SL2ZReport | None" = None

    def to_dict(self) -> dict:
        out = {
            "group": self.action.group.name,
            "field": repr(self.field),
            "entries": [
                {"g": g, "h": h, "chi": str(v), "oracle_agrees": self.oracle_ok[(g, h)]}
                for (g, h), v in sorted(self.values.items())
            ],
        }
        if self.report is not None:
            out["sl2z"] = self.report.to_dict()
        return out


def char2_table(action: GroupAction, fld: Field = QQ) -> Char2Table:
    t = Char2Table(action, fld)
    for g, h in action.group.commuting_pairs():
        v = char2(action, g, h, fld)
        t.values[(g, h)] = v
        t.oracle_ok[(g, h)] = v == fld(fixed_point_oracle(action, g, h))
    t.report = sl2z_check(t)
    return t


@dataclass
class SL2ZReport:
    checked: int = 0
    s_failures: list = field(default_factory=list)
    t_failures: list = field(default_factory=list)
    conj_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.s_failures or self.t_failures or self.conj_failures)

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "S": not self.s_failures,
            "T": not self.t_failures,
            "conjugation": not self.conj_failures,
            "failures": {"S": self.s_failures, "T": self.t_failures, "conjugation": self.conj_failures},
        }


def sl2z_check(table: Char2Table) -> SL2ZReport:
    """S-move ``chi(g,h) = chi(h^-1,g)``, T-move ``chi(g,h) = chi(gh,h)``, and conjugation invariance."""
    G = table.action.group
    chi = table.values
    rep = SL2ZReport()
    for (g, h), v in chi.items():
        rep.checked += 1
        if chi[(G.inv[h], g)] != v:
            rep.s_failures.append((g, h))
        if chi[(G(g, h), h)] != v:
            rep.t_failures.append((g, h))
        for k in range(G.order):
            if chi[(G.conj(k, g), G.conj(k, h))] != v:
                rep.conj_failures.append((g, h, k))
                break
    return rep


# --- Lefschetz -----------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquivariantBundle:
    """Fibers ``F_x`` over ``X``, a bijection ``f`` and ``beta_x: F_{f(x)} -> F_x``."""

    fiber_dims: tuple[int, ...]
    f: tuple[int, ...]
    beta: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "fiber_dims", tuple(self.fiber_dims))
        object.__setattr__(self, "f", tuple(self.f))
        object.__setattr__(self, "beta", tuple(self.beta))
        n = len(self.fiber_dims)
        if sorted(self.f) != list(range(n)):
            raise ValueError("f must be a bijection of the base")
        if len(self.beta) != n:
            raise ValueError("need one beta block per point")
        flds = {b.field for b in self.beta}
        if len(flds) > 1:
            raise ValueError("beta blocks use mixed scalar fields")
        for x, b in enumerate(self.beta):
            want = (self.fiber_dims[x], self.fiber_dims[self.f[x]])
            if b.shape != want:
                raise ValueError(f"beta[{x}] has shape {b.shape}, expected {want}")
            if _rank(b) != want[0]:
                raise ValueError(f"beta[{x}] is not invertible")

    @property
    def field(self) -> Field:
        return self.beta[0].field if self.beta else QQ

    @property
    def size(self) -> int:
        return len(self.fiber_dims)


def _rank(m: Matrix) -> int:
    """Rank by Gaussian elimination over the matrix's field."""
    fld = m.field
    rows = [list(r) for r in m.to_lists()]
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = fld.inv(rows[r][c])
        for i in range(m.rows):
            if i != r and rows[i][c] != 0:
                t = fld.reduce(rows[i][c] * inv)
                rows[i] = [fld.reduce(a - t * b) for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def pushforward_matrix(bundle: EquivariantBundle) -> Matrix:
    """``(f, beta)_*`` on ``sum_x F_x``: block ``beta_x`` at row-block ``x``, column-block ``f(x)``."""
    offs = [0]
    for d in bundle.fiber_dims:
        offs.append(offs[-1] + d)
    entries = {}
    for x, b in enumerate(bundle.beta):
        for i, j, v in b.nonzero():
            entries[(offs[x] + i, offs[bundle.f[x]] + j)] = v
    return Matrix.from_sparse(offs[-1], offs[-1], entries, bundle.field)


def bundle_pair(bundle: EquivariantBundle) -> CommutingPair:
    """``phi_a`` has ``dims[x][f(x)] = 1``, ``phi_b = diag(dim F_x)``, ``alpha`` has blocks ``beta_x``."""
    n = bundle.size
    obj = KVObject(n)
    a = KVOneMor(obj, obj, tuple(tuple(int(y == bundle.f[x]) for y in range(n)) for x in range(n)))
    b = KVOneMor(obj, obj, tuple(tuple(bundle.fiber_dims[x] if x == y else 0 for y in range(n)) for x in range(n)))
    entries = {}
    for x in range(n):
        blk = bundle.beta[x]
        entries[(x, bundle.f[x])] = {(i, j): v for i, j, v in blk.nonzero()}
    alpha = KVTwoMor.from_cells(compose1(a, b), compose1(b, a), entries, bundle.field)
    return CommutingPair(a, b, alpha)


@dataclass(frozen=True)
class LefschetzResult:
    lhs: object
    rhs: object
    secondary_a: object
    secondary_b: object

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs == self.secondary_a == self.secondary_b


def lefschetz(bundle: EquivariantBundle) -> LefschetzResult:
    """Fixed-point side, global side, and the two secondary traces of the associated pair."""
    fld = bundle.field
    lhs = fld.zero
    for x in range(bundle.size):
        if bundle.f[x] == x:
            lhs = fld.reduce(lhs + mat_trace(bundle.beta[x]))
    rhs = mat_trace(pushforward_matrix(bundle))
    pair = bundle_pair(bundle)
    return LefschetzResult(lhs, rhs, secondary_trace_a(pair), secondary_trace_b(pair))


# --- file formats -------------------------------------------------------------------------------


def group_from_json(doc: dict) -> tuple[FiniteGroup, list | None]:
    """``{"mul": [[...]]}`` or ``{"generators": [[...], ...]}``."""
    name = doc.get("name", "")
    if "mul" in doc:
        G = FiniteGroup(tuple(tuple(r) for r in doc["mul"]), name)
        if "order" in doc and doc["order"] != G.order:
            raise GroupLawError(f"declared order {doc['order']} but table has {G.order} rows")
        return G, None
    if "generators" in doc:
        return FiniteGroup.from_permutations(doc["generators"], name)
    raise GroupLawError("group document needs 'mul' or 'generators'")


def action_from_json(group: FiniteGroup, doc: dict, elems: list | None = None) -> GroupAction:
    """``{"perms": [...]}``, ``{"regular": true}``, or ``{}`` for the defining permutation action."""
    if doc.get("regular"):
        return GroupAction.regular(group)
    if "perms" in doc:
        perms = doc["perms"]
        return GroupAction(group, len(perms[0]) if perms else 0, tuple(tuple(p) for p in perms))
    if elems is not None:
        return GroupAction(group, len(elems[0]), tuple(elems))
    raise GroupLawError("action document needs 'perms' or 'regular'")


def bundle_from_json(doc: dict, fld: Field = QQ) -> EquivariantBundle:
    """``{"fiber_dims": [...], "f": [...], "beta_blocks": [[[...]]]}``."""
    dims = doc["fiber_dims"]
    f = doc["f"]
    blocks = []
    for x, rows in enumerate(doc["beta_blocks"]):
        blocks.append(Matrix.from_rows(rows, fld, ncols=dims[f[x]]))
    return EquivariantBundle(tuple(dims), tuple(f), tuple(blocks))


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def all_permutations(n: int) -> list[tuple[int, ...]]:
    return list(permutations(range(n)))
