"""The 2-category of finite 2-vector spaces, skeletal and with chosen bases.

An object is a rank ``n`` (the n-fold product of Vect).  A 1-morphism
``A -> B`` is a ``B.rank x A.rank`` grid of dimensions; a 2-morphism is a
grid of matrices, one per cell.

Basis conventions (fixed once, used everywhere):

* tensor products of spaces and of indices are lexicographic, left factor
  major: ``(i, j) -> i * n2 + j``;
* the cell ``(i, k)`` of ``g o f`` is ``(+)_j G_ij (x) F_jk``, summand ``j``
  outermost, ``G`` factor before ``F``;
* a right or left adjoint has the transposed grid and the dual basis of each
  cell, identified with the original basis.

Unitors are identities on the nose.  The associator of binary composites is
a genuine permutation (see :func:`associator`); right-nested chain
composites (:func:`compose_chain`) give every chain one canonical basis, and
the trace calculus works with chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Sequence

from .linalg import QQ, Field, Matrix, ShapeError, direct_sum_all, identity, kron, mat_mul


class BoundaryError(ValueError):
    """Raised when morphisms do not compose because their boundaries differ."""


@dataclass(frozen=True)
class KVObject:
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")

    def __repr__(self):
        return f"KVObject({self.rank})"


UNIT = KVObject(1)


@dataclass(frozen=True)
class KVOneMor:
    source: KVObject
    target: KVObject
    dims: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        dims = tuple(tuple(int(d) for d in row) for row in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) != self.target.rank or any(len(r) != self.source.rank for r in dims):
            raise ShapeError(
                f"dims grid must be {self.target.rank}x{self.source.rank}, got "
                f"{len(dims)}x{len(dims[0]) if dims else 0}"
            )
        if any(d < 0 for r in dims for d in r):
            raise ValueError("cell dimensions must be nonnegative")

    @classmethod
    def from_dims(cls, dims: Sequence[Sequence[int]], source: int | None = None) -> "KVOneMor":
        t = len(dims)
        s = len(dims[0]) if t else (source or 0)
        return cls(KVObject(s), KVObject(t), tuple(map(tuple, dims)))

    @property
    def is_endo(self) -> bool:
        return self.source == self.target

    def __repr__(self):
        return f"KVOneMor({self.source.rank}->{self.target.rank}, {[list(r) for r in self.dims]})"


@dataclass(frozen=True, eq=False)
class KVTwoMor:
    source: KVOneMor
    target: KVOneMor
    blocks: tuple[tuple[Matrix, ...], ...]
    field: Field = dc_field(default=QQ)

    def __post_init__(self):
        s, t = self.source, self.target
        if s.source != t.source or s.target != t.target:
            raise BoundaryError(f"2-morphism between non-parallel 1-morphisms {s} and {t}")
        blocks = tuple(tuple(r) for r in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) != s.target.rank or any(len(r) != s.source.rank for r in blocks):
            raise ShapeError("block grid shape does not match the 1-morphisms")
        for i, row in enumerate(blocks):
            for j, m in enumerate(row):
                if m.shape != (t.dims[i][j], s.dims[i][j]):
                    raise ShapeError(
                        f"block ({i},{j}) has shape {m.shape}, expected "
                        f"{(t.dims[i][j], s.dims[i][j])}"
                    )
                if m.field != self.field:
                    raise ShapeError(f"block ({i},{j}) is over {m.field!r}, not {self.field!r}")

    def __eq__(self, other):
        if not isinstance(other, KVTwoMor):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.field == other.field
            and self.blocks == other.blocks
        )

    def __hash__(self):
        return hash((self.source, self.target, self.blocks))

    def __repr__(self):
        return f"KVTwoMor({self.source} => {self.target})"

    @classmethod
    def from_cells(cls, source: KVOneMor, target: KVOneMor, entries, field: Field = QQ) -> "KVTwoMor":
        """Build from ``{(i, j): {(row, col): value}}``; missing cells are zero."""
        blocks = tuple(
            tuple(
                Matrix.from_sparse(
                    target.dims[i][j], source.dims[i][j], entries.get((i, j), {}), field
                )
                for j in range(source.source.rank)
            )
            for i in range(source.target.rank)
        )
        return cls(source, target, blocks, field)


# --- 1-morphisms --------------------------------------------------------------


def identity1(a: KVObject) -> KVOneMor:
    n = a.rank
    return KVOneMor(a, a, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def zero1(source: KVObject, target: KVObject) -> KVOneMor:
    return KVOneMor(source, target, tuple((0,) * source.rank for _ in range(target.rank)))


def compose1(g: KVOneMor, f: KVOneMor) -> KVOneMor:
    """``g o f``."""
    if f.target != g.source:
        raise BoundaryError(f"cannot compose {g} after {f}")
    gd, fd = g.dims, f.dims
    mid = f.target.rank
    dims = tuple(
        tuple(sum(gd[i][j] * fd[j][k] for j in range(mid)) for k in range(f.source.rank))
        for i in range(g.target.rank)
    )
    return KVOneMor(f.source, g.target, dims)


def compose_chain(chain: Sequence[KVOneMor], obj: KVObject | None = None) -> KVOneMor:
    """Right-nested composite ``c0 o (c1 o (... o ck))``; empty chain needs ``obj``."""
    if not chain:
        if obj is None:
            raise ValueError("empty chain needs an object")
        return identity1(obj)
    out = chain[-1]
    for f in reversed(chain[:-1]):
        out = compose1(f, out)
    return out


def permutation_onemor(perm: Sequence[int]) -> KVOneMor:
    """The 1-morphism with ``dims[perm[x]][x] = 1`` and 0 elsewhere."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(perm)} is not a permutation")
    a = KVObject(n)
    return KVOneMor(a, a, tuple(tuple(int(perm[x] == y) for x in range(n)) for y in range(n)))


def symmetry(a: KVObject, b: KVObject) -> KVOneMor:
    """The symmetry ``A (x) B -> B (x) A`` as a permutation 1-morphism."""
    m, n = a.rank, b.rank
    perm = [0] * (m * n)
    for i, j in product(range(m), range(n)):
        perm[i * n + j] = j * m + i
    p = permutation_onemor(perm)
    return KVOneMor(KVObject(m * n), KVObject(m * n), p.dims)


# --- cell bases of composites -----------------------------------------------------


def compose_labels(g: KVOneMor, f: KVOneMor, i: int, k: int) -> list[tuple[int, int, int]]:
    """Basis of the cell ``(i, k)`` of ``g o f`` as ``(j, tg, tf)`` in order."""
    out = []
    for j in range(f.target.rank):
        dg, df = g.dims[i][j], f.dims[j][k]
        for tg in range(dg):
            for tf in range(df):
                out.append((j, tg, tf))
    return out


def chain_labels(chain: Sequence[KVOneMor], i: int, l: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Basis of cell ``(i, l)`` of :func:`compose_chain` as ``(inner indices, factor indices)``.

    For ``chain = [c0, ..., c(k-1)]`` a label ``((j1, ..., j(k-1)), (t0, ..., t(k-1)))``
    means ``c_m`` contributes basis vector ``t_m`` of its cell ``(j_m, j_(m+1))``
    with ``j0 = i`` and ``jk = l``.  The order is lexicographic in
    ``(j1, t0, j2, t1, ..., j(k-1), t(k-2), t(k-1))``.
    """
    k = len(chain)
    if k == 0:
        return [((), ())] if i == l else []
    out = []

    def rec(m, cur, js, ts):
        if m == k - 1:
            for t in range(chain[m].dims[cur][l]):
                out.append((tuple(js), tuple(ts) + (t,)))
            return
        c = chain[m]
        for j in range(c.source.rank):
            d = c.dims[cur][j]
            if not d:
                continue
            for t in range(d):
                rec(m + 1, j, js + [j], ts + [t])

    rec(0, i, [], [])
    return out


# --- 2-morphisms ----------------------------------------------------------------


def identity2(f: KVOneMor, fld: Field = QQ) -> KVTwoMor:
    blocks = tuple(tuple(identity(d, fld) for d in row) for row in f.dims)
    return KVTwoMor(f, f, blocks, fld)


def vcompose2(b: KVTwoMor, a: KVTwoMor) -> KVTwoMor:
    """Vertical composite ``b . a`` (``a`` first)."""
    if a.target != b.source:
        raise BoundaryError(f"vertical composition mismatch: {a.target} vs {b.source}")
    if a.field != b.field:
        raise ShapeError("scalar mode mismatch")
    blocks = tuple(
        tuple(mat_mul(bb, ab) for bb, ab in zip(brow, arow)) for brow, arow in zip(b.blocks, a.blocks)
    )
    return KVTwoMor(a.source, b.target, blocks, a.field)


def hcompose2(b: KVTwoMor, a: KVTwoMor) -> KVTwoMor:
    """Horizontal composite ``b * a : g o f => g' o f'`` for ``a: f => f'``, ``b: g => g'``."""
    if a.source.target != b.source.source:
        raise BoundaryError("horizontal composition mismatch")
    if a.field != b.field:
        raise ShapeError("scalar mode mismatch")
    mid = a.source.target.rank
    blocks = tuple(
        tuple(
            direct_sum_all([kron(b.blocks[i][j], a.blocks[j][k]) for j in range(mid)], a.field)
            for k in range(a.source.source.rank)
        )
        for i in range(b.source.target.rank)
    )
    return KVTwoMor(compose1(b.source, a.source), compose1(b.target, a.target), blocks, a.field)


def whisker_left(g: KVOneMor, a: KVTwoMor) -> KVTwoMor:
    """``g * a``."""
    return hcompose2(identity2(g, a.field), a)


def whisker_right(b: KVTwoMor, f: KVOneMor) -> KVTwoMor:
    """``b * f``."""
    return hcompose2(b, identity2(f, b.field))


def associator(h: KVOneMor, g: KVOneMor, f: KVOneMor, fld: Field = QQ) -> KVTwoMor:
    """The reassociation ``(h o g) o f => h o (g o f)``.

    A permutation in every cell; the identity only when the summation over
    middle indices is trivial (for instance when every rank is 1).
    """
    hg, gf = compose1(h, g), compose1(g, f)
    src, tgt = compose1(hg, f), compose1(h, gf)
    entries = {}
    for i in range(h.target.rank):
        for l in range(f.source.rank):
            tpos = {}
            for pos, (j, th, tgf) in enumerate(compose_labels(h, gf, i, l)):
                k, tg, tf = compose_labels(g, f, j, l)[tgf]
                tpos[(j, k, th, tg, tf)] = pos
            cell = {}
            for pos, (k, thg, tf) in enumerate(compose_labels(hg, f, i, l)):
                j, th, tg = compose_labels(h, g, i, k)[thg]
                cell[(tpos[(j, k, th, tg, tf)], pos)] = 1
            entries[(i, l)] = cell
    return KVTwoMor.from_cells(src, tgt, entries, fld)


def invert_permutation2(p: KVTwoMor) -> KVTwoMor:
    """Inverse of a 2-morphism whose blocks are permutation matrices."""
    return KVTwoMor(p.target, p.source, tuple(tuple(m.T for m in row) for row in p.blocks), p.field)


# --- tensor product ----------------------------------------------------------------


def tensor(x, y):
    """Tensor product of two objects, 1-morphisms or 2-morphisms."""
    if isinstance(x, KVObject) and isinstance(y, KVObject):
        return KVObject(x.rank * y.rank)
    if isinstance(x, KVOneMor) and isinstance(y, KVOneMor):
        xs, ys = x.source.rank, y.source.rank
        xt, yt = x.target.rank, y.target.rank
        dims = tuple(
            tuple(x.dims[i][j] * y.dims[k][l] for j in range(xs) for l in range(ys))
            for i in range(xt)
            for k in range(yt)
        )
        return KVOneMor(tensor(x.source, y.source), tensor(x.target, y.target), dims)
    if isinstance(x, KVTwoMor) and isinstance(y, KVTwoMor):
        if x.field != y.field:
            raise ShapeError("scalar mode mismatch")
        xs, ys = x.source.source.rank, y.source.source.rank
        xt, yt = x.source.target.rank, y.source.target.rank
        blocks = tuple(
            tuple(kron(x.blocks[i][j], y.blocks[k][l]) for j in range(xs) for l in range(ys))
            for i in range(xt)
            for k in range(yt)
        )
        return KVTwoMor(tensor(x.source, y.source), tensor(x.target, y.target), blocks, x.field)
    raise TypeError(f"cannot tensor {type(x).__name__} with {type(y).__name__}")


def tensor_all(items):
    items = list(items)
    out = items[0]
    for it in items[1:]:
        out = tensor(out, it)
    return out


# --- duality ------------------------------------------------------------------------


def op(a: KVObject) -> KVObject:
    """The dual object; the canonical basis identifies it with ``a``."""
    return a


def duality_data(a: KVObject) -> tuple[KVObject, KVOneMor, KVOneMor]:
    """``(A^op, ev_A : A^op (x) A -> 1, coev_A : 1 -> A (x) A^op)``."""
    n = a.rank
    aa = KVObject(n * n)
    row = tuple(int(x == y) for x in range(n) for y in range(n))
    ev = KVOneMor(aa, UNIT, (row,))
    coev = KVOneMor(UNIT, aa, tuple((d,) for d in row))
    return op(a), ev, coev


def ev(a: KVObject) -> KVOneMor:
    return duality_data(a)[1]


def coev(a: KVObject) -> KVOneMor:
    return duality_data(a)[2]


def transpose1(f: KVOneMor) -> KVOneMor:
    return KVOneMor(f.target, f.source, tuple(zip(*f.dims)) if f.dims and f.dims[0] else
                    tuple(() for _ in range(f.source.rank)))


@dataclass(frozen=True, eq=False)
class Adjunction:
    """``left -| right`` with ``unit: id => right o left`` and ``counit: left o right => id``."""

    left: KVOneMor
    right: KVOneMor
    unit: KVTwoMor
    counit: KVTwoMor


def _adjunction(f: KVOneMor, g: KVOneMor, fld: Field) -> Adjunction:
    """The adjunction ``f -| g`` for ``g = transpose1(f)``, bases dual to each other."""
    a, b = f.source, f.target
    gf, fg = compose1(g, f), compose1(f, g)
    unit_cells = {}
    for j in range(a.rank):
        col = {}
        for pos, (i, tg, tf) in enumerate(compose_labels(g, f, j, j)):
            if tg == tf:
                col[(pos, 0)] = 1
        unit_cells[(j, j)] = col
    counit_cells = {}
    for i in range(b.rank):
        row = {}
        for pos, (j, tf, tg) in enumerate(compose_labels(f, g, i, i)):
            if tf == tg:
                row[(0, pos)] = 1
        counit_cells[(i, i)] = row
    unit = KVTwoMor.from_cells(identity1(a), gf, unit_cells, fld)
    counit = KVTwoMor.from_cells(fg, identity1(b), counit_cells, fld)
    return Adjunction(f, g, unit, counit)


def right_adjoint(f: KVOneMor, fld: Field = QQ) -> tuple[KVOneMor, KVTwoMor, KVTwoMor]:
    """``(f^r, eta: id_A => f^r o f, eps: f o f^r => id_B)``."""
    adj = _adjunction(f, transpose1(f), fld)
    return adj.right, adj.unit, adj.counit


def left_adjoint(f: KVOneMor, fld: Field = QQ) -> tuple[KVOneMor, KVTwoMor, KVTwoMor]:
    """``(f^l, eta: id_B => f o f^l, eps: f^l o f => id_A)``."""
    adj = _adjunction(transpose1(f), f, fld)
    return adj.left, adj.unit, adj.counit


@dataclass(frozen=True, eq=False)
class EvAdjoints:
    L: KVOneMor
    R: KVOneMor
    L_unit: KVTwoMor    # id_1 => ev o L
    L_counit: KVTwoMor  # L o ev => id
    R_unit: KVTwoMor    # id => R o ev
    R_counit: KVTwoMor  # ev o R => id_1


def ev_adjoints(a: KVObject, fld: Field = QQ) -> EvAdjoints:
    """Left and right adjoints of ``ev_A`` with their units and counits."""
    e = ev(a)
    L, l_unit, l_counit = left_adjoint(e, fld)
    R, r_unit, r_counit = right_adjoint(e, fld)
    return EvAdjoints(L, R, l_unit, l_counit, r_unit, r_counit)


def coev_adjoints(a: KVObject, fld: Field = QQ) -> EvAdjoints:
    """``L'_A -| coev_A -| R'_A``, stored in the same record shape as :func:`ev_adjoints`."""
    c = coev(a)
    Lp, l_unit, l_counit = left_adjoint(c, fld)
    Rp, r_unit, r_counit = right_adjoint(c, fld)
    return EvAdjoints(Lp, Rp, l_unit, l_counit, r_unit, r_counit)


def serre(a: KVObject) -> tuple[KVOneMor, KVOneMor]:
    """``(ell_A, r_A)``; both are the identity here (every object is Calabi-Yau)."""
    return identity1(a), identity1(a)


# --- checks used by tests and the verifier --------------------------------------------


def triangle_right(f: KVOneMor, fld: Field = QQ) -> tuple[KVTwoMor, KVTwoMor]:
    """The two triangle composites for ``f -| f^r``; both should be identities.

    Returns ``(on f, on f^r)``:
    ``f => f o (f^r o f) ~ (f o f^r) o f => f`` and
    ``f^r => (f^r o f) o f^r ~ f^r o (f o f^r) => f^r``.
    """
    fr, eta, eps = right_adjoint(f, fld)
    # f: id_f * eta, reassociate, eps * id_f
    s1 = whisker_left(f, eta)  # f o id => f o (fr o f)
    s2 = invert_permutation2(associator(f, fr, f, fld))  # f o (fr o f) => (f o fr) o f
    s3 = whisker_right(eps, f)  # (f o fr) o f => id o f
    on_f = vcompose2(s3, vcompose2(s2, s1))
    t1 = whisker_right(eta, fr)  # id o fr => (fr o f) o fr
    t2 = associator(fr, f, fr, fld)
    t3 = whisker_left(fr, eps)
    on_fr = vcompose2(t3, vcompose2(t2, t1))
    return on_f, on_fr


def triangle_left(f: KVOneMor, fld: Field = QQ) -> tuple[KVTwoMor, KVTwoMor]:
    """Triangle composites for ``f^l -| f``: ``(on f^l, on f)``."""
    fl, eta, eps = left_adjoint(f, fld)
    s1 = whisker_left(fl, eta)  # fl => fl o (f o fl)
    s2 = invert_permutation2(associator(fl, f, fl, fld))
    s3 = whisker_right(eps, fl)
    on_fl = vcompose2(s3, vcompose2(s2, s1))
    t1 = whisker_right(eta, f)  # f => (f o fl) o f
    t2 = associator(f, fl, f, fld)
    t3 = whisker_left(f, eps)
    on_f = vcompose2(t3, vcompose2(t2, t1))
    return on_fl, on_f


def is_identity2(x: KVTwoMor) -> bool:
    return x.source == x.target and all(m.is_identity() for row in x.blocks for m in row)
