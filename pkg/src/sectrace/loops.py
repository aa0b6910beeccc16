"""Closed strings of 1-morphisms and the linear maps between them.

A :class:`Loop` is a cyclic chain ``c0 o c1 o ... o c(k-1)`` of composable
1-morphisms; its vector space is ``Tr(compose_chain(chain))``.  A state is a
tuple of loops, whose space is the tensor product of the loop spaces (first
loop major).  An empty state is the ground field.

A basis label of a loop is ``(segs, ts)``: ``segs`` has ``k + 1`` entries,
``segs[m]`` is the index on the segment to the left of ``c_m`` and
``segs[k] == segs[0]`` closes the loop; ``ts[m]`` is the basis vector of the
cell ``(segs[m], segs[m+1])`` of ``c_m``.  The empty chain has ``segs = (j,)``.
Labels are ordered by ``segs[0]``, then as in :func:`kv2vect.chain_labels`,
which is exactly the diagonal layout of ``Tr``.

Every map here is either a 2-morphism whiskered into one loop, a rotation
(cyclic symmetry), or one of the saddle maps that cut a loop in two or merge
two loops; those last come from the units of ``L'_A -| coev_A`` and
``ev_A -| R_A`` and are Kronecker deltas on the touching segments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

from .kv2vect import BoundaryError, KVObject, KVOneMor, KVTwoMor, chain_labels, compose_chain
from .linalg import Field, Matrix


@dataclass(frozen=True)
class Loop:
    obj: KVObject
    chain: tuple[KVOneMor, ...]

    def __post_init__(self):
        chain = tuple(self.chain)
        object.__setattr__(self, "chain", chain)
        if not chain:
            return
        if chain[0].target != self.obj or chain[-1].source != self.obj:
            raise BoundaryError("loop does not start and end at its object")
        for g, f in zip(chain, chain[1:]):
            if g.source != f.target:
                raise BoundaryError(f"loop factors {g} and {f} do not compose")

    def __len__(self):
        return len(self.chain)

    def __repr__(self):
        return f"Loop({self.obj.rank}, {len(self.chain)} factors)"


State = tuple  # tuple[Loop, ...]


def _segs(a: int, inner: tuple, b: int, k: int) -> tuple:
    return (a,) + inner + (b,) if k else (a,)


@lru_cache(maxsize=4096)
def loop_basis(loop: Loop) -> tuple:
    out = []
    k = len(loop.chain)
    for j0 in range(loop.obj.rank):
        for inner, ts in chain_labels(loop.chain, j0, j0):
            out.append((_segs(j0, inner, j0, k), ts))
    return tuple(out)


@lru_cache(maxsize=4096)
def loop_index(loop: Loop) -> dict:
    return {lab: n for n, lab in enumerate(loop_basis(loop))}


@lru_cache(maxsize=1024)
def state_basis(state: State) -> tuple:
    return tuple(product(*(loop_basis(lp) for lp in state)))


@lru_cache(maxsize=1024)
def state_index(state: State) -> dict:
    return {lab: n for n, lab in enumerate(state_basis(state))}


def state_dim(state: State) -> int:
    n = 1
    for lp in state:
        n *= len(loop_basis(lp))
    return n


def _assemble(src: State, tgt: State, fn: Callable, fld: Field) -> Matrix:
    tidx = state_index(tgt)
    entries = {}
    for col, lab in enumerate(state_basis(src)):
        for tlab, v in fn(lab):
            key = (tidx[tlab], col)
            entries[key] = entries.get(key, 0) + v
    return Matrix.from_sparse(state_dim(tgt), state_dim(src), entries, fld)


def _on_loop(idx: int, per_loop: Callable):
    """Lift a single-loop label map to states, leaving other loops unchanged."""

    def fn(lab):
        for new, v in per_loop(lab[idx]):
            yield lab[:idx] + (new,) + lab[idx + 1:], v

    return fn


# --- substitution of a sub-chain ------------------------------------------------------


@lru_cache(maxsize=8192)
def _label_pos(chain: tuple, a: int, b: int) -> dict:
    return {lab: n for n, lab in enumerate(chain_labels(chain, a, b))}


def _columns(m: Matrix) -> dict:
    cols: dict = {}
    for i, j, v in m.nonzero():
        cols.setdefault(j, []).append((i, v))
    return cols


class Substitution:
    """Replace ``chain[s:s+l] = X`` by ``Y`` through ``theta: X => Y``.

    Works on the segment/factor labels of open chains and loops alike.
    """

    def __init__(self, chain: Sequence[KVOneMor], s: int, l: int, theta: KVTwoMor,
                 Y: Sequence[KVOneMor], obj: KVObject | None = None):
        chain = tuple(chain)
        X = chain[s:s + l]
        Y = tuple(Y)
        if not 0 <= s <= len(chain) - l:
            raise IndexError("sub-chain out of range")
        if s < len(chain):
            obj = chain[s].target
        elif chain:
            obj = chain[-1].source
        elif obj is None:
            raise ValueError("empty chain needs an object")
        if theta.source != compose_chain(X, obj) or theta.target != compose_chain(Y, obj):
            raise BoundaryError("2-morphism boundary does not match the substituted sub-chain")
        self.s, self.l = s, l
        self.X, self.Y = X, Y
        self.new_chain = chain[:s] + Y + chain[s + l:]
        self._cols = {}
        self._cells = {}
        self._theta = theta

    def _col(self, a, b):
        key = (a, b)
        if key not in self._cols:
            self._cols[key] = _columns(self._theta.blocks[a][b])
        return self._cols[key]

    def _cell(self, a, b):
        """Label positions of ``X`` and replacement segments/factors of ``Y`` on cell ``(a, b)``."""
        key = (a, b)
        if key not in self._cells:
            k = len(self.Y)
            ys = [(_segs(a, yin, b, k), yts) for yin, yts in chain_labels(self.Y, a, b)]
            self._cells[key] = (_label_pos(self.X, a, b), ys, self._col(a, b))
        return self._cells[key]

    def apply(self, segs: tuple, ts: tuple):
        s, l = self.s, self.l
        a, b = segs[s], segs[s + l]
        xpos, ys, cols = self._cell(a, b)
        pos = xpos.get((segs[s + 1:s + l] if l else (), ts[s:s + l]))
        if pos is None:
            return
        head, tail = segs[:s], segs[s + l + 1:]
        thead, ttail = ts[:s], ts[s + l:]
        for row, v in cols.get(pos, ()):
            yseg, yts = ys[row]
            yield (head + yseg + tail, thead + yts + ttail), v


# --- operations on states ---------------------------------------------------------------


def whisker(state: State, idx: int, s: int, l: int, theta: KVTwoMor, Y: Sequence[KVOneMor],
            fld: Field) -> tuple[State, Matrix]:
    """Apply ``theta`` to factors ``s .. s+l-1`` of loop ``idx`` (no wrap-around)."""
    lp = state[idx]
    sub = Substitution(lp.chain, s, l, theta, Y, obj=lp.obj)
    new_loop = Loop(lp.obj if (s > 0 or not Y) else Y[0].target, sub.new_chain)
    new_state = state[:idx] + (new_loop,) + state[idx + 1:]

    def per(lab):
        yield from sub.apply(*lab)

    return new_state, _assemble(state, new_state, _on_loop(idx, per), fld)


def rotate(state: State, idx: int, r: int, fld: Field) -> tuple[State, Matrix]:
    """Cyclic symmetry ``Tr(P o Q) -> Tr(Q o P)`` with ``P = chain[:r]``."""
    lp = state[idx]
    k = len(lp.chain)
    if not 0 <= r <= k:
        raise IndexError("rotation out of range")
    if r in (0, k):
        new_loop = lp
    else:
        new_loop = Loop(lp.chain[r].target, lp.chain[r:] + lp.chain[:r])
    new_state = state[:idx] + (new_loop,) + state[idx + 1:]

    def per(lab):
        segs, ts = lab
        if r in (0, k):
            yield lab, 1
            return
        yield (segs[r:k] + segs[:r] + (segs[r],), ts[r:] + ts[:r]), 1

    return new_state, _assemble(state, new_state, _on_loop(idx, per), fld)


def cut(state: State, idx: int, p: int, q: int, fld: Field, inner_first: bool = True) -> tuple[State, Matrix]:
    """Split loop ``idx`` at segments ``p <= q`` into ``chain[p:q]`` and the rest.

    The two resulting loops replace loop ``idx``; ``inner_first`` puts
    ``chain[p:q]`` first.
    """
    lp = state[idx]
    k = len(lp.chain)
    if not 0 <= p <= q <= k:
        raise IndexError("cut segments out of range")
    c = lp.chain
    seg_obj = c[p].target if p < k else lp.obj
    inner = Loop(seg_obj, c[p:q])
    outer = Loop(lp.obj if p > 0 or q == k else c[q].target, c[:p] + c[q:])
    pair = (inner, outer) if inner_first else (outer, inner)
    new_state = state[:idx] + pair + state[idx + 1:]

    def fn(lab):
        segs, ts = lab[idx]
        if segs[p] != segs[q]:
            return
        lin = (segs[p:q + 1], ts[p:q])
        lout = (segs[:p] + segs[q:], ts[:p] + ts[q:])
        new = (lin, lout) if inner_first else (lout, lin)
        yield lab[:idx] + new + lab[idx + 1:], 1

    return new_state, _assemble(state, new_state, fn, fld)


def merge(state: State, i1: int, p: int, i2: int, q: int, fld: Field) -> tuple[State, Matrix]:
    """Join loops ``i1`` and ``i2`` at segments ``p`` and ``q``.

    The merged chain ``c[:p] + d[q:] + d[:q] + c[p:]`` replaces the two loops
    at position ``min(i1, i2)``.
    """
    if i1 == i2:
        raise ValueError("merge needs two distinct loops")
    c, d = state[i1], state[i2]
    k1, k2 = len(c.chain), len(d.chain)
    if not (0 <= p <= k1 and 0 <= q <= k2):
        raise IndexError("merge segments out of range")
    if c.obj != d.obj and not (k1 and k2):
        raise BoundaryError("loops live on different objects")
    q = q % k2 if k2 else 0
    chain = c.chain[:p] + d.chain[q:] + d.chain[:q] + c.chain[p:]
    new_loop = Loop(c.obj if (p > 0 or not chain) else chain[0].target, chain)
    lo, hi = sorted((i1, i2))
    rest = [lp for n, lp in enumerate(state) if n not in (i1, i2)]
    rest.insert(lo, new_loop)
    new_state = tuple(rest)

    def fn(lab):
        (s1, t1), (s2, t2) = lab[i1], lab[i2]
        if s1[p] != s2[q]:
            return
        segs = s1[:p] + s2[q:k2] + s2[:q] + s1[p:]
        ts = t1[:p] + t2[q:] + t2[:q] + t1[p:]
        others = [x for n, x in enumerate(lab) if n not in (i1, i2)]
        others.insert(lo, (segs, ts))
        yield tuple(others), 1

    return new_state, _assemble(state, new_state, fn, fld)


def birth(state: State, obj: KVObject, fld: Field, at: int | None = None) -> tuple[State, Matrix]:
    """Unit ``1 -> ev_A o L_A = Tr(id_A)``: a new empty loop, sum of all basis vectors."""
    at = len(state) if at is None else at
    lp = Loop(obj, ())
    new_state = state[:at] + (lp,) + state[at:]

    def fn(lab):
        for j in range(obj.rank):
            yield lab[:at] + (((j,), ()),) + lab[at:], 1

    return new_state, _assemble(state, new_state, fn, fld)


def death(state: State, idx: int, fld: Field) -> tuple[State, Matrix]:
    """Counit ``ev_A o R_A = Tr(id_A) -> 1`` on an empty loop."""
    if state[idx].chain:
        raise ValueError("only a loop without factors can be capped off")
    new_state = state[:idx] + state[idx + 1:]

    def fn(lab):
        yield lab[:idx] + lab[idx + 1:], 1

    return new_state, _assemble(state, new_state, fn, fld)


def permute(state: State, order: Sequence[int], fld: Field) -> tuple[State, Matrix]:
    """Reorder tensor factors: new position ``n`` holds old loop ``order[n]``."""
    new_state = tuple(state[o] for o in order)

    def fn(lab):
        yield tuple(lab[o] for o in order), 1

    return new_state, _assemble(state, new_state, fn, fld)


class Pipeline:
    """Accumulates a composite of state maps, keeping the current state."""

    def __init__(self, state: State, fld: Field):
        self.start = state
        self.state = state
        self.fld = fld
        self.steps: list[tuple[str, Matrix]] = []

    def _push(self, name, result):
        self.state, m = result
        self.steps.append((name, m))
        return self

    def whisker(self, idx, s, l, theta, Y, name="whisker"):
        return self._push(name, whisker(self.state, idx, s, l, theta, Y, self.fld))

    def rotate(self, idx, r, name="rotate"):
        return self._push(name, rotate(self.state, idx, r, self.fld))

    def cut(self, idx, p, q, inner_first=True, name="cut"):
        return self._push(name, cut(self.state, idx, p, q, self.fld, inner_first))

    def merge(self, i1, p, i2, q, name="merge"):
        return self._push(name, merge(self.state, i1, p, i2, q, self.fld))

    def birth(self, obj, name="birth"):
        return self._push(name, birth(self.state, obj, self.fld))

    def death(self, idx, name="death"):
        return self._push(name, death(self.state, idx, self.fld))

    def permute(self, order, name="permute"):
        return self._push(name, permute(self.state, order, self.fld))

    def matrix(self) -> Matrix:
        from .linalg import identity, mat_mul
        out = identity(state_dim(self.start), self.fld)
        for _, m in self.steps:
            out = mat_mul(m, out)
        return out
