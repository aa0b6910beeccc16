"""Primary and secondary traces in the 2-vector-space backend.

Every map is assembled from the loop operations in :mod:`sectrace.loops`:
whiskered 2-morphisms, cyclic rotations and the saddle maps.  Intermediate
composites are kept as flat chains, so no associators are needed.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import loops
from .kv2vect import (
    BoundaryError,
    KVObject,
    KVOneMor,
    KVTwoMor,
    chain_labels,
    coev,
    compose1,
    compose_labels,
    compose_chain,
    ev,
    identity1,
    right_adjoint,
    tensor,
    vcompose2,
)
from .linalg import QQ, Field, Matrix, direct_sum_all, identity, kron, mat_mul, mat_trace


class TraceIdentityError(AssertionError):
    """Two routes to the same quantity disagreed."""


@dataclass(frozen=True)
class TraceSpace:
    dim: int
    block_layout: tuple[tuple[int, int], ...]


@dataclass(frozen=True, eq=False)
class CommutingPair:
    """Endomorphisms ``phi_a, phi_b`` of one object with ``alpha: a o b => b o a``."""

    phi_a: KVOneMor
    phi_b: KVOneMor
    alpha: KVTwoMor

    def __post_init__(self):
        a, b = self.phi_a, self.phi_b
        if not (a.is_endo and b.is_endo and a.source == b.source):
            raise BoundaryError("a commuting pair needs two endomorphisms of one object")
        if self.alpha.source != compose1(a, b) or self.alpha.target != compose1(b, a):
            raise BoundaryError("alpha must go from phi_a o phi_b to phi_b o phi_a")

    @property
    def obj(self) -> KVObject:
        return self.phi_a.source

    @property
    def field(self) -> Field:
        return self.alpha.field


def _endo(phi: KVOneMor):
    if not phi.is_endo:
        raise BoundaryError(f"{phi} is not an endomorphism")


def _single(phi: KVOneMor) -> tuple:
    return (loops.Loop(phi.target, (phi,)),)


# --- primary trace ------------------------------------------------------------------------


def trace_of(phi: KVOneMor) -> TraceSpace:
    _endo(phi)
    a = phi.source
    n = a.rank
    # ev o (phi (x) id) o coev is a 1x1 grid; count its summands per diagonal index
    chain = (ev(a), tensor(phi, identity1(a)), coev(a))
    counts = [0] * n
    for inner, _ in chain_labels(chain, 0, 0):
        x, y = divmod(inner[0], n)
        counts[x] += 1
    via_composite = TraceSpace(compose_chain(chain).dims[0][0], tuple(enumerate(counts)))
    layout = tuple((i, phi.dims[i][i]) for i in range(n))
    direct = TraceSpace(sum(d for _, d in layout), layout)
    if via_composite != direct:
        raise TraceIdentityError(f"trace layouts disagree: {via_composite} vs {direct}")
    return direct


def trace_2mor(theta: KVTwoMor) -> Matrix:
    _endo(theta.source)
    _endo(theta.target)
    n = theta.source.source.rank
    return direct_sum_all([theta.blocks[i][i] for i in range(n)], theta.field)


def cyclic(phi: KVOneMor, psi: KVOneMor, fld: Field = QQ) -> Matrix:
    """``m(phi, psi): Tr(phi o psi) -> Tr(psi o phi)``."""
    if phi.source != psi.target or psi.source != phi.target:
        raise BoundaryError("cyclic symmetry needs phi: A -> B and psi: B -> A")
    state = (loops.Loop(phi.target, (phi, psi)),)
    return loops.rotate(state, 0, 1, fld)[1]


def bv_check(phi: KVOneMor, fld: Field = QQ) -> Matrix:
    """The automorphism ``gamma_id^-1 o gamma_id`` of ``Tr(id_A)`` for ``A`` the object of ``phi``.

    ``gamma_Psi`` identifies ``Tr(Psi)`` with ``m(id, Psi)``; both are computed
    as cyclic symmetries and composed.
    """
    _endo(phi)
    i = identity1(phi.source)
    g = cyclic(i, i, fld)
    return mat_mul(g.T, g)


# --- trace maps ---------------------------------------------------------------------------


def _check_commuting(psi, alpha, phi, phi_prime):
    _endo(phi)
    _endo(phi_prime)
    if psi.source != phi.source or psi.target != phi_prime.source:
        raise BoundaryError("psi must go from the object of phi to that of phi'")
    if alpha.source != compose1(psi, phi) or alpha.target != compose1(phi_prime, psi):
        raise BoundaryError("alpha must go from psi o phi to phi' o psi")


def trace_map(psi: KVOneMor, alpha: KVTwoMor, phi: KVOneMor, phi_prime: KVOneMor) -> Matrix:
    """``Tr(phi) -> Tr(phi')``: unit of ``psi``, ``alpha``, rotation, counit of ``psi``."""
    _check_commuting(psi, alpha, phi, phi_prime)
    fld = alpha.field
    psi_r, eta, eps = right_adjoint(psi, fld)
    p = loops.Pipeline(_single(phi), fld)
    p.whisker(0, 0, 0, eta, (psi_r, psi), "unit")          # psi^r psi phi
    p.whisker(0, 1, 2, alpha, (phi_prime, psi), "alpha")   # psi^r phi' psi
    p.rotate(0, 1, "cyclic")                               # phi' psi psi^r
    p.whisker(0, 1, 2, eps, (), "counit")                  # phi'
    return p.matrix()


def open_composite(chain, steps, fld: Field, obj: KVObject | None = None) -> tuple[tuple, KVTwoMor]:
    """Vertical composite of substitutions on an open chain.

    ``steps`` is a list of ``(s, l, theta, Y)``; returns the final chain and the
    2-morphism ``compose_chain(chain) => compose_chain(final)``.
    """
    chain = tuple(chain)
    start = chain
    result = None
    for s, l, theta, Y in steps:
        sub = loops.Substitution(chain, s, l, theta, Y, obj)
        new = sub.new_chain
        src, tgt = compose_chain(chain, obj), compose_chain(new, obj)
        cells = {}
        for i in range(src.target.rank):
            for k in range(src.source.rank):
                tpos = {lab: n for n, lab in enumerate(chain_labels(new, i, k))}
                cell = {}
                for col, (inner, ts) in enumerate(chain_labels(chain, i, k)):
                    segs = (i,) + inner + (k,) if chain else (i,)
                    for (nsegs, nts), v in sub.apply(segs, ts):
                        ninner = nsegs[1:-1] if new else ()
                        key = (tpos[(ninner, nts)], col)
                        cell[key] = cell.get(key, 0) + v
                cells[(i, k)] = cell
        step = KVTwoMor.from_cells(src, tgt, cells, fld)
        result = step if result is None else vcompose2(step, result)
        chain = new
    if result is None:
        from .kv2vect import identity2
        result = identity2(compose_chain(start, obj), fld)
    return chain, result


def trace_map_alt(psi: KVOneMor, alpha: KVTwoMor, phi: KVOneMor, phi_prime: KVOneMor) -> Matrix:
    """Same map routed through ``beta: phi o psi^r => psi^r o phi'``."""
    _check_commuting(psi, alpha, phi, phi_prime)
    fld = alpha.field
    psi_r, eta, eps = right_adjoint(psi, fld)
    _, beta = open_composite(
        (phi, psi_r),
        [
            (0, 0, eta, (psi_r, psi)),          # psi^r psi phi psi^r
            (1, 2, alpha, (phi_prime, psi)),    # psi^r phi' psi psi^r
            (2, 2, eps, ()),                    # psi^r phi'
        ],
        fld,
    )
    p = loops.Pipeline(_single(phi), fld)
    p.whisker(0, 1, 0, eta, (psi_r, psi), "unit")        # phi psi^r psi
    p.whisker(0, 0, 2, beta, (psi_r, phi_prime), "beta")  # psi^r phi' psi
    p.rotate(0, 1, "cyclic")                             # phi' psi psi^r
    p.whisker(0, 1, 2, eps, (), "counit")
    return p.matrix()


def induced_commutor(pair: CommutingPair, closed_form: bool = False) -> KVTwoMor:
    """``alpha_{b,a^r}: phi_b o phi_a^r => phi_a^r o phi_b``: unit of ``phi_a``, ``alpha``, counit.

    ``closed_form`` skips the intermediate four-factor chain, which is large
    when ``phi_a`` is itself a composite; see :func:`induced_commutor_closed`.
    """
    if closed_form:
        return induced_commutor_closed(pair)
    fld = pair.field
    a, b = pair.phi_a, pair.phi_b
    a_r, eta, eps = right_adjoint(a, fld)
    _, out = open_composite(
        (b, a_r),
        [
            (0, 0, eta, (a_r, a)),       # a^r a b a^r
            (1, 2, pair.alpha, (b, a)),  # a^r b a a^r
            (2, 2, eps, ()),             # a^r b
        ],
        fld,
    )
    return out


def induced_commutor_closed(pair: CommutingPair) -> KVTwoMor:
    """:func:`induced_commutor` read off from ``alpha`` directly.

    The unit and counit are delta patterns, so the composite is a re-indexing:
    the entry from ``(j, t, v)`` to ``(y, s, w)`` in cell ``(i, k)`` is the
    entry of ``alpha`` in cell ``(y, j)`` from ``(i, s, t)`` to ``(k, w, v)``.
    """
    fld = pair.field
    a, b = pair.phi_a, pair.phi_b
    a_r = right_adjoint(a, fld)[0]
    src, tgt = compose1(b, a_r), compose1(a_r, b)
    n = a.source.rank
    spos = {(i, k): {lab: m for m, lab in enumerate(compose_labels(b, a_r, i, k))} for i in range(n) for k in range(n)}
    tpos = {(i, k): {lab: m for m, lab in enumerate(compose_labels(a_r, b, i, k))} for i in range(n) for k in range(n)}
    cells: dict = {}
    for y in range(n):
        for j in range(n):
            blk = pair.alpha.blocks[y][j]
            if not blk.rows or not blk.cols:
                continue
            cols, rows = compose_labels(a, b, y, j), compose_labels(b, a, y, j)
            for r, c, v in blk.nonzero():
                i, s, t = cols[c]
                k, w, u = rows[r]
                cells.setdefault((i, k), {})[(tpos[(i, k)][(y, s, w)], spos[(i, k)][(j, t, u)])] = v
    return KVTwoMor.from_cells(src, tgt, cells, fld)


def mate(psi: KVOneMor, alpha: KVTwoMor, phi: KVOneMor, phi_prime: KVOneMor) -> KVTwoMor:
    """``alpha^r: psi^r o phi'^r => phi^r o psi^r`` built from units and counits."""
    _check_commuting(psi, alpha, phi, phi_prime)
    fld = alpha.field
    psi_r, eta_psi, eps_psi = right_adjoint(psi, fld)
    phi_r, eta_phi, _ = right_adjoint(phi, fld)
    pp_r, _, eps_pp = right_adjoint(phi_prime, fld)
    _, out = open_composite(
        (psi_r, pp_r),
        [
            (0, 0, eta_phi, (phi_r, phi)),        # phi^r phi psi^r phi'^r
            (1, 0, eta_psi, (psi_r, psi)),        # phi^r psi^r psi phi psi^r phi'^r
            (2, 2, alpha, (phi_prime, psi)),      # phi^r psi^r phi' psi psi^r phi'^r
            (3, 2, eps_psi, ()),                  # phi^r psi^r phi' phi'^r
            (2, 2, eps_pp, ()),                   # phi^r psi^r
        ],
        fld,
    )
    return out


# --- duality of trace spaces --------------------------------------------------------------


def trace_duality(phi: KVOneMor, fld: Field = QQ) -> tuple[Matrix, Matrix]:
    """``coev: k -> Tr(phi) (x) Tr(phi^r)`` and ``ev: Tr(phi^r) (x) Tr(phi) -> k``."""
    _endo(phi)
    a = phi.source
    phi_r, eta, eps = right_adjoint(phi, fld)
    c = loops.Pipeline((), fld)
    c.birth(a)                                   # Tr(id)
    c.whisker(0, 0, 0, eta, (phi_r, phi))        # Tr(phi^r phi)
    c.cut(0, 1, 2, inner_first=True)             # Tr(phi) (x) Tr(phi^r)
    e = loops.Pipeline((loops.Loop(a, (phi_r,)), loops.Loop(a, (phi,))), fld)
    e.merge(0, 0, 1, 0)                          # Tr(phi phi^r)
    e.whisker(0, 0, 2, eps, ())                  # Tr(id)
    e.death(0)
    return c.matrix(), e.matrix()


def snake_identities(phi: KVOneMor, fld: Field = QQ) -> tuple[bool, bool]:
    """Both zig-zag composites of :func:`trace_duality` are identities."""
    c, e = trace_duality(phi, fld)
    v = w = trace_of(phi).dim  # Tr(phi^r) has the same dimension
    first = mat_mul(kron(identity(v, fld), e), kron(c, identity(v, fld)))    # V -> V V* V -> V
    second = mat_mul(kron(e, identity(w, fld)), kron(identity(w, fld), c))   # V* -> V* V V* -> V*
    return first.is_identity(), second.is_identity()


def swap_matrix(m: int, n: int, fld: Field = QQ) -> Matrix:
    """``V (x) W -> W (x) V`` for ``dim V = m``, ``dim W = n``."""
    return Matrix.from_sparse(m * n, m * n, {(j * m + i, i * n + j): 1 for i in range(m) for j in range(n)}, fld)


def pairing_trace(f: Matrix, coev_m: Matrix, ev_m: Matrix) -> object:
    """Trace of ``f: V -> V`` as ``ev o swap o (f (x) id) o coev`` for a dual pair."""
    fld = f.field
    n = f.rows  # the dual space has the same dimension
    x = mat_mul(kron(f, identity(n, fld)), coev_m)
    x = mat_mul(swap_matrix(n, n, fld), x)
    return mat_mul(ev_m, x)[0, 0]


def _iterated_trace(f: Matrix, phi: KVOneMor, fld: Field):
    c, e = trace_duality(phi, fld)
    via_pairing = pairing_trace(f, c, e)
    plain = mat_trace(f)
    if via_pairing != plain:
        raise TraceIdentityError(f"pairing trace {via_pairing} differs from matrix trace {plain}")
    return plain


def secondary_trace_b(pair: CommutingPair):
    """Trace of ``phi(phi_a, alpha)`` acting on ``Tr(phi_b)``."""
    f = trace_map(pair.phi_a, pair.alpha, pair.phi_b, pair.phi_b)
    return _iterated_trace(f, pair.phi_b, pair.field)


def secondary_trace_a(pair: CommutingPair, closed_form: bool = False):
    """Trace of ``phi(phi_b, alpha_{b,a^r})`` acting on ``Tr(phi_a^r)``."""
    fld = pair.field
    a_r = right_adjoint(pair.phi_a, fld)[0]
    f = trace_map(pair.phi_b, induced_commutor(pair, closed_form), a_r, a_r)
    return _iterated_trace(f, a_r, fld)


# --- shearing -----------------------------------------------------------------------------


def shear_commutor(pair: CommutingPair) -> KVTwoMor:
    """``alpha' = alpha o_h id_b: (a o b) o b => b o (a o b)`` on opaque composites."""
    fld = pair.field
    a, b = pair.phi_a, pair.phi_b
    ab = compose1(a, b)
    # go through the flat chain a b b, apply alpha on the first two factors
    _, flat = open_composite((a, b, b), [(0, 2, pair.alpha, (b, a))], fld)
    src, tgt = compose1(ab, b), compose1(b, ab)
    n = a.source.rank
    cells = {}
    for i in range(n):
        for k in range(n):
            # (a o b) o b  <->  a b b
            src_pos = {}
            for pos, (j, tab, tb) in enumerate(_labels2(ab, b, i, k)):
                jj, ta, tb1 = _labels2(a, b, i, j)[tab]
                src_pos[((jj, j), (ta, tb1, tb))] = pos
            tgt_pos = {}
            for pos, (j, tb, tab) in enumerate(_labels2(b, ab, i, k)):
                jj, ta, tb2 = _labels2(a, b, j, k)[tab]
                tgt_pos[((j, jj), (tb, ta, tb2))] = pos
            flat_src = chain_labels((a, b, b), i, k)
            flat_tgt = chain_labels((b, a, b), i, k)
            block = flat.blocks[i][k]
            cell = {}
            for r, c, v in block.nonzero():
                cell[(tgt_pos[flat_tgt[r]], src_pos[flat_src[c]])] = v
            cells[(i, k)] = cell
    return KVTwoMor.from_cells(src, tgt, cells, fld)


def _labels2(g, f, i, k):
    return compose_labels(g, f, i, k)


def sheared_pair(pair: CommutingPair) -> CommutingPair:
    return CommutingPair(compose1(pair.phi_a, pair.phi_b), pair.phi_b, shear_commutor(pair))


def shear_map(pair: CommutingPair) -> Matrix:
    """``phi(phi_a o phi_b, alpha')`` on ``Tr(phi_b)``."""
    sp = sheared_pair(pair)
    return trace_map(sp.phi_a, sp.alpha, pair.phi_b, pair.phi_b)


# --- dual trace maps ----------------------------------------------------------------------


def pairing_adjoint(f: Matrix, src_phi: KVOneMor, tgt_phi: KVOneMor, fld: Field = QQ) -> Matrix:
    """Adjoint of ``f: Tr(src) -> Tr(tgt)`` under the trace dualities: ``Tr(tgt^r) -> Tr(src^r)``."""
    coev_v, _ = trace_duality(src_phi, fld)  # k -> V (x) V*
    _, ev_w = trace_duality(tgt_phi, fld)    # W* (x) W -> k
    vs, ws = f.cols, f.rows  # dual spaces have the same dimensions
    x = kron(identity(ws, fld), coev_v)                        # W* -> W* V V*
    x = mat_mul(kron(kron(identity(ws, fld), f), identity(vs, fld)), x)  # -> W* W V*
    return mat_mul(kron(ev_w, identity(vs, fld)), x)           # -> V*


def dual_trace_map(psi: KVOneMor, alpha: KVTwoMor, phi: KVOneMor, phi_prime: KVOneMor) -> Matrix:
    """``phi(psi^r, alpha^r): Tr(phi'^r) -> Tr(phi^r)``, checked against the pairing adjoint."""
    fld = alpha.field
    psi_r = right_adjoint(psi, fld)[0]
    phi_r = right_adjoint(phi, fld)[0]
    pp_r = right_adjoint(phi_prime, fld)[0]
    direct = trace_map(psi_r, mate(psi, alpha, phi, phi_prime), pp_r, phi_r)
    adj = pairing_adjoint(trace_map(psi, alpha, phi, phi_prime), phi, phi_prime, fld)
    if direct != adj:
        raise TraceIdentityError("dual trace map differs from the pairing adjoint")
    return direct
