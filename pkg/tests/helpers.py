"""Hypothesis strategies and small builders shared by the test modules."""

from fractions import Fraction

from hypothesis import strategies as st

from sectrace.kv2vect import KVObject, KVOneMor, KVTwoMor, compose1
from sectrace.linalg import GF, QQ, Matrix
from sectrace.trace import CommutingPair

FIELDS = [QQ, GF(5), GF(7)]


def grid(rows):
    return KVOneMor.from_dims(rows)


def mat(rows, fld=QQ, ncols=None):
    return Matrix.from_rows(rows, fld, ncols=ncols)


scalars = st.integers(-5, 5)
fractions = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))


@st.composite
def matrices(draw, rows=None, cols=None, fld=QQ, elems=scalars):
    r = draw(st.integers(0, 4)) if rows is None else rows
    c = draw(st.integers(0, 4)) if cols is None else cols
    return Matrix.from_rows([[fld(draw(elems)) for _ in range(c)] for _ in range(r)], fld, ncols=c)


@st.composite
def objects(draw, max_rank=3):
    return KVObject(draw(st.integers(1, max_rank)))


@st.composite
def onemors(draw, source=None, target=None, max_rank=3, max_dim=3):
    s = source or draw(objects(max_rank))
    t = target or draw(objects(max_rank))
    return KVOneMor(s, t, tuple(tuple(draw(st.integers(0, max_dim)) for _ in range(s.rank)) for _ in range(t.rank)))


@st.composite
def endos(draw, obj=None, max_rank=3, max_dim=3):
    a = obj or draw(objects(max_rank))
    return draw(onemors(a, a, max_rank, max_dim))


@st.composite
def twomors(draw, source, target, fld=QQ):
    blocks = tuple(
        tuple(draw(matrices(target.dims[i][j], source.dims[i][j], fld)) for j in range(source.source.rank))
        for i in range(source.target.rank)
    )
    return KVTwoMor(source, target, blocks, fld)


@st.composite
def pairs(draw, fld=QQ, max_rank=3, max_dim=3):
    a = draw(objects(max_rank))
    pa = draw(onemors(a, a, max_rank, max_dim))
    pb = draw(onemors(a, a, max_rank, max_dim))
    alpha = draw(twomors(compose1(pa, pb), compose1(pb, pa), fld))
    return CommutingPair(pa, pb, alpha)


@st.composite
def trace_instances(draw, fld=QQ, max_rank=3, max_dim=2):
    """``(psi, alpha, phi, phi')`` with ``alpha: psi o phi => phi' o psi``."""
    a, b = draw(objects(max_rank)), draw(objects(max_rank))
    phi = draw(onemors(a, a, max_rank, max_dim))
    phi_p = draw(onemors(b, b, max_rank, max_dim))
    psi = draw(onemors(a, b, max_rank, max_dim))
    alpha = draw(twomors(compose1(psi, phi), compose1(phi_p, psi), fld))
    return psi, alpha, phi, phi_p
