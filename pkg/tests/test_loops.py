import pytest
from hypothesis import given, strategies as st

from helpers import endos, grid, objects
from sectrace import loops
from sectrace.kv2vect import BoundaryError, KVObject, identity2
from sectrace.linalg import QQ, identity, mat_mul, mat_trace
from sectrace.trace import trace_of


@st.composite
def loop_states(draw, max_len=4):
    a = draw(objects(3))
    chain = tuple(draw(endos(a, max_dim=2)) for _ in range(draw(st.integers(0, max_len))))
    return (loops.Loop(a, chain),)


def test_basis_matches_trace_layout():
    phi = grid([[2, 1], [3, 4]])
    lp = loops.Loop(phi.source, (phi,))
    assert loops.state_dim((lp,)) == trace_of(phi).dim == 6
    assert loops.state_dim(()) == 1
    assert loops.state_dim((loops.Loop(KVObject(3), ()),)) == 3


def test_loop_validation():
    with pytest.raises(BoundaryError):
        loops.Loop(KVObject(2), (grid([[1, 1, 1], [1, 1, 1]]),))


def test_birth_then_death_is_rank():
    st0 = ()
    s1, b = loops.birth(st0, KVObject(4), QQ)
    _, d = loops.death(s1, 0, QQ)
    assert mat_mul(d, b)[0, 0] == 4


@given(loop_states(), st.data())
def test_rotations_compose(state, data):
    k = len(state[0].chain)
    r1 = data.draw(st.integers(0, k))
    r2 = data.draw(st.integers(0, k))
    s1, m1 = loops.rotate(state, 0, r1, QQ)
    _, m2 = loops.rotate(s1, 0, r2, QQ)
    _, m12 = loops.rotate(state, 0, (r1 + r2) % k if k else 0, QQ)
    assert mat_mul(m2, m1) == m12


@given(loop_states())
def test_full_turn_is_identity(state):
    k = len(state[0].chain)
    m = identity(loops.state_dim(state))
    cur = state
    for _ in range(k):
        cur, step = loops.rotate(cur, 0, 1, QQ)
        m = mat_mul(step, m)
    assert m.is_identity()


@given(loop_states(), st.data())
def test_cut_then_merge_projects(state, data):
    k = len(state[0].chain)
    p = data.draw(st.integers(0, k))
    q = data.draw(st.integers(p, k))
    s1, c = loops.cut(state, 0, p, q, QQ, inner_first=True)
    s2, m = loops.merge(s1, 1, p, 0, 0, QQ)
    assert s2 == state
    # only labels meeting on equal segments survive: a diagonal 0/1 projection
    proj = mat_mul(m, c)
    assert all(i == j and v == 1 for i, j, v in proj.nonzero())
    assert mat_mul(c, m) == mat_mul(c, mat_mul(m, mat_mul(c, m)))


@given(loop_states())
def test_identity_whisker(state):
    chain = state[0].chain
    if not chain:
        return
    theta = identity2(chain[0], QQ)
    s1, m = loops.whisker(state, 0, 0, 1, theta, (chain[0],), QQ)
    assert s1 == state and m.is_identity()


def test_permute_round_trip():
    a = KVObject(2)
    st0 = (loops.Loop(a, (grid([[1, 2], [0, 1]]),)), loops.Loop(a, ()))
    s1, p = loops.permute(st0, (1, 0), QQ)
    s2, q = loops.permute(s1, (1, 0), QQ)
    assert s2 == st0 and mat_mul(q, p).is_identity()


def test_pipeline_trace_of_rotation():
    # Tr of the rotation of the single-factor loop of phi: Tr(phi) is fixed pointwise
    phi = grid([[2, 1], [3, 4]])
    p = loops.Pipeline((loops.Loop(phi.source, (phi,)),), QQ).rotate(0, 1)
    assert mat_trace(p.matrix()) == 6
