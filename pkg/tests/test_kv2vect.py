import pytest
from hypothesis import given, strategies as st

from helpers import FIELDS, endos, grid, mat, objects, onemors, twomors
from sectrace.kv2vect import (
    BoundaryError,
    KVObject,
    KVTwoMor,
    associator,
    coev,
    coev_adjoints,
    compose1,
    compose_chain,
    duality_data,
    ev,
    ev_adjoints,
    hcompose2,
    identity1,
    identity2,
    is_identity2,
    left_adjoint,
    right_adjoint,
    serre,
    symmetry,
    tensor,
    transpose1,
    triangle_left,
    triangle_right,
    vcompose2,
)
from sectrace.linalg import QQ, identity

UNIT = KVObject(1)


def test_compose1_examples():
    f = grid([[1, 2], [0, 3]])
    assert compose1(identity1(KVObject(2)), f) == f
    assert compose1(grid([[3]]), grid([[2]])).dims == ((6,),)
    ones = grid([[1, 1], [1, 1]])
    assert compose1(ones, ones).dims == ((2, 2), (2, 2))
    with pytest.raises(BoundaryError):
        compose1(grid([[1, 1]]), grid([[1, 1]]))


def test_hcompose2_examples():
    f = grid([[2]])
    a = KVTwoMor(f, f, ((mat([[1, 2], [3, 4]]),),), QQ)
    assert hcompose2(identity2(identity1(UNIT)), a) == a
    g = grid([[1]])
    b = KVTwoMor(g, g, ((mat([[5]]),),), QQ)
    assert hcompose2(b, a).blocks[0][0] == mat([[5, 10], [15, 20]])


def test_tensor_examples():
    a = KVObject(3)
    assert tensor(UNIT, a) == a
    assert tensor(KVObject(2), KVObject(3)).rank == 6
    f = grid([[1, 2]])
    assert tensor(identity1(UNIT), f) == f


def test_duality_examples():
    _, e, c = duality_data(UNIT)
    assert e.dims == ((1,),) and c.dims == ((1,),)
    assert ev(KVObject(2)).dims == ((1, 0, 0, 1),)
    assert coev(KVObject(2)) == transpose1(ev(KVObject(2)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zigzag_structural(n):
    a = KVObject(n)
    i = identity1(a)
    z1 = compose1(tensor(ev(a), i), tensor(i, coev(a)))
    z2 = compose1(tensor(i, ev(a)), tensor(coev(a), i))
    assert z1 == i and z2 == i


def test_right_adjoint_examples():
    a = KVObject(2)
    fr, eta, eps = right_adjoint(identity1(a))
    assert fr == identity1(a)
    assert is_identity2(eta) and is_identity2(eps)
    f = grid([[2]])
    fr, eta, eps = right_adjoint(f)
    assert eta.blocks[0][0] == mat([[1], [0], [0], [1]])
    assert eps.blocks[0][0] == mat([[1, 0, 0, 1]])
    on_f, on_fr = triangle_right(f)
    assert on_f.blocks[0][0] == identity(2) and is_identity2(on_fr)


def test_left_adjoint_examples():
    f = grid([[2]])
    fl, eta, eps = left_adjoint(f)
    assert fl == transpose1(f)
    assert eta.blocks[0][0] == mat([[1], [0], [0], [1]])
    assert all(is_identity2(x) for x in triangle_left(f))


def test_ev_adjoints_examples():
    d = ev_adjoints(UNIT)
    assert d.L == d.R == coev(UNIT)
    for n in (2, 3):
        d = ev_adjoints(KVObject(n))
        assert d.L == d.R == coev(KVObject(n))
        assert all(is_identity2(x) for x in triangle_left(ev(KVObject(n))) + triangle_right(ev(KVObject(n))))


def test_serre_identity():
    for n in (1, 5):
        ell, r = serre(KVObject(n))
        assert ell == r == identity1(KVObject(n))
        assert compose1(r, ell) == identity1(KVObject(n))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_coev_adjoint_identifications(n):
    a = KVObject(n)
    e, c = ev_adjoints(a), coev_adjoints(a)
    assert compose1(c.R, coev(a)) == compose1(ev(a), e.L)
    assert compose1(c.L, coev(a)) == compose1(ev(a), e.R)


def test_associator_is_a_nontrivial_permutation():
    f = grid([[1, 1], [1, 1]])
    p = associator(f, f, f)
    assert p.source == p.target
    assert not is_identity2(p)
    assert is_identity2(associator(grid([[2]]), grid([[3]]), grid([[1]])))


# properties


@given(st.lists(onemors(max_rank=3, max_dim=2), min_size=1, max_size=5), st.data())
def test_strict_grids(chain, data):
    # rebuild a composable chain from the drawn grids' shapes
    fixed = [chain[0]]
    for f in chain[1:]:
        fixed.append(data.draw(onemors(f.source, fixed[-1].source, max_dim=2)))
    whole = compose_chain(fixed)
    for cut in range(1, len(fixed)):
        assert compose1(compose_chain(fixed[:cut]), compose_chain(fixed[cut:])) == whole
    assert compose1(identity1(whole.target), whole) == whole == compose1(whole, identity1(whole.source))


@given(objects(), objects())
def test_symmetry_involution(a, b):
    assert compose1(symmetry(b, a), symmetry(a, b)) == identity1(tensor(a, b))


@given(onemors(max_dim=3))
def test_triangles(f):
    assert all(is_identity2(x) for x in triangle_right(f))
    assert all(is_identity2(x) for x in triangle_left(f))


@given(onemors(max_dim=2), st.data())
def test_adjoint_of_composite(f, data):
    g = data.draw(onemors(f.target, None, max_dim=2))
    assert right_adjoint(compose1(g, f))[0] == compose1(right_adjoint(f)[0], right_adjoint(g)[0])
    assert left_adjoint(compose1(g, f))[0] == compose1(left_adjoint(f)[0], left_adjoint(g)[0])


@given(endos(max_dim=2), st.data())
def test_ev_phi_adjoint(phi, data):
    # right adjoint of ev o (phi (x) id) equals (phi^r (x) id) o R_A
    a = phi.source
    ev_phi = compose1(ev(a), tensor(phi, identity1(a)))
    via_parts = compose1(tensor(right_adjoint(phi)[0], identity1(a)), ev_adjoints(a).R)
    assert right_adjoint(ev_phi)[0] == via_parts
    assert all(is_identity2(x) for x in triangle_right(ev_phi))


@given(st.data())
def test_interchange(data):
    fld = data.draw(st.sampled_from(FIELDS))
    a_obj, b_obj, c_obj = (data.draw(objects(2)) for _ in range(3))
    f0, f1, f2 = (data.draw(onemors(a_obj, b_obj, max_dim=2)) for _ in range(3))
    g0, g1, g2 = (data.draw(onemors(b_obj, c_obj, max_dim=2)) for _ in range(3))
    a, a2 = data.draw(twomors(f0, f1, fld)), data.draw(twomors(f1, f2, fld))
    b, b2 = data.draw(twomors(g0, g1, fld)), data.draw(twomors(g1, g2, fld))
    assert hcompose2(vcompose2(b2, b), vcompose2(a2, a)) == vcompose2(hcompose2(b2, a2), hcompose2(b, a))


@given(st.data())
def test_vcompose_associative_unital(data):
    fld = data.draw(st.sampled_from(FIELDS))
    a_obj, b_obj = data.draw(objects()), data.draw(objects())
    fs = [data.draw(onemors(a_obj, b_obj, max_dim=2)) for _ in range(4)]
    x, y, z = (data.draw(twomors(fs[i], fs[i + 1], fld)) for i in range(3))
    assert vcompose2(z, vcompose2(y, x)) == vcompose2(vcompose2(z, y), x)
    assert vcompose2(identity2(fs[1], fld), x) == x == vcompose2(x, identity2(fs[0], fld))


@given(st.data())
def test_tensor_of_two_morphisms_respects_composition(data):
    fld = data.draw(st.sampled_from(FIELDS))
    a, b = data.draw(objects(2)), data.draw(objects(2))
    f0, f1 = (data.draw(onemors(a, a, max_dim=2)) for _ in range(2))
    g0, g1 = (data.draw(onemors(b, b, max_dim=2)) for _ in range(2))
    x, y = data.draw(twomors(f0, f1, fld)), data.draw(twomors(g0, g1, fld))
    t = tensor(x, y)
    assert t.source == tensor(f0, g0) and t.target == tensor(f1, g1)
    assert tensor(identity2(f0, fld), identity2(g0, fld)) == identity2(tensor(f0, g0), fld)
