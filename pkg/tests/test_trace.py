import pytest
from hypothesis import given, settings, strategies as st

from helpers import FIELDS, endos, grid, mat, objects, onemors, pairs, trace_instances, twomors
from sectrace.kv2vect import (
    BoundaryError,
    KVObject,
    KVTwoMor,
    compose1,
    identity1,
    identity2,
    permutation_onemor,
    right_adjoint,
    vcompose2,
)
from sectrace.linalg import GF, QQ, identity, mat_mul, mat_trace
from sectrace.trace import (
    CommutingPair,
    TraceSpace,
    bv_check,
    cyclic,
    dual_trace_map,
    induced_commutor,
    pairing_adjoint,
    secondary_trace_a,
    secondary_trace_b,
    shear_map,
    sheared_pair,
    snake_identities,
    swap_matrix,
    trace_2mor,
    trace_duality,
    trace_map,
    trace_map_alt,
    trace_of,
)


def scalar_pair(p, q, alpha_rows, fld=QQ):
    a, b = grid([[p]]), grid([[q]])
    alpha = KVTwoMor(compose1(a, b), compose1(b, a), ((mat(alpha_rows, fld, ncols=p * q),),), fld)
    return CommutingPair(a, b, alpha)


def identity_pair(n, fld=QQ):
    i = identity1(KVObject(n))
    return CommutingPair(i, i, identity2(i, fld))


# trace_of and trace_2mor


def test_trace_of_examples():
    assert trace_of(identity1(KVObject(4))).dim == 4
    assert trace_of(grid([[2, 1], [3, 4]])) == TraceSpace(6, ((0, 2), (1, 4)))
    assert trace_of(permutation_onemor([1, 2, 0])).dim == 0
    with pytest.raises(BoundaryError):
        trace_of(grid([[1, 2]]))


def test_trace_2mor_examples():
    phi = grid([[2, 1], [3, 4]])
    assert trace_2mor(identity2(phi)) == identity(6)
    theta = KVTwoMor(grid([[2]]), grid([[1]]), ((mat([[3, 4]]),),), QQ)
    assert trace_2mor(theta) == mat([[3, 4]])


@given(st.data())
def test_trace_2mor_functorial(data):
    a = data.draw(objects())
    f0, f1, f2 = (data.draw(endos(a, max_dim=2)) for _ in range(3))
    v, w = data.draw(twomors(f1, f2)), data.draw(twomors(f0, f1))
    assert trace_2mor(vcompose2(v, w)) == mat_mul(trace_2mor(v), trace_2mor(w))


# cyclic symmetry


def test_cyclic_examples():
    i = identity1(KVObject(3))
    assert cyclic(i, i).is_identity()
    for p, q in [(2, 3), (1, 4), (3, 3)]:
        assert cyclic(grid([[p]]), grid([[q]])) == swap_matrix(p, q)


@given(onemors(max_dim=2), st.data())
def test_cyclic_involution_and_trace_invariance(phi, data):
    psi = data.draw(onemors(phi.target, phi.source, max_dim=2))
    m, back = cyclic(phi, psi), cyclic(psi, phi)
    assert mat_mul(back, m).is_identity() and mat_mul(m, back).is_identity()
    pp = compose1(phi, psi)
    t = trace_2mor(data.draw(twomors(pp, pp)))
    assert mat_trace(mat_mul(m, mat_mul(t, back))) == mat_trace(t)


@pytest.mark.parametrize("fld", [QQ, GF(5)])
@pytest.mark.parametrize("n", [1, 3])
def test_bv_is_identity(n, fld):
    assert bv_check(identity1(KVObject(n)), fld) == identity(n, fld)


# trace maps


def test_trace_map_examples():
    phi = grid([[2, 1], [3, 4]])
    i = identity1(phi.source)
    assert trace_map(i, identity2(phi), phi, phi).is_identity()
    for d in (2, 3):
        psi = grid([[d]])
        one = identity1(KVObject(1))
        alpha = identity2(psi)
        assert trace_map(psi, alpha, one, one) == mat([[d]])
        assert trace_map_alt(psi, alpha, one, one) == mat([[d]])
    assert trace_map_alt(i, identity2(phi), phi, phi).is_identity()


@given(st.sampled_from(FIELDS).flatmap(lambda f: trace_instances(f)))
def test_alt_presentation(inst):
    assert trace_map(*inst) == trace_map_alt(*inst)


@settings(max_examples=30)
@given(st.sampled_from(FIELDS).flatmap(lambda f: trace_instances(f)))
def test_dual_trace_map(inst):
    dual_trace_map(*inst)  # raises on disagreement


def test_dual_examples():
    phi = grid([[2, 1], [3, 4]])
    i = identity1(phi.source)
    assert dual_trace_map(i, identity2(phi), phi, phi).is_identity()
    p = scalar_pair(1, 1, [[7]])
    assert dual_trace_map(p.phi_a, p.alpha, p.phi_b, p.phi_b) == mat([[7]])


# commutors


def test_induced_commutor_examples():
    b = grid([[1, 2], [0, 1]])
    i = identity1(b.source)
    pair = CommutingPair(i, b, identity2(b))
    assert induced_commutor(pair) == identity2(b)
    assert induced_commutor(scalar_pair(1, 1, [[5]])).blocks[0][0] == mat([[5]])


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_commutor_twice_is_conjugate_transpose(p, q, data):
    a, b = grid([[p]]), grid([[q]])
    alpha = data.draw(twomors(compose1(a, b), compose1(b, a)))
    once = CommutingPair(a, b, alpha)
    ar = right_adjoint(a)[0]
    twice = induced_commutor(CommutingPair(b, ar, induced_commutor(once)))
    s = swap_matrix(p, q)
    assert twice.blocks[0][0] == mat_mul(s, mat_mul(alpha.blocks[0][0].T, s))


@given(st.sampled_from(FIELDS).flatmap(lambda f: pairs(f, max_dim=2)))
def test_commutor_closed_form(pair):
    assert induced_commutor(pair) == induced_commutor(pair, closed_form=True)


# trace duality


def test_duality_examples():
    n = 3
    c, e = trace_duality(identity1(KVObject(n)))
    delta = [int(x == y) for x in range(n) for y in range(n)]
    assert c == mat([[v] for v in delta]) and e == mat([delta])
    d = 2
    c, e = trace_duality(grid([[d]]))
    assert e == mat([[int(x == y) for x in range(d) for y in range(d)]])


@given(endos(max_dim=3), st.sampled_from(FIELDS))
def test_snakes(phi, fld):
    assert snake_identities(phi, fld) == (True, True)


def test_pairing_adjoint_of_identity():
    phi = grid([[2, 1], [3, 4]])
    assert pairing_adjoint(identity(6), phi, phi).is_identity()


# secondary traces


@pytest.mark.parametrize("n", [1, 2, 4])
def test_secondary_dimension(n):
    p = identity_pair(n)
    assert secondary_trace_a(p) == secondary_trace_b(p) == n


def test_permutation_pair():
    # g = (0 1), h = id on 4 points: common fixed points {2, 3}
    g, h = permutation_onemor([1, 0, 2, 3]), identity1(KVObject(4))
    p = CommutingPair(g, h, identity2(compose1(g, h)))
    assert secondary_trace_a(p) == secondary_trace_b(p) == 2


@given(st.sampled_from(FIELDS).flatmap(lambda f: pairs(f, max_dim=2)))
def test_main_identity(pair):
    assert secondary_trace_a(pair) == secondary_trace_b(pair)


# shearing


def test_shear_examples():
    p = identity_pair(2)
    assert shear_map(p).is_identity()
    p = scalar_pair(1, 1, [[4]])
    assert shear_map(p) == trace_map(p.phi_a, p.alpha, p.phi_b, p.phi_b) == mat([[4]])


@given(st.sampled_from(FIELDS).flatmap(lambda f: pairs(f, max_dim=2)))
def test_shear(pair):
    assert shear_map(pair) == trace_map(pair.phi_a, pair.alpha, pair.phi_b, pair.phi_b)
    sp = sheared_pair(pair)
    assert secondary_trace_b(sp) == secondary_trace_b(pair) == secondary_trace_a(sp, closed_form=True)
