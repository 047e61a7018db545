import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from centrep.errors import HypothesisViolation
from centrep.exterior import Multivector, NilpotentOperator, graded_basis, operator_matrix
from centrep.linalg import Subspace, kernel, rank, solve
from centrep.structure import (
    CanonicalDecomposition,
    beta_p,
    canonical_decomposition,
    canonical_model,
    lefschetz_maps,
    mu_matrix,
    omega_rank,
    sp_member,
    sp_space,
    support,
    verify_decomposition,
)

from conftest import e, vec

F = Fraction


def test_omega_rank_examples():
    assert omega_rank(e(2, 0, 1)) == 1
    assert omega_rank(e(4, 0, 1) + e(4, 2, 3)) == 2
    with pytest.raises(HypothesisViolation):
        omega_rank(Multivector.zero(3))
    with pytest.raises(HypothesisViolation):
        omega_rank(e(3, 0))


def test_support_examples():
    assert support(e(3, 0, 1)) == Subspace(3, [[1, 0, 0], [0, 1, 0]])
    assert support(e(5, 0, 1) + e(5, 2, 3)) == Subspace(5, [vec(5, {i: 1}) for i in range(4)])
    assert support(e(3, 0, 1) + e(3, 0, 2)) == Subspace(3, [[1, 0, 0], [0, 1, 1]])


def test_decomposition_theta_zero():
    D = canonical_decomposition(NilpotentOperator.zero(2), e(2, 0, 1))
    assert (D.p, D.q, D.uv[0].l) == (1, 0, 0)
    assert D.omega() == e(2, 0, 1)
    assert verify_decomposition(D, NilpotentOperator.zero(2), e(2, 0, 1)) == []


def test_decomposition_single_z_block():
    theta = NilpotentOperator.from_images(2, {1: vec(2, {0: 1})})
    omega = e(2, 1, 0)
    D = canonical_decomposition(theta, omega)
    assert (D.p, D.q, D.zb[0].m, D.zb[0].c) == (0, 1, 1, 1)
    z1, z2 = D.zb[0].z
    assert theta(list(z2)) == list(z1)
    assert D.omega() == omega


def test_decomposition_two_uv_blocks():
    omega = e(4, 0, 1) + e(4, 2, 3)
    D = canonical_decomposition(NilpotentOperator.zero(4), omega)
    assert (D.p, D.q) == (2, 0)
    assert all(b.l == 0 for b in D.uv)
    assert D.omega() == omega


def test_decomposition_rejects_non_invariant_omega():
    theta = NilpotentOperator.from_images(3, {1: vec(3, {0: 1})})
    with pytest.raises(HypothesisViolation) as info:
        canonical_decomposition(theta, e(3, 1, 2))
    assert info.value.value == e(3, 0, 2)


def test_non_square_sign_keeps_square_class():
    # Omega = 2 z2 z1 cannot be rescaled to c = +-1 over Q
    theta = NilpotentOperator.from_images(2, {1: vec(2, {0: 1})})
    D = canonical_decomposition(theta, e(2, 1, 0) * 2)
    assert D.zb[0].c == 2
    assert verify_decomposition(D, theta, e(2, 1, 0) * 2) == []
    D = canonical_decomposition(theta, e(2, 1, 0) * F(-9, 4))
    assert D.zb[0].c == -1


def test_decomposition_json_roundtrip():
    theta, omega = canonical_model([1], [2], [-1])
    D = canonical_decomposition(theta, omega)
    assert CanonicalDecomposition.from_json(D.to_json()) == D


def test_beta_p_examples():
    D = canonical_decomposition(NilpotentOperator.zero(2), e(2, 0, 1))
    u, v = D.uv[0].u[0], D.uv[0].v[0]
    assert beta_p(D, [(1, 0)]) == Multivector.from_vector(u)

    theta = NilpotentOperator.from_images(2, {1: vec(2, {0: 1})})
    D = canonical_decomposition(theta, e(2, 1, 0))
    assert beta_p(D, []) == Multivector.from_vector(D.zb[0].z[0])

    theta, omega = canonical_model([1])
    D = canonical_decomposition(theta, omega)
    b = D.uv[0]
    mv = Multivector.from_vector
    r, s = F(2), F(-3)
    expect = (mv(b.u[1]) * r + mv(b.v[1]) * s) * mv(b.u[0]) * mv(b.v[0])
    assert beta_p(D, [(r, s)]) == expect
    with pytest.raises(ValueError):
        beta_p(D, [])


def test_sp_member_examples():
    theta = NilpotentOperator.from_images(2, {1: vec(2, {0: 1})})
    D = canonical_decomposition(theta, e(2, 1, 0))
    z1, z2 = D.zb[0].z
    assert sp_member(D, z1) == ()
    assert sp_member(D, z2) is None

    D = canonical_decomposition(NilpotentOperator.zero(2), e(2, 0, 1))
    u, v = D.uv[0].u[0], D.uv[0].v[0]
    xi = [3 * a + 5 * b for a, b in zip(u, v)]
    assert sp_member(D, xi) == ((3, 5),)
    with pytest.raises(ValueError):
        sp_member(canonical_decomposition(NilpotentOperator.zero(3), e(3, 0, 1)), [0, 0, 1])


def test_lefschetz_examples():
    D = canonical_decomposition(NilpotentOperator.zero(2), e(2, 0, 1))
    assert lefschetz_maps(D, 1).data == [[1]]
    D = canonical_decomposition(NilpotentOperator.zero(4), e(4, 0, 1) + e(4, 2, 3))
    assert lefschetz_maps(D, 2).data == [[2]]
    m = lefschetz_maps(D, 1)
    assert m.shape == (4, 4) and rank(m) == 4
    with pytest.raises(ValueError):
        lefschetz_maps(D, 3)


SHAPES = [
    ([0], []), ([1], []), ([0, 0], []), ([], [1]), ([], [2]), ([], [1, 1]), ([0], [1]), ([1], [1]), ([0], [2]),
]


@pytest.mark.parametrize("uv,zm", SHAPES)
def test_mu_injective_then_surjective(uv, zm):
    theta, omega = canonical_model(uv, zm)
    r = omega_rank(omega)
    n = omega.n
    for k in range(n - 1):
        m = mu_matrix(omega, k)
        rk = rank(m)
        if k <= r - 1:
            assert rk == m.cols
        if k + 2 >= r + 1:
            assert rk == m.rows


@given(st.sampled_from(SHAPES), st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=2), st.integers(0, 2), st.integers(0, 10**6))
def test_canonical_model_recovered(shape, signs, extra, seed):
    uv, zm = shape
    theta, omega = canonical_model(uv, zm, signs[: len(zm)], extra)
    D = canonical_decomposition(theta, omega)
    assert sorted(b.l for b in D.uv) == sorted(uv)
    assert sorted(b.m for b in D.zb) == sorted(zm)
    assert verify_decomposition(D, theta, omega) == []


def _omega_beta_case(uv, zm, t, k, rng):
    """A random beta in Lambda^{>=r} S (x) Lambda T of grade k with Omega beta = 0."""
    _, omega0 = canonical_model(uv, zm)
    s = omega0.n
    n = s + t
    omega = Multivector(n, omega0.terms)
    r = omega_rank(omega)
    smask = (1 << s) - 1
    cols = [m for m in graded_basis(n, k) if bin(m & smask).count("1") >= r]
    if not cols:
        return None
    rows = graded_basis(n, k + 2)
    pos = {m: i for i, m in enumerate(rows)}
    data = [[F(0)] * len(cols) for _ in rows]
    for j, m in enumerate(cols):
        for mm, c in (Multivector(n, {m: 1}) * omega).terms.items():
            data[pos[mm]][j] = c
    from centrep.linalg import Matrix

    ker = kernel(Matrix(data, len(cols))).basis
    if not ker:
        return None
    beta = Multivector.zero(n)
    for v in ker:
        c = F(rng.randint(-3, 3))
        beta = beta + Multivector(n, {m: x * c for m, x in zip(cols, v) if x})
    low = Multivector(n, {m: c for m, c in beta.terms.items() if bin(m & smask).count("1") == r})
    if not low:
        return None
    return omega, beta


@pytest.mark.parametrize("uv,zm", SHAPES[:6])
def test_omega_beta_property(uv, zm):
    rng = random.Random(f"{uv}{zm}")
    seen = 0
    for t in (0, 1, 2):
        for k in range(1, 7):
            case = _omega_beta_case(uv, zm, t, k, rng)
            if case is None:
                continue
            omega, beta = case
            seen += 1
            m = mu_matrix(omega, k - 2) if k >= 2 else None
            assert m is None or solve(m, beta.coords(k)) is None
    assert seen > 0


def test_sp_member_agrees_with_definition_on_grid():
    grid = [(F(a), F(b)) for a in range(-2, 3) for b in range(-2, 3) if a or b]
    rng = random.Random(7)
    for uv, zm in [([0], []), ([1], []), ([0, 0], []), ([0], [1]), ([1], [1]), ([0, 1], []), ([], [1, 2])]:
        theta, omega = canonical_model(uv, zm)
        D = canonical_decomposition(theta, omega)
        basis = D.basis_vectors()
        spaces = {P: sp_space(D, P) for P in itertools.product(grid, repeat=D.p)}
        for _ in range(40):
            coeffs = [F(rng.choice([0, 0, 0, 1, -1, 2])) for _ in basis]
            xi = [sum(c * b[i] for c, b in zip(coeffs, basis)) for i in range(D.n)]
            P = sp_member(D, xi)
            hits = [Q for Q, S in spaces.items() if S.contains(xi)]
            if P is None:
                assert hits == []
            else:
                assert sp_space(D, P).contains(xi)
