from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from centrep.errors import HypothesisViolation
from centrep.exterior import Multivector, NilpotentOperator, power
from centrep.instances import targeted_instance
from centrep.structure import canonical_decomposition, canonical_model
from centrep.witness import (
    CASE_TAGS,
    EasyCase,
    StepData,
    case23_dimensions,
    construct_witness,
    exactness_system_solvable,
    find_lambda_nu,
    find_steps,
    solve_condition_d,
    split_top_bottom,
    verify_certificate,
)

from conftest import e, make_e1, make_e2, vec

F = Fraction


def _uv_plane():
    return NilpotentOperator.zero(2), e(2, 0, 1)


def test_trivial_eps_zero():
    theta, omega = _uv_plane()
    cert = construct_witness(theta, [0, 0], omega)
    assert cert.case_tag == "trivial-eps-zero"
    assert cert.alpha == 0 and cert.gamma == 0
    assert cert.checks.all_passed


def test_eps_in_support_with_selector():
    theta, omega = _uv_plane()
    cert = construct_witness(theta, [1, 0], omega, selector=[(0, 1)])
    assert cert.case_tag == "eps-in-S"
    assert cert.beta == e(2, 1)
    assert e(2, 0) * cert.beta == omega
    assert cert.alpha == Multivector.scalar(2, -1)
    assert cert.gamma == 0
    assert cert.checks.all_passed


def test_find_steps_easy_when_orbit_dies():
    # u, v, w with theta w = 0
    D = canonical_decomposition(NilpotentOperator.zero(3), e(3, 0, 1))
    steps = find_steps([0, 0, 1], NilpotentOperator.zero(3), D)
    assert isinstance(steps, EasyCase) and steps.N == 1


def test_find_steps_e1(e1):
    theta, eps, omega = e1
    D = canonical_decomposition(theta, omega)
    steps = find_steps(eps, theta, D)
    assert isinstance(steps, StepData)
    assert (steps.N, steps.M) == (1, 2)
    # xi = z1 up to the normalization of the adapted basis
    assert steps.xi == tuple(vec(5, {0: 1}))


def test_find_steps_e2(e2):
    theta, eps, omega = e2
    D = canonical_decomposition(theta, omega)
    steps = find_steps(eps, theta, D)
    assert (steps.N, steps.M) == (2, 3)
    assert steps.xi == tuple(vec(6, {2: 1}))
    assert steps.xi_top == steps.xi
    assert not any(steps.xi_bottom)


def test_split_top_bottom():
    theta, omega = canonical_model([1])
    D = canonical_decomposition(theta, omega)
    b = D.uv[0]
    r, s = F(2), F(3)
    top = [2 * (r * x + s * y) for x, y in zip(b.u[1], b.v[1])]
    xi = [t + x for t, x in zip(top, b.u[0])]
    assert split_top_bottom(D, [(r, s)], xi) == (tuple(top), tuple(b.u[0]))
    zero = [0] * D.n
    assert split_top_bottom(D, [(r, s)], zero) == (tuple(zero), tuple(zero))


def test_e1_even_case(e1):
    theta, eps, omega = e1
    cert = construct_witness(theta, eps, omega)
    assert cert.case_tag == "even-M" and cert.M == 2
    # u ^ z1 with u = e3, z1 = e1
    assert cert.beta == e(5, 2, 0)
    assert cert.checks.all_passed
    assert cert.discrepancy is None
    assert cert.predicted_scale == cert.gamma_scale


def test_e2_terminal_case(e2):
    theta, eps, omega = e2
    cert = construct_witness(theta, eps, omega)
    assert cert.case_tag == "terminal-2-3"
    # (z2 z1 - u v) + z1 (-2u)
    u, v, z1, z2 = (e(6, i) for i in range(4))
    assert cert.beta == (z2 * z1 - u * v) + z1 * (u * -2)
    assert cert.checks.all_passed
    assert cert.predicted_scale == cert.gamma_scale


def test_hypotheses_are_gated():
    theta = NilpotentOperator.from_images(3, {1: vec(3, {0: 1})})
    with pytest.raises(HypothesisViolation) as info:
        construct_witness(theta, [0, 0, 1], e(3, 1, 2))
    assert info.value.hypothesis == "theta-omega-zero"
    with pytest.raises(HypothesisViolation) as info:
        construct_witness(NilpotentOperator.zero(2), [1, 0], Multivector.zero(2))
    assert info.value.hypothesis == "omega-nonzero"
    # theta(e3 ^ e1) = e2 ^ e1 with theta e3 = e2, theta e2 = 0... use a chain e3 -> e2
    theta = NilpotentOperator.from_images(3, {2: vec(3, {1: 1})})
    with pytest.raises(HypothesisViolation) as info:
        construct_witness(theta, [1, 0, 0], e(3, 0, 1))
    assert info.value.hypothesis == "omega-not-in-im-theta"


def test_tampered_gamma_fails_d(e1):
    theta, eps, omega = e1
    cert = construct_witness(theta, eps, omega)
    report = verify_certificate(cert.beta, eps, omega, theta, cert.alpha, Multivector.zero(5))
    assert report.A and report.B and report.C and not report.D
    assert report.residuals["D"] == Multivector.from_vector(eps) * cert.beta


def test_zero_beta_fails_b(e1):
    theta, eps, omega = e1
    report = verify_certificate(Multivector.zero(5), eps, omega, theta)
    assert (report.A, report.B, report.C, report.D) == (True, False, True, True)


def test_solve_condition_d_examples():
    theta, omega = _uv_plane()
    assert solve_condition_d(e(2, 0), [1, 0], omega, theta) == (Multivector.zero(2), Multivector.zero(2))
    alpha, gamma = solve_condition_d(e(2, 1), [1, 0], omega, theta)
    assert alpha == Multivector.scalar(2, -1) and gamma == 0
    assert solve_condition_d(Multivector.scalar(3), [0, 0, 1], e(3, 0, 1), NilpotentOperator.zero(3)) is None


def test_find_lambda_nu_p1():
    lam, nu = find_lambda_nu(e(2, 0, 1), [1, 0], 1)
    assert lam == Multivector.scalar(2)
    assert nu == e(2, 0) * -2


def _sigma(p):
    s = Multivector.zero(2 * p)
    for a in range(p):
        s = s + e(2 * p, 2 * a, 2 * a + 1)
    return s


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("phi_index", [None, 0, 3])
def test_find_lambda_nu_general(p, phi_index):
    phi = [0] * (2 * p)
    if phi_index is not None:
        phi[phi_index] = 1
    sigma = _sigma(p)
    lam, nu = find_lambda_nu(sigma, phi, p)
    ph = Multivector.from_vector(phi)
    assert lam and lam.is_homogeneous(p - 1)
    assert power(sigma, 2) * lam == 0
    assert sigma * ph * lam == 0
    assert nu == ph * lam * -2


def test_case23_surplus_p2():
    z, im = case23_dimensions(2, [1, 0, 0, 0])
    assert z - im == 3


def test_every_tag_is_reachable():
    for tag in CASE_TAGS:
        inst = targeted_instance(tag)
        cert = construct_witness(inst.theta, inst.eps, inst.omega)
        assert cert.case_tag == tag
        assert cert.checks.all_passed and cert.discrepancy is None
        assert cert.predicted_scale == cert.gamma_scale


def test_terminal_case_predicate():
    inst = targeted_instance("terminal-2-3", 8)
    cert = construct_witness(inst.theta, inst.eps, inst.omega)
    D = cert.decomposition
    assert D.q == 1 and D.zb[0].m == 1 and D.p > 0 and all(b.l == 0 for b in D.uv)


@given(st.sampled_from(CASE_TAGS), st.sampled_from([F(-3), F(1, 2), F(5, 3), F(-1)]), st.integers(0, 3))
def test_scalar_robustness(tag, t, seed):
    inst = targeted_instance(tag, seed=seed)
    eps = [x * t for x in inst.eps]
    cert = construct_witness(inst.theta, eps, inst.omega)
    assert cert.checks.all_passed and cert.discrepancy is None


@given(st.sampled_from(CASE_TAGS), st.integers(0, 5))
def test_closed_form_agrees_with_generic_solve(tag, seed):
    inst = targeted_instance(tag, seed=seed)
    cert = construct_witness(inst.theta, inst.eps, inst.omega)
    assert solve_condition_d(cert.beta, inst.eps, inst.omega, inst.theta) is not None
    assert not exactness_system_solvable(cert.beta, cert.alpha, inst.eps, inst.omega, inst.theta)


def test_certificate_json(e2):
    theta, eps, omega = e2
    data = construct_witness(theta, eps, omega).to_json("abc")
    assert data["case_tag"] == "terminal-2-3"
    assert data["checks"] == {"A": True, "B": True, "C": True, "D": True}
    assert data["instance_hash"] == "abc"
    assert Multivector.from_json(data["beta"]).n == 6
