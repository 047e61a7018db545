"""Witnesses (beta, alpha, gamma) for a nilpotent theta, a vector eps and a 2-vector Omega.

Given theta(Omega) = 0 and Omega not in the image of theta, the construction
produces beta with

    (A) Omega ^ beta = 0            (B) beta not in Omega ^ (Lambda V)
    (C) theta(beta) = 0             (D) eps ^ beta + Omega ^ alpha = theta(gamma)

following a case analysis on how the theta-orbit of eps enters the support S
of Omega.  Every closed-form gamma is rescaled by the one scalar that makes (D)
hold exactly; the scalar predicted by the bookkeeping is kept alongside so the
two can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ConstructionError, HypothesisViolation
from .exterior import Multivector, NilpotentOperator, apply_derivation, graded_basis, operator_matrix, pushforward, wedge_all
from .linalg import DimensionError, Matrix, kernel, rank, solve, to_fraction
from .structure import (
    CanonicalDecomposition,
    beta_p,
    beta_p_factors,
    canonical_decomposition,
    check_pair,
    check_selector,
    default_selector,
    mu_matrix,
    omega_rank,
    sp_member,
)

__all__ = [
    "CASE_TAGS",
    "StepData",
    "EasyCase",
    "CheckReport",
    "WitnessCertificate",
    "check_hypotheses",
    "omega_in_image_of_theta",
    "find_steps",
    "split_top_bottom",
    "construct_witness",
    "solve_condition_d",
    "find_lambda_nu",
    "case23_dimensions",
    "verify_certificate",
    "exactness_system_solvable",
]

CASE_TAGS = (
    "trivial-eps-zero",
    "eps-in-S",
    "easy-N",
    "even-M",
    "odd-M-theta-w",
    "odd-M-z-top",
    "terminal-2-3",
)

Vector = tuple[Fraction, ...]


def _vec(v) -> Vector:
    return tuple(to_fraction(x) for x in v)


def _mv(v) -> Multivector:
    return Multivector.from_vector(v)


def _is_zero(v) -> bool:
    return not any(v)


# hypotheses


def omega_in_image_of_theta(theta: NilpotentOperator, omega: Multivector) -> bool:
    m = operator_matrix(lambda x: apply_derivation(theta, x), theta.n, 2, 2)
    return solve(m, omega.coords(2)) is not None


def check_hypotheses(theta: NilpotentOperator, eps: Sequence, omega: Multivector):
    """Raise :class:`HypothesisViolation` unless (theta, eps, Omega) is admissible."""
    if len(eps) != theta.n:
        raise HypothesisViolation("dimension", f"eps has length {len(eps)}, theta acts on Q^{theta.n}")
    check_pair(theta, omega)
    if omega_in_image_of_theta(theta, omega):
        raise HypothesisViolation("omega-not-in-im-theta", "Omega lies in the image of theta on the second exterior power", omega)


# step data


@dataclass(frozen=True)
class EasyCase:
    """The first iterate of eps inside S already lies in some S_P."""

    N: int
    P: tuple


@dataclass(frozen=True)
class StepData:
    N: int
    M: int
    P: tuple
    xi: Vector
    xi_top: Vector
    xi_bottom: Vector


def _iterates(theta: NilpotentOperator, eps: Sequence) -> list[Vector]:
    out = [_vec(eps)]
    while not _is_zero(out[-1]):
        out.append(_vec(theta(list(out[-1]))))
    return out


@dataclass(frozen=True)
class _Top:
    kind: str  # "uv" or "z"
    block: int
    vector: Vector
    coeff: Fraction
    position: int  # index of this factor in beta_P


def _top_terms(D: CanonicalDecomposition, P, xi) -> list[_Top]:
    P = check_selector(D, P)
    coords = D.coordinates(xi)
    if coords is None:
        raise ValueError("xi is not in S")
    out = []
    pos = 0
    fpos = 0
    for a, (b, (r, s)) in enumerate(zip(D.uv, P)):
        d = 2 * b.l + 1
        cu, cv = coords[pos: pos + d], coords[pos + d: pos + 2 * d]
        if any(cu[b.l + 1:]) or any(cv[b.l + 1:]) or cu[b.l] * s != cv[b.l] * r:
            raise ValueError("xi is not in S_P")
        kappa = cu[b.l] / r if r else cv[b.l] / s
        w = tuple(r * x + s * y for x, y in zip(b.u[b.l], b.v[b.l]))
        out.append(_Top("uv", a, w, kappa, fpos))
        pos += 2 * d
        fpos += 2 * b.l + 1
    for a, b in enumerate(D.zb):
        cz = coords[pos: pos + 2 * b.m]
        if any(cz[b.m:]):
            raise ValueError("xi is not in S_P")
        out.append(_Top("z", a, b.z[b.m - 1], cz[b.m - 1], fpos + b.m - 1))
        pos += 2 * b.m
        fpos += b.m
    return out


def split_top_bottom(D: CanonicalDecomposition, P, xi: Sequence) -> tuple[Vector, Vector]:
    """Split xi in S_P into its part along the top factors of beta_P and the rest."""
    xi = _vec(xi)
    top = tuple(Fraction(0) for _ in xi)
    for t in _top_terms(D, P, xi):
        if t.coeff:
            top = tuple(x + t.coeff * y for x, y in zip(top, t.vector))
    return top, tuple(x - y for x, y in zip(xi, top))


def find_steps(eps: Sequence, theta: NilpotentOperator, D: CanonicalDecomposition) -> EasyCase | StepData:
    eps = _vec(eps)
    if _is_zero(eps):
        raise ValueError("eps must be nonzero")
    its = _iterates(theta, eps)
    S = D.support
    N = next(k for k, v in enumerate(its) if S.contains(v))
    if N == 0:
        raise ValueError("eps lies in the support S")
    P = sp_member(D, its[N])
    if P is not None:
        return EasyCase(N, P)
    M = N + 1
    while True:
        v = its[M] if M < len(its) else its[-1]
        P = sp_member(D, v)
        if P is not None:
            break
        M += 1
    xi = its[M] if M < len(its) else its[-1]
    if _is_zero(xi):
        raise ConstructionError(f"theta^{M} eps = 0 although theta^{M - 1} eps lies outside every S_P")
    top, bottom = split_top_bottom(D, P, xi)
    if _is_zero(top):
        raise ConstructionError("top component of xi vanishes")
    return StepData(N, M, P, xi, top, bottom)


# certificates


@dataclass
class CheckReport:
    A: bool
    B: bool
    C: bool
    D: bool
    residuals: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return self.A and self.B and self.C and self.D

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}


@dataclass
class WitnessCertificate:
    beta: Multivector
    alpha: Multivector
    gamma: Multivector
    case_tag: str
    N: int | None = None
    M: int | None = None
    P: tuple | None = None
    checks: CheckReport | None = None
    predicted_scale: Fraction | None = None
    gamma_scale: Fraction | None = None
    discrepancy: str | None = None
    decomposition: CanonicalDecomposition | None = None

    def to_json(self, instance_hash: str | None = None) -> dict:
        from .linalg import format_fraction

        def fr(x):
            return None if x is None else format_fraction(x)

        out = {
            "case_tag": self.case_tag,
            "N": self.N,
            "M": self.M,
            "P": None if self.P is None else [[fr(r), fr(s)] for r, s in self.P],
            "beta": self.beta.to_json(),
            "alpha": self.alpha.to_json(),
            "gamma": self.gamma.to_json(),
            "checks": None if self.checks is None else self.checks.as_dict(),
            "gamma_scale": fr(self.gamma_scale),
            "predicted_scale": fr(self.predicted_scale),
            "discrepancy": self.discrepancy,
        }
        if instance_hash is not None:
            out["instance_hash"] = instance_hash
        return out


def _in_image_of_mu(omega: Multivector, x: Multivector) -> bool:
    for k in sorted(x.grades()):
        part = Multivector(x.n, {m: c for m, c in x.terms.items() if bin(m).count("1") == k})
        if k < 2:
            return False
        if solve(mu_matrix(omega, k - 2), part.coords(k)) is None:
            return False
    return True


def verify_certificate(cert_or_beta, eps, omega: Multivector, theta: NilpotentOperator, alpha=None, gamma=None) -> CheckReport:
    """Evaluate conditions (A)-(D) exactly; residuals hold the offending values."""
    if isinstance(cert_or_beta, WitnessCertificate):
        beta, alpha, gamma = cert_or_beta.beta, cert_or_beta.alpha, cert_or_beta.gamma
    else:
        beta = cert_or_beta
    n = omega.n
    alpha = Multivector.zero(n) if alpha is None else alpha
    gamma = Multivector.zero(n) if gamma is None else gamma
    e = _mv(eps)
    res = {}
    a_res = omega * beta
    c_res = apply_derivation(theta, beta)
    d_res = e * beta + omega * alpha - apply_derivation(theta, gamma)
    in_im = _in_image_of_mu(omega, beta)
    if a_res:
        res["A"] = a_res
    if in_im:
        res["B"] = beta
    if c_res:
        res["C"] = c_res
    if d_res:
        res["D"] = d_res
    return CheckReport(not a_res, not in_im, not c_res, not d_res, res)


def solve_condition_d(beta: Multivector, eps, omega: Multivector, theta: NilpotentOperator):
    """Some (alpha, gamma) with eps^beta + Omega^alpha = theta(gamma), or None."""
    n = omega.n
    target = _mv(eps) * beta
    alpha = Multivector.zero(n)
    gamma = Multivector.zero(n)
    for g in sorted(target.grades()):
        rhs = [-c for c in target.coords(g)]
        cols_a = len(graded_basis(n, g - 2))
        blocks = []
        if cols_a:
            blocks.append(mu_matrix(omega, g - 2))
        th = operator_matrix(lambda x: apply_derivation(theta, x), n, g, g).scale(-1)
        m = blocks[0].hstack(th) if blocks else th
        x = solve(m, rhs)
        if x is None:
            return None
        if cols_a:
            alpha = alpha + Multivector.from_coords(n, g - 2, x[:cols_a])
        gamma = gamma + Multivector.from_coords(n, g, x[cols_a:])
    return alpha, gamma


def _resolve_scale(lhs: Multivector, rhs: Multivector) -> Fraction | None:
    """t with t * rhs == lhs, or None."""
    if not rhs:
        return Fraction(1) if not lhs else None
    m = next(iter(rhs.terms))
    t = lhs.coeff(m) / rhs.coeff(m)
    return t if rhs * t == lhs else None


def _ratio(a: Multivector, b: Multivector) -> Fraction:
    t = _resolve_scale(a, b)
    if t is None or not t:
        raise ConstructionError("expected proportional nonzero multivectors")
    return t


def construct_witness(theta: NilpotentOperator, eps: Sequence, omega: Multivector, selector=None, verify: bool = True) -> WitnessCertificate:
    """Build and check a certificate for (theta, eps, Omega).

    ``selector`` fixes P in the branches where any P will do.
    """
    check_hypotheses(theta, eps, omega)
    eps = _vec(eps)
    n = theta.n
    D = canonical_decomposition(theta, omega)
    P0 = check_selector(D, selector) if selector is not None else default_selector(D)
    zero = Multivector.zero(n)

    if _is_zero(eps):
        cert = WitnessCertificate(beta_p(D, P0), zero, zero, "trivial-eps-zero", P=P0)
    elif D.support.contains(eps):
        beta = beta_p(D, P0)
        r = omega_rank(omega)
        x = solve(mu_matrix(omega, r - 1), (_mv(eps) * beta * -1).coords(r + 1))
        if x is None:
            raise ConstructionError("eps ^ beta_P is not a multiple of Omega")
        alpha = Multivector.from_coords(n, r - 1, x)
        cert = WitnessCertificate(beta, alpha, zero, "eps-in-S", N=0, P=P0)
    else:
        steps = find_steps(eps, theta, D)
        if isinstance(steps, EasyCase):
            its = _iterates(theta, eps)
            beta = wedge_all((_mv(its[i]) for i in range(steps.N)), n) * beta_p(D, steps.P)
            cert = WitnessCertificate(beta, zero, zero, "easy-N", N=steps.N, P=steps.P)
        else:
            cert = _odd_even_cases(theta, eps, omega, D, steps)
    cert.decomposition = D
    if verify:
        cert.checks = verify_certificate(cert, eps, omega, theta)
    return cert


def _finish(tag, beta, alpha, gamma_raw, predicted, eps, omega, theta, steps) -> WitnessCertificate:
    lhs = _mv(eps) * beta + omega * alpha
    t = _resolve_scale(lhs, apply_derivation(theta, gamma_raw))
    common = dict(case_tag=tag, N=steps.N, M=steps.M, P=steps.P, predicted_scale=predicted)
    if t is not None:
        return WitnessCertificate(beta, alpha, gamma_raw * t, gamma_scale=t, **common)
    fallback = solve_condition_d(beta, eps, omega, theta)
    if fallback is None:
        raise ConstructionError(f"{tag}: closed form fails (D) and no (alpha, gamma) exists for this beta")
    a, g = fallback
    return WitnessCertificate(beta, a, g, discrepancy=f"{tag}: closed-form gamma failed (D); used linear solve", **common)


def _odd_even_cases(theta, eps, omega, D: CanonicalDecomposition, steps: StepData) -> WitnessCertificate:
    n = theta.n
    its = _iterates(theta, eps)

    def it(k) -> Multivector:
        return _mv(its[k]) if k < len(its) else Multivector.zero(n)

    M, P = steps.M, steps.P
    factors = beta_p_factors(D, P)
    beta_P = wedge_all((_mv(f) for f in factors), n)
    tops = [t for t in _top_terms(D, P, steps.xi) if t.coeff]
    zero = Multivector.zero(n)

    def product_without(skip: set[int], replace: dict[int, Vector] | None = None) -> Multivector:
        replace = replace or {}
        return wedge_all((_mv(replace.get(i, f)) for i, f in enumerate(factors) if i not in skip), n)

    if M % 2 == 0:
        w = tops[0]
        sigma = product_without({w.position})
        c = _ratio(beta_P, _mv(w.vector) * sigma)
        tele = zero
        for i in range(M // 2):
            tele = tele + it(i) * it(M - 1 - i) * (-1 if i % 2 else 1)
        return _finish("even-M", beta_P, zero, tele * sigma, c / w.coeff, eps, omega, theta, steps)

    K = (M - 1) // 2
    moving = [t for t in tops if any(theta(list(t.vector)))]
    if moving:
        w = moving[0]
        if w.kind == "z":
            removed = w.position - 1
        else:
            b = D.uv[w.block]
            r, _s = P[w.block]
            # u_l sits l factors after w, v_l 2l factors after w
            removed = w.position + (b.l if r else 2 * b.l)
        sigma = product_without({w.position, removed})
        theta_w = _vec(theta(list(w.vector)))
        c = _ratio(beta_P, _mv(w.vector) * _mv(theta_w) * sigma)
        rho = it(M) * it(K + 1)
        delta = zero
        rho_pow = [rho]
        for _ in range(K):
            rho_pow.append(apply_derivation(theta, rho_pow[-1]))
        for i in range(K + 1):
            delta = delta + it(i) * rho_pow[K - i] * (-1 if i % 2 else 1)
        predicted = -c / (K * w.coeff * w.coeff)
        return _finish("odd-M-theta-w", beta_P, zero, delta * sigma, predicted, eps, omega, theta, steps)

    if any(t.kind == "uv" for t in tops):
        raise ConstructionError("xi has a top component along a length-one UV chain although it lies in theta(S)")
    z1 = next((t for t in tops if D.zb[t.block].m == 1), None)
    if z1 is None:
        raise ConstructionError("no Z block with m = 1 carries the top component of xi")
    if D.q > 1 or any(b.l > 0 for b in D.uv):
        return _case_z_top(theta, eps, omega, D, steps, factors, beta_P, z1, it, K)
    return _case_terminal(theta, eps, omega, D, steps, z1, it, K)


def _case_z_top(theta, eps, omega, D, steps, factors, beta_P, z1, it, K) -> WitnessCertificate:
    n = theta.n
    P = steps.P
    M = steps.M
    skip = z1.position
    replace: dict[int, Vector] = {}
    if D.q > 1:
        b = next(i for i in range(D.q) if i != z1.block)
        # position of z^b_{m_b} among the factors
        pos = sum(2 * u.l + 1 for u in D.uv) + sum(D.zb[i].m for i in range(b)) + D.zb[b].m - 1
        replace[pos] = D.zb[b].z[D.zb[b].m]
    else:
        a = next(i for i, u in enumerate(D.uv) if u.l > 0)
        blk = D.uv[a]
        r, s = P[a]
        pos = sum(2 * u.l + 1 for u in D.uv[:a])
        replace[pos] = tuple(r * x + s * y for x, y in zip(blk.u[blk.l + 1], blk.v[blk.l + 1]))

    def prod(skip_set, repl):
        return wedge_all((_mv(repl.get(i, f)) for i, f in enumerate(factors) if i not in skip_set), n)

    sigma = prod({skip}, {})
    tau = prod({skip}, replace)
    if apply_derivation(theta, tau) != sigma:
        raise ConstructionError("theta(tau) != sigma")
    c = _ratio(beta_P, _mv(z1.vector) * sigma)
    zero = Multivector.zero(n)
    delta = zero
    for i in range(K):
        delta = delta + it(i) * it(M - 1 - i) * ((K - i) * (-1 if i % 2 else 1))
    rho = zero
    for j in range(K + 1):
        rho = rho + it(j) * it(M - j) * (-1 if j % 2 else 1)
    gamma_raw = delta * sigma + rho * tau
    predicted = c / ((K + 1) * z1.coeff)
    return _finish("odd-M-z-top", beta_P, zero, gamma_raw, predicted, eps, omega, theta, steps)


def _case_terminal(theta, eps, omega, D, steps, z1, it, K) -> WitnessCertificate:
    n = theta.n
    M = steps.M
    p = D.p
    if p == 0:
        raise ConstructionError("terminal case with p = 0 would force Omega into the image of theta")
    zb = D.zb[0]
    cz = zb.c
    kappa = z1.coeff
    eps1 = tuple(x / kappa for x in eps)
    its1 = _iterates(theta, eps1)

    def it1(k) -> Multivector:
        return _mv(its1[k]) if k < len(its1) else Multivector.zero(n)

    z_1, z_2 = zb.z
    if tuple(its1[M]) != tuple(z_1):
        raise ConstructionError("normalized theta^M eps differs from z_1")
    coords = D.coordinates(its1[M - 1])
    if coords is None:
        raise ConstructionError("theta^(M-1) eps is not in S")
    # adapted basis: (u^1, v^1, ..., u^p, v^p, z_1, z_2)
    if coords[2 * p + 1] != 1:
        raise ConstructionError("theta^(M-1) eps does not have z_2-coefficient 1")
    us = [tuple(x / cz for x in b.u[0]) for b in D.uv]
    vs = [b.v[0] for b in D.uv]
    local_basis = [w for pair in zip(us, vs) for w in pair]
    phi_local = []
    for a in range(p):
        phi_local += [coords[2 * a] * cz, coords[2 * a + 1]]
    sigma_local = Multivector.zero(2 * p)
    for a in range(p):
        sigma_local = sigma_local + Multivector.basis(2 * p, 2 * a, 2 * a + 1)
    lam_l, nu_l = find_lambda_nu(sigma_local, phi_local, p)
    lam = pushforward(local_basis, lam_l)
    nu = pushforward(local_basis, nu_l)
    sigma = pushforward(local_basis, sigma_local)
    zz = _mv(z_2) * _mv(z_1)
    beta = (zz - sigma) * lam + _mv(z_1) * nu
    alpha = _mv(eps) * lam / cz
    rho = it1(M) * it1(K)
    rho_pow = [rho]
    for _ in range(K):
        rho_pow.append(apply_derivation(theta, rho_pow[-1]))
    delta = Multivector.zero(n)
    for i in range(K):
        delta = delta + rho_pow[K - 1 - i] * it1(i) * (1 if i % 2 else -1)
    return _finish("terminal-2-3", beta, alpha, delta * lam, 2 * kappa, eps, omega, theta, steps)


def _mu(omega_local: Multivector, k: int) -> Matrix:
    return mu_matrix(omega_local, k)


def find_lambda_nu(sigma: Multivector, phi: Sequence, p: int) -> tuple[Multivector, Multivector]:
    """lambda != 0 of grade p-1 with sigma^2 lambda = sigma phi lambda = 0, and nu = -2 phi lambda.

    ``sigma`` is sum_a e_{2a} ^ e_{2a+1} on Q^{2p}.
    """
    if p < 1 or sigma.n != 2 * p or len(phi) != 2 * p:
        raise ValueError("need p >= 1 and sigma, phi on a space of dimension 2p")
    phi_v = _mv(phi)
    k = 2 * p
    if p == 1:
        eta = sigma
    elif _is_zero(phi):
        ker = kernel(_mu(sigma, p + 1))
        eta = Multivector.from_coords(k, p + 1, ker.basis[0])
    else:
        phisig = phi_v * sigma
        zspace = kernel(operator_matrix(lambda x: phisig * x, k, p, p + 3))
        eta = None
        for zeta_c in zspace.basis:
            cand = phi_v * Multivector.from_coords(k, p, zeta_c)
            if cand:
                eta = cand
                break
        if eta is None:
            raise ConstructionError("every admissible zeta is a multiple of phi")
    x = solve(_mu(sigma, p - 1), eta.coords(p + 1))
    if x is None:
        raise ConstructionError("multiplication by sigma is not onto in degree p+1")
    lam = Multivector.from_coords(k, p - 1, x)
    if not lam or sigma * sigma * lam or sigma * phi_v * lam:
        raise ConstructionError("lambda fails its defining equations")
    return lam, phi_v * lam * -2


def case23_dimensions(p: int, phi: Sequence) -> tuple[int, int]:
    """(dim{zeta in Lambda^p : sigma zeta in phi Lambda^{p+1}}, dim phi Lambda^{p-1}) on Q^{2p}."""
    k = 2 * p
    sigma = Multivector.zero(k)
    for a in range(p):
        sigma = sigma + Multivector.basis(k, 2 * a, 2 * a + 1)
    phi_v = _mv(phi)
    phisig = phi_v * sigma
    # sigma zeta in phi Lambda  <=>  phi sigma zeta = 0
    z_dim = kernel(operator_matrix(lambda x: phisig * x, k, p, p + 3)).dim
    image_dim = rank(operator_matrix(lambda x: phi_v * x, k, p - 1, p))
    return z_dim, image_dim


def _block_solve(blocks: list[list[Matrix | None]], row_sizes: list[int], col_sizes: list[int], rhs: list[Fraction]):
    data = []
    for bi, rs in enumerate(row_sizes):
        for r in range(rs):
            row = []
            for bj, cs in enumerate(col_sizes):
                blk = blocks[bi][bj]
                row.extend(blk.data[r] if blk is not None else [Fraction(0)] * cs)
            data.append(row)
    return solve(Matrix(data, sum(col_sizes)), rhs)


def exactness_system_solvable(beta: Multivector, alpha: Multivector, eps, omega: Multivector, theta: NilpotentOperator) -> bool:
    """Whether Omega psi = beta, theta psi = 0, Omega phi + eps psi + theta rho = alpha has a solution.

    Solvable exactly when u*alpha + beta is exact in the assembled algebra.
    """
    n = omega.n
    if beta.n != n or alpha.n != n:
        raise DimensionError("dimension mismatch")
    e = _mv(eps)
    grades = set(beta.grades()) | {g + 1 for g in alpha.grades()}
    for k in sorted(grades):
        sz = lambda g: len(graded_basis(n, g))  # noqa: E731
        cols = [sz(k - 2), sz(k - 3), sz(k - 1)]
        rows = [sz(k), sz(k - 2), sz(k - 1)]

        def op(f, gi, go):
            if sz(gi) == 0 or sz(go) == 0:
                return None
            return operator_matrix(f, n, gi, go)

        th = lambda x: apply_derivation(theta, x)  # noqa: E731
        blocks = [
            [op(lambda x: omega * x, k - 2, k), None, None],
            [op(th, k - 2, k - 2), None, None],
            [op(lambda x: e * x, k - 2, k - 1), op(lambda x: omega * x, k - 3, k - 1), op(th, k - 1, k - 1)],
        ]
        rhs = beta.coords(k) + [Fraction(0)] * rows[1] + alpha.coords(k - 1)
        if sum(cols) == 0:
            if any(rhs):
                return False
            continue
        if _block_solve(blocks, rows, cols, rhs) is None:
            return False
    return True
