"""Rank, support and the canonical form of a pair (theta, Omega).

Here ``theta`` is a nilpotent operator on V = Q^n and ``Omega`` a 2-vector with
theta(Omega) = 0.  On the support S of Omega the inverse of Omega's
coefficient matrix is a symplectic form for which theta is skew, and the
canonical decomposition is the normal form of such a pair: paired odd
Jordan chains (U^a, V^a) and self-paired even chains Z^b.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .errors import ConstructionError, HypothesisViolation
from .exterior import (
    Multivector,
    NilpotentOperator,
    apply_derivation,
    graded_basis,
    operator_matrix,
    power,
    pushforward,
    wedge_all,
)
from .linalg import Matrix, Subspace, format_fraction, inverse, kernel, solve, to_fraction

__all__ = [
    "UVBlock",
    "ZBlock",
    "CanonicalDecomposition",
    "omega_rank",
    "support",
    "canonical_decomposition",
    "verify_decomposition",
    "canonical_model",
    "beta_p",
    "beta_p_factors",
    "sp_member",
    "sp_space",
    "default_selector",
    "check_selector",
    "lefschetz_maps",
    "mu_matrix",
    "check_pair",
]

Vector = tuple[Fraction, ...]
Selector = tuple[tuple[Fraction, Fraction], ...]


def _vec(v) -> Vector:
    return tuple(to_fraction(x) for x in v)


def _add(a, b) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def _scale(c, a) -> Vector:
    return tuple(c * x for x in a)


def _check_grade2(omega: Multivector):
    if not omega:
        raise HypothesisViolation("omega-nonzero", "Omega must be nonzero")
    if not omega.is_homogeneous(2):
        raise HypothesisViolation("omega-grade-2", f"Omega must be homogeneous of grade 2, has grades {sorted(omega.grades())}")


def omega_rank(omega: Multivector) -> int:
    """Largest k with Omega^k != 0."""
    _check_grade2(omega)
    k, p = 0, Multivector.scalar(omega.n)
    while True:
        p = p * omega
        if not p:
            return k
        k += 1


def support(omega: Multivector) -> Subspace:
    """{x : x ^ Omega^r = 0}; has dimension 2r and Omega lies in its second power."""
    r = omega_rank(omega)
    top = power(omega, r)
    n = omega.n
    m = operator_matrix(lambda x: x * top, n, 1, 2 * r + 1)
    return kernel(m)


def check_pair(theta: NilpotentOperator, omega: Multivector):
    if theta.n != omega.n:
        raise HypothesisViolation("dimension", f"theta acts on Q^{theta.n}, Omega lives over Q^{omega.n}")
    _check_grade2(omega)
    t_omega = apply_derivation(theta, omega)
    if t_omega:
        raise HypothesisViolation("theta-omega-zero", f"theta(Omega) = {t_omega!r} is nonzero", t_omega)


@dataclass(frozen=True)
class UVBlock:
    """A pair of theta-chains of length 2l+1; ``u[0]`` and ``v[0]`` are killed by theta."""

    l: int
    u: tuple[Vector, ...]
    v: tuple[Vector, ...]


@dataclass(frozen=True)
class ZBlock:
    """A self-paired theta-chain of length 2m with its sign constant ``c``."""

    m: int
    z: tuple[Vector, ...]
    c: Fraction


@dataclass(frozen=True)
class CanonicalDecomposition:
    n: int
    uv: tuple[UVBlock, ...]
    zb: tuple[ZBlock, ...]
    support: Subspace = field(compare=False)

    @property
    def p(self) -> int:
        return len(self.uv)

    @property
    def q(self) -> int:
        return len(self.zb)

    @property
    def rank(self) -> int:
        return self.support.dim // 2

    def basis_vectors(self) -> list[Vector]:
        """Adapted basis of S: each UV block's u's then v's, then each Z block's z's."""
        out: list[Vector] = []
        for b in self.uv:
            out.extend(b.u)
            out.extend(b.v)
        for b in self.zb:
            out.extend(b.z)
        return out

    def labels(self) -> list[str]:
        out = []
        for a, b in enumerate(self.uv, 1):
            out += [f"u{a}_{i}" for i in range(1, 2 * b.l + 2)]
            out += [f"v{a}_{i}" for i in range(1, 2 * b.l + 2)]
        for a, b in enumerate(self.zb, 1):
            out += [f"z{a}_{j}" for j in range(1, 2 * b.m + 1)]
        return out

    def coordinates(self, x: Sequence) -> list[Fraction] | None:
        """Coefficients of x in :meth:`basis_vectors`, or None when x is not in S."""
        basis = self.basis_vectors()
        return solve(Matrix.from_columns(basis, self.n), list(x))

    def local_omega(self) -> Multivector:
        """The canonical 2-vector written in the adapted basis of S."""
        k = self.support.dim
        out = Multivector.zero(k)
        pos = 0
        for b in self.uv:
            d = 2 * b.l + 1
            for i in range(1, d + 1):
                sign = 1 if i % 2 else -1
                out = out + Multivector.basis(k, pos + d - i, pos + d + i - 1) * sign
            pos += 2 * d
        for b in self.zb:
            d = 2 * b.m
            for j in range(1, b.m + 1):
                sign = 1 if j % 2 else -1
                out = out + Multivector.basis(k, pos + d - j, pos + j - 1) * (sign * b.c)
            pos += d
        return out

    def omega(self) -> Multivector:
        """Omega rebuilt from the blocks, in the ambient coordinates."""
        return pushforward(self.basis_vectors(), self.local_omega())

    def to_json(self) -> dict:
        def vecs(vs):
            return [[format_fraction(x) for x in v] for v in vs]

        return {
            "dim": self.n,
            "rank": self.rank,
            "p": self.p,
            "q": self.q,
            "uv_blocks": [{"l": b.l, "u": vecs(b.u), "v": vecs(b.v)} for b in self.uv],
            "z_blocks": [{"m": b.m, "c": format_fraction(b.c), "z": vecs(b.z)} for b in self.zb],
            "support": vecs(self.support.basis),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CanonicalDecomposition":
        def vecs(vs):
            return tuple(_vec(v) for v in vs)

        n = int(data["dim"])
        uv = tuple(UVBlock(int(b["l"]), vecs(b["u"]), vecs(b["v"])) for b in data["uv_blocks"])
        zb = tuple(ZBlock(int(b["m"]), vecs(b["z"]), to_fraction(b["c"])) for b in data["z_blocks"])
        basis = [v for b in uv for v in b.u + b.v] + [v for b in zb for v in b.z]
        return cls(n, uv, zb, Subspace(n, basis))


def _square_class(c: Fraction) -> tuple[Fraction, Fraction]:
    """(lam, c / lam^2) with c / lam^2 equal to +-1 when |c| is a rational square,
    otherwise a squarefree-as-far-as-found integer."""
    a, b = c.numerator, c.denominator
    t = a * b
    sign = 1 if t > 0 else -1
    t = abs(t)
    s = 1
    f = 2
    while f * f <= t and f < 10_000:
        while t % (f * f) == 0:
            t //= f * f
            s *= f
        f += 1
    r = isqrt(t)
    if r * r == t:
        s *= r
        t = 1
    lam = Fraction(s, b)
    return lam, c / (lam * lam)


def canonical_decomposition(theta: NilpotentOperator, omega: Multivector) -> CanonicalDecomposition:
    """Split the support of Omega into theta-chains in canonical position.

    Chains are peeled off longest first.  For the current maximal length d the
    form h(x, y) = w(x, theta^{d-1} y) is symmetric (d even) or alternating
    (d odd); a vector (pair) with h != 0 generates a block, which is then
    normalized so that only opposite ends of the chains pair, and the
    computation recurses on the w-orthogonal complement.
    """
    check_pair(theta, omega)
    n = theta.n
    S = support(omega)
    B = [tuple(v) for v in S.basis]
    k = len(B)
    piv = S.pivots

    t_cols = []
    for b in B:
        c = S.coordinates(theta(list(b)))
        if c is None:
            raise ConstructionError("support of Omega is not theta-invariant")
        t_cols.append(c)
    tS = Matrix.from_columns(t_cols, k)

    W = Matrix.zeros(k, k)
    for i in range(k):
        for j in range(i + 1, k):
            c = omega.coeff((1 << piv[i]) | (1 << piv[j]))
            W.data[i][j] = c
            W.data[j][i] = -c
    if pushforward(B, _local_from_matrix(W)) != omega:
        raise ConstructionError("Omega is not contained in the second power of its support")
    form_m = inverse(W)

    def form(x, y):
        total = Fraction(0)
        for i, xi in enumerate(x):
            if xi:
                row = form_m.data[i]
                for j, yj in enumerate(y):
                    if yj and row[j]:
                        total += xi * row[j] * yj
        return total

    def T(x, j):
        for _ in range(j):
            x = tuple(tS @ list(x))
        return x

    def chain_len(x):
        d = 0
        while any(x):
            x = T(x, 1)
            d += 1
        return d

    cur = [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]
    uv_local: list[tuple[int, list, list]] = []
    z_local: list[tuple[int, list, Fraction]] = []
    while cur:
        d = max(chain_len(x) for x in cur)
        if d % 2 == 0:
            x = _pick_symmetric(cur, lambda a, b: form(a, T(b, d - 1)))
            x = _normalize_single(x, d, form, T)
            g = form(x, T(x, d - 1))
            lam, c = _square_class(-1 / g)
            x = _scale(lam, x)
            chain = [T(x, d - j) for j in range(1, d + 1)]
            z_local.append((d // 2, chain, c))
        else:
            x, y = _pick_alternating(cur, lambda a, b: form(a, T(b, d - 1)))
            x = _normalize_against(x, y, d, form, T)
            y = _normalize_against(y, x, d, form, T)
            y = _normalize_cross(x, y, d, form, T)
            H = form(x, T(y, d - 1))
            y = _scale(-1 / H, y)
            us = [T(x, d - i) for i in range(1, d + 1)]
            vs = [T(y, d - i) for i in range(1, d + 1)]
            uv_local.append(((d - 1) // 2, us, vs))
            chain = us + vs
        # w-orthogonal complement of the new block inside span(cur)
        rows = [[form(c, b) for c in cur] for b in chain]
        ker = kernel(Matrix(rows, len(cur)))
        comp = []
        for coeffs in ker.basis:
            v = [Fraction(0)] * k
            for a, c in zip(coeffs, cur):
                if a:
                    for j, cj in enumerate(c):
                        v[j] += a * cj
            comp.append(v)
        cur = [tuple(v) for v in Subspace(k, comp).basis]

    def amb(x) -> Vector:
        out = [Fraction(0)] * n
        for a, b in zip(x, B):
            if a:
                for j, bj in enumerate(b):
                    if bj:
                        out[j] += a * bj
        return tuple(out)

    uv = tuple(UVBlock(l, tuple(amb(x) for x in us), tuple(amb(x) for x in vs)) for l, us, vs in uv_local)
    zb = tuple(ZBlock(m, tuple(amb(x) for x in zs), c) for m, zs, c in z_local)
    D = CanonicalDecomposition(n, uv, zb, S)
    problems = verify_decomposition(D, theta, omega)
    if problems:
        raise ConstructionError("canonical decomposition failed post-verification: " + "; ".join(problems))
    return D


def _local_from_matrix(W: Matrix) -> Multivector:
    k = W.rows
    terms = {}
    for i in range(k):
        for j in range(i + 1, k):
            if W.data[i][j]:
                terms[(1 << i) | (1 << j)] = W.data[i][j]
    return Multivector(k, terms)


def _pick_symmetric(cur, h):
    for x in cur:
        if h(x, x):
            return x
    for i, x in enumerate(cur):
        for y in cur[i + 1:]:
            if h(x, y):
                return _add(x, y)
    raise ConstructionError("no vector with h(x, x) != 0 for an even chain length")


def _pick_alternating(cur, h):
    for x in cur:
        for y in cur:
            if h(x, y):
                return x, y
    raise ConstructionError("no pair with h(x, y) != 0 for an odd chain length")


def _normalize_single(x, d, form, T):
    # kill w(x, theta^k x) for odd k < d-1, top down; even k vanish by skewness
    top = form(x, T(x, d - 1))
    for k in range(d - 3, 0, -2):
        g = form(x, T(x, k))
        if g:
            x = _add(x, _scale(-g / (2 * top), T(x, d - 1 - k)))
    return x


def _normalize_against(x, y, d, form, T):
    # make the chain of x isotropic using its partner y
    H = form(x, T(y, d - 1))
    for k in range(d - 2, 0, -2):
        g = form(x, T(x, k))
        if g:
            x = _add(x, _scale(-g / (2 * H), T(y, d - 1 - k)))
    return x


def _normalize_cross(x, y, d, form, T):
    # pair only opposite ends: w(x, theta^k y) = 0 for k < d-1
    H = form(x, T(y, d - 1))
    for k in range(d - 2, -1, -1):
        f = form(x, T(y, k))
        if f:
            y = _add(y, _scale(-f / H, T(y, d - 1 - k)))
    return y


def verify_decomposition(D: CanonicalDecomposition, theta: NilpotentOperator, omega: Multivector) -> list[str]:
    """Every structural invariant of the canonical form, as a list of failures."""
    problems = []
    if D.p + D.q == 0:
        problems.append("no blocks (p + q = 0)")
    basis = D.basis_vectors()
    if Subspace(D.n, basis).dim != len(basis):
        problems.append("adapted basis is linearly dependent")
    S = support(omega)
    if Subspace(D.n, basis) != S:
        problems.append("adapted basis does not span the support of Omega")
    zero = tuple(Fraction(0) for _ in range(D.n))

    def chain_ok(vs, name):
        if tuple(theta(list(vs[0]))) != zero:
            problems.append(f"theta({name}_1) != 0")
        for i in range(1, len(vs)):
            if tuple(theta(list(vs[i]))) != vs[i - 1]:
                problems.append(f"theta({name}_{i + 1}) != {name}_{i}")

    for a, b in enumerate(D.uv, 1):
        if len(b.u) != 2 * b.l + 1 or len(b.v) != 2 * b.l + 1:
            problems.append(f"UV block {a} has wrong length")
            continue
        chain_ok(b.u, f"u{a}")
        chain_ok(b.v, f"v{a}")
    for a, b in enumerate(D.zb, 1):
        if b.m < 1 or len(b.z) != 2 * b.m:
            problems.append(f"Z block {a} has wrong length")
            continue
        if not b.c:
            problems.append(f"Z block {a} has c = 0")
        chain_ok(b.z, f"z{a}")
    if not problems and D.omega() != omega:
        problems.append("reconstructed Omega differs from the input")
    return problems


def canonical_model(uv_ls: Sequence[int] = (), z_ms: Sequence[int] = (), signs: Sequence = (), extra: int = 0):
    """(theta, Omega) already in canonical form on Q^(2r + extra).

    Basis order matches :meth:`CanonicalDecomposition.basis_vectors`; the
    ``extra`` trailing coordinates are a theta-trivial complement of S.
    """
    signs = list(signs) or [1] * len(z_ms)
    if len(signs) != len(z_ms):
        raise ValueError("one sign per Z block")
    n = sum(2 * (2 * l + 1) for l in uv_ls) + sum(2 * m for m in z_ms) + extra
    images: dict[int, list] = {}
    omega = Multivector.zero(n)
    pos = 0

    def chain(start, length):
        for i in range(1, length):
            images[start + i] = [Fraction(int(j == start + i - 1)) for j in range(n)]

    for l in uv_ls:
        d = 2 * l + 1
        chain(pos, d)
        chain(pos + d, d)
        for i in range(1, d + 1):
            omega = omega + Multivector.basis(n, pos + d - i, pos + d + i - 1) * (1 if i % 2 else -1)
        pos += 2 * d
    for m, c in zip(z_ms, signs):
        d = 2 * m
        chain(pos, d)
        for j in range(1, m + 1):
            omega = omega + Multivector.basis(n, pos + d - j, pos + j - 1) * ((1 if j % 2 else -1) * to_fraction(c))
        pos += d
    return NilpotentOperator.from_images(n, images), omega


def default_selector(D: CanonicalDecomposition) -> Selector:
    return tuple((Fraction(1), Fraction(0)) for _ in D.uv)


def check_selector(D: CanonicalDecomposition, P: Sequence) -> Selector:
    if len(P) != D.p:
        raise ValueError(f"selector has {len(P)} pairs, decomposition has p = {D.p}")
    out = tuple((to_fraction(r), to_fraction(s)) for r, s in P)
    for r, s in out:
        if not r and not s:
            raise ValueError("selector pairs must be nonzero")
    return out


def beta_p_factors(D: CanonicalDecomposition, P: Sequence) -> list[Vector]:
    """The linear factors of beta_P in product order."""
    P = check_selector(D, P)
    out: list[Vector] = []
    for b, (r, s) in zip(D.uv, P):
        out.append(_add(_scale(r, b.u[b.l]), _scale(s, b.v[b.l])))
        out.extend(b.u[: b.l])
        out.extend(b.v[: b.l])
    for b in D.zb:
        out.extend(b.z[: b.m])
    return out


def beta_p(D: CanonicalDecomposition, P: Sequence) -> Multivector:
    return wedge_all((Multivector.from_vector(v) for v in beta_p_factors(D, P)), D.n)


def sp_space(D: CanonicalDecomposition, P: Sequence) -> Subspace:
    """S_P by definition: the x with x ^ beta_P = 0."""
    beta = beta_p(D, P)
    k = beta.grade()
    return kernel(operator_matrix(lambda x: x * beta, D.n, 1, k + 1))


def sp_member(D: CanonicalDecomposition, xi: Sequence) -> Selector | None:
    """A selector P with xi in S_P, or None if no P works.

    xi lies in some S_P exactly when it has no component above level l_a+1
    in a UV block or above level m_b in a Z block; each (r_a, s_a) is then the
    level-(l_a+1) coordinate pair of xi, or (1, 0) when that pair vanishes.
    """
    coords = D.coordinates(xi)
    if coords is None:
        raise ValueError("vector is not in the support S")
    P = []
    pos = 0
    for b in D.uv:
        d = 2 * b.l + 1
        cu, cv = coords[pos: pos + d], coords[pos + d: pos + 2 * d]
        if any(cu[b.l + 1:]) or any(cv[b.l + 1:]):
            return None
        pair = (cu[b.l], cv[b.l])
        P.append(pair if any(pair) else (Fraction(1), Fraction(0)))
        pos += 2 * d
    for b in D.zb:
        cz = coords[pos: pos + 2 * b.m]
        if any(cz[b.m:]):
            return None
        pos += 2 * b.m
    return tuple(P)


def mu_matrix(omega: Multivector, k: int, times: int = 1) -> Matrix:
    """Matrix of x -> x ^ Omega^times from grade k to grade k + 2*times."""
    om = power(omega, times)
    return operator_matrix(lambda x: x * om, omega.n, k, k + 2 * times)


def lefschetz_maps(D: CanonicalDecomposition, k: int) -> Matrix:
    """mu_Omega^k : Lambda^{r-k} S -> Lambda^{r+k} S in the adapted monomial basis."""
    r = D.rank
    if not 0 <= k <= r:
        raise ValueError(f"k must lie in [0, {r}]")
    return mu_matrix(D.local_omega(), r - k, k)
