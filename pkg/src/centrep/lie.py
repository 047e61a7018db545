"""Lie algebras by structure constants and their Chevalley-Eilenberg cohomology.

Convention: on 1-forms d(phi)(x, y) = -phi([x, y]), extended to the exterior
algebra of L* as an antiderivation of degree +1, so for basis forms
d(e^k) = -sum_{i<j} c^k_{ij} e^i ^ e^j.  Forms are Multivectors over the dual
basis; (e^i ^ e^j)(e_i, e_j) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .errors import HypothesisViolation
from .exterior import Multivector, NilpotentOperator, apply_derivation, apply_odd_derivation, contract, graded_basis, operator_matrix
from .linalg import Matrix, Subspace, format_fraction, kernel, solve, to_fraction

__all__ = [
    "LieAlgebra",
    "JacobiError",
    "CEComplex",
    "Cohomology",
    "CentralAction",
    "abelian",
    "heisenberg",
    "filiform4",
    "check_jacobi",
    "center",
    "lower_central_series",
    "is_nilpotent",
    "ce_complex",
    "cohomology",
    "central_action",
    "interior",
    "derivation_extension",
    "central_extension",
    "build_instance_algebra",
    "exactness_oracle",
    "assemble_cocycle",
    "cartan_defect",
]


class JacobiError(ValueError):
    pass


class LieAlgebra:
    """Structure constants [e_i, e_j] = sum_k c^k_{ij} e_k, stored for i < j (0-based)."""

    def __init__(self, dim: int, brackets: dict | None = None, labels: Sequence[str] | None = None, distinguished: dict | None = None):
        self.dim = dim
        clean: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i, j), coeffs in (brackets or {}).items():
            if i == j:
                if any(to_fraction(c) for c in coeffs.values()):
                    raise ValueError(f"[e{i}, e{i}] must vanish")
                continue
            sign = 1
            if i > j:
                i, j, sign = j, i, -1
            for k, c in coeffs.items():
                if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                    raise ValueError(f"index out of range in bracket ({i}, {j}) -> {k}")
                c = to_fraction(c) * sign
                slot = clean.setdefault((i, j), {})
                v = slot.get(k, 0) + c
                if v:
                    slot[k] = v
                else:
                    slot.pop(k, None)
        self.brackets = {key: val for key, val in clean.items() if val}
        self.labels = list(labels) if labels else [f"e{i + 1}" for i in range(dim)]
        self.distinguished = dict(distinguished or {})

    def bracket_basis(self, i: int, j: int) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        if i == j:
            return out
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        for k, c in self.brackets.get((i, j), {}).items():
            out[k] = c * sign
        return out

    def bracket(self, x: Sequence, y: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, a in enumerate(x):
            if not a:
                continue
            for j, b in enumerate(y):
                if not b or i == j:
                    continue
                for k, c in enumerate(self.bracket_basis(i, j)):
                    if c:
                        out[k] += a * b * c
        return out

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and self.dim == other.dim and self.brackets == other.brackets

    def __repr__(self):
        return f"LieAlgebra(dim={self.dim}, {len(self.brackets)} nonzero brackets)"

    @cached_property
    def d1(self) -> list[Multivector]:
        """d(e^k) for each basis 1-form."""
        n = self.dim
        out = [Multivector.zero(n) for _ in range(n)]
        for (i, j), coeffs in self.brackets.items():
            for k, c in coeffs.items():
                out[k] = out[k] + Multivector.basis(n, i, j) * (-c)
        return out

    def d(self, form: Multivector) -> Multivector:
        if form.n != self.dim:
            raise ValueError("form lives on a space of the wrong dimension")
        return apply_odd_derivation(self.d1, form)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "brackets": [
                {"i": i + 1, "j": j + 1, "coeffs": {str(k + 1): format_fraction(c) for k, c in sorted(coeffs.items())}}
                for (i, j), coeffs in sorted(self.brackets.items())
            ],
            "labels": self.labels,
            "distinguished": {k: v + 1 for k, v in self.distinguished.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "LieAlgebra":
        n = int(data["dim"])
        brackets = {}
        for b in data.get("brackets", []):
            key = (int(b["i"]) - 1, int(b["j"]) - 1)
            slot = brackets.setdefault(key, {})
            for k, c in b["coeffs"].items():
                slot[int(k) - 1] = slot.get(int(k) - 1, 0) + to_fraction(c)
        dist = {k: int(v) - 1 for k, v in data.get("distinguished", {}).items()}
        return cls(n, brackets, data.get("labels"), dist)


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(n)


def heisenberg() -> LieAlgebra:
    return LieAlgebra(3, {(0, 1): {2: 1}})


def filiform4() -> LieAlgebra:
    return LieAlgebra(4, {(0, 1): {2: 1}, (0, 2): {3: 1}})


def check_jacobi(L: LieAlgebra) -> list[tuple[int, int, int]]:
    """Basis triples (0-based) on which the Jacobiator is nonzero."""
    bad = []
    n = L.dim
    for i, j, k in combinations(range(n), 3):
        ei, ej, ek = ([Fraction(int(t == s)) for t in range(n)] for s in (i, j, k))
        a = L.bracket(L.bracket(ei, ej), ek)
        b = L.bracket(L.bracket(ej, ek), ei)
        c = L.bracket(L.bracket(ek, ei), ej)
        if any(x + y + z for x, y, z in zip(a, b, c)):
            bad.append((i, j, k))
    return bad


def center(L: LieAlgebra) -> Subspace:
    n = L.dim
    rows = []
    for i in range(n):
        # coefficient of e_k in [x, e_i] as a row in x
        for k in range(n):
            rows.append([L.bracket_basis(j, i)[k] for j in range(n)])
    return kernel(Matrix(rows, n))


def lower_central_series(L: LieAlgebra) -> list[Subspace]:
    """L, [L, L], [L, [L, L]], ... until it reaches 0 or stabilizes."""
    n = L.dim
    cur = Subspace.full(n)
    series = [cur]
    while cur.dim:
        vecs = [L.bracket([Fraction(int(t == a)) for t in range(n)], list(v)) for a in range(n) for v in cur.basis]
        nxt = Subspace(n, vecs)
        if nxt == cur:
            break
        series.append(nxt)
        cur = nxt
    return series


def is_nilpotent(L: LieAlgebra) -> bool:
    return lower_central_series(L)[-1].dim == 0


@dataclass
class CEComplex:
    """Differentials d_k : Lambda^k L* -> Lambda^{k+1} L* for k = 0..n."""

    dim: int
    d: list[Matrix]

    def check_d_squared(self) -> bool:
        for k in range(self.dim):
            if self.d[k].cols and self.d[k + 1].rows and not (self.d[k + 1] @ self.d[k]).is_zero():
                return False
        return True


def _require_jacobi(L: LieAlgebra):
    bad = check_jacobi(L)
    if bad:
        i, j, k = bad[0]
        raise JacobiError(f"Jacobi identity fails on (e{i + 1}, e{j + 1}, e{k + 1})")


def ce_complex(L: LieAlgebra, check: bool = True) -> CEComplex:
    if check:
        _require_jacobi(L)
    n = L.dim
    ds = [operator_matrix(L.d, n, k, k + 1) for k in range(n + 1)]
    cx = CEComplex(n, ds)
    if check and not cx.check_d_squared():
        raise JacobiError("d^2 != 0")
    return cx


@dataclass
class Cohomology:
    betti: list[int]
    representatives: list[list[Multivector]] = field(default_factory=list)

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))


def _image(m: Matrix) -> Subspace:
    return Subspace(m.rows, m.columns()) if m.cols else Subspace(m.rows)


def cohomology(L: LieAlgebra, cx: CEComplex | None = None) -> Cohomology:
    cx = cx or ce_complex(L)
    n = L.dim
    betti, reps = [], []
    for k in range(n + 1):
        z = kernel(cx.d[k])
        b = _image(cx.d[k - 1]) if k > 0 else Subspace(z.ambient_dim)
        chosen = []
        acc = b
        for v in z.basis:
            if not acc.contains(v):
                chosen.append(Multivector.from_coords(n, k, v))
                acc = acc.sum(Subspace(z.ambient_dim, [v]))
        betti.append(z.dim - b.dim)
        reps.append(chosen)
    return Cohomology(betti, reps)


def interior(z: Sequence, form: Multivector) -> Multivector:
    """Interior product by the vector z of L."""
    out = Multivector.zero(form.n)
    for i, c in enumerate(z):
        if c:
            out = out + contract(i, form) * c
    return out


@dataclass
class CentralAction:
    nontrivial: bool
    nilpotent: bool
    z: tuple | None = None
    degree: int | None = None
    cocycle: Multivector | None = None
    image: Multivector | None = None

    def to_json(self) -> dict:
        out = {"nontrivial": self.nontrivial, "nilpotent": self.nilpotent}
        if self.nontrivial:
            out.update(
                z=[format_fraction(x) for x in self.z],
                degree=self.degree,
                cocycle=self.cocycle.to_json(),
                image=self.image.to_json(),
            )
        return out


def central_action(L: LieAlgebra, cx: CEComplex | None = None) -> CentralAction:
    """Search a basis of the center and cocycle bases for z, a with [i_z a] != 0."""
    cx = cx or ce_complex(L)
    n = L.dim
    nil = is_nilpotent(L)
    Z = center(L)
    for k in range(1, n + 1):
        cocycles = kernel(cx.d[k]).basis
        exact = _image(cx.d[k - 2]) if k >= 2 else Subspace(1)
        for zv in Z.basis:
            for v in cocycles:
                a = Multivector.from_coords(n, k, v)
                img = interior(zv, a)
                if not exact.contains(img.coords(k - 1)):
                    return CentralAction(True, nil, tuple(zv), k, a, img)
    return CentralAction(False, nil)


def derivation_extension(L: LieAlgebra, D) -> LieAlgebra:
    """L + Q u with [u, x] = D x; u gets index L.dim."""
    D = D if isinstance(D, Matrix) else Matrix(D)
    n = L.dim
    if D.shape != (n, n):
        raise ValueError("derivation must be an n x n matrix")
    for i in range(n):
        for j in range(i + 1, n):
            ei = [Fraction(int(t == i)) for t in range(n)]
            ej = [Fraction(int(t == j)) for t in range(n)]
            lhs = D @ L.bracket(ei, ej)
            rhs = [a + b for a, b in zip(L.bracket(D @ ei, ej), L.bracket(ei, D @ ej))]
            if lhs != rhs:
                raise HypothesisViolation("derivation", f"D is not a derivation on (e{i + 1}, e{j + 1})")
    try:
        NilpotentOperator(D)
    except ValueError:
        raise HypothesisViolation("nilpotent", "D is not nilpotent") from None
    brackets = {key: dict(val) for key, val in L.brackets.items()}
    for i in range(n):
        img = D.column(i)
        if any(img):
            brackets[(i, n)] = {k: -c for k, c in enumerate(img) if c}
    out = LieAlgebra(n + 1, brackets, L.labels + ["u"], L.distinguished)
    _require_jacobi(out)
    return out


def central_extension(L: LieAlgebra, omega2: Multivector) -> LieAlgebra:
    """L + Q z with [x, y] = [x, y]_L + omega2(x, y) z; z gets index L.dim."""
    n = L.dim
    if omega2.n != n or not omega2.is_homogeneous(2):
        raise ValueError("omega2 must be a 2-form on L")
    if L.d(omega2):
        raise HypothesisViolation("closed-2-form", "the 2-form is not closed", omega2)
    brackets = {key: dict(val) for key, val in L.brackets.items()}
    for m, c in omega2.terms.items():
        i, j = (t for t in range(n) if m >> t & 1)
        brackets.setdefault((i, j), {})[n] = c
    out = LieAlgebra(n + 1, brackets, L.labels + ["z"], L.distinguished)
    _require_jacobi(out)
    return out


def _embed(form: Multivector, n: int) -> Multivector:
    return Multivector(n, form.terms)


def build_instance_algebra(theta: NilpotentOperator, eps: Sequence, omega: Multivector) -> LieAlgebra:
    """The algebra with d(phi) = u* ^ theta(phi) on I* and d(z*) = u* ^ eps + Omega.

    Basis: I (0..n-1), then u, then z.
    """
    n = theta.n
    if omega.n != n or len(eps) != n:
        raise ValueError("dimension mismatch")
    if apply_derivation(theta, omega):
        raise HypothesisViolation("theta-omega-zero", "theta(Omega) != 0")
    D = theta.matrix.transpose().scale(-1)
    W = derivation_extension(LieAlgebra(n, labels=[f"i{k + 1}" for k in range(n)]), D)
    ustar = Multivector.basis(n + 1, n)
    two_form = ustar * Multivector.from_vector(list(eps) + [0]) + _embed(omega, n + 1)
    L = central_extension(W, -two_form)
    L.distinguished = {"u": n, "z": n + 1}
    return L


def exactness_oracle(L: LieAlgebra, form: Multivector, cx: CEComplex | None = None) -> bool:
    """True iff the closed form is d of something."""
    if L.d(form):
        raise ValueError("form is not closed")
    n = L.dim
    for k in sorted(form.grades()):
        if k == 0:
            return False
        d_prev = cx.d[k - 1] if cx is not None else operator_matrix(L.d, n, k - 1, k)
        if solve(d_prev, form.coords(k)) is None:
            return False
    return True


def assemble_cocycle(L: LieAlgebra, beta: Multivector, alpha: Multivector, gamma: Multivector) -> Multivector:
    """A closed form z*(u* alpha + beta) + u* delta + gamma' on the assembled algebra.

    Under this module's sign convention gamma' = -gamma closes the form; if it
    does not, (delta, gamma') is solved for among forms free of z*.
    """
    n = L.dim
    u, z = L.distinguished["u"], L.distinguished["z"]
    ustar, zstar = Multivector.basis(n, u), Multivector.basis(n, z)
    head = zstar * (ustar * _embed(alpha, n) + _embed(beta, n))
    omega = head - _embed(gamma, n)
    if not L.d(omega):
        return omega
    target = -L.d(head)
    free = [m for m in range(1 << n) if not m >> z & 1]
    total = Multivector.zero(n)
    for g in sorted(target.grades()):
        cols = [m for m in free if bin(m).count("1") == g - 1]
        rows = graded_basis(n, g)
        pos = {m: r for r, m in enumerate(rows)}
        data = [[Fraction(0)] * len(cols) for _ in rows]
        for c, m in enumerate(cols):
            for mm, v in L.d(Multivector(n, {m: 1})).terms.items():
                data[pos[mm]][c] = v
        x = solve(Matrix(data, len(cols)), target.coords(g))
        if x is None:
            raise ValueError("no closing completion exists")
        total = total + Multivector(n, {m: v for m, v in zip(cols, x) if v})
    return head + total


def cartan_defect(L: LieAlgebra, z: Sequence) -> list[int]:
    """Monomials (bitmasks) on which d i_z + i_z d does not vanish."""
    n = L.dim
    bad = []
    for m in range(1 << n):
        e = Multivector(n, {m: 1})
        if L.d(interior(z, e)) + interior(z, L.d(e)):
            bad.append(m)
    return bad
