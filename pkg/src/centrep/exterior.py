"""Sparse exterior algebra over Q.

A :class:`Multivector` on an ``n``-dimensional space maps basis monomials to
nonzero Fractions.  Monomials are bitmasks over ``range(n)``: bit ``i`` set
means ``e_i`` is a factor, factors always listed in increasing order.  The
wedge sign is the parity of the merge permutation, counted with popcounts.

Indices are 0-based in the Python API.  The JSON form uses 1-based indices.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence

from .linalg import DimensionError, Matrix, format_fraction, to_fraction

__all__ = [
    "Multivector",
    "NilpotentOperator",
    "NotNilpotentError",
    "wedge",
    "power",
    "apply_derivation",
    "apply_odd_derivation",
    "contract",
    "grade_project",
    "graded_basis",
    "operator_matrix",
    "pushforward",
    "wedge_all",
    "popcount",
]


def popcount(x: int) -> int:
    return bin(x).count("1")


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _merge_sign(a: int, b: int) -> int:
    """Sign of e_A ^ e_B relative to the sorted monomial (A, B disjoint)."""
    s = 0
    for j in _bits(b):
        s += popcount(a >> (j + 1))
    return -1 if s & 1 else 1


class Multivector:
    """An element of the exterior algebra of Q^n.

    Treat instances as immutable.  ``*`` (and ``^``) between two multivectors is
    the wedge product; ``*`` with a number is scalar multiplication.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict[int, Fraction] | None = None):
        self.n = n
        clean = {}
        if terms:
            limit = 1 << n
            for mask, c in terms.items():
                if not 0 <= mask < limit:
                    raise DimensionError(f"monomial {bin(mask)} outside dimension {n}")
                c = to_fraction(c)
                if c:
                    clean[mask] = c
        self.terms = clean

    @classmethod
    def _raw(cls, n: int, terms: dict[int, Fraction]) -> "Multivector":
        obj = cls.__new__(cls)
        obj.n = n
        obj.terms = terms
        return obj

    # construction helpers

    @classmethod
    def zero(cls, n: int) -> "Multivector":
        return cls._raw(n, {})

    @classmethod
    def scalar(cls, n: int, c=1) -> "Multivector":
        c = to_fraction(c)
        return cls._raw(n, {0: c} if c else {})

    @classmethod
    def basis(cls, n: int, *indices: int) -> "Multivector":
        """The monomial e_{i1} ^ e_{i2} ^ ... in the given order (may carry a sign)."""
        out = cls.scalar(n)
        for i in indices:
            if not 0 <= i < n:
                raise DimensionError(f"index {i} outside dimension {n}")
            out = out * cls._raw(n, {1 << i: Fraction(1)})
        return out

    @classmethod
    def from_vector(cls, v: Sequence) -> "Multivector":
        n = len(v)
        return cls(n, {1 << i: x for i, x in enumerate(v) if x})

    @classmethod
    def from_coords(cls, n: int, k: int, coords: Sequence) -> "Multivector":
        basis = graded_basis(n, k)
        if len(coords) != len(basis):
            raise DimensionError(f"expected {len(basis)} coordinates for grade {k} in dimension {n}")
        return cls(n, {m: c for m, c in zip(basis, coords) if c})

    # inspection

    def coeff(self, mask: int) -> Fraction:
        return self.terms.get(mask, Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def grades(self) -> set[int]:
        return {popcount(m) for m in self.terms}

    def is_homogeneous(self, k: int | None = None) -> bool:
        g = self.grades()
        if not g:
            return True
        return len(g) == 1 and (k is None or g == {k})

    def grade(self) -> int:
        g = self.grades()
        if len(g) != 1:
            raise ValueError(f"multivector is not homogeneous (grades {sorted(g)})")
        return next(iter(g))

    def coords(self, k: int) -> list[Fraction]:
        return [self.terms.get(m, Fraction(0)) for m in graded_basis(self.n, k)]

    def to_vector(self) -> list[Fraction]:
        if any(popcount(m) != 1 for m in self.terms):
            raise ValueError("not a grade-1 element")
        return [self.terms.get(1 << i, Fraction(0)) for i in range(self.n)]

    def scalar_part(self) -> Fraction:
        return self.terms.get(0, Fraction(0))

    def items(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """(index tuple, coefficient) pairs in a deterministic order."""
        return sorted(((tuple(_bits(m)), c) for m, c in self.terms.items()), key=lambda t: (len(t[0]), t[0]))

    # arithmetic

    def _check(self, other: "Multivector"):
        if self.n != other.n:
            raise DimensionError(f"ambient dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Multivector._raw(self.n, out)

    def __neg__(self):
        return Multivector._raw(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return wedge(self, other)
        c = to_fraction(other)
        if not c:
            return Multivector.zero(self.n)
        return Multivector._raw(self.n, {m: c * x for m, x in self.terms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __xor__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return wedge(self, other)

    def __truediv__(self, other):
        return self * (1 / to_fraction(other))

    def __eq__(self, other):
        if isinstance(other, Multivector):
            return self.n == other.n and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"Multivector(n={self.n}, 0)"
        parts = []
        for idx, c in self.items():
            mono = "^".join(f"e{i + 1}" for i in idx) or "1"
            parts.append(f"{format_fraction(c)}*{mono}")
        return f"Multivector(n={self.n}, " + " + ".join(parts) + ")"

    # serialization

    def to_json(self) -> dict:
        return {
            "dim": self.n,
            "terms": [{"indices": [i + 1 for i in idx], "coeff": format_fraction(c)} for idx, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Multivector":
        n = int(data["dim"])
        out = cls.zero(n)
        for term in data["terms"]:
            idx = [int(i) - 1 for i in term["indices"]]
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"indices must be strictly increasing: {term['indices']}")
            out = out + cls.basis(n, *idx) * to_fraction(term["coeff"])
        return out


def wedge(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    out: dict[int, Fraction] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            m = ma | mb
            v = ca * cb if _merge_sign(ma, mb) > 0 else -(ca * cb)
            v += out.get(m, 0)
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return Multivector._raw(a.n, out)


def wedge_all(factors: Iterable[Multivector], n: int) -> Multivector:
    out = Multivector.scalar(n)
    for f in factors:
        out = out * f
    return out


def power(omega: Multivector, k: int) -> Multivector:
    if k < 0:
        raise ValueError("power must be non-negative")
    out = Multivector.scalar(omega.n)
    for _ in range(k):
        out = out * omega
    return out


def grade_project(omega: Multivector, k: int) -> Multivector:
    return Multivector._raw(omega.n, {m: c for m, c in omega.terms.items() if popcount(m) == k})


def contract(k: int, omega: Multivector) -> Multivector:
    """Interior product by the k-th basis vector (dual pairing, 0-based k)."""
    if not 0 <= k < omega.n:
        raise DimensionError(f"index {k} outside dimension {omega.n}")
    bit = 1 << k
    out = {}
    for m, c in omega.terms.items():
        if m & bit:
            pos = popcount(m & (bit - 1))
            out[m ^ bit] = -c if pos & 1 else c
    return Multivector._raw(omega.n, out)


class NotNilpotentError(ValueError):
    pass


class NilpotentOperator:
    """A nilpotent linear map of Q^n, column convention: theta(e_i) = sum_j M[j][i] e_j."""

    __slots__ = ("matrix", "n", "nilpotency_index", "_columns")

    def __init__(self, matrix):
        m = matrix if isinstance(matrix, Matrix) else Matrix(matrix)
        if m.rows != m.cols:
            raise DimensionError("operator matrix must be square")
        self.matrix = m
        self.n = m.rows
        p = m.power(0)
        idx = 0
        while not p.is_zero():
            if idx > self.n:
                raise NotNilpotentError("operator is not nilpotent")
            p = p @ m
            idx += 1
        self.nilpotency_index = idx
        self._columns = [{j: m.data[j][i] for j in range(self.n) if m.data[j][i]} for i in range(self.n)]

    @classmethod
    def from_images(cls, n: int, images: dict[int, Sequence]) -> "NilpotentOperator":
        """Build from ``{i: image of e_i}``; unlisted basis vectors map to 0."""
        cols = [[Fraction(0)] * n for _ in range(n)]
        for i, v in images.items():
            cols[i] = [to_fraction(x) for x in v]
        return cls(Matrix.from_columns(cols, n))

    @classmethod
    def zero(cls, n: int) -> "NilpotentOperator":
        return cls(Matrix.zeros(n, n))

    def __call__(self, v):
        if isinstance(v, Multivector):
            return apply_derivation(self, v)
        return self.matrix @ v

    def apply_power(self, v: Sequence, k: int) -> list[Fraction]:
        out = [to_fraction(x) for x in v]
        for _ in range(k):
            out = self.matrix @ out
        return out

    def __eq__(self, other):
        return isinstance(other, NilpotentOperator) and self.matrix == other.matrix

    def __repr__(self):
        return f"NilpotentOperator(n={self.n}, index={self.nilpotency_index}, {self.matrix!r})"


def apply_derivation(theta: NilpotentOperator, omega: Multivector) -> Multivector:
    """Extend theta to the even derivation of the exterior algebra and apply it."""
    if theta.n != omega.n:
        raise DimensionError(f"operator on Q^{theta.n} applied to multivector on Q^{omega.n}")
    out: dict[int, Fraction] = {}
    for m, c in omega.terms.items():
        for i in _bits(m):
            col = theta._columns[i]
            if not col:
                continue
            rest = m ^ (1 << i)
            below_i = popcount(rest & ((1 << i) - 1))
            for j, t in col.items():
                if rest >> j & 1:
                    continue
                below_j = popcount(rest & ((1 << j) - 1))
                v = c * t
                if (below_i + below_j) & 1:
                    v = -v
                key = rest | (1 << j)
                v += out.get(key, 0)
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
    return Multivector._raw(omega.n, out)


def apply_odd_derivation(images: Sequence[Multivector], omega: Multivector) -> Multivector:
    """Apply the degree-odd antiderivation determined by its values on generators.

    ``images[i]`` is the image of ``e_i``; on a monomial the t-th factor picks
    up the sign (-1)^t.
    """
    n = omega.n
    out = Multivector.zero(n)
    for m, c in omega.terms.items():
        idx = list(_bits(m))
        for t, i in enumerate(idx):
            img = images[i]
            if not img:
                continue
            before = Multivector._raw(n, {sum(1 << j for j in idx[:t]): Fraction(1)})
            after = Multivector._raw(n, {sum(1 << j for j in idx[t + 1:]): Fraction(1)})
            term = before * img * after
            out = out + term * (-c if t & 1 else c)
    return out


def graded_basis(n: int, k: int) -> list[int]:
    """Monomials of grade k in lexicographic order of their index tuples."""
    if k < 0 or k > n:
        return []
    return [sum(1 << i for i in combo) for combo in combinations(range(n), k)]


def operator_matrix(f: Callable[[Multivector], Multivector], n: int, k_in: int, k_out: int, n_out: int | None = None) -> Matrix:
    """Matrix of a linear map Lambda^k_in -> Lambda^k_out in the monomial bases."""
    n_out = n if n_out is None else n_out
    src = graded_basis(n, k_in)
    dst = graded_basis(n_out, k_out)
    pos = {m: r for r, m in enumerate(dst)}
    data = [[Fraction(0)] * len(src) for _ in range(len(dst))]
    for col, m in enumerate(src):
        img = f(Multivector._raw(n, {m: Fraction(1)}))
        for mm, c in img.terms.items():
            if mm not in pos:
                raise ValueError(f"map leaves grade {k_out}")
            data[pos[mm]][col] = c
    return Matrix(data, len(src))


def pushforward(vectors: Sequence[Sequence], omega: Multivector) -> Multivector:
    """Image of omega under the linear map sending e_i to ``vectors[i]``."""
    if len(vectors) != omega.n:
        raise DimensionError(f"{len(vectors)} images for a multivector on Q^{omega.n}")
    if not vectors:
        raise DimensionError("cannot push forward from the zero space without a target dimension")
    n_out = len(vectors[0])
    images = [Multivector.from_vector(v) for v in vectors]
    out = Multivector.zero(n_out)
    for m, c in omega.terms.items():
        term = Multivector.scalar(n_out, c)
        for i in _bits(m):
            term = term * images[i]
            if not term:
                break
        out = out + term
    return out
