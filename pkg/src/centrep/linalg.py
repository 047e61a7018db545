"""Exact rational linear algebra.

Everything here works over :class:`fractions.Fraction`.  Matrices are small
(a few hundred rows at most), so elimination runs on sparse dict rows with
full reduction; there is no pivoting strategy beyond "first nonzero".
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Matrix",
    "Subspace",
    "DimensionError",
    "to_fraction",
    "format_fraction",
    "rref",
    "rank",
    "kernel",
    "solve",
    "member",
    "identity",
    "inverse",
]


class DimensionError(ValueError):
    pass


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass an int, Fraction or 'p/q' string")
    return Fraction(x)


def format_fraction(x: Fraction) -> str:
    x = to_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Matrix:
    """A dense rows x cols matrix of Fractions.

    Kept deliberately thin: a row list plus an explicit column count, so that
    matrices with zero rows still know their width.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Iterable[Iterable], cols: int | None = None):
        rows_list = [[to_fraction(x) for x in row] for row in data]
        if cols is None:
            if not rows_list:
                raise DimensionError("cols must be given for an empty matrix")
            cols = len(rows_list[0])
        for row in rows_list:
            if len(row) != cols:
                raise DimensionError(f"ragged matrix: expected {cols} columns, got {len(row)}")
        self.rows = len(rows_list)
        self.cols = cols
        self.data = rows_list

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls([[Fraction(0)] * cols for _ in range(rows)], cols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "Matrix":
        data = [[Fraction(0)] * len(columns) for _ in range(rows)]
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise DimensionError("column length mismatch")
            for i, x in enumerate(col):
                if x:
                    data[i][j] = to_fraction(x)
        return cls(data, len(columns))

    def __getitem__(self, idx):
        i, j = idx
        return self.data[i][j]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.cols == other.cols and self.data == other.data

    def __repr__(self):
        body = "; ".join(" ".join(format_fraction(x) for x in row) for row in self.data)
        return f"Matrix({self.rows}x{self.cols}: [{body}])"

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def column(self, j: int) -> list[Fraction]:
        return [row[j] for row in self.data]

    def columns(self) -> list[list[Fraction]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "Matrix":
        return Matrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)], self.rows)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            out = []
            for row in self.data:
                acc = [Fraction(0)] * other.cols
                for k, a in enumerate(row):
                    if a:
                        for j, b in enumerate(other.data[k]):
                            if b:
                                acc[j] += a * b
                out.append(acc)
            return Matrix(out, other.cols)
        vec = list(other)
        if len(vec) != self.cols:
            raise DimensionError(f"vector of length {len(vec)} for {self.shape} matrix")
        return [sum((a * x for a, x in zip(row, vec) if a and x), Fraction(0)) for row in self.data]

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.cols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.cols)

    def scale(self, c) -> "Matrix":
        c = to_fraction(c)
        return Matrix([[c * a for a in row] for row in self.data], self.cols)

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.data)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise DimensionError("row count mismatch")
        return Matrix([r + s for r, s in zip(self.data, other.data)], self.cols + other.cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise DimensionError("column count mismatch")
        return Matrix(self.data + other.data, self.cols)

    def power(self, k: int) -> "Matrix":
        out = identity(self.rows)
        for _ in range(k):
            out = out @ self
        return out


def identity(n: int) -> Matrix:
    return Matrix([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], n)


def _as_matrix(m) -> Matrix:
    return m if isinstance(m, Matrix) else Matrix(m)


def _sparse_rows(m: Matrix) -> list[dict[int, Fraction]]:
    return [{j: x for j, x in enumerate(row) if x} for row in m.data]


def _rref_sparse(rows: list[dict[int, Fraction]], ncols: int) -> tuple[list[dict[int, Fraction]], list[int]]:
    rows = [dict(r) for r in rows if r]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        pivot_row = None
        for i in range(r, len(rows)):
            if c in rows[i]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        prow = rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            for k in prow:
                prow[k] *= inv
        items = list(prow.items())
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row.get(c)
            if f is None:
                continue
            for k, v in items:
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def rref(m) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns; zero rows are dropped."""
    m = _as_matrix(m)
    rows, pivots = _rref_sparse(_sparse_rows(m), m.cols)
    dense = [[row.get(j, Fraction(0)) for j in range(m.cols)] for row in rows]
    return Matrix(dense, m.cols), pivots


def rank(m) -> int:
    m = _as_matrix(m)
    return len(_rref_sparse(_sparse_rows(m), m.cols)[1])


def kernel(m) -> "Subspace":
    """Null space of ``m`` as a canonical :class:`Subspace`."""
    m = _as_matrix(m)
    rows, pivots = _rref_sparse(_sparse_rows(m), m.cols)
    pivot_set = set(pivots)
    basis = []
    for f in range(m.cols):
        if f in pivot_set:
            continue
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            x = row.get(f)
            if x:
                v[p] = -x
        basis.append(v)
    return Subspace(m.cols, basis)


def solve(m, b: Sequence) -> list[Fraction] | None:
    """Some x with m @ x == b, or None when the system is inconsistent.

    Free variables are set to zero, so the answer is deterministic.
    """
    m = _as_matrix(m)
    if len(b) != m.rows:
        raise DimensionError(f"rhs has length {len(b)}, matrix has {m.rows} rows")
    aug = []
    for row, bi in zip(m.data, b):
        d = {j: x for j, x in enumerate(row) if x}
        bi = to_fraction(bi)
        if bi:
            d[m.cols] = bi
        aug.append(d)
    rows, pivots = _rref_sparse(aug, m.cols + 1)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [Fraction(0)] * m.cols
    for row, p in zip(rows, pivots):
        x[p] = row.get(m.cols, Fraction(0))
    return x


def inverse(m) -> Matrix:
    m = _as_matrix(m)
    n = m.rows
    if m.cols != n:
        raise DimensionError("inverse of a non-square matrix")
    aug = m.hstack(identity(n))
    rows, pivots = _rref_sparse(_sparse_rows(aug), 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return Matrix([[row.get(n + j, Fraction(0)) for j in range(n)] for row in rows], n)


class Subspace:
    """A subspace of Q^n stored by its reduced row echelon basis.

    The RREF basis is unique for a given subspace, so ``==`` is structural.
    """

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence] = ()):
        vecs = []
        for v in vectors:
            if len(v) != ambient_dim:
                raise DimensionError(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
            vecs.append({j: to_fraction(x) for j, x in enumerate(v) if x})
        rows, pivots = _rref_sparse(vecs, ambient_dim)
        self.ambient_dim = ambient_dim
        self.basis = tuple(tuple(r.get(j, Fraction(0)) for j in range(ambient_dim)) for r in rows)
        self.pivots = tuple(pivots)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, identity(n).data)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        vecs = ", ".join("(" + ", ".join(format_fraction(x) for x in v) + ")" for v in self.basis)
        return f"Subspace(dim={self.dim} in Q^{self.ambient_dim}: {vecs})"

    def reduce(self, v: Sequence) -> list[Fraction]:
        """Remainder of v after eliminating the pivot coordinates."""
        if len(v) != self.ambient_dim:
            raise DimensionError(f"vector of length {len(v)} in ambient dimension {self.ambient_dim}")
        r = [to_fraction(x) for x in v]
        for row, p in zip(self.basis, self.pivots):
            f = r[p]
            if f:
                for j, x in enumerate(row):
                    if x:
                        r[j] -= f * x
        return r

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    __contains__ = contains

    def coordinates(self, v: Sequence) -> list[Fraction] | None:
        """Coefficients of v in the echelon basis, or None if v is outside."""
        if not self.contains(v):
            return None
        return [to_fraction(v[p]) for p in self.pivots]

    def includes(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        return Subspace(self.ambient_dim, list(self.basis) + list(other.basis))

    def intersection(self, other: "Subspace") -> "Subspace":
        # x = A a = B b  <=>  [A | -B] (a, b) = 0
        n = self.ambient_dim
        if not self.basis or not other.basis:
            return Subspace(n)
        cols = [list(v) for v in self.basis] + [[-x for x in v] for v in other.basis]
        ker = kernel(Matrix.from_columns(cols, n))
        k = self.dim
        out = []
        for coeffs in ker.basis:
            vec = [Fraction(0)] * n
            for c, v in zip(coeffs[:k], self.basis):
                if c:
                    for j, x in enumerate(v):
                        vec[j] += c * x
            out.append(vec)
        return Subspace(n, out)


def member(space: Subspace, v: Sequence) -> bool:
    return space.contains(v)
