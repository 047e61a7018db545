"""Deterministic random and case-targeted (theta, eps, Omega) triples.

Randomness comes from ``random.Random`` (Mersenne Twister) seeded with the
string ``"centrep:<dim_I>:<seed>:<bound>"``; string seeding goes through
SHA-512, so the stream is the same on every platform and Python >= 3.2.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ConstructionError, FormatError, GenerationError
from .exterior import Multivector, NilpotentOperator, apply_derivation, operator_matrix, pushforward
from .linalg import Matrix, format_fraction, inverse, kernel, to_fraction
from .structure import canonical_model
from .witness import CASE_TAGS, check_hypotheses, construct_witness, omega_in_image_of_theta

SPEC_VERSION = "1"

__all__ = [
    "SPEC_VERSION",
    "Instance",
    "InstanceSpec",
    "random_instance",
    "targeted_instance",
    "min_dim",
    "parse_fraction",
]


def parse_fraction(x) -> Fraction:
    try:
        return to_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"not an exact rational: {x!r}") from exc


@dataclass(frozen=True)
class Instance:
    theta: NilpotentOperator
    eps: tuple[Fraction, ...]
    omega: Multivector
    seed: int | None = None
    case: str | None = None

    @property
    def dim(self) -> int:
        return self.theta.n

    def to_json(self) -> dict:
        n = self.dim
        out = {
            "dim": n,
            "theta": [[format_fraction(x) for x in row] for row in self.theta.matrix.data],
            "omega": [
                {"i": i + 1, "j": j + 1, "c": format_fraction(c)}
                for (i, j), c in sorted(
                    (tuple(t for t in range(n) if m >> t & 1), c) for m, c in self.omega.terms.items()
                )
            ],
            "epsilon": [format_fraction(x) for x in self.eps],
            "seed": self.seed,
            "spec_version": SPEC_VERSION,
        }
        if self.case is not None:
            out["case"] = self.case
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @property
    def sha256(self) -> str:
        body = self.to_json()
        body.pop("seed", None)
        body.pop("case", None)
        return hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode()).hexdigest()

    @classmethod
    def from_json(cls, data) -> "Instance":
        """Parse and validate shape; mathematical hypotheses are left to the caller."""
        try:
            n = int(data["dim"])
            rows = data["theta"]
            eps = data["epsilon"]
            terms = data["omega"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"missing or malformed field: {exc}") from exc
        if n < 1:
            raise FormatError("dim must be positive")
        if len(rows) != n or any(len(r) != n for r in rows):
            raise FormatError("theta must be a dim x dim matrix")
        if len(eps) != n:
            raise FormatError("epsilon must have dim entries")
        mat = Matrix([[parse_fraction(x) for x in r] for r in rows])
        theta = NilpotentOperator(mat)
        omega = Multivector.zero(n)
        for t in terms:
            try:
                i, j, c = int(t["i"]), int(t["j"]), parse_fraction(t["c"])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"malformed omega term {t!r}") from exc
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise FormatError(f"bad omega indices ({i}, {j})")
            omega = omega + Multivector.basis(n, i - 1, j - 1) * c
        seed = data.get("seed")
        return cls(theta, tuple(parse_fraction(x) for x in eps), omega, seed, data.get("case"))

    @classmethod
    def loads(cls, text: str) -> "Instance":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return cls.from_json(data)

    def check(self):
        check_hypotheses(self.theta, self.eps, self.omega)


@dataclass(frozen=True)
class InstanceSpec:
    dim_I: int
    seed: int
    target_case: str | None = None
    coefficient_bound: int = 3

    def __post_init__(self):
        if self.dim_I < 2:
            raise ValueError("dim_I must be at least 2")
        if self.coefficient_bound < 1:
            raise ValueError("coefficient_bound must be at least 1")
        if self.target_case is not None and self.target_case not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.target_case!r}")


# random sampling


def _rat(rng: random.Random, bound: int, nonzero: bool = False) -> Fraction:
    while True:
        x = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        if x or not nonzero:
            return x


def _random_nilpotent_core(rng: random.Random, n: int, bound: int) -> Matrix:
    """Strictly upper-triangular: either a scaled Jordan pattern or a sparse random fill."""
    data = [[Fraction(0)] * n for _ in range(n)]
    if rng.random() < 0.5:
        i = 0
        while i < n:
            size = rng.randint(1, n - i)
            for k in range(i, i + size - 1):
                data[k][k + 1] = _rat(rng, bound, nonzero=True) if rng.random() < 0.3 else Fraction(1)
            i += size
    else:
        density = rng.choice((0.15, 0.3, 0.5))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < density:
                    data[i][j] = _rat(rng, bound)
    return Matrix(data)


def _random_unimodular(rng: random.Random, n: int) -> Matrix:
    lower = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    upper = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            if rng.random() < 0.4:
                lower[i][j] = Fraction(rng.choice((-1, 1)))
            if rng.random() < 0.4:
                upper[j][i] = Fraction(rng.choice((-1, 1)))
    return Matrix(lower) @ Matrix(upper)


def _conjugate(core: Matrix, a: Matrix) -> NilpotentOperator:
    return NilpotentOperator(a @ core @ inverse(a))


def random_instance(spec: InstanceSpec, budget: int = 64) -> Instance:
    """A random admissible triple, deterministic in ``spec``.

    With ``spec.target_case`` set this defers to :func:`targeted_instance`.
    """
    if spec.target_case is not None:
        return targeted_instance(spec.target_case, spec.dim_I, seed=spec.seed)
    n, bound = spec.dim_I, spec.coefficient_bound
    rng = random.Random(f"centrep:{n}:{spec.seed}:{bound}")
    for _ in range(budget):
        theta = _conjugate(_random_nilpotent_core(rng, n, bound), _random_unimodular(rng, n))
        ker = kernel(operator_matrix(lambda x: apply_derivation(theta, x), n, 2, 2)).basis
        if not ker:
            continue
        chosen = rng.sample(range(len(ker)), rng.randint(1, len(ker)))
        omega = Multivector.zero(n)
        for idx in chosen:
            omega = omega + Multivector.from_coords(n, 2, ker[idx]) * _rat(rng, bound, nonzero=True)
        if not omega or omega_in_image_of_theta(theta, omega):
            continue
        roll = rng.random()
        if roll < 0.1:
            eps = [Fraction(0)] * n
        elif roll < 0.4:
            eps = [Fraction(0)] * n
            eps[rng.randrange(n)] = _rat(rng, bound, nonzero=True)
        else:
            eps = [_rat(rng, bound) for _ in range(n)]
        inst = Instance(theta, tuple(eps), omega, spec.seed)
        inst.check()
        return inst
    raise GenerationError(f"no admissible instance for dim_I={n}, seed={spec.seed} within {budget} attempts")


# targeted templates

_MIN_DIM = {
    "trivial-eps-zero": 2,
    "eps-in-S": 2,
    "easy-N": 3,
    "even-M": 5,
    "terminal-2-3": 6,
    "odd-M-z-top": 6,
    "odd-M-theta-w": 7,
}


def min_dim(case_tag: str) -> int:
    return _MIN_DIM[case_tag]


def _largest_with_parity(limit: int, odd: bool, least: int) -> int:
    k = limit if (limit % 2 == 1) == odd else limit - 1
    if k < least:
        raise ValueError("dimension too small for this template")
    return k


def _with_chain(uv_ls, z_ms, k: int, target: dict[int, int], extra: int = 0):
    """Canonical (theta, Omega) plus a chain a_k -> ... -> a_1 -> target; eps = a_k."""
    theta0, omega0 = canonical_model(uv_ls, z_ms, extra=extra)
    base = theta0.n
    n = base + k
    cols = [list(theta0.matrix.column(i)) + [Fraction(0)] * k for i in range(base)]
    for i in range(k):
        col = [Fraction(0)] * n
        if i == 0:
            for t, c in target.items():
                col[t] = Fraction(c)
        else:
            col[base + i - 1] = Fraction(1)
        cols.append(col)
    theta = NilpotentOperator(Matrix.from_columns(cols, n))
    omega = Multivector(n, omega0.terms)
    eps = [Fraction(0)] * n
    if k:
        eps[n - 1] = Fraction(1)
    return theta, eps, omega


def _template(tag: str, dim: int, variant: int):
    if tag in ("trivial-eps-zero", "eps-in-S"):
        p = dim // 2
        theta, omega = canonical_model([0] * p, extra=dim % 2)
        eps = [Fraction(0)] * dim
        if tag == "eps-in-S":
            eps[0] = Fraction(1)
        return theta, eps, omega
    if tag == "easy-N":
        return _with_chain([0], [], dim - 2, {})
    if tag == "even-M":
        # u, v, z1, z2, a1..ak with a1 -> z2 -> z1
        k = _largest_with_parity(dim - 4, True, 1)
        return _with_chain([0], [1], k, {3: 1}, extra=dim - 4 - k)
    if tag == "terminal-2-3":
        # u, v, z1, z2, a1..ak with a1 -> z2 + u
        k = _largest_with_parity(dim - 4, False, 2)
        return _with_chain([0], [1], k, {3: 1, 0: 1}, extra=dim - 4 - k)
    if tag == "odd-M-theta-w":
        # u, v, z1..z4, a1..ak with a1 -> z4
        k = _largest_with_parity(dim - 6, True, 1)
        return _with_chain([0], [2], k, {5: 1}, extra=dim - 6 - k)
    if tag == "odd-M-z-top":
        if variant == 1:
            # UV block with l = 1 (six vectors), then z1, z2; a1 -> z2
            k = _largest_with_parity(dim - 8, False, 2)
            return _with_chain([1], [1], k, {7: 1}, extra=dim - 8 - k)
        # z1, z2, y1, y2, a1..ak with a1 -> z2
        k = _largest_with_parity(dim - 4, False, 2)
        return _with_chain([], [1, 1], k, {1: 1}, extra=dim - 4 - k)
    raise ValueError(f"unknown case tag {tag!r}")


def targeted_instance(case_tag: str, dim_I: int | None = None, seed: int | None = None, variant: int = 0) -> Instance:
    """An instance whose witness dispatch lands on ``case_tag``.

    ``dim_I`` defaults to the smallest template size.  With a ``seed`` the
    template is moved by a random unimodular change of basis, so that the
    canonical basis is hidden from the construction.
    """
    if case_tag not in CASE_TAGS:
        raise ValueError(f"unknown case tag {case_tag!r}")
    dim = min_dim(case_tag) if dim_I is None else dim_I
    if case_tag == "odd-M-z-top" and variant == 1:
        dim = max(dim, 10) if dim_I is None else dim
    if dim < min_dim(case_tag):
        raise ValueError(f"{case_tag} needs dim_I >= {min_dim(case_tag)}")
    theta, eps, omega = _template(case_tag, dim, variant)
    if seed is not None:
        rng = random.Random(f"centrep:{case_tag}:{dim}:{seed}:{variant}")
        a = _random_unimodular(rng, dim)
        perm = list(range(dim))
        rng.shuffle(perm)
        pm = Matrix([[Fraction(int(perm[j] == i)) for j in range(dim)] for i in range(dim)])
        a = pm @ a
        theta = NilpotentOperator(a @ theta.matrix @ inverse(a))
        # vectors move by a, the Omega coefficients follow the induced map
        eps = a @ list(eps)
        omega = pushforward(a.columns(), omega)
    inst = Instance(theta, tuple(eps), omega, seed, case_tag)
    inst.check()
    tag = construct_witness(theta, eps, omega, verify=False).case_tag
    if tag != case_tag:
        raise ConstructionError(f"template for {case_tag} dispatched to {tag}")
    return inst
