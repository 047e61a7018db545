from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from centrep.exterior import Multivector, NilpotentOperator

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def vec(n, entries):
    return [Fraction(entries.get(i, 0)) for i in range(n)]


def e(n, *idx):
    return Multivector.basis(n, *idx)


def make_e1():
    # z1, z2, u, v, a1 with a1 -> z2 -> z1
    n = 5
    theta = NilpotentOperator.from_images(n, {4: vec(n, {1: 1}), 1: vec(n, {0: 1})})
    omega = e(n, 1, 0) + e(n, 2, 3)
    return theta, vec(n, {4: 1}), omega


def make_e2():
    # u, v, z1, z2, a1, a2 with a2 -> a1 -> z2 + u, z2 -> z1
    n = 6
    theta = NilpotentOperator.from_images(n, {5: vec(n, {4: 1}), 4: vec(n, {3: 1, 0: 1}), 3: vec(n, {2: 1})})
    omega = e(n, 3, 2) + e(n, 0, 1)
    return theta, vec(n, {5: 1}), omega


@pytest.fixture
def e1():
    return make_e1()


@pytest.fixture
def e2():
    return make_e2()


small_fractions = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


@st.composite
def multivectors(draw, n, grade=None, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        if grade is None:
            mask = draw(st.integers(0, (1 << n) - 1))
        else:
            idx = draw(st.lists(st.integers(0, n - 1), min_size=grade, max_size=grade, unique=True))
            mask = sum(1 << i for i in idx)
        terms[mask] = draw(small_fractions)
    return Multivector(n, terms)


@st.composite
def nilpotent_operators(draw, n):
    """Strictly upper-triangular matrices moved by a permutation, so still nilpotent."""
    perm = draw(st.permutations(range(n)))
    data = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                data[perm[i]][perm[j]] = draw(small_fractions)
    return NilpotentOperator(data)
