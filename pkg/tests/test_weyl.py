from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confalg.conformal import FLAT_NAMES, flat_generators, so4_operators
from confalg.exactalg import ONE, ZERO, Scalar, var
from confalg.quadalg import sphere_rotations
from confalg.weyl import (ConstraintIdeal, CoordinateMismatch, DiffOperator, commutator,
                          compose, left_ideal_quotient, reduce)

FLAT = ("x", "y")
x, y = var("x"), var("y")
dx = DiffOperator.partial(FLAT, "x")
dy = DiffOperator.partial(FLAT, "y")
fn = lambda g: DiffOperator.function(FLAT, g)


def test_leibniz():
    assert compose(dx, fn(x)) == fn(x) * dx + DiffOperator.identity(FLAT)


def test_identity_is_neutral():
    a = fn(x * y) * dx * dy + fn(y) * dx
    assert compose(a, DiffOperator.identity(FLAT)) == a
    assert compose(DiffOperator.identity(FLAT), a) == a


def test_rotation_squared():
    j = DiffOperator.vector_field(FLAT, {"x": -y, "y": x})
    jj = j * j
    assert jj.coefficient((0, 2)) == x * x
    assert jj.coefficient((1, 1)) == -2 * x * y
    assert jj.coefficient((2, 0)) == y * y
    # the first order part is -x d_x - y d_y
    assert jj.coefficient((1, 0)) == -x and jj.coefficient((0, 1)) == -y


def test_apply_matches_composition():
    a = fn(x) * dx + fn(y * y) * dy * dy
    b = dx * dx + fn(x * y)
    f = x ** 3 * y ** 2 + 1 / (x + y)
    assert (a * b).apply(f) == a.apply(b.apply(f))


def test_commutator_p1_k1():
    flat = flat_generators()
    assert commutator(flat["P1"], flat["K1"]) == flat["D"].scale(2)


def test_sphere_rotations_bracket():
    j1, j2, j3 = sphere_rotations()
    assert commutator(j2, j1) == j3


def test_self_commutator_vanishes():
    a = fn(x * x) * dx * dy + dy
    assert commutator(a, a).is_zero()


def test_coordinate_mismatch():
    other = DiffOperator.partial(("u", "r"), "u")
    with pytest.raises(CoordinateMismatch):
        compose(dx, other)


def test_reduce_hamiltonian():
    v = var("a1") * x + y * y
    h = dx * dx + dy * dy + fn(v)
    ideal = ConstraintIdeal.left_ideal(h, "y")
    assert reduce(dy * dy, ideal) == -(dx * dx) - fn(v)
    assert reduce(h, ideal).is_zero()


def test_left_ideal_quotient_identity():
    h = dx * dx + dy * dy + fn(x * y)
    ideal = ConstraintIdeal.left_ideal(h, "y")
    a = fn(x) * dy ** 3 + dx * dy * dy + fn(y)
    q, r = left_ideal_quotient(a, ideal)
    assert q * h + r == a
    assert all(alpha[1] <= 1 for alpha in r.terms)


def test_reduce_sphere():
    s1, s2, s3 = var("s1"), var("s2"), var("s3")
    coords = ("s1", "s2", "s3")
    op = DiffOperator.function(coords, s3 * s3)
    assert reduce(op, ConstraintIdeal.sphere()) == DiffOperator.function(coords, 1 - s1 * s1 - s2 * s2)


def test_flat_generators_close():
    flat = flat_generators()
    ops = [flat[n] for n in FLAT_NAMES]
    from confalg.conformal import express_in_span
    count = 0
    for i in range(6):
        for j in range(i + 1, 6):
            coeffs = express_in_span(commutator(ops[i], ops[j]), ops)
            assert all(c.is_constant() for c in coeffs)
            count += 1
    assert count == 15


# -- properties ------------------------------------------------------------

_coef = st.sampled_from([ONE, x, y, x * y, x * x - y, 1 / (1 + x * x), Scalar.const(0, 2)])
_alpha = st.sampled_from([(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)])


@st.composite
def operators(draw):
    terms = {}
    for _ in range(draw(st.integers(1, 3))):
        alpha = draw(_alpha)
        terms[alpha] = terms.get(alpha, ZERO) + draw(_coef)
    return DiffOperator(FLAT, {a: c for a, c in terms.items() if c})


@settings(max_examples=30, deadline=None)
@given(operators(), operators(), operators())
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=30, deadline=None)
@given(operators(), operators(), operators())
def test_jacobi(a, b, c):
    total = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert total.is_zero()


@settings(max_examples=30, deadline=None)
@given(operators(), operators())
def test_commutator_antisymmetric(a, b):
    assert commutator(a, b) == -commutator(b, a)


@settings(max_examples=30, deadline=None)
@given(operators())
def test_reduce_idempotent_hamiltonian(a):
    h = dx * dx + dy * dy + fn(x * y + var("a2"))
    ideal = ConstraintIdeal.left_ideal(h, "y")
    once = reduce(a * dy, ideal)
    assert reduce(once, ideal) == once


_s = [var("s1"), var("s2"), var("s3")]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2), st.integers(0, 4), st.integers(-2, 2)),
                min_size=1, max_size=4))
def test_reduce_idempotent_sphere(monos):
    f = sum((c * _s[0] ** i * _s[1] ** j * _s[2] ** k for i, j, k, c in monos), ZERO)
    op = DiffOperator.function(("s1", "s2", "s3"), f + 1)
    ideal = ConstraintIdeal.sphere()
    once = reduce(op, ideal)
    assert reduce(once, ideal) == once
    assert all(c.degree("s3")[0] <= 1 for c in once.terms.values())


def test_so4_operators_are_first_order():
    for op in so4_operators().values():
        assert op.order() == 1
