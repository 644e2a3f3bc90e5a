from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confalg import linalg
from confalg.exactalg import I, ONE, ZERO, var
from confalg.gaussrat import GaussRat
from confalg.orientation import (IDENTITY, family_orbits, identify_function, identify_space, orient,
                                 orientation_label)
from confalg.potentials import FAMILY_NAMES, get_family

x, y = var("x"), var("y")


def test_rank_and_nullspace():
    m = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    m = [[Fraction(v) for v in row] for row in m]
    assert linalg.rank(m) == 2
    null = linalg.nullspace(m, 3, Fraction(1), Fraction(0))
    assert len(null) == 1
    assert all(sum(a * b for a, b in zip(row, null[0])) == 0 for row in m)


def test_solve_inconsistent():
    m = [[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]]
    assert linalg.solve(m, [Fraction(1), Fraction(3)], Fraction(0)) is None
    assert linalg.solve(m, [Fraction(1), Fraction(2)], Fraction(0)) == [1, 0]


def test_symbolic_inverse():
    e = var("eps")
    m = [[e, ONE], [ZERO, 1 / e]]
    inv = linalg.inverse(m, ONE, ZERO)
    assert linalg.matmul(m, inv, ZERO) == linalg.identity(2, ONE, ZERO)
    assert linalg.det(m) == ONE


def test_singular_inverse():
    with pytest.raises(ZeroDivisionError):
        linalg.inverse([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], Fraction(1), Fraction(0))


_g = st.builds(GaussRat, st.integers(-3, 3), st.integers(-3, 3))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(_g, min_size=4, max_size=4), min_size=1, max_size=4))
def test_gaussian_nullspace(rows):
    null = linalg.gaussian_nullspace_span(rows, 4)
    for v in null:
        for row in rows:
            assert sum((a * b for a, b in zip(row, v)), GaussRat(0)) == GaussRat(0)
    assert linalg.gaussian_rank(rows, 4) == linalg.rank(rows, 4)


def test_coefficient_rows_function_basis():
    cols = [{0: 1 / x}, {0: x / (x * x + 1)}]
    target = {0: (2 * x * x + 1) / (x ** 3 + x)}
    rows, rhs = linalg.coefficient_rows(cols, target, ["x", "y"])
    assert linalg.solve(rows, rhs, ZERO) == [ONE, ONE]


def test_orientation_label():
    assert orientation_label(IDENTITY) == "(x1, x2, x3, x4)"
    assert orientation_label(((1, 0, 2, 3), (1, -1, 1, 1))) == "(x2, -x1, x3, x4)"


def test_orient():
    f = var("x1") / var("x2") ** 2
    assert orient(f, ((1, 0, 2, 3), (-1, 1, 1, 1))) == -var("x2") / var("x1") ** 2


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_every_family_identifies_itself(name):
    fam = get_family(name)
    ids = identify_space(list(fam.cartesian_basis))
    assert name in {i.family for i in ids}
    assert all(i.family == name for i in ids)


def test_orbits_cover_families():
    families = {e.family for e in family_orbits()}
    assert families == set(FAMILY_NAMES)
    first = {e.family: e.orientation for e in reversed(family_orbits())}
    assert set(first.values()) == {IDENTITY}


def test_identify_function():
    ident = identify_function(-2 / (x + I * y) ** 2)
    assert ident is not None
    # first family in catalogue order whose placement contains the function
    assert ident.family == "[2,1,1]"
    assert ident.coefficients == ((ZERO, ZERO, ZERO, -2 * ONE),)
    assert identify_function(x ** 5 * y) is None
