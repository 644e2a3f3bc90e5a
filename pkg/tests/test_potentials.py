from __future__ import annotations

import json

import pytest

from confalg.exactalg import I, ONE, ZERO, var
from confalg.potentials import (FAMILY_NAMES, cross_chart_check, get_family, independent,
                                load_families, member_test, parse_families)

x, y = var("x"), var("y")


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_cross_chart(name):
    report = cross_chart_check(name)
    assert report.passed, report.mismatches


def test_identity_parameter_matrix_1111():
    fam = get_family("[1,1,1,1]")
    eye = tuple(tuple(1 if i == j else 0 for j in range(4)) for i in range(4))
    assert fam.parameter_matrix == eye
    assert fam.cartesian_basis[3] == -4 / (x * x + y * y + 1) ** 2


def test_v0_linear_term():
    fam = get_family("[0]")
    assert fam.cartesian_basis[1] == -x


@pytest.mark.parametrize("index", range(4))
def test_sign_flip_mismatch(index):
    fam = get_family("[1,1,1,1]").perturbed(index, -1)
    report = cross_chart_check(fam)
    assert not report.passed
    assert [m[0] for m in report.mismatches] == [index]


@pytest.mark.parametrize("g, family, expected", [
    (5 - 3 * x + 7 * (x * x + y * y), "[0]", [5, 3, 0, 7]),
    (-2 / (x + I * y) ** 2, "V(1)", [-2, 0, 0, 0]),
])
def test_member_test(g, family, expected):
    assert member_test(g, family) == [ONE * v for v in expected]


def test_member_test_outside():
    assert member_test(x ** 3, "[0]") is None


def test_member_test_symbolic():
    a = [var(p) for p in ("a1", "a2", "a3", "a4")]
    fam = get_family("[2,2]")
    g = sum((c * f for c, f in zip(a, fam.cartesian_basis)), ZERO)
    assert member_test(g, "[2,2]") == a


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_unit_vectors_and_independence(name):
    fam = get_family(name)
    assert independent(fam.cartesian_basis)
    for k, f in enumerate(fam.cartesian_basis):
        assert member_test(f, name) == [ONE if j == k else ZERO for j in range(4)]
    assert member_test(ZERO, name) == [ZERO] * 4


def test_four_tetra_members_for_v4():
    fam = get_family("[4]")
    assert len(fam.tetra_basis) == 4
    assert "tetra[3]" in fam.derived


def test_data_file_round_trip(tmp_path):
    from importlib import resources
    text = resources.files("confalg").joinpath("data/families.json").read_text()
    path = tmp_path / "families.json"
    path.write_text(text)
    loaded = load_families(path)
    assert set(loaded) == set(FAMILY_NAMES)
    assert parse_families(json.loads(text))["[3,1]"] == get_family("[3,1]")


def test_unknown_family():
    with pytest.raises(KeyError):
        get_family("[5]")
