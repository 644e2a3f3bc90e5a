from __future__ import annotations

import pytest

from confalg.bocher import builtin_1111_to_211, identity_contraction
from confalg.exactalg import I, ONE, ZERO, var
from confalg.stackel import (DegenerateChoice, LaplaceSystem, StackelChoice, conformal_stackel,
                             helmholtz_contraction, horospherical, s9_check)

x, y = var("x"), var("y")
a1, a2, a3, a4 = (var(p) for p in ("a1", "a2", "a3", "a4"))
Z = var("xp1") + I * var("xp2")
C = builtin_1111_to_211()


def test_stackel_by_first_term():
    hel = conformal_stackel(LaplaceSystem.generic("[1,1,1,1]"), StackelChoice.of((1, 0, 0, 0)))
    assert hel.multiplier == 1 / x ** 2
    assert hel.potential == (a1 + a2 * x * x / y ** 2 + 4 * a3 * x * x / (x * x + y * y - 1) ** 2
                             - 4 * a4 * x * x / (x * x + y * y + 1) ** 2)
    assert hel.energy == -a1
    assert not (hel.reduced_potential.free_variables() & {"a1"})


def test_stackel_constant_multiplier():
    system = LaplaceSystem.generic("[0]")
    hel = conformal_stackel(system, StackelChoice.of((1, 0, 0, 0)))
    assert hel.multiplier == ONE
    assert hel.potential == system.potential_function()
    assert hel.energy == -a1
    assert hel.reduced_potential == system.potential_function() - a1
    assert hel.operator() == system.operator()


def test_stackel_second_term():
    system = LaplaceSystem.generic("[1,1,1,1]")
    hel = conformal_stackel(system, StackelChoice.of((0, 1, 0, 0)))
    assert hel.multiplier == 1 / y ** 2
    assert hel.potential == y * y * system.potential_function()


@pytest.mark.parametrize("family", ["[1,1,1,1]", "[2,2]", "[3,1]", "V(1)"])
@pytest.mark.parametrize("vec", [(1, 0, 0, 0), (0, 1, 0, 0), (1, 2, 0, -1)])
def test_multiplying_back(family, vec):
    system = LaplaceSystem.generic(family)
    hel = conformal_stackel(system, StackelChoice.of(vec))
    assert hel.potential * hel.multiplier == system.potential_function()
    assert hel.reduced_potential * hel.multiplier - hel.energy * hel.multiplier == system.potential_function()


def test_zero_choice():
    with pytest.raises(DegenerateChoice):
        conformal_stackel(LaplaceSystem.generic("[0]"), StackelChoice.of((0, 0, 0, 0)))
    with pytest.raises(ValueError):
        StackelChoice.of((1, 0))


def test_s9_check():
    report = s9_check()
    assert report.potential_terms == {"a1": True, "a2": True, "a3": True, "a4": True,
                                      "transformed potential": True}
    assert report.sphere_sum == -ONE
    assert report.operator_identity
    assert report.passed


def test_horospherical_a3_identity():
    s = horospherical()
    u = var("u")
    pulled = (x * x + y * y - 1).subs({"x": 1 / u, "y": var("r")})
    assert pulled == 2 * s["s3"] / u


def test_helmholtz_first_term():
    out = helmholtz_contraction(StackelChoice.of((1, 0, 0, 0)), C)
    assert out.alpha == 2
    assert out.v_prime == -1 / Z ** 2
    assert out.v_prime_conventional == -2 / Z ** 2
    assert out.target_family == "[2,1,1]"
    assert out.member and out.diagram


def test_helmholtz_third_term():
    out = helmholtz_contraction(StackelChoice.of((0, 0, 1, 0)), C)
    assert out.alpha == 0
    assert out.v_prime == 1 / var("xp3") ** 2
    assert out.member and out.diagram


def test_helmholtz_second_term():
    # x2 = Z'/eps + eps W'/4, so 1/x2^2 = eps^2/Z'^2 + O(eps^4)
    out = helmholtz_contraction(StackelChoice.of((0, 1, 0, 0)), C)
    assert out.alpha == 2
    assert out.v_prime == 1 / Z ** 2
    assert out.v_prime_conventional == 2 / Z ** 2
    assert out.member and out.diagram


def test_helmholtz_identity_contraction():
    out = helmholtz_contraction(StackelChoice.of((0, 0, 0, 1)), identity_contraction())
    assert out.alpha == 0
    assert out.member and out.diagram


def test_helmholtz_without_map():
    out = helmholtz_contraction(StackelChoice.of((1, 0, 0, 0)), C, family="[2,2]")
    assert not out.diagram
    assert any("no parameter map" in n for n in out.notes)
    assert set(out.to_json()) >= {"alpha", "v_prime", "member", "diagram"}
