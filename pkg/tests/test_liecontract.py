from __future__ import annotations

import json

import pytest

from confalg.bocher import builtin_1111_to_211
from confalg.conformal import SO4_NAMES, so4_structure
from confalg.exactalg import EPS, ONE, Scalar, var
from confalg.liecontract import (ContractionUndefined, EpsBasisMap, LieAlgebraSC, abelian, contract,
                                 e2, jacobi_check, killing_rank, so3, transform)

e = var(EPS)


def test_so3_relations():
    alg = so3()
    assert alg.bracket_of("J2", "J1") == {"J3": ONE}
    assert alg.bracket_of("J3", "J2") == {"J1": ONE}
    assert alg.bracket_of("J1", "J3") == {"J2": ONE}


@pytest.mark.parametrize("alg, expected", [
    (so3(), True),
    (e2(), True),
    (abelian(["A", "B", "C"]), True),
])
def test_jacobi_pass(alg, expected):
    assert jacobi_check(alg).passed is expected


def test_jacobi_so4():
    assert jacobi_check(so4_structure()).passed


def test_jacobi_counterexample():
    # a vanishing constant of o(3) set to 2: [J2,J1] = J3 + 2 J1
    broken = LieAlgebraSC.from_brackets(
        ["J1", "J2", "J3"],
        {("J2", "J1"): {"J3": 1, "J1": 2}, ("J3", "J2"): {"J1": 1}, ("J1", "J3"): {"J2": 1}},
    )
    report = jacobi_check(broken)
    assert not report.passed
    assert report.counterexample == ("J1", "J2", "J3")
    assert any(report.residual)


def test_antisymmetry_enforced():
    n = 2
    c = [[[0] * n for _ in range(n)] for _ in range(n)]
    c[0][1][0] = 1
    with pytest.raises(ValueError):
        LieAlgebraSC(["A", "B"], c)


@pytest.mark.parametrize("alg, rank", [
    (so4_structure(), 6),
    (e2(), 1),
    (abelian(SO4_NAMES), 0),
    (so3(), 3),
])
def test_killing_rank(alg, rank):
    assert killing_rank(alg) == rank


def test_inonu_wigner_so3_to_e2():
    t = EpsBasisMap.diagonal(["J1", "J2", "J3"], [e, e, 1])
    out = contract(so3(), t)
    assert out.bracket_of("J2", "J1") == {}
    assert out.bracket_of("J3", "J2") == {"J1": ONE}
    assert out.bracket_of("J1", "J3") == {"J2": ONE}
    assert jacobi_check(out).passed
    assert out.c == e2().c


def test_contract_identity():
    for alg in (so3(), so4_structure()):
        assert contract(alg, EpsBasisMap.identity(alg.basis_names)).c == alg.c


def test_contract_undefined():
    t = EpsBasisMap.diagonal(["J1", "J2", "J3"], [1 / e, 1, 1])
    with pytest.raises(ContractionUndefined):
        contract(so3(), t)


def test_bocher_generator_map_rank():
    out = contract(so4_structure(), builtin_1111_to_211().generator_map)
    assert jacobi_check(out).passed
    assert killing_rank(out) == 6


def test_transform_before_limit_keeps_eps():
    t = EpsBasisMap.diagonal(["J1", "J2", "J3"], [e, e, 1])
    moved = transform(so3(), t)
    # [J2', J1'] = eps^2 J3 -> eps^2 J3' in the new basis
    assert moved.bracket_of("J2", "J1") == {"J3": e * e}


def test_basis_map_inverse_validated():
    with pytest.raises(ValueError):
        EpsBasisMap(["A", "B"], [[1, 0], [0, e]], [[1, 0], [0, 1]])


def test_json_round_trip():
    alg = so4_structure()
    again = LieAlgebraSC.from_json(json.loads(alg.dumps()))
    assert again.c == alg.c and again.basis_names == alg.basis_names
    t = builtin_1111_to_211().generator_map
    back = EpsBasisMap.from_json(json.loads(json.dumps(t.to_json())))
    assert back.matrix == t.matrix


def test_generator_map_invertible_at_one():
    t = builtin_1111_to_211().generator_map
    det = t.determinant().subs({EPS: 1})
    assert det.is_constant() and not det.is_zero()
    assert isinstance(det, Scalar)
