from __future__ import annotations

import json

import pytest

from confalg.bocher import (ROW_CONTRACTIONS, TETRA, ContractionDataError, builtin_1111_to_211,
                            compose_contractions, contract_potential, contraction_from_json,
                            derive_parameter_map, generator_consistency, get_contraction, identity_contraction,
                            limit_space, limit_space_by_reduction, limit_targets, load_contractions,
                            null_cone_preserved, printed_1111_to_211_substitution, validate,
                            verify_cell, verify_table, _same_span)
from confalg.conformal import SO4_NAMES, cartesian
from confalg.exactalg import EPS, I, ONE, ZERO, Scalar, eps_limit, var
from confalg.liecontract import EpsBasisMap
from confalg.orientation import identify_space, oriented_cartesian_basis
from confalg.potentials import (FAMILY_NAMES, generic_instance, get_family, instance, member_test,
                                span_coefficients)

C = builtin_1111_to_211()
e = var(EPS)
xp = [var(f"xp{k}") for k in range(1, 5)]
Z, W = xp[0] + I * xp[1], xp[0] - I * xp[1]


def test_null_cone():
    assert null_cone_preserved(C)
    assert null_cone_preserved(identity_contraction())


def test_printed_form_is_leading_order():
    # the commonly quoted substitution agrees with the builtin at leading order
    for got, printed in zip(C.substitution, printed_1111_to_211_substitution()):
        assert eps_limit(e * (got - printed)) == ZERO


def test_generator_consistency():
    assert generator_consistency(C).passed
    assert generator_consistency(identity_contraction()).passed


def test_generator_consistency_detects_zeroed_entry():
    # L'12 = L12 here, so zeroing it would make the map singular; drop the
    # L23 component of L'13 instead, which keeps the map invertible
    m = [list(r) for r in C.generator_map.matrix]
    assert m[0] == [ONE] + [ZERO] * 5
    m[1][3] = ZERO
    broken = type(C)(C.name, C.substitution, EpsBasisMap(SO4_NAMES, m), C.parameter_maps)
    report = generator_consistency(broken)
    assert not report.passed
    assert report.mismatches == ["L13"]


def test_validate():
    report = validate(C)
    assert report.passed
    assert report.killing_rank == 6


def test_generator_map_invertible_at_one():
    det = C.generator_map.determinant()
    assert not det.subs({EPS: 1}).is_zero()


def test_contract_potential_1111():
    b = [var(f"b{k}") for k in range(1, 5)]
    out = contract_potential(generic_instance("[1,1,1,1]"), C)
    expected = b[0] / Z ** 2 + b[1] * W / Z ** 3 + b[2] / xp[2] ** 2 + b[3] / xp[3] ** 2
    assert out.tetra == expected
    assert out.family == "[2,1,1]"
    basis = oriented_cartesian_basis("[2,1,1]", out.identification.orientation)
    assert span_coefficients(out.cartesian, basis) == [var(f"b{k}") for k in (3, 4, 2, 1)]


def test_contract_potential_identity():
    ident = identity_contraction()
    for name in ("[1,1,1,1]", "[0]", "V(2)"):
        out = contract_potential(generic_instance(name), ident)
        b = [var(f"b{k}") for k in range(1, 5)]
        plain = dict(zip(TETRA, xp))
        assert out.tetra == get_family(name).tetra_potential(b).subs(plain)
        assert out.cartesian == cartesian(get_family(name).tetra_potential(b))


def test_contract_potential_missing_map():
    with pytest.raises(KeyError):
        contract_potential(generic_instance("[2,2]"), C)


def test_derived_map_for_31():
    pmap, limits = derive_parameter_map("[3,1]", C, "[2,1,1]")
    nonzero = [g for g in limits if g]
    assert nonzero
    for g in nonzero:
        assert member_test(g, "[2,1,1]") is not None
    # each derived column really produces its limit
    fam = get_family("[3,1]")
    for j, g in enumerate(limits):
        if not g:
            continue
        coeffs = [pmap[k][j] for k in range(4)]
        out = contract_potential(instance("[3,1]", [var("a1"), var("a2"), var("a3"), var("a4")]), C,
                                 parameter_map=[[coeffs[k] if col == 0 else ZERO for col in range(4)]
                                                for k in range(4)])
        assert out.cartesian == var("b1") * g


@pytest.mark.parametrize("source, target", [
    ("[1,1,1,1]", "[2,1,1]"),
    ("[0]", "[0]"),
    ("[2,2]", "[2,2]"),
    ("V(1)", "V(1)"),
    ("V(2)", "V(2)"),
])
def test_limit_space_standard_placement(source, target):
    space = limit_space(source, C)
    assert space.saturated
    assert target in limit_targets(space)


def test_limit_space_matches_reduction_oracle():
    space = limit_space("[1,1,1,1]", C)
    assert _same_span(space.basis, limit_space_by_reduction("[1,1,1,1]", C))


def test_limit_space_dressings_reproduce_basis():
    space = limit_space("[1,1,1,1]", C)
    fam = get_family("[1,1,1,1]")
    s = var("s")
    from confalg.conformal import CHART
    chart = dict(zip([f"xp{k}" for k in range(1, 5)], CHART.coordinates().values()))
    for g, dressing in zip(space.basis, space.dressings):
        total = sum((d * f for d, f in zip(dressing, fam.tetra_basis)), ZERO)
        limit = eps_limit(total.subs(dict(zip(TETRA, C.substitution))))
        assert limit.subs(chart) * s * s == g


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_identity_contraction_fixes_family(name):
    space = limit_space(name, identity_contraction())
    assert [i.family for i in identify_space(space.basis, name)] == [name]


def test_cell_with_search():
    cell = verify_cell("[4]", "[0]", C)
    assert cell.status == "pass"
    assert cell.matched_orientation is not None


def test_altered_expectation_fails():
    cell = verify_cell("[4]", "[4]", C)
    assert cell.status == "fail"
    assert "[4]" not in cell.observed


def test_row_without_data():
    report = verify_table(3)
    assert not report.available
    assert {cell.status for cell in report.cells} == {"data-unavailable"}
    assert report.failed == 0


def test_expected_list_length():
    with pytest.raises(ValueError):
        verify_table(1, expected=["[2,1,1]"])


def test_compose_with_identity():
    comp = compose_contractions(C, identity_contraction(), families=("[1,1,1,1]", "[0]"))
    assert comp.resolved
    for fam in ("[1,1,1,1]", "[0]"):
        assert _same_span(limit_space(fam, comp.contraction).basis, limit_space(fam, C).basis)


def test_compose_fixed_family():
    comp = compose_contractions(C, C, families=("[0]",))
    assert comp.resolved
    assert "[0]" in limit_targets(limit_space("[0]", comp.contraction))


def test_json_round_trip(tmp_path):
    data = C.to_json()
    again = contraction_from_json(json.loads(json.dumps(data)))
    assert again.substitution == C.substitution
    assert again.generator_map.matrix == C.generator_map.matrix
    assert again.parameter_maps == C.parameter_maps

    folder = tmp_path / "contractions"
    folder.mkdir()
    renamed = dict(data, name="[2,1,1]→[3,1]")
    (folder / "row3.json").write_text(json.dumps(renamed))
    loaded = load_contractions(tmp_path)
    assert list(loaded) == [ROW_CONTRACTIONS[3]]
    assert get_contraction("3", loaded).substitution == C.substitution


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("substitution"),
    lambda d: d.update(schema="other/1"),
    lambda d: d["substitution"].update(x1="xp1^2"),
    lambda d: d["substitution"].update(x1="q*xp1"),
])
def test_malformed_data(tmp_path, mutate):
    data = json.loads(json.dumps(C.to_json()))
    mutate(data)
    (tmp_path / "bad.json").write_text(json.dumps(data))
    with pytest.raises(ContractionDataError):
        load_contractions(tmp_path)


def test_bad_json(tmp_path):
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ContractionDataError):
        load_contractions(tmp_path)


def test_shipped_slots_are_skipped():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "data"
    assert load_contractions(root) == {}


def test_unknown_contraction():
    with pytest.raises(KeyError):
        get_contraction("[2,2]->[4]")
