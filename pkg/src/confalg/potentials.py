"""The eight nondegenerate conformal potential families.

Each family is a 4-dimensional space given by basis functions on the null
cone (homogeneous of degree -2 in x1..x4) and by the corresponding flat-space
functions of (x, y).  The two lists are tied together by the chart pullback
``s^2 * V`` up to a recorded invertible parameter matrix.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import linalg
from .conformal import CHART, ConeChart, cartesian
from .exactalg import ONE, ZERO, Scalar, var
from .gaussrat import GaussRat

FAMILY_NAMES = ("[1,1,1,1]", "[2,1,1]", "[2,2]", "[3,1]", "[4]", "[0]", "V(1)", "V(2)")
PARAMETERS = ("a1", "a2", "a3", "a4")


@dataclass(frozen=True)
class PotentialFamily:
    name: str
    tetra_basis: tuple[Scalar, ...]
    cartesian_basis: tuple[Scalar, ...]
    # cartesian(tetra_basis[k]) = sum_j parameter_matrix[k][j] * cartesian_basis[j]
    parameter_matrix: tuple[tuple[GaussRat, ...], ...]
    derived: dict = field(default_factory=dict, compare=False)

    def cartesian_potential(self, params: Sequence = PARAMETERS) -> Scalar:
        return _combine(self.cartesian_basis, params)

    def tetra_potential(self, params: Sequence = PARAMETERS) -> Scalar:
        return _combine(self.tetra_basis, params)

    def perturbed(self, index: int, factor) -> "PotentialFamily":
        """Copy with one Cartesian basis member scaled (for negative tests)."""
        basis = list(self.cartesian_basis)
        basis[index] = basis[index] * factor
        return PotentialFamily(self.name, self.tetra_basis, tuple(basis),
                               self.parameter_matrix, self.derived)


@dataclass(frozen=True)
class PotentialInstance:
    family: str
    coefficients: tuple[Scalar, ...]

    def cartesian(self) -> Scalar:
        return _combine(get_family(self.family).cartesian_basis, self.coefficients)

    def tetra(self) -> Scalar:
        return _combine(get_family(self.family).tetra_basis, self.coefficients)


def _combine(basis, coeffs) -> Scalar:
    out = ZERO
    for f, c in zip(basis, coeffs):
        c = var(c) if isinstance(c, str) else Scalar.coerce(c)
        out = out + c * f
    return out


def _parse_matrix(entries) -> tuple[tuple[GaussRat, ...], ...]:
    if entries == "identity":
        return tuple(tuple(GaussRat(int(i == j)) for j in range(4)) for i in range(4))
    return tuple(tuple(GaussRat.coerce(v) if not isinstance(v, int) else GaussRat(v) for v in row)
                 for row in entries)


def parse_families(data: dict) -> dict[str, PotentialFamily]:
    if data.get("schema") != "potential-families/1":
        raise ValueError("not a potential-families/1 document")
    out = {}
    for entry in data["families"]:
        tetra = tuple(Scalar.parse(t) for t in entry["tetra"])
        cart = tuple(Scalar.parse(t) for t in entry["cartesian"])
        if len(tetra) != 4 or len(cart) != 4:
            raise ValueError(f"family {entry['name']} needs four basis functions per chart")
        out[entry["name"]] = PotentialFamily(
            entry["name"], tetra, cart, _parse_matrix(entry["parameter_matrix"]),
            dict(entry.get("derived", {})))
    return out


@lru_cache(maxsize=None)
def _builtin() -> dict[str, PotentialFamily]:
    text = resources.files("confalg").joinpath("data/families.json").read_text()
    return parse_families(json.loads(text))


def load_families(path: str | Path | None = None) -> dict[str, PotentialFamily]:
    if path is None:
        return dict(_builtin())
    return parse_families(json.loads(Path(path).read_text()))


def get_family(name) -> PotentialFamily:
    if isinstance(name, PotentialFamily):
        return name
    try:
        return _builtin()[name]
    except KeyError:
        raise KeyError(f"unknown potential family {name!r}") from None


@dataclass(frozen=True)
class CrossChartReport:
    family: str
    passed: bool
    mismatches: list[tuple[int, str, str]]


def cross_chart_check(family, chart: ConeChart = CHART) -> CrossChartReport:
    fam = get_family(family)
    mismatches = []
    for k, f in enumerate(fam.tetra_basis):
        pulled = cartesian(f, chart)
        expected = _combine(fam.cartesian_basis, [Scalar.coerce(c) for c in fam.parameter_matrix[k]])
        if pulled != expected:
            mismatches.append((k, str(pulled), str(expected)))
    return CrossChartReport(fam.name, not mismatches, mismatches)


def member_test(g, family, names: Sequence[str] = ("x", "y")) -> list[Scalar] | None:
    """Coefficients of ``g`` in the family's Cartesian basis, or None.

    Coefficients may involve any symbols other than ``names``.
    """
    fam = get_family(family)
    g = Scalar.coerce(g)
    return span_coefficients(g, fam.cartesian_basis, names)


def span_coefficients(g, basis: Sequence[Scalar], names: Sequence[str] = ("x", "y")) -> list[Scalar] | None:
    rows, rhs = linalg.coefficient_rows([{0: f} for f in basis], {0: Scalar.coerce(g)}, list(names))
    if not rows:
        return [ZERO] * len(basis)
    return linalg.solve(rows, rhs, ZERO)


def independent(basis: Sequence[Scalar], names: Sequence[str] = ("x", "y")) -> bool:
    rows, _ = linalg.coefficient_rows([{0: f} for f in basis], None, list(names))
    return linalg.rank(rows, len(basis)) == len(basis)


def instance(family: str, coefficients: Sequence) -> PotentialInstance:
    return PotentialInstance(family, tuple(Scalar.coerce(c) for c in coefficients))


def generic_instance(family: str, params: Sequence[str] = PARAMETERS) -> PotentialInstance:
    return PotentialInstance(family, tuple(var(p) for p in params))
