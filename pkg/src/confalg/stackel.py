"""Conformal Stackel transforms and the Helmholtz contractions they induce.

A Laplace system ``H = d_x^2 + d_y^2 + V`` with ``V = sum a_k V_k`` becomes a
Helmholtz system after dividing on the left by ``U = sum A_k V_k``: the new
Hamiltonian is ``(1/U) H`` with potential ``V/U``.  Under a Bocher contraction
``F(x(eps), A) = sum A_k V_k(x(eps))`` behaves as ``V'(x') eps^alpha``, and the
transformed system contracts to the Stackel transform of the limit system by
``V'``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .bocher import (BocherContraction, PRIMED, TETRA, contract_potential, dress, limit_space)
from .conformal import CHART
from .exactalg import EPS, I, ONE, ZERO, Scalar, eps_limit, leading_term, var
from .orientation import identify_space
from .potentials import PotentialInstance, generic_instance, get_family, span_coefficients
from .weyl import DiffOperator, change_coordinates

FLAT = ("x", "y")


class DegenerateChoice(ValueError):
    pass


@dataclass(frozen=True)
class StackelChoice:
    A: tuple[Scalar, ...]

    @classmethod
    def of(cls, values: Sequence) -> "StackelChoice":
        if len(values) != 4:
            raise ValueError("a Stackel choice needs four components")
        return cls(tuple(Scalar.coerce(v) for v in values))

    def pivot(self) -> int:
        for k, a in enumerate(self.A):
            if a:
                return k
        raise DegenerateChoice("the choice vector is zero")


@dataclass(frozen=True)
class LaplaceSystem:
    potential: PotentialInstance

    @classmethod
    def generic(cls, family: str) -> "LaplaceSystem":
        return cls(generic_instance(family))

    def potential_function(self) -> Scalar:
        return self.potential.cartesian()

    def operator(self) -> DiffOperator:
        h0 = DiffOperator.partial(FLAT, "x", 2) + DiffOperator.partial(FLAT, "y", 2)
        return h0 + DiffOperator.function(FLAT, self.potential_function())


@dataclass(frozen=True)
class HelmholtzSystem:
    family: str
    multiplier: Scalar        # U: the new Hamiltonian is (1/U)(H0 + V)
    potential: Scalar         # V / U
    reduced_potential: Scalar  # W / U with V = W - E U
    energy: Scalar            # E, the parameter combination freed by the transform

    def operator(self) -> DiffOperator:
        h0 = DiffOperator.partial(FLAT, "x", 2) + DiffOperator.partial(FLAT, "y", 2)
        return h0.scale(1 / self.multiplier) + DiffOperator.function(FLAT, self.potential)


def conformal_stackel(system: LaplaceSystem, choice: StackelChoice) -> HelmholtzSystem:
    fam = get_family(system.potential.family)
    u = ZERO
    for a, f in zip(choice.A, fam.cartesian_basis):
        if a:
            u = u + a * f
    if not u:
        raise DegenerateChoice("U vanishes identically")
    v = system.potential_function()
    j = choice.pivot()
    aj = system.potential.coefficients[j]
    # V = W - E U with W free of the j-th basis direction
    energy = -aj / choice.A[j]
    w = v + energy * u
    return HelmholtzSystem(fam.name, u, v / u, w / u, energy)


# -- the S9 example -------------------------------------------------------

@dataclass(frozen=True)
class S9Report:
    potential_terms: dict[str, bool]
    sphere_sum: Scalar | None
    operator_identity: bool
    first_order_term: DiffOperator

    @property
    def passed(self) -> bool:
        return all(self.potential_terms.values()) and self.sphere_sum is not None and self.operator_identity

    def to_json(self) -> dict:
        return {
            "potential_terms": dict(sorted(self.potential_terms.items())),
            "sphere_sum": None if self.sphere_sum is None else str(self.sphere_sum),
            "sphere_sum_constant": self.sphere_sum is not None,
            "operator_identity": self.operator_identity,
            "first_order_term": str(self.first_order_term),
            "passed": self.passed,
        }


def horospherical() -> dict[str, Scalar]:
    """s1, s2, s3 in terms of u = e^a and r."""
    u, r = var("u"), var("r")
    return {
        "s1": I / 2 * (1 / u + (r * r + 1) * u),
        "s2": r * u,
        "s3": (1 / u + (r * r - 1) * u) / 2,
    }


def s9_check() -> S9Report:
    """Stackel transform of [1,1,1,1] by 1/x^2 written in horospherical variables."""
    x, y = var("x"), var("y")
    u, r = var("u"), var("r")
    a1, a2, a3, a4 = (var(p) for p in ("a1", "a2", "a3", "a4"))
    to_ur = {"x": 1 / u, "y": r}
    s = horospherical()
    choice = StackelChoice.of((1, 0, 0, 0))
    hel = conformal_stackel(LaplaceSystem.generic("[1,1,1,1]"), choice)
    pieces = {
        "a1": (a1, a1),
        "a2": (a2 * x * x / (y * y), a2 / s["s2"] ** 2),
        "a3": (4 * a3 * x * x / (x * x + y * y - 1) ** 2, a3 / s["s3"] ** 2),
        "a4": (-4 * a4 * x * x / (x * x + y * y + 1) ** 2, a4 / s["s1"] ** 2),
    }
    terms = {name: lhs.subs(to_ur) == rhs for name, (lhs, rhs) in pieces.items()}
    total = sum((lhs for lhs, _ in pieces.values()), ZERO)
    terms["transformed potential"] = hel.potential == total
    sum_sq = s["s1"] ** 2 + s["s2"] ** 2 + s["s3"] ** 2
    sphere_sum = sum_sq if sum_sq.is_constant() else None
    # x^2 (d_x^2 + d_y^2) in (u, r); with d_a = u d_u the expected form is
    # d_a^2 + d_a + u^-2 d_r^2
    lap = DiffOperator.partial(FLAT, "x", 2) + DiffOperator.partial(FLAT, "y", 2)
    moved = change_coordinates(lap.scale(x * x), ("u", "r"), to_ur)
    d_a = DiffOperator.vector_field(("u", "r"), {"u": u})
    d_r2 = DiffOperator.partial(("u", "r"), "r", 2)
    first_order = d_a
    expected = d_a * d_a + first_order + d_r2.scale(1 / (u * u))
    return S9Report(terms, sphere_sum, moved == expected, first_order)


# -- Helmholtz contractions ----------------------------------------------

@dataclass
class HelmholtzContraction:
    choice: tuple[str, ...]
    contraction: str
    alpha: int
    v_prime: Scalar                  # leading coefficient, in the contraction's eps
    v_prime_conventional: Scalar | None  # rescaled to epsilon = eps/sqrt(2) when alpha is even
    target_family: str | None
    member: bool
    diagram: bool
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "A": list(self.choice),
            "contraction": self.contraction,
            "alpha": self.alpha,
            "v_prime": str(self.v_prime),
            "v_prime_conventional": None if self.v_prime_conventional is None else str(self.v_prime_conventional),
            "target_family": self.target_family,
            "member": self.member,
            "diagram": self.diagram,
            "notes": self.notes,
        }


def _to_chart(f: Scalar) -> Scalar:
    chart = {p: v for p, v in zip(PRIMED, CHART.coordinates().values())}
    s = var("s")
    return f.subs(chart) * s * s


def helmholtz_contraction(choice: StackelChoice, c: BocherContraction,
                          family: str = "[1,1,1,1]", parameter_map=None) -> HelmholtzContraction:
    fam = get_family(family)
    f = ZERO
    for a, g in zip(choice.A, fam.tetra_basis):
        if a:
            f = f + a * g
    if not f:
        raise DegenerateChoice("F vanishes identically")
    moved = f.subs(dict(zip(TETRA, c.substitution)))
    alpha, v_prime = leading_term(moved)
    notes = []
    conventional = None
    if alpha % 2 == 0:
        conventional = v_prime * Scalar.coerce(2) ** (alpha // 2)
    else:
        notes.append("odd alpha: the conventional rescaling needs sqrt(2)")

    space = limit_space(family, c)
    idents = identify_space(space.basis)
    target = idents[0].family if idents else None
    member = span_coefficients(_to_chart(v_prime), space.basis) is not None
    if not member:
        notes.append("V' is not in the span of the limit family")

    pmap = parameter_map if parameter_map is not None else c.parameter_maps.get(family)
    diagram = False
    if pmap is None:
        notes.append("no parameter map: diagram check skipped")
    else:
        inst = generic_instance(family)
        limit = contract_potential(inst, c, pmap).tetra
        source = ZERO
        for coef, g in zip(dress(inst, pmap), fam.tetra_basis):
            if coef:
                source = source + coef * g
        ratio = (var(EPS) ** alpha * source / f).subs(dict(zip(TETRA, c.substitution)))
        diagram = eps_limit(ratio) == limit / v_prime
    return HelmholtzContraction(tuple(str(a) for a in choice.A), c.name, alpha, v_prime,
                                conventional, target, member, diagram, notes)
