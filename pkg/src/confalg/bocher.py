"""Bocher contractions: null-cone substitutions, generator maps and potential limits.

A contraction is a linear substitution ``x = T(eps) x'`` of tetraspherical
coordinates that preserves the quadratic form.  It induces a basis change of
so(4,C) (``generator_map``) and sends a potential family to the space of all
finite eps -> 0 limits of parameter-dressed members (``limit_space``).

The builtin [1,1,1,1]->[2,1,1] contraction is written in the variable
``eps = sqrt(2) * epsilon`` so that every coefficient is in Q(i); see
``EPS_NOTE``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from . import linalg
from .conformal import CHART, SO4_NAMES, so4_operators, so4_structure
from .exactalg import (EPS, I, ONE, ZERO, PoleAtZero, Scalar, eps_limit, eps_order,
                       laurent_expand, leading_term, var)
from .gaussrat import GaussRat
from .liecontract import EpsBasisMap, contract, killing_rank
from .orientation import (IDENTITY, Identification, Orientation, family_orbits,
                          identify_function, identify_space, orient, orientation_label)
from .potentials import FAMILY_NAMES, PotentialInstance, get_family
from .weyl import change_coordinates

TETRA = ("x1", "x2", "x3", "x4")
PRIMED = ("xp1", "xp2", "xp3", "xp4")
B_PARAMS = ("b1", "b2", "b3", "b4")
A_PARAMS = ("a1", "a2", "a3", "a4")

EPS_NOTE = "eps = sqrt(2)*epsilon, where epsilon is the conventional contraction parameter"

ROW_CONTRACTIONS = {
    1: "[1,1,1,1]->[2,1,1]",
    2: "[1,1,1,1]->[2,2]",
    3: "[2,1,1]->[3,1]",
    4: "[1,1,1,1]->[4]",
    5: "[2,2]->[4]",
    6: "[1,1,1,1]->[3,1]",
}

# expected target for each source family, in FAMILY_NAMES order
EXPECTED_TARGETS = {
    1: ("[2,1,1]", "[2,1,1]", "[2,2]", "[2,1,1]", "[0]", "[0]", "V(1)", "V(2)"),
    2: ("[2,2]", "[2,2]", "[2,2]", "V(1)", "V(2)", "[0]", "V(1)", "V(2)"),
    3: ("[3,1]", "[3,1]", "[0]", "[3,1]", "[0]", "[0]", "V(2)", "V(2)"),
    4: ("[4]", "[4]", "[0]", "[4]", "[0]", "[0]", "V(2)", "V(2)"),
    5: ("[4]", "[4]", "[4]", "V(2)", "V(2)", "[0]", "V(2)", "V(2)"),
    6: ("[3,1]", "[3,1]", "[3,1]", "[3,1]", "[0]", "[0]", "V(2)", "V(2)"),
}


class NotConformal(ValueError):
    pass


class ChartInversionError(ValueError):
    pass


class LimitSpaceError(ArithmeticError):
    pass


def canonical_name(name: str) -> str:
    return name.replace("→", "->").replace(" ", "")


# -- the contraction object -------------------------------------------------

@dataclass(frozen=True)
class BocherContraction:
    name: str
    # x_j as Scalars in xp1..xp4 and eps
    substitution: tuple[Scalar, ...]
    generator_map: EpsBasisMap
    parameter_maps: dict = field(default_factory=dict, compare=False)
    note: str = ""

    def linear_matrix(self) -> list[list[Scalar]]:
        """T with x_j = sum_k T[j][k] xp_k; raises when not linear homogeneous."""
        rows = []
        for j, f in enumerate(self.substitution):
            coeffs = f.coefficients(PRIMED)
            row = []
            for k in range(4):
                mono = tuple(1 if i == k else 0 for i in range(4))
                row.append(coeffs.pop(mono, ZERO))
            if coeffs:
                raise ChartInversionError(f"x{j + 1} is not linear in the primed coordinates")
            rows.append(row)
        return rows

    def cartesian_images(self) -> dict[str, Scalar]:
        """x_j(eps) with the primed coordinates on the chart (s' = 1)."""
        return _cartesian_images(self)

    def chart_form(self) -> dict[str, Scalar]:
        """(x, y, s) as functions of (x', y', s') (named xp, yp, sp)."""
        prime = {f"xp{k}": v for k, v in
                 zip(range(1, 5), _chart_values("xp", "yp", "sp"))}
        xs = [f.subs(prime) for f in self.substitution]
        s = xs[2] + I * xs[3]
        return {"x": -xs[0] / s, "y": -xs[1] / s, "s": s}

    def inverse_chart_form(self) -> dict[str, Scalar]:
        """(x', y') as functions of (x, y)."""
        t = self.linear_matrix()
        try:
            tinv = linalg.inverse(t, ONE, ZERO)
        except ZeroDivisionError:
            raise ChartInversionError("substitution matrix is singular") from None
        pt = _chart_values("x", "y", None)
        xp = [sum((tinv[j][k] * pt[k] for k in range(4)), ZERO) for j in range(4)]
        s = xp[2] + I * xp[3]
        if not s:
            raise ChartInversionError("primed light-cone coordinate vanishes identically")
        return {"xp": -xp[0] / s, "yp": -xp[1] / s}

    def to_json(self) -> dict:
        data = {
            "schema": "bocher-contraction/1",
            "name": self.name,
            "substitution": {f"x{j + 1}": str(f) for j, f in enumerate(self.substitution)},
            "generator_map": {
                "matrix": [[str(e) for e in r] for r in self.generator_map.matrix],
                "inverse": [[str(e) for e in r] for r in self.generator_map.inverse_matrix],
            },
        }
        if self.parameter_maps:
            data["parameter_maps"] = {
                fam: [[str(e) for e in r] for r in m] for fam, m in self.parameter_maps.items()}
        if self.note:
            data["note"] = self.note
        return data


def _chart_values(x: str, y: str, s: str | None) -> list[Scalar]:
    xv, yv = var(x), var(y)
    sv = var(s) if s else ONE
    r2 = xv * xv + yv * yv
    return [-xv * sv, -yv * sv, sv * (1 - r2) / 2, -I * sv * (1 + r2) / 2]


_IMAGE_CACHE: dict[int, dict[str, Scalar]] = {}


def _cartesian_images(c: BocherContraction) -> dict[str, Scalar]:
    key = id(c)
    cached = _IMAGE_CACHE.get(key)
    if cached is None or cached.get("__owner__") is not c:
        prime = {p: v for p, v in zip(PRIMED, _chart_values("x", "y", None))}
        images = {t: f.subs(prime) for t, f in zip(TETRA, c.substitution)}
        cached = dict(images)
        cached["__owner__"] = c
        _IMAGE_CACHE[key] = cached
    return {t: cached[t] for t in TETRA}


def generator_matrix(t: Sequence[Sequence[Scalar]]) -> EpsBasisMap:
    """so(4) basis change induced by x = T x'.

    L'_jk = x'_j d'_k - x'_k d'_j expands as sum_{m<a} C[m][a] L_ma with
    C[m][a] = Tinv[j][m] T[a][k] - Tinv[k][m] T[a][j].
    """
    t = [[Scalar.coerce(e) for e in row] for row in t]
    tinv = linalg.inverse(t, ONE, ZERO)
    return EpsBasisMap(SO4_NAMES, _so4_rows(t, tinv), _so4_rows(tinv, t))


def _so4_rows(t, tinv):
    pairs = [(int(n[1]) - 1, int(n[2]) - 1) for n in SO4_NAMES]
    rows = []
    for j, k in pairs:
        c = [[tinv[j][m] * t[a][k] - tinv[k][m] * t[a][j] for a in range(4)] for m in range(4)]
        for m in range(4):
            if c[m][m]:
                raise NotConformal("substitution does not preserve the quadratic form")
            for a in range(m + 1, 4):
                if c[m][a] != -c[a][m]:
                    raise NotConformal("substitution does not preserve the quadratic form")
        rows.append([c[m][a] for m, a in pairs])
    return rows


def from_linear(name: str, t, parameter_maps=None, note: str = "") -> BocherContraction:
    t = [[Scalar.coerce(e) for e in row] for row in t]
    xp = [var(p) for p in PRIMED]
    subst = tuple(sum((t[j][k] * xp[k] for k in range(4)), ZERO) for j in range(4))
    return BocherContraction(name, subst, generator_matrix(t), dict(parameter_maps or {}), note)


@lru_cache(maxsize=None)
def builtin_1111_to_211() -> BocherContraction:
    """[1,1,1,1]->[2,1,1] as an exactly orthogonal substitution.

    With Z = x1 + i x2 and W = x1 - i x2 it reads Z = (2i/eps) Z',
    W = (-i eps/2) W', x3 = x3', x4 = x4'.
    """
    e = var(EPS)
    a = I * (1 / e - e / 4)
    b = 1 / e + e / 4
    t = [[a, -b, ZERO, ZERO], [b, a, ZERO, ZERO], [ZERO, ZERO, ONE, ZERO], [ZERO, ZERO, ZERO, ONE]]
    e2, e4 = e ** 2, e ** 4
    pmap = (
        (-1 / e2, -1 / e4, ZERO, ZERO),
        (ZERO, -1 / e4, ZERO, ZERO),
        (ZERO, ZERO, ONE, ZERO),
        (ZERO, ZERO, ZERO, ONE),
    )
    return from_linear(ROW_CONTRACTIONS[1], t, {"[1,1,1,1]": pmap}, EPS_NOTE)


def printed_1111_to_211_substitution() -> tuple[Scalar, ...]:
    """The commonly quoted form x1 = iZ'/eps, x2 = Z'/eps + eps W'/2 (not cone preserving)."""
    e = var(EPS)
    z = var("xp1") + I * var("xp2")
    w = var("xp1") - I * var("xp2")
    return (I * z / e, z / e + e * w / 2, var("xp3"), var("xp4"))


@lru_cache(maxsize=None)
def identity_contraction() -> BocherContraction:
    eye = [[ONE if i == j else ZERO for j in range(4)] for i in range(4)]
    maps = {name: tuple(tuple(r) for r in eye) for name in FAMILY_NAMES}
    return from_linear("identity", eye, maps)


# -- checks on a contraction ------------------------------------------------

def null_cone_preserved(c: BocherContraction) -> bool:
    lhs = sum((f * f for f in c.substitution), ZERO)
    rhs = sum((var(p) ** 2 for p in PRIMED), ZERO)
    return lhs == rhs


@dataclass(frozen=True)
class ConsistencyReport:
    passed: bool
    mismatches: list[str]


def generator_consistency(c: BocherContraction) -> ConsistencyReport:
    """Push the primed generators through the chart and compare with generator_map."""
    back = c.inverse_chart_form()
    primed = so4_operators(("xp", "yp"))
    plain = so4_operators()
    mismatches = []
    for i, name in enumerate(SO4_NAMES):
        moved = change_coordinates(primed[name], ("x", "y"), back)
        expected = None
        for coef, base in zip(c.generator_map.matrix[i], SO4_NAMES):
            if coef:
                term = plain[base].scale(coef)
                expected = term if expected is None else expected + term
        if expected is None or moved != expected:
            mismatches.append(name)
    return ConsistencyReport(not mismatches, mismatches)


def contracted_algebra(c: BocherContraction):
    return contract(so4_structure(), c.generator_map)


@dataclass(frozen=True)
class ValidationReport:
    name: str
    null_cone: bool
    generator_consistency: bool
    killing_rank: int | None
    errors: list[str]

    @property
    def passed(self) -> bool:
        return self.null_cone and self.generator_consistency and self.killing_rank == 6 and not self.errors


def validate(c: BocherContraction) -> ValidationReport:
    errors = []
    cone = null_cone_preserved(c)
    try:
        gen = generator_consistency(c).passed
    except (ChartInversionError, ZeroDivisionError) as exc:
        gen = False
        errors.append(str(exc))
    try:
        rank = killing_rank(contracted_algebra(c))
    except ArithmeticError as exc:
        rank = None
        errors.append(str(exc))
    return ValidationReport(c.name, cone, gen, rank, errors)


# -- pulling potentials through a contraction ------------------------------

def pulled_back(f, c: BocherContraction, orientation: Orientation = IDENTITY) -> Scalar:
    """Cartesian form of f(sigma(x(eps, x'))) as a function of (x, y, eps)."""
    images = _cartesian_images(c)
    perm, signs = orientation
    mapping = {TETRA[j]: images[TETRA[perm[j]]] * signs[j] for j in range(4)}
    return Scalar.coerce(f).subs(mapping)


def _source_functions(source) -> tuple[str, list[Scalar]]:
    if isinstance(source, str):
        fam = get_family(source)
        return fam.name, list(fam.tetra_basis)
    return "custom", [Scalar.coerce(f) for f in source]


def cartesian_to_tetra(g) -> Scalar:
    """Degree -2 cone function whose chart pullback is g(x, y)."""
    s = var("x3") + I * var("x4")
    return Scalar.coerce(g).subs({"x": -var("x1") / s, "y": -var("x2") / s}) / (s * s)


@dataclass(frozen=True)
class LimitSpace:
    source: str
    contraction: str
    orientation: Orientation
    depth: int
    orders: list[int]
    basis: list[Scalar]
    dressings: list[list[Scalar]]
    saturated: bool

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def parameter_map(self) -> list[list[Scalar]]:
        """a = P(eps) b reproducing sum_j b_j basis[j] in the limit."""
        n = len(self.orders)
        return [[self.dressings[j][k] for j in range(self.dimension)] for k in range(n)]


def limit_space(source, c: BocherContraction, orientation: Orientation = IDENTITY,
                max_depth: int = 16) -> LimitSpace:
    """All finite eps -> 0 limits of sum_k a_k(eps) f_k(x(eps)) with Laurent a_k.

    The negative-order cancellation conditions form a block-Toeplitz system in
    the Laurent coefficients of the a_k.  Depth M allows shifts eps^p with
    |p| <= M; the achievable space grows with M and is bounded by the number
    of independent source functions, so reaching that bound at two successive
    depths certifies saturation.
    """
    name, funcs = _source_functions(source)
    funcs = [orient(f, orientation) for f in funcs]
    v = [pulled_back(f, c) for f in funcs]
    orders = []
    for k, vk in enumerate(v):
        o = eps_order(vk)
        if o is None:
            raise LimitSpaceError(f"source function {k} vanishes under the substitution")
        orders.append(o)
    bound = _independent_count(funcs)
    start = max([0] + [-o for o in orders])
    previous = None
    for depth in range(start, max_depth + 1):
        basis, dressings = _solve_depth(v, orders, depth)
        if previous is not None and len(basis) == bound and len(previous[0]) == bound:
            return LimitSpace(name, c.name, orientation, depth - 1, orders,
                              previous[0], previous[1], True)
        previous = (basis, dressings)
    basis, dressings = previous
    return LimitSpace(name, c.name, orientation, max_depth, orders, basis, dressings, False)


def _independent_count(funcs) -> int:
    from .conformal import cartesian

    rows, _ = linalg.coefficient_rows([{0: cartesian(f)} for f in funcs], None, ["x", "y"])
    return linalg.rank(rows, len(funcs))


def _solve_depth(v, orders, depth):
    n = len(v)
    series = [laurent_expand(vk, depth) for vk in v]
    shifts = list(range(-depth, depth + 1))
    unknowns = [(k, p) for k in range(n) for p in shifts]
    low = min(orders) - depth
    columns = []
    for k, p in unknowns:
        col = {}
        for m in range(low, 1):
            coef = series[k].terms.get(m - p)
            if coef is not None and m - p <= depth:
                col[m] = coef
        columns.append(col)
    rows, _, keys, den = linalg.coefficient_rows(columns, None, ["x", "y"], return_keys=True)
    if den is None:
        return [], []
    grows = linalg.to_gauss(rows)
    constraint = [r for r, key in zip(grows, keys) if key[0] < 0]
    limit_rows = [(key[1], r) for r, key in zip(grows, keys) if key[0] == 0]
    ncols = len(unknowns)
    null = linalg.gaussian_nullspace_span(constraint, ncols)
    images = []
    for c in null:
        w = []
        for _, r in limit_rows:
            acc = GaussRat(0)
            for a, b in zip(r, c):
                if a and b:
                    acc = acc + a * b
            w.append(acc)
        if any(w):
            images.append(w + list(c))
    if not images:
        return [], []
    nw = len(limit_rows)
    red, piv = linalg.rref(images, nw + ncols)
    basis, dressings = [], []
    for row, p in zip(red, piv):
        if p >= nw:
            break
        g = ZERO
        for (mono, _), coef in zip(limit_rows, row[:nw]):
            if coef:
                g = g + Scalar.coerce(coef) * var("x") ** int(mono[0]) * var("y") ** int(mono[1])
        basis.append(g * den.inverse())
        e = var(EPS)
        dress = []
        for k in range(n):
            acc = ZERO
            for idx, (kk, p_) in enumerate(unknowns):
                cval = row[nw + idx]
                if kk == k and cval:
                    acc = acc + Scalar.coerce(cval) * e ** p_
            dress.append(acc)
        dressings.append(dress)
    return basis, dressings


def limit_space_by_reduction(source, c: BocherContraction,
                             orientation: Orientation = IDENTITY, max_steps: int = 200) -> list[Scalar]:
    """Independent oracle: leading-term reduction.

    Repeatedly replace one function by an eps-shifted combination that cancels
    a linear relation among leading coefficients.  Once the leading
    coefficients are independent they span the achievable limit space.
    """
    _, funcs = _source_functions(source)
    v = [pulled_back(orient(f, orientation), c) for f in funcs]
    e = var(EPS)
    for _ in range(max_steps):
        leads = [leading_term(vk) for vk in v]
        rows, _ = linalg.coefficient_rows([{0: lead} for _, lead in leads], None, ["x", "y"])
        null = linalg.nullspace(rows, len(v), ONE, ZERO)
        if not null:
            return [lead for _, lead in leads]
        lam = null[0]
        idx = [k for k in range(len(v)) if lam[k]]
        j = max(idx, key=lambda k: leads[k][0])
        nj = leads[j][0]
        new = ZERO
        for k in idx:
            new = new + lam[k] * e ** (nj - leads[k][0]) * v[k]
        if not new:
            raise LimitSpaceError("source functions are dependent after substitution")
        v[j] = new
    raise LimitSpaceError("leading-term reduction did not terminate")


# -- potentials through a contraction ------------------------------------

@dataclass(frozen=True)
class LimitPotential:
    tetra: Scalar
    cartesian: Scalar
    identification: Identification | None

    @property
    def family(self) -> str | None:
        return self.identification.family if self.identification else None


def dress(p: PotentialInstance, pmap) -> list[Scalar]:
    """Coefficients after a -> P(eps) b."""
    b = [var(n) for n in B_PARAMS]
    sub = {}
    for i, row in enumerate(pmap):
        sub[A_PARAMS[i]] = sum((Scalar.coerce(e) * bj for e, bj in zip(row, b)), ZERO)
    return [c.subs(sub) for c in p.coefficients]


def contract_potential(p: PotentialInstance, c: BocherContraction, parameter_map=None,
                       orientation: Orientation = IDENTITY) -> LimitPotential:
    pmap = parameter_map if parameter_map is not None else c.parameter_maps.get(p.family)
    if pmap is None:
        raise KeyError(f"{c.name} has no parameter map for {p.family}")
    fam = get_family(p.family)
    coeffs = dress(p, pmap)
    total = ZERO
    for coef, f in zip(coeffs, fam.tetra_basis):
        if coef:
            total = total + coef * orient(f, orientation)
    moved = total.subs(dict(zip(TETRA, c.substitution)))
    limit = eps_limit(moved, where=f"{p.family} under {c.name}")
    s = var("s")
    chart = {pn: v for pn, v in zip(PRIMED, CHART.coordinates().values())}
    cart = limit.subs(chart) * s * s
    return LimitPotential(limit, cart, identify_function(cart))


def derive_parameter_map(source: str, c: BocherContraction, target: str,
                         orientation: Orientation = IDENTITY) -> tuple[list[list[Scalar]], list[Scalar]]:
    """Parameter map a = P(eps) b whose limits lie in the target family's span.

    Returns ``(P, limits)``: P is 4 x 4 (unused columns zero) and ``limits[j]``
    is the Cartesian limit reached by b_j.  The number of nonzero columns is
    the dimension of (achievable limits) intersected with the target span.
    """
    space = limit_space(source, c, orientation)
    target_basis = list(get_family(target).cartesian_basis)
    cols = [{0: g} for g in space.basis] + [{0: -t} for t in target_basis]
    rows, _ = linalg.coefficient_rows(cols, None, ["x", "y"])
    null = linalg.nullspace(rows, len(cols), ONE, ZERO)
    n = len(space.orders)
    pmap = [[ZERO] * 4 for _ in range(n)]
    limits = []
    for j, lam in enumerate(null[:4]):
        limit = ZERO
        for i, g in enumerate(space.basis):
            if lam[i]:
                limit = limit + lam[i] * g
                for k in range(n):
                    pmap[k][j] = pmap[k][j] + lam[i] * space.dressings[i][k]
        limits.append(limit)
    return pmap, limits


# -- table verification -----------------------------------------------------

@dataclass
class TableCell:
    source: str
    expected: str
    status: str  # pass | fail | data-unavailable
    standard_targets: list[str] = field(default_factory=list)
    matched_orientation: str | None = None
    observed: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "expected": self.expected,
            "status": self.status,
            "standard_targets": self.standard_targets,
            "matched_orientation": self.matched_orientation,
            "observed": self.observed,
        }


@dataclass
class TableReport:
    row: int
    contraction: str
    cells: list[TableCell]
    validation: ValidationReport | None = None

    @property
    def passed(self) -> int:
        return sum(cell.status == "pass" for cell in self.cells)

    @property
    def failed(self) -> int:
        return sum(cell.status == "fail" for cell in self.cells)

    @property
    def available(self) -> bool:
        return all(cell.status != "data-unavailable" for cell in self.cells)

    def to_json(self) -> dict:
        out = {"row": self.row, "contraction": self.contraction,
               "cells": [cell.to_json() for cell in self.cells],
               "passed": self.passed, "failed": self.failed}
        if self.validation is not None:
            v = self.validation
            out["validation"] = {"null_cone": v.null_cone, "generator_consistency": v.generator_consistency,
                                 "killing_rank": v.killing_rank, "errors": v.errors}
        return out


def source_placements(family: str) -> list[Orientation]:
    """Distinct placements of a family under signed coordinate permutations."""
    return [e.orientation for e in family_orbits() if e.family == family]


def limit_targets(space: LimitSpace) -> list[str]:
    return sorted({ident.family for ident in identify_space(space.basis)})


def verify_cell(source: str, expected: str, c: BocherContraction,
                search: bool = True) -> TableCell:
    """Check source -> expected.

    The standard placement of the source family is tried first; if its limit
    is not the expected class, other placements of the source on the cone
    (signed permutations of x1..x4) are searched.
    """
    standard = limit_targets(limit_space(source, c))
    cell = TableCell(source, expected, "fail", standard, None, list(standard))
    if expected in standard:
        cell.status = "pass"
        cell.matched_orientation = orientation_label(IDENTITY)
        return cell
    if not search:
        return cell
    seen = set(standard)
    for o in source_placements(source):
        if o == IDENTITY:
            continue
        targets = limit_targets(limit_space(source, c, o))
        seen.update(targets)
        if expected in targets:
            cell.status = "pass"
            cell.matched_orientation = orientation_label(o)
            break
    cell.observed = sorted(seen)
    return cell


def verify_table(row: int, expected: Sequence[str] | None = None,
                 contractions: dict | None = None, search: bool = True) -> TableReport:
    name = ROW_CONTRACTIONS[row]
    expected = tuple(expected) if expected is not None else EXPECTED_TARGETS[row]
    if len(expected) != len(FAMILY_NAMES):
        raise ValueError("expected list must name one target per source family")
    available = dict(contractions or {})
    if row == 1:
        available.setdefault(name, builtin_1111_to_211())
    c = available.get(name)
    if c is None:
        cells = [TableCell(src, exp, "data-unavailable") for src, exp in zip(FAMILY_NAMES, expected)]
        return TableReport(row, name, cells)
    report = validate(c)
    if not report.passed:
        cells = [TableCell(src, exp, "fail") for src, exp in zip(FAMILY_NAMES, expected)]
        return TableReport(row, name, cells, report)
    cells = [verify_cell(src, exp, c, search) for src, exp in zip(FAMILY_NAMES, expected)]
    return TableReport(row, name, cells, report)


# -- composition ------------------------------------------------------------

@dataclass(frozen=True)
class Composite:
    contraction: BocherContraction | None
    powers: tuple[int, int] | None
    agreement: dict[str, bool]

    @property
    def resolved(self) -> bool:
        return self.contraction is not None


def _same_span(a: Sequence[Scalar], b: Sequence[Scalar]) -> bool:
    if len(a) != len(b):
        return False
    rows, _ = linalg.coefficient_rows([{0: f} for f in list(a) + list(b)], None, ["x", "y"])
    return linalg.rank(rows, len(a) + len(b)) == len(a)


def sequential_limit(source, c1: BocherContraction, c2: BocherContraction) -> list[Scalar]:
    first = limit_space(source, c1)
    return limit_space([cartesian_to_tetra(g) for g in first.basis], c2).basis


def compose_contractions(c1: BocherContraction, c2: BocherContraction,
                         families: Sequence[str] = FAMILY_NAMES, max_power: int = 3) -> Composite:
    """One-parameter contraction x = T1(eps^k1) T2(eps^k2) x'' matching c1 then c2."""
    t1, t2 = c1.linear_matrix(), c2.linear_matrix()
    targets = {fam: sequential_limit(fam, c1, c2) for fam in families}
    e = var(EPS)
    pairs = sorted(((k1, k2) for k1 in range(1, max_power + 1) for k2 in range(1, max_power + 1)),
                   key=lambda kk: (kk[0] + kk[1], kk))
    agreement: dict[str, bool] = {}
    for k1, k2 in pairs:
        a = [[f.subs({EPS: e ** k1}) for f in row] for row in t1]
        b = [[f.subs({EPS: e ** k2}) for f in row] for row in t2]
        t = linalg.matmul(a, b, ZERO)
        comp = from_linear(f"{c1.name} then {c2.name}", t)
        agreement = {fam: _same_span(limit_space(fam, comp).basis, targets[fam]) for fam in families}
        if all(agreement.values()):
            return Composite(comp, (k1, k2), agreement)
    return Composite(None, None, agreement)


# -- contraction data files -------------------------------------------------

class ContractionDataError(ValueError):
    pass


def contraction_from_json(data: dict) -> BocherContraction:
    if data.get("schema") != "bocher-contraction/1":
        raise ContractionDataError("expected schema bocher-contraction/1")
    try:
        name = canonical_name(data["name"])
        subst = tuple(Scalar.parse(data["substitution"][t]) for t in TETRA)
    except KeyError as exc:
        raise ContractionDataError(f"missing field {exc}") from None
    except ValueError as exc:
        raise ContractionDataError(str(exc)) from None
    allowed = set(PRIMED) | {EPS}
    for f in subst:
        extra = f.free_variables() - allowed
        if extra:
            raise ContractionDataError(f"substitution uses unexpected symbols {sorted(extra)}")
    maps = {}
    for fam, m in data.get("parameter_maps", {}).items():
        maps[fam] = tuple(tuple(Scalar.parse(e) for e in row) for row in m)
    proto = BocherContraction(name, subst, EpsBasisMap.identity(SO4_NAMES), maps, data.get("note", ""))
    try:
        t = proto.linear_matrix()
    except ChartInversionError as exc:
        raise ContractionDataError(str(exc)) from None
    if "generator_map" in data:
        gm = data["generator_map"]
        try:
            gmap = EpsBasisMap(SO4_NAMES, [[Scalar.parse(e) for e in r] for r in gm["matrix"]],
                               [[Scalar.parse(e) for e in r] for r in gm["inverse"]] if "inverse" in gm else None)
        except (ValueError, ZeroDivisionError) as exc:
            raise ContractionDataError(f"generator_map: {exc}") from None
    else:
        try:
            gmap = generator_matrix(t)
        except (NotConformal, ZeroDivisionError) as exc:
            raise ContractionDataError(str(exc)) from None
    return BocherContraction(name, subst, gmap, maps, data.get("note", ""))


def load_contractions(data_dir: str | Path | None) -> dict[str, BocherContraction]:
    """Read every contraction file under ``data_dir`` (and its contractions/ folder)."""
    out: dict[str, BocherContraction] = {}
    if data_dir is None:
        return out
    root = Path(data_dir)
    if not root.exists():
        return out
    files = sorted(root.glob("*.json")) + sorted(root.glob("contractions/*.json"))
    for path in files:
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ContractionDataError(f"{path}: {exc}") from None
        if data.get("schema") == "bocher-slots/1":
            continue
        try:
            c = contraction_from_json(data)
        except ContractionDataError as exc:
            raise ContractionDataError(f"{path}: {exc}") from None
        out[c.name] = c
    return out


def get_contraction(name: str, contractions: dict | None = None) -> BocherContraction:
    name = canonical_name(name)
    if name in ("identity",):
        return identity_contraction()
    if name in (ROW_CONTRACTIONS[1], "1"):
        return builtin_1111_to_211()
    if name.isdigit() and int(name) in ROW_CONTRACTIONS:
        name = ROW_CONTRACTIONS[int(name)]
    if contractions and name in contractions:
        return contractions[name]
    raise KeyError(f"no substitution available for {name}")
