"""Lie algebras by structure constants and their epsilon-family contractions.

Structure constants are stored densely: ``c[i][j][k]`` is the coefficient of
basis element ``k`` in ``[X_i, X_j]``.  A contraction takes a basis change
``X'_i = sum_a M[i][a](eps) X_a`` and sends every transformed constant to its
eps -> 0 limit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from . import linalg
from .exactalg import ONE, ZERO, PoleAtZero, Scalar, eps_limit


class ContractionUndefined(ArithmeticError):
    def __init__(self, triple: tuple[str, str, str], pole: PoleAtZero):
        self.triple = triple
        self.pole = pole
        i, j, k = triple
        super().__init__(f"[{i}, {j}] component {k}: {pole}")


@dataclass(frozen=True)
class JacobiReport:
    passed: bool
    counterexample: tuple[str, str, str] | None = None
    residual: list[Scalar] | None = None


class LieAlgebraSC:
    def __init__(self, basis_names: Sequence[str], c):
        self.basis_names = list(basis_names)
        self.dim = len(self.basis_names)
        n = self.dim
        self.c = [[[Scalar.coerce(c[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.c[i][j][k] != -self.c[j][i][k]:
                        a, b = self.basis_names[i], self.basis_names[j]
                        raise ValueError(f"structure constants not antisymmetric at [{a}, {b}]")

    @classmethod
    def from_brackets(cls, basis_names: Sequence[str], brackets: dict) -> "LieAlgebraSC":
        """Build from ``{(A, B): {C: coef}}``; the reversed brackets are implied."""
        names = list(basis_names)
        index = {nm: k for k, nm in enumerate(names)}
        n = len(names)
        c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for (a, b), combo in brackets.items():
            i, j = index[a], index[b]
            for name, coef in combo.items():
                v = Scalar.coerce(coef)
                c[i][j][index[name]] = v
                c[j][i][index[name]] = -v
        return cls(names, c)

    def index(self, name: str) -> int:
        return self.basis_names.index(name)

    def bracket(self, u: Sequence, v: Sequence) -> list[Scalar]:
        n = self.dim
        out = [ZERO] * n
        for i in range(n):
            if not u[i]:
                continue
            for j in range(n):
                if not v[j]:
                    continue
                w = u[i] * v[j]
                for k in range(n):
                    if self.c[i][j][k]:
                        out[k] = out[k] + w * self.c[i][j][k]
        return out

    def bracket_of(self, a: str, b: str) -> dict[str, Scalar]:
        i, j = self.index(a), self.index(b)
        return {self.basis_names[k]: v for k, v in enumerate(self.c[i][j]) if v}

    def unit(self, k: int) -> list[Scalar]:
        return [ONE if i == k else ZERO for i in range(self.dim)]

    def __eq__(self, other):
        if not isinstance(other, LieAlgebraSC):
            return NotImplemented
        return self.basis_names == other.basis_names and self.c == other.c

    def to_json(self) -> dict:
        brackets = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                combo = {self.basis_names[k]: str(v) for k, v in enumerate(self.c[i][j]) if v}
                if combo:
                    brackets.append([self.basis_names[i], self.basis_names[j], combo])
        return {"schema": "lie-algebra/1", "basis": self.basis_names, "brackets": brackets}

    @classmethod
    def from_json(cls, data: dict) -> "LieAlgebraSC":
        if data.get("schema") != "lie-algebra/1":
            raise ValueError("not a lie-algebra/1 document")
        brackets = {(a, b): combo for a, b, combo in data["brackets"]}
        return cls.from_brackets(data["basis"], brackets)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


class EpsBasisMap:
    """Basis change ``X'_i = sum_a matrix[i][a] X_a`` with a validated inverse."""

    def __init__(self, basis_names: Sequence[str], matrix, inverse_matrix=None):
        self.basis_names = list(basis_names)
        n = len(self.basis_names)
        self.matrix = [[Scalar.coerce(e) for e in row] for row in matrix]
        if len(self.matrix) != n or any(len(r) != n for r in self.matrix):
            raise ValueError("matrix shape does not match the basis")
        if inverse_matrix is None:
            inverse_matrix = linalg.inverse(self.matrix, ONE, ZERO)
        self.inverse_matrix = [[Scalar.coerce(e) for e in row] for row in inverse_matrix]
        product = linalg.matmul(self.matrix, self.inverse_matrix, ZERO)
        if product != linalg.identity(n, ONE, ZERO):
            raise ValueError("inverse_matrix is not the inverse of matrix")

    @classmethod
    def identity(cls, basis_names) -> "EpsBasisMap":
        n = len(basis_names)
        eye = linalg.identity(n, ONE, ZERO)
        return cls(basis_names, eye, eye)

    @classmethod
    def diagonal(cls, basis_names, entries) -> "EpsBasisMap":
        n = len(basis_names)
        entries = [Scalar.coerce(e) for e in entries]
        m = [[entries[i] if i == j else ZERO for j in range(n)] for i in range(n)]
        inv = [[entries[i].inverse() if i == j else ZERO for j in range(n)] for i in range(n)]
        return cls(basis_names, m, inv)

    def determinant(self) -> Scalar:
        return linalg.det(self.matrix)

    def at(self, mapping) -> list[list[Scalar]]:
        return [[e.subs(mapping) for e in row] for row in self.matrix]

    def to_json(self) -> dict:
        return {
            "schema": "eps-basis-map/1",
            "basis": self.basis_names,
            "matrix": [[str(e) for e in row] for row in self.matrix],
            "inverse": [[str(e) for e in row] for row in self.inverse_matrix],
        }

    @classmethod
    def from_json(cls, data: dict) -> "EpsBasisMap":
        if data.get("schema") != "eps-basis-map/1":
            raise ValueError("not an eps-basis-map/1 document")
        return cls(data["basis"],
                   [[Scalar.parse(e) for e in row] for row in data["matrix"]],
                   [[Scalar.parse(e) for e in row] for row in data["inverse"]])


def jacobi_check(alg: LieAlgebraSC) -> JacobiReport:
    n = alg.dim
    units = [alg.unit(k) for k in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a = alg.bracket(units[i], alg.bracket(units[j], units[k]))
                b = alg.bracket(units[j], alg.bracket(units[k], units[i]))
                c = alg.bracket(units[k], alg.bracket(units[i], units[j]))
                total = [p + q + r for p, q, r in zip(a, b, c)]
                if any(total):
                    names = alg.basis_names
                    return JacobiReport(False, (names[i], names[j], names[k]), total)
    return JacobiReport(True)


def killing_form(alg: LieAlgebraSC) -> list[list[Scalar]]:
    n = alg.dim
    c = alg.c
    # (ad X_i)_{l k} = c[i][k][l]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = ZERO
            for k in range(n):
                for l in range(n):
                    if c[i][k][l] and c[j][l][k]:
                        acc = acc + c[i][k][l] * c[j][l][k]
            row.append(acc)
        out.append(row)
    return out


def killing_rank(alg: LieAlgebraSC) -> int:
    return linalg.rank(killing_form(alg))


def transform(alg: LieAlgebraSC, t: EpsBasisMap) -> LieAlgebraSC:
    """Structure constants in the eps-dependent basis, before any limit."""
    if t.basis_names != alg.basis_names:
        raise ValueError("basis map and algebra use different basis names")
    n = alg.dim
    m, minv = t.matrix, t.inverse_matrix
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            br = alg.bracket(m[i], m[j])
            for k in range(n):
                acc = ZERO
                for d in range(n):
                    if br[d] and minv[d][k]:
                        acc = acc + br[d] * minv[d][k]
                c[i][j][k] = acc
                c[j][i][k] = -acc
    return LieAlgebraSC(alg.basis_names, c)


def contract(alg: LieAlgebraSC, t: EpsBasisMap) -> LieAlgebraSC:
    moved = transform(alg, t)
    n = alg.dim
    names = alg.basis_names
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                try:
                    v = eps_limit(moved.c[i][j][k])
                except PoleAtZero as pole:
                    raise ContractionUndefined((names[i], names[j], names[k]), pole) from None
                c[i][j][k] = v
                c[j][i][k] = -v
    return LieAlgebraSC(names, c)


def so3() -> LieAlgebraSC:
    """o(3,C) with [J2,J1]=J3, [J3,J2]=J1, [J1,J3]=J2."""
    return LieAlgebraSC.from_brackets(
        ["J1", "J2", "J3"],
        {("J2", "J1"): {"J3": 1}, ("J3", "J2"): {"J1": 1}, ("J1", "J3"): {"J2": 1}},
    )


def e2() -> LieAlgebraSC:
    """e(2,C): [J2,J1]=0, [J3,J2]=J1, [J1,J3]=J2."""
    return LieAlgebraSC.from_brackets(
        ["J1", "J2", "J3"],
        {("J3", "J2"): {"J1": 1}, ("J1", "J3"): {"J2": 1}},
    )


def abelian(names: Sequence[str]) -> LieAlgebraSC:
    return LieAlgebraSC.from_brackets(names, {})
