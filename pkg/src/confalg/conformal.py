"""The so(4,C) conformal algebra of the flat 2D Laplacian and the null-cone chart.

Tetraspherical coordinates ``x1..x4`` live on the cone ``sum x_j^2 = 0``.  We
parametrize it rationally by ``(x, y, s)``::

    x1 = -x s,  x2 = -y s,  x3 = s (1 - x^2 - y^2)/2,  x4 = -i s (1 + x^2 + y^2)/2

so that ``s = x3 + i x4`` and ``x = -x1/s``, ``y = -x2/s``.  The rotation
generators ``L_jk`` are realized as flat vector fields through the linear
dictionary with ``P1, P2, J, D, K1, K2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import linalg
from .exactalg import I, ZERO, Scalar, var
from .gaussrat import GaussRat
from .liecontract import LieAlgebraSC
from .weyl import DiffOperator, commutator

FLAT = ("x", "y")
TETRA = ("x1", "x2", "x3", "x4")
FLAT_NAMES = ("P1", "P2", "J", "D", "K1", "K2")
SO4_NAMES = ("L12", "L13", "L14", "L23", "L24", "L34")

_i = GaussRat(0, 1)
# flat_k = sum_j DICTIONARY[k][j] * L_j, columns in SO4_NAMES order
DICTIONARY: tuple[tuple[GaussRat, ...], ...] = tuple(
    tuple(GaussRat(v) for v in row) for row in (
        (0, 1, _i, 0, 0, 0),      # P1 = L13 + i L14
        (0, 0, 0, 1, _i, 0),      # P2 = L23 + i L24
        (1, 0, 0, 0, 0, 0),       # J  = L12
        (0, 0, 0, 0, 0, _i),      # D  = i L34
        (0, 1, -_i, 0, 0, 0),     # K1 = L13 - i L14
        (0, 0, 0, 1, -_i, 0),     # K2 = L23 - i L24
    )
)


class OutsideSpan(ValueError):
    pass


class NotHomogeneous(ValueError):
    pass


@lru_cache(maxsize=None)
def flat_generators(coords: tuple[str, str] = FLAT) -> dict[str, DiffOperator]:
    cx, cy = coords
    x, y = var(cx), var(cy)
    vf = lambda fx, fy: DiffOperator.vector_field(coords, {cx: fx, cy: fy})
    return {
        "P1": vf(1, 0),
        "P2": vf(0, 1),
        "J": vf(-y, x),
        "D": vf(x, y),
        "K1": vf(x * x - y * y, 2 * x * y),
        "K2": vf(2 * x * y, y * y - x * x),
    }


@lru_cache(maxsize=None)
def dictionary_inverse() -> tuple[tuple[GaussRat, ...], ...]:
    inv = linalg.inverse([list(r) for r in DICTIONARY], GaussRat(1), GaussRat(0))
    return tuple(tuple(r) for r in inv)


@lru_cache(maxsize=None)
def so4_operators(coords: tuple[str, str] = FLAT) -> dict[str, DiffOperator]:
    """Each L_jk as a flat operator, via the inverse dictionary."""
    flat = flat_generators(coords)
    inv = dictionary_inverse()
    out = {}
    for j, name in enumerate(SO4_NAMES):
        op = DiffOperator.zero(coords)
        for k, fname in enumerate(FLAT_NAMES):
            if inv[j][k]:
                op = op + flat[fname].scale(Scalar.coerce(inv[j][k]))
        out[name] = op
    return out


def express_in_span(op: DiffOperator, basis: list[DiffOperator]) -> list[Scalar]:
    """Constant coefficients c with op = sum c_k basis_k, or OutsideSpan."""
    rows, rhs = linalg.coefficient_rows(
        [dict(b.terms) for b in basis], dict(op.terms), list(FLAT))
    sol = linalg.solve(rows, rhs, ZERO)
    if sol is None:
        raise OutsideSpan(f"{op} is not in the span")
    return sol


@lru_cache(maxsize=None)
def so4_structure() -> LieAlgebraSC:
    ops = so4_operators()
    basis = [ops[n] for n in SO4_NAMES]
    brackets = {}
    for a in range(6):
        for b in range(a + 1, 6):
            coeffs = express_in_span(commutator(basis[a], basis[b]), basis)
            brackets[(SO4_NAMES[a], SO4_NAMES[b])] = {
                SO4_NAMES[k]: c for k, c in enumerate(coeffs) if c}
    return LieAlgebraSC.from_brackets(SO4_NAMES, brackets)


@lru_cache(maxsize=None)
def flat_structure() -> LieAlgebraSC:
    """Structure constants of P1..K2 themselves (15 commutators)."""
    flat = flat_generators()
    basis = [flat[n] for n in FLAT_NAMES]
    brackets = {}
    for a in range(6):
        for b in range(a + 1, 6):
            coeffs = express_in_span(commutator(basis[a], basis[b]), basis)
            brackets[(FLAT_NAMES[a], FLAT_NAMES[b])] = {
                FLAT_NAMES[k]: c for k, c in enumerate(coeffs) if c}
    return LieAlgebraSC.from_brackets(FLAT_NAMES, brackets)


def dictionary_round_trip() -> bool:
    """flat = DICTIONARY . L reproduces P1..K2 exactly."""
    ops = so4_operators()
    flat = flat_generators()
    for k, fname in enumerate(FLAT_NAMES):
        op = DiffOperator.zero(FLAT)
        for j, name in enumerate(SO4_NAMES):
            if DICTIONARY[k][j]:
                op = op + ops[name].scale(Scalar.coerce(DICTIONARY[k][j]))
        if op != flat[fname]:
            return False
    return True


# -- null-cone chart --------------------------------------------------------

@dataclass(frozen=True)
class ConeChart:
    """(x, y, s) -> (x1, x2, x3, x4) parametrizing the null cone."""

    x: str = "x"
    y: str = "y"
    s: str = "s"

    def coordinates(self) -> dict[str, Scalar]:
        x, y, s = var(self.x), var(self.y), var(self.s)
        r2 = x * x + y * y
        return {
            "x1": -x * s,
            "x2": -y * s,
            "x3": s * (1 - r2) / 2,
            "x4": -I * s * (1 + r2) / 2,
        }

    def identities(self) -> dict[str, bool]:
        c = self.coordinates()
        x, y, s = var(self.x), var(self.y), var(self.s)
        cone = c["x1"] ** 2 + c["x2"] ** 2 + c["x3"] ** 2 + c["x4"] ** 2
        light = c["x3"] + I * c["x4"]
        return {
            "null cone": cone.is_zero(),
            "x3 + i x4 = s": light == s,
            "x = -x1/(x3 + i x4)": -c["x1"] / light == x,
            "y = -x2/(x3 + i x4)": -c["x2"] / light == y,
        }


CHART = ConeChart()
PRIMED_CHART = ConeChart("xp", "yp", "sp")


def tetra_eval(f, homogeneity: int, chart: ConeChart = CHART) -> tuple[Scalar, Scalar]:
    """Pull ``f(x1..x4)`` back through the chart.

    Returns ``(full, g)`` where ``full = s**homogeneity * g`` and ``g`` depends on
    (x, y) only.
    """
    f = Scalar.coerce(f)
    full = f.subs(chart.coordinates())
    g = full * var(chart.s) ** (-homogeneity)
    if chart.s in g.free_variables():
        raise NotHomogeneous(f"{f} is not homogeneous of degree {homogeneity} on the cone")
    return full, g


def cartesian(f, chart: ConeChart = CHART) -> Scalar:
    """Flat-space potential s^2 * V for a degree -2 cone potential V."""
    return tetra_eval(f, -2, chart)[1]
