"""Recognizing potential spaces up to signed permutations of x1..x4.

A family placed differently on the null cone (coordinates permuted, signs
flipped) is still the same conformal class.  Recognition evaluates functions
at fixed chart points in a prime field containing a square root of -1, uses
the reduced row echelon form of the evaluation matrix as a lookup key, and
then certifies every candidate with exact linear algebra over Q(i)(x, y).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .conformal import cartesian
from .exactalg import _NGENS, Scalar, var, var_index
from .potentials import FAMILY_NAMES, get_family, span_coefficients

PRIME = 4611686018427387817
SQRT_M1 = 4490822397581186023
assert SQRT_M1 * SQRT_M1 % PRIME == PRIME - 1

Orientation = tuple[tuple[int, ...], tuple[int, ...]]
IDENTITY: Orientation = ((0, 1, 2, 3), (1, 1, 1, 1))

PERMUTATION_ORIENTATIONS: tuple[Orientation, ...] = tuple(
    (perm, (1, 1, 1, 1)) for perm in itertools.permutations(range(4)))
ORIENTATIONS: tuple[Orientation, ...] = tuple(
    (perm, signs)
    for perm in itertools.permutations(range(4))
    for signs in itertools.product((1, -1), repeat=4)
)

_TETRA_IDX = [var_index(f"x{j}") for j in range(1, 5)]
_X, _Y = var_index("x"), var_index("y")

# small fixed chart points (x, y)
_POINTS = [(Fraction(a, b), Fraction(c, d)) for a, b, c, d in (
    (1, 3, 2, 5), (-3, 7, 5, 2), (7, 4, -1, 6), (2, 9, 9, 11),
    (-5, 3, -4, 7), (11, 5, 3, 13), (-2, 11, 8, 3), (13, 6, -7, 9),
)]


def orientation_label(o: Orientation) -> str:
    perm, signs = o
    return "(" + ", ".join(("-" if s < 0 else "") + f"x{p + 1}" for p, s in zip(perm, signs)) + ")"


def orient(f, o: Orientation) -> Scalar:
    """``f(sign_1 x_perm(1), ..., sign_4 x_perm(4))``."""
    if o == IDENTITY:
        return Scalar.coerce(f)
    perm, signs = o
    return Scalar.coerce(f).subs({f"x{j + 1}": var(f"x{perm[j] + 1}") * signs[j] for j in range(4)})


def _mod(q: Fraction) -> int:
    return q.numerator % PRIME * pow(q.denominator % PRIME, -1, PRIME) % PRIME


class CompiledModP:
    """A Scalar compiled for evaluation modulo PRIME."""

    def __init__(self, f: Scalar):
        self.num = self._compile(f.num)
        self.den = self._compile(f.den)

    @staticmethod
    def _compile(p):
        terms = []
        for exp, c in p.to_dict().items():
            coef = _mod(Fraction(int(c.p), int(c.q)))
            if exp[0] % 4 == 1:
                coef = coef * SQRT_M1 % PRIME
            elif exp[0]:
                raise ValueError("unreduced imaginary unit")
            factors = tuple((k, e) for k, e in enumerate(exp) if e and k)
            terms.append((coef, factors))
        return terms

    @staticmethod
    def _eval(terms, point):
        acc = 0
        for coef, factors in terms:
            v = coef
            for k, e in factors:
                v = v * pow(point[k], e, PRIME) % PRIME
            acc += v
        return acc % PRIME

    def __call__(self, point) -> int:
        d = self._eval(self.den, point)
        if d == 0:
            raise ZeroDivisionError("evaluation point hits a pole")
        return self._eval(self.num, point) * pow(d, -1, PRIME) % PRIME


def _tetra_points():
    pts = []
    for x, y in _POINTS:
        xm, ym = _mod(x), _mod(y)
        r2 = (xm * xm + ym * ym) % PRIME
        half = pow(2, -1, PRIME)
        pts.append(((-xm) % PRIME, (-ym) % PRIME, (1 - r2) * half % PRIME,
                    (-SQRT_M1 * (1 + r2) * half) % PRIME))
    return pts


_TETRA_POINTS = _tetra_points()


def _point_vector(values: dict[int, int]) -> list[int]:
    v = [0] * _NGENS
    for k, val in values.items():
        v[k] = val
    return v


def _rref_mod(rows: list[list[int]]) -> tuple[tuple[int, ...], ...]:
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, PRIME)
        rows[r] = [v * inv % PRIME for v in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c]:
                f = rows[k][c]
                rows[k] = [(a - f * b) % PRIME for a, b in zip(rows[k], rows[r])]
        r += 1
    return tuple(tuple(row) for row in rows[:r])


def _reduce_mod(vec, basis) -> bool:
    """True when vec lies in the row space of an RREF basis."""
    v = list(vec)
    for row in basis:
        p = next(c for c, e in enumerate(row) if e)
        if v[p]:
            f = v[p]
            v = [(a - f * b) % PRIME for a, b in zip(v, row)]
    return not any(v)


def _oriented_rows(compiled, o: Orientation) -> list[list[int]]:
    perm, signs = o
    rows = []
    for f in compiled:
        row = []
        for pt in _TETRA_POINTS:
            values = {_TETRA_IDX[j]: (signs[j] * pt[perm[j]]) % PRIME for j in range(4)}
            row.append(f(_point_vector(values)))
        rows.append(row)
    return rows


def tetra_fingerprint_rows(functions: Sequence[Scalar], o: Orientation = IDENTITY) -> list[list[int]]:
    return _oriented_rows([CompiledModP(Scalar.coerce(f)) for f in functions], o)


def cartesian_fingerprint_rows(functions: Sequence[Scalar]) -> list[list[int]]:
    rows = []
    for f in functions:
        comp = CompiledModP(Scalar.coerce(f))
        rows.append([comp(_point_vector({_X: _mod(x), _Y: _mod(y)})) for x, y in _POINTS])
    return rows


def space_key(rows) -> tuple:
    return _rref_mod(rows)


@dataclass(frozen=True)
class OrbitEntry:
    family: str
    orientation: Orientation
    key: tuple


@lru_cache(maxsize=None)
def family_orbits(orientations: tuple[Orientation, ...] = ORIENTATIONS) -> tuple[OrbitEntry, ...]:
    """All (family, orientation) placements, one entry per distinct span."""
    entries = []
    for name in FAMILY_NAMES:
        fam = get_family(name)
        seen = set()
        compiled = [CompiledModP(f) for f in fam.tetra_basis]
        for o in orientations:
            rows = _oriented_rows(compiled, o)
            key = _rref_mod(rows)
            if key in seen:
                continue
            seen.add(key)
            entries.append(OrbitEntry(name, o, key))
    return tuple(entries)


@lru_cache(maxsize=None)
def oriented_cartesian_basis(family: str, o: Orientation) -> tuple[Scalar, ...]:
    fam = get_family(family)
    if o == IDENTITY:
        return fam.cartesian_basis
    return tuple(cartesian(orient(f, o)) for f in fam.tetra_basis)


@dataclass(frozen=True)
class Identification:
    family: str
    orientation: Orientation
    coefficients: tuple[tuple[Scalar, ...], ...]

    @property
    def label(self) -> str:
        return orientation_label(self.orientation)


def identify_space(functions: Sequence[Scalar], family: str | None = None) -> list[Identification]:
    """Certified placements whose span equals span(functions) (Cartesian x, y)."""
    key = space_key(cartesian_fingerprint_rows(functions))
    out = []
    for entry in family_orbits():
        if family is not None and entry.family != family:
            continue
        if entry.key != key:
            continue
        ident = certify(functions, entry.family, entry.orientation)
        if ident is not None:
            out.append(ident)
    return out


def certify(functions: Sequence[Scalar], family: str, o: Orientation) -> Identification | None:
    basis = oriented_cartesian_basis(family, o)
    coeffs = []
    for g in functions:
        c = span_coefficients(g, basis)
        if c is None:
            return None
        coeffs.append(tuple(c))
    return Identification(family, o, tuple(coeffs))


def identify_function(g: Scalar, names: Sequence[str] = ("x", "y")) -> Identification | None:
    """First placement (family order, then orientation order) containing g.

    ``g`` may carry parameter symbols; it is fingerprinted coefficient-wise.
    """
    g = Scalar.coerce(g)
    pieces = _parameter_pieces(g, names)
    rows = cartesian_fingerprint_rows(pieces)
    for entry in family_orbits():
        if all(_reduce_mod(r, entry.key) for r in rows):
            ident = certify([g], entry.family, entry.orientation)
            if ident is not None:
                return ident
    return None


def _parameter_pieces(g: Scalar, names: Sequence[str]) -> list[Scalar]:
    """Split g = sum_m m(params) g_m(x, y) into its (x, y) functions g_m."""
    params = sorted(g.free_variables() - set(names))
    if not params:
        return [g]
    den = g.denominator()
    if any(p in den.free_variables() for p in params):
        raise ValueError("parameters in the denominator are not supported")
    num = g.numerator().coefficients(params)
    return [c / den for c in num.values()]
