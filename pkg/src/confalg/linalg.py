"""Exact linear algebra over fields of Scalars or Gaussian rationals.

Matrices are plain lists of rows.  Entries may be :class:`Scalar` or
:class:`GaussRat`; the routines only use field operations and truthiness.
Reduced row echelon form is unique, so every result below (particular
solutions with free variables set to zero, nullspace bases) is canonical.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import flint

from .gaussrat import GaussRat


def _size(v) -> int:
    num = getattr(v, "num", None)
    if num is None:
        return 0
    return len(num) + len(v.den) if hasattr(num, "__len__") else 0


class RowReducer:
    """Incremental Gaussian elimination.

    Rows are added one at a time; each is reduced against the pivots found so
    far and kept only if something nonzero survives.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list] = []
        self.pivots: list[int] = []

    def reduce(self, row: Sequence) -> list:
        row = list(row)
        for prow, p in zip(self.rows, self.pivots):
            f = row[p]
            if f:
                for c in range(p, self.ncols):
                    if prow[c]:
                        row[c] = row[c] - f * prow[c]
        return row

    def add(self, row: Sequence) -> bool:
        if len(row) != self.ncols:
            raise ValueError(f"row of length {len(row)}, expected {self.ncols}")
        row = self.reduce(row)
        for c, v in enumerate(row):
            if v:
                inv = 1 / v
                row = [e * inv if e else e for e in row]
                self.rows.append(row)
                self.pivots.append(c)
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)

    def rref(self) -> tuple[list[list], list[int]]:
        order = sorted(range(len(self.rows)), key=lambda k: self.pivots[k])
        rows = [list(self.rows[k]) for k in order]
        pivots = [self.pivots[k] for k in order]
        for i in range(len(rows) - 1, -1, -1):
            p = pivots[i]
            for k in range(i):
                f = rows[k][p]
                if f:
                    rows[k] = [a - f * b if b else a for a, b in zip(rows[k], rows[i])]
        return rows, pivots


def rref(matrix: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list], list[int]]:
    """Reduced row echelon form: (nonzero rows, pivot columns)."""
    rows = [list(r) for r in matrix]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        best = None
        for k in range(r, len(rows)):
            v = rows[k][c]
            if v and (best is None or _size(v) < _size(rows[best][c])):
                best = k
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [e * inv if e else e for e in rows[r]]
        for k in range(len(rows)):
            if k != r:
                f = rows[k][c]
                if f:
                    rows[k] = [a - f * b if b else a for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(matrix: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(matrix, ncols)[1])


def nullspace(matrix: Sequence[Sequence], ncols: int | None = None, one=1, zero=0) -> list[list]:
    """Canonical nullspace basis: one vector per free column."""
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    rows, pivots = rref(matrix, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(rows, pivots):
            if row[f]:
                v[p] = -row[f]
        basis.append(v)
    return basis


def solve(matrix: Sequence[Sequence], rhs: Sequence, zero=0):
    """Particular solution of A x = b with free variables zero, or None."""
    ncols = len(matrix[0]) if matrix else 0
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rows, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [zero] * ncols
    for row, p in zip(rows, pivots):
        x[p] = row[ncols]
    return x


def det(matrix: Sequence[Sequence]):
    n = len(matrix)
    rows = [list(r) for r in matrix]
    result = 1
    for c in range(n):
        piv = next((k for k in range(c, n) if rows[k][c]), None)
        if piv is None:
            return 0 * rows[0][0] if n else 1
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            result = -result
        p = rows[c][c]
        result = result * p
        inv = 1 / p
        for k in range(c + 1, n):
            f = rows[k][c]
            if f:
                f = f * inv
                rows[k] = [a - f * b if b else a for a, b in zip(rows[k], rows[c])]
    return result


def inverse(matrix: Sequence[Sequence], one=1, zero=0) -> list[list]:
    n = len(matrix)
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(matrix)]
    rows, pivots = rref(aug, n)
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in rows]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence], zero=0) -> list[list]:
    bt = list(zip(*b))
    out = []
    for row in a:
        out_row = []
        for col in bt:
            acc = zero
            for u, v in zip(row, col):
                if u and v:
                    acc = acc + u * v
            out_row.append(acc)
        out.append(out_row)
    return out


def identity(n: int, one=1, zero=0) -> list[list]:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


# -- fast path for constant Gaussian-rational matrices ---------------------

def _fmpq(q: Fraction):
    return flint.fmpq(q.numerator, q.denominator)


def _realify(rows: Sequence[Sequence[GaussRat]], ncols: int):
    # A = Ar + i Ai acting on u + i v  <->  [[Ar, -Ai], [Ai, Ar]] acting on (u, v)
    n = len(rows)
    m = flint.fmpq_mat(2 * n, 2 * ncols)
    for i, row in enumerate(rows):
        for j, g in enumerate(row):
            if g.re:
                q = _fmpq(g.re)
                m[i, j] = q
                m[n + i, ncols + j] = q
            if g.im:
                q = _fmpq(g.im)
                m[i, ncols + j] = -q
                m[n + i, j] = q
    return m


def _gauss_from(q) -> Fraction:
    return Fraction(int(q.p), int(q.q))


def gaussian_nullspace_span(rows: Sequence[Sequence[GaussRat]], ncols: int) -> list[list[GaussRat]]:
    """Vectors spanning (over Q(i)) the nullspace of a Gaussian-rational matrix.

    Works on the realification with flint's rational matrices; the result may
    contain up to twice as many vectors as the complex nullspace dimension.
    """
    if not rows:
        return [[GaussRat(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    m = _realify(rows, ncols)
    red, rk = m.rref()
    n2 = 2 * ncols
    pivots = []
    r = 0
    for c in range(n2):
        if r < rk and red[r, c] != 0:
            pivots.append(c)
            r += 1
    pivset = set(pivots)
    out = []
    for f in range(n2):
        if f in pivset:
            continue
        v = [Fraction(0)] * n2
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            e = red[i, f]
            if e != 0:
                v[p] = -_gauss_from(e)
        out.append([GaussRat(v[j], v[ncols + j]) for j in range(ncols)])
    return out


def gaussian_rank(rows: Sequence[Sequence[GaussRat]], ncols: int) -> int:
    if not rows:
        return 0
    return _realify(rows, ncols).rank() // 2


# -- coefficient matching for function spaces ------------------------------

def coefficient_rows(columns, target=None, names=None, return_keys=False):
    """Linear equations for ``sum_k c_k columns[k] = target``.

    Each column (and the target) maps keys to Scalars.  The unknowns c_k may
    depend on any variables outside ``names``; the equations match
    coefficients of monomials in ``names`` after clearing a common
    denominator.  ``names=None`` uses every free variable of the data.
    Returns ``(rows, rhs)`` with Scalar entries; with ``return_keys`` also the
    row keys ``(column key, monomial)`` and the common denominator.
    """
    from .exactalg import ZERO, Scalar, _lcm

    target = target or {}
    entries = [v for col in columns for v in col.values()] + list(target.values())
    if names is None:
        found = set()
        for v in entries:
            found |= v.free_variables()
        names = sorted(found)
    names = list(names)
    den = None
    for v in entries:
        den = v.den if den is None else _lcm(den, v.den)
    if den is None:
        return ([], [], [], None) if return_keys else ([], [])
    common = Scalar(den, Scalar.coerce(1).den)

    def expand(col):
        out = {}
        for key, v in col.items():
            for mono, c in (v * common).coefficients(names).items():
                out[(key, mono)] = c
        return out

    expanded = [expand(col) for col in columns]
    texp = expand(target)
    keys = set(texp)
    for e in expanded:
        keys |= set(e)
    keys = sorted(keys, key=repr)
    rows = [[e.get(k, ZERO) for e in expanded] for k in keys]
    rhs = [texp.get(k, ZERO) for k in keys]
    if return_keys:
        return rows, rhs, keys, common
    return rows, rhs


def to_gauss(rows):
    """Convert a matrix of constant Scalars to GaussRat entries."""
    out = []
    for row in rows:
        conv = []
        for v in row:
            c = v.constant_value()
            if c is None:
                raise ValueError(f"non-constant entry {v}")
            conv.append(c)
        out.append(conv)
    return out
