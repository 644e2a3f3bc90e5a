"""Differential operators with rational-function coefficients.

An operator is a finite sum ``f_alpha * d^alpha`` with coefficients written to
the left of the derivative monomials.  Composition uses the Leibniz rule, so
the stored form is unique and equality is term-wise equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping

from .exactalg import ONE, ZERO, Scalar, _CTX, _reduce_i, var_index
from . import linalg


class CoordinateMismatch(ValueError):
    pass


def _key(alpha):
    return (sum(alpha), alpha)


class DiffOperator:
    """Immutable operator on a declared coordinate list."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Iterable[str], terms: Mapping[tuple[int, ...], object] | None = None):
        coords = tuple(coords)
        for c in coords:
            var_index(c)
        self.coords = coords
        clean = {}
        for alpha, coef in (terms or {}).items():
            if len(alpha) != len(coords):
                raise ValueError(f"multi-index {alpha} does not match coordinates {coords}")
            coef = Scalar.coerce(coef)
            if coef:
                clean[tuple(alpha)] = coef
        self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, coords) -> "DiffOperator":
        return cls(coords)

    @classmethod
    def identity(cls, coords) -> "DiffOperator":
        coords = tuple(coords)
        return cls(coords, {(0,) * len(coords): ONE})

    @classmethod
    def function(cls, coords, f) -> "DiffOperator":
        coords = tuple(coords)
        return cls(coords, {(0,) * len(coords): f})

    @classmethod
    def partial(cls, coords, name: str, power: int = 1) -> "DiffOperator":
        coords = tuple(coords)
        alpha = [0] * len(coords)
        alpha[coords.index(name)] = power
        return cls(coords, {tuple(alpha): ONE})

    @classmethod
    def vector_field(cls, coords, components: Mapping[str, object]) -> "DiffOperator":
        coords = tuple(coords)
        terms = {}
        for name, f in components.items():
            alpha = [0] * len(coords)
            alpha[coords.index(name)] = 1
            terms[tuple(alpha)] = f
        return cls(coords, terms)

    # -- inspection ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def coefficient(self, alpha) -> Scalar:
        return self.terms.get(tuple(alpha), ZERO)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: _key(kv[0]), reverse=True)

    def map_coefficients(self, fn) -> "DiffOperator":
        return DiffOperator(self.coords, {a: fn(c) for a, c in self.terms.items()})

    def subs(self, mapping) -> "DiffOperator":
        for name in mapping:
            if name in self.coords:
                raise ValueError(f"cannot substitute coordinate {name!r}; use change_coordinates")
        return self.map_coefficients(lambda c: c.subs(mapping))

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "DiffOperator"):
        if self.coords != other.coords:
            raise CoordinateMismatch(f"{self.coords} vs {other.coords}")

    def __add__(self, other):
        if not isinstance(other, DiffOperator):
            other = DiffOperator.function(self.coords, other)
        self._check(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms[a] + c if a in terms else c
        return DiffOperator(self.coords, terms)

    __radd__ = __add__

    def __neg__(self):
        return DiffOperator(self.coords, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffOperator):
            other = DiffOperator.function(self.coords, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, f) -> "DiffOperator":
        """Left multiplication by a function."""
        f = Scalar.coerce(f)
        return DiffOperator(self.coords, {a: f * c for a, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, DiffOperator):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = DiffOperator.identity(self.coords)
        for _ in range(k):
            out = compose(out, self)
        return out

    def apply(self, f) -> Scalar:
        """Act on a function."""
        f = Scalar.coerce(f)
        out = ZERO
        for alpha, c in self.terms.items():
            g = f
            for name, k in zip(self.coords, alpha):
                for _ in range(k):
                    g = g.diff(name)
            out = out + c * g
        return out

    # -- comparison and text ------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.coords == other.coords and self.terms == other.terms

    def __hash__(self):
        return hash((self.coords, frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in self.sorted_terms():
            mono = "*".join(
                f"D{name}" + (f"^{k}" if k > 1 else "")
                for name, k in zip(self.coords, alpha) if k
            )
            if not mono:
                parts.append(f"({c})")
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"({c})*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOperator({self.coords}, {str(self)!r})"


def compose(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    """Operator product ``a o b`` with Leibniz expansion."""
    a._check(b)
    coords = a.coords
    n = len(coords)
    terms: dict[tuple[int, ...], Scalar] = {}
    deriv_cache: dict[tuple, Scalar] = {}

    def derivative(g_alpha, g, gamma):
        key = (g_alpha, gamma)
        if key not in deriv_cache:
            h = g
            for name, k in zip(coords, gamma):
                for _ in range(k):
                    h = h.diff(name)
            deriv_cache[key] = h
        return deriv_cache[key]

    for alpha, f in a.terms.items():
        gammas = _sub_indices(alpha)
        for beta, g in b.terms.items():
            for gamma, mult in gammas:
                dg = derivative(beta, g, gamma)
                if not dg:
                    continue
                idx = tuple(alpha[i] - gamma[i] + beta[i] for i in range(n))
                c = f * dg
                if mult != 1:
                    c = c * mult
                terms[idx] = terms[idx] + c if idx in terms else c
    return DiffOperator(coords, terms)


def _sub_indices(alpha):
    out = [((), 1)]
    for k in alpha:
        out = [(g + (j,), m * comb(k, j)) for g, m in out for j in range(k + 1)]
    return out


def commutator(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    return compose(a, b) - compose(b, a)


def anticommutator(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    return compose(a, b) + compose(b, a)


def change_coordinates(op: DiffOperator, new_coords, old_in_new: Mapping[str, object]) -> DiffOperator:
    """Rewrite ``op`` in new coordinates given the old ones as functions of the new."""
    new_coords = tuple(new_coords)
    old = op.coords
    if set(old_in_new) != set(old):
        raise ValueError("every old coordinate needs an expression in the new ones")
    exprs = {k: Scalar.coerce(v) for k, v in old_in_new.items()}
    # jac[i][j] = d old_i / d new_j ; d/d new_j = sum_i jac[i][j] d/d old_i
    jac = [[exprs[o].diff(nc) for nc in new_coords] for o in old]
    jac_t = [list(r) for r in zip(*jac)]
    inv = linalg.inverse(jac_t, ONE, ZERO)
    partials = []
    for i in range(len(old)):
        partials.append(DiffOperator.vector_field(
            new_coords, {nc: inv[i][j] for j, nc in enumerate(new_coords)}))
    out = DiffOperator.zero(new_coords)
    for alpha, c in op.terms.items():
        term = DiffOperator.function(new_coords, c.subs(exprs))
        for p, k in zip(partials, alpha):
            for _ in range(k):
                term = compose(term, p)
        out = out + term
    return out


# -- constraint ideals ------------------------------------------------------

_S1, _S2, _S3 = (Scalar.var(n) for n in ("s1", "s2", "s3"))
SPHERE_POLY = (_S1 * _S1 + _S2 * _S2 + _S3 * _S3 - 1).num
_S3_INDEX = var_index("s3")


def sphere_reduce_scalar(f: Scalar) -> Scalar:
    """Normal form of a function restricted to s1^2+s2^2+s3^2 = 1.

    The result has an s3-free denominator and numerator of degree <= 1 in s3.
    """
    f = Scalar.coerce(f)
    num, den = f.num, f.den
    if num.degrees()[_S3_INDEX] < 2 and den.degrees()[_S3_INDEX] < 1:
        return f
    num = num % SPHERE_POLY
    den = den % SPHERE_POLY
    if den.is_zero():
        raise ZeroDivisionError("denominator vanishes on the sphere")
    if den.degrees()[_S3_INDEX] >= 1:
        d0, d1 = _split_s3(den)
        s3 = _S3.num
        num = _reduce_i(num * (d0 - d1 * s3)) % SPHERE_POLY
        den = (d0 * d0 - d1 * d1 * s3 * s3) % SPHERE_POLY
        if den.is_zero():
            raise ZeroDivisionError("denominator vanishes on the sphere")
    return Scalar._make(num, den)


def _split_s3(p):
    a, b = {}, {}
    k = _S3_INDEX
    for exp, c in p.to_dict().items():
        if exp[k]:
            e = list(exp)
            e[k] -= 1
            b[tuple(e)] = c
        else:
            a[exp] = c
    return _CTX.from_dict(a), _CTX.from_dict(b)


@dataclass(frozen=True)
class ConstraintIdeal:
    kind: str  # "sphere" | "hamiltonian" | "none"
    hamiltonian: DiffOperator | None = None
    eliminate: str | None = None

    @classmethod
    def sphere(cls) -> "ConstraintIdeal":
        return cls("sphere")

    @classmethod
    def none(cls) -> "ConstraintIdeal":
        return cls("none")

    @classmethod
    def left_ideal(cls, h: DiffOperator, eliminate: str | None = None) -> "ConstraintIdeal":
        """Left ideal generated by ``h``; ``h`` must be monic in d_eliminate^2."""
        eliminate = eliminate or h.coords[-1]
        k = h.coords.index(eliminate)
        lead = tuple(2 if i == k else 0 for i in range(len(h.coords)))
        if h.coefficient(lead) != ONE:
            raise ValueError(f"operator is not monic in D{eliminate}^2")
        for alpha in h.terms:
            if alpha != lead and (alpha[k] >= 2 or sum(alpha) > 2):
                raise ValueError("operator must be second order with a single D^2 term in the eliminated direction")
        return cls("hamiltonian", h, eliminate)


def reduce(op: DiffOperator, ideal: ConstraintIdeal) -> DiffOperator:
    if ideal.kind == "none":
        return op
    if ideal.kind == "sphere":
        return op.map_coefficients(sphere_reduce_scalar)
    if ideal.kind == "hamiltonian":
        op._check(ideal.hamiltonian)
        return left_ideal_quotient(op, ideal)[1]
    raise ValueError(f"unknown constraint kind {ideal.kind!r}")


def left_ideal_quotient(op: DiffOperator, ideal: ConstraintIdeal) -> tuple[DiffOperator, DiffOperator]:
    """(Q, R) with op = Q o H + R and R the normal form."""
    h = ideal.hamiltonian
    k = h.coords.index(ideal.eliminate)
    lead = tuple(2 if i == k else 0 for i in range(len(h.coords)))
    rest = h - DiffOperator(h.coords, {lead: ONE})
    terms = dict(op.terms)
    quotient: dict[tuple[int, ...], Scalar] = {}
    while True:
        tall = [a for a in terms if a[k] >= 2]
        if not tall:
            return DiffOperator(op.coords, quotient), DiffOperator(op.coords, terms)
        alpha = max(tall, key=lambda a: (a[k], sum(a), a))
        f = terms.pop(alpha)
        lower = tuple(a - 2 if i == k else a for i, a in enumerate(alpha))
        quotient[lower] = quotient[lower] + f if lower in quotient else f
        correction = compose(DiffOperator(op.coords, {lower: f}), rest)
        for a, c in correction.terms.items():
            v = terms[a] - c if a in terms else -c
            if v:
                terms[a] = v
            else:
                terms.pop(a, None)
