"""Exact rational functions over the Gaussian rationals.

A :class:`Scalar` is a quotient ``N/D`` where ``N`` lives in ``Q(i)[X]`` and
``D`` in ``Q[X]``.  Any denominator over ``Q(i)`` can be made rational by
multiplying through by its complex conjugate, and the pair is then reduced by
``gcd(Re N, Im N, D)`` with ``D`` made monic.  That representation is unique,
so equality of rational functions is equality of the stored polynomials.

Polynomials are python-flint ``fmpq_mpoly`` objects in one shared lex context.
The imaginary unit is the leading generator ``_i`` and every numerator is kept
reduced modulo ``_i**2 + 1``.  The distinguished contraction variable is
``eps``; it is an ordinary variable for arithmetic, but the only one for which
:func:`laurent_expand` and :func:`eps_limit` are defined.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import flint

from .gaussrat import GaussRat

EPS = "eps"

# s3 precedes s1, s2 so that s1^2+s2^2+s3^2-1 has leading monomial s3^2 (lex).
VARIABLE_NAMES: tuple[str, ...] = (
    "s3", "s1", "s2",
    "x", "y", "s", "xp", "yp", "sp", "z", "w", "u", "r", "t",
    "x1", "x2", "x3", "x4", "xp1", "xp2", "xp3", "xp4",
    "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4",
    "A1", "A2", "A3", "A4", "E", "H",
    EPS,
)

_GEN_NAMES = ("_i",) + VARIABLE_NAMES + ("_h",)
_CTX = flint.fmpq_mpoly_ctx.get(_GEN_NAMES, "lex")
_GENS = _CTX.gens()
_NGENS = len(_GEN_NAMES)
_INDEX = {name: k for k, name in enumerate(_GEN_NAMES)}
_I = _GENS[0]
_H = _NGENS - 1
_I2 = _I * _I + 1
_ZERO_POLY = _CTX.from_dict({})
_ONE_POLY = _ZERO_POLY + 1


class PoleAtZero(ArithmeticError):
    """Raised when an eps-limit is requested for a function with a pole at eps=0."""

    def __init__(self, order: int, where: str = ""):
        self.order = order
        self.where = where
        msg = f"pole of order {-order} at eps=0"
        super().__init__(f"{msg} ({where})" if where else msg)


class EssentialSingularity(ArithmeticError):
    pass


def var_index(name: str) -> int:
    try:
        return _INDEX[name]
    except KeyError:
        raise KeyError(f"unknown variable {name!r}") from None


def _reduce_i(p):
    if p.degrees()[0] >= 2:
        return p % _I2
    return p


def _split_i(p):
    """Return (A, B) with p = A + _i*B, both free of _i."""
    if p.degrees()[0] == 0:
        return p, _ZERO_POLY
    a, b = {}, {}
    for exp, c in p.to_dict().items():
        if exp[0]:
            b[(0,) + exp[1:]] = c
        else:
            a[exp] = c
    return _CTX.from_dict(a), _CTX.from_dict(b)


def _lcm(p, q):
    if p.is_constant():
        return q
    if q.is_constant():
        return p
    return p * (q / p.gcd(q))


class Scalar:
    """Immutable element of Q(i)(X) in canonical form."""

    __slots__ = ("num", "den", "_hash")

    variables = VARIABLE_NAMES

    def __init__(self, num, den):
        # Trusted constructor: (num, den) must already be canonical.
        self.num = num
        self.den = den
        self._hash = None

    # -- construction -------------------------------------------------
    @staticmethod
    def _make(num, den) -> "Scalar":
        if den.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        num = _reduce_i(num)
        if num.is_zero():
            return ZERO
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_constant():
                num = num / g
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num = num * inv
            den = den * inv
        return Scalar(num, den)

    @staticmethod
    def _from_complex(num, den) -> "Scalar":
        """num/den where den may involve _i."""
        den = _reduce_i(den)
        if den.degrees()[0]:
            a, b = _split_i(den)
            num = _reduce_i(num * (a - _I * b))
            den = a * a + b * b
        return Scalar._make(num, den)

    @classmethod
    def var(cls, name: str) -> "Scalar":
        return cls(_GENS[var_index(name)], _ONE_POLY)

    @classmethod
    def const(cls, re=0, im=0) -> "Scalar":
        g = GaussRat(re, im)
        return cls._make(_ZERO_POLY + flint.fmpq(g.re.numerator, g.re.denominator)
                         + _I * flint.fmpq(g.im.numerator, g.im.denominator), _ONE_POLY)

    @classmethod
    def coerce(cls, value) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, int):
            return cls(_ZERO_POLY + value, _ONE_POLY) if value else ZERO
        if isinstance(value, Fraction):
            return cls.const(value)
        if isinstance(value, GaussRat):
            return cls.const(value.re, value.im)
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"cannot convert {type(value).__name__} to Scalar")

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Parse the textual form produced by ``str`` (and ordinary infix input)."""
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse scalar {text!r}: {exc}") from None
        return _eval_ast(tree.body, text)

    # -- predicates and inspection ------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_constant(self) -> bool:
        if self.num.is_zero():
            return True
        return self.den.is_constant() and not any(self.num.degrees()[1:])

    def constant_value(self) -> GaussRat | None:
        if not self.is_constant():
            return None
        a, b = _split_i(self.num)
        re = a.leading_coefficient() if not a.is_zero() else 0
        im = b.leading_coefficient() if not b.is_zero() else 0
        return GaussRat(Fraction(int(re.p), int(re.q)) if re else 0,
                        Fraction(int(im.p), int(im.q)) if im else 0)

    def free_variables(self) -> frozenset[str]:
        used = [d1 > 0 or d2 > 0 for d1, d2 in zip(self.num.degrees(), self.den.degrees())]
        return frozenset(_GEN_NAMES[k] for k in range(1, _NGENS - 1) if used[k])

    def degree(self, name: str) -> tuple[int, int]:
        """(numerator degree, denominator degree) in ``name``."""
        k = var_index(name)
        return max(self.num.degrees()[k], 0), max(self.den.degrees()[k], 0)

    def numerator(self) -> "Scalar":
        return Scalar(self.num, _ONE_POLY)

    def denominator(self) -> "Scalar":
        return Scalar(self.den, _ONE_POLY)

    def is_real(self) -> bool:
        return self.num.degrees()[0] <= 0

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        d1, d2 = self.den, other.den
        if d1 == d2:
            return Scalar._make(self.num + other.num, d1)
        if d1.is_constant() and d2.is_constant():
            return Scalar._make(self.num * d2 + other.num * d1, d1 * d2)
        g = d1.gcd(d2)
        e1, e2 = d1 / g, d2 / g
        return Scalar._make(self.num * e2 + other.num * e1, d1 * e2)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.num, self.den) if self.num else self

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        return Scalar._make(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        return Scalar._from_complex(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        return Scalar._from_complex(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return Scalar.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return ONE
        return Scalar._make(self.num ** k, self.den ** k)

    def conjugate_i(self) -> "Scalar":
        """Replace i by -i in every coefficient."""
        a, b = _split_i(self.num)
        return Scalar(a - _I * b, self.den)

    # -- comparison ---------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((str(self.num), str(self.den)))
        return self._hash

    # -- calculus and substitution ------------------------------------
    def diff(self, name: str) -> "Scalar":
        k = var_index(name)
        dn = self.num.derivative(k)
        dd = self.den.derivative(k)
        if dd.is_zero():
            if dn.is_zero():
                return ZERO
            return Scalar._make(dn, self.den)
        return Scalar._make(dn * self.den - self.num * dd, self.den * self.den)

    def subs(self, mapping: Mapping[str, object]) -> "Scalar":
        """Simultaneous substitution of variables by Scalars."""
        vals = {}
        for name, value in mapping.items():
            k = var_index(name)
            if self.num.degrees()[k] > 0 or self.den.degrees()[k] > 0:
                vals[k] = Scalar.coerce(value)
        if not vals:
            return self
        q = _ONE_POLY
        for v in vals.values():
            q = _lcm(q, v.den)
        gens = list(_GENS)
        for k, v in vals.items():
            gens[k] = v.num if v.den == q else v.num * (q / v.den)
        gens[_H] = q
        n, en = _homogeneous_compose(self.num, vals, gens)
        d, ed = _homogeneous_compose(self.den, vals, gens)
        if ed > en:
            n = n * q ** (ed - en)
        elif en > ed:
            d = d * q ** (en - ed)
        return Scalar._from_complex(n, d)

    def evaluate(self, point: Mapping[str, object]) -> GaussRat:
        value = self.subs(point)
        const = value.constant_value()
        if const is None:
            missing = sorted(value.free_variables())
            raise ValueError(f"evaluation left free variables {missing}")
        return const

    def coefficients(self, names: Iterable[str]) -> dict[tuple[int, ...], "Scalar"]:
        """Split a function polynomial in ``names`` into its coefficient Scalars.

        The denominator must not involve ``names``.
        """
        idx = [var_index(n) for n in names]
        dd = self.den.degrees()
        if any(dd[k] > 0 for k in idx):
            raise ValueError("denominator depends on the coefficient variables")
        groups: dict[tuple[int, ...], dict] = {}
        for exp, c in self.num.to_dict().items():
            key = tuple(exp[k] for k in idx)
            rest = list(exp)
            for k in idx:
                rest[k] = 0
            groups.setdefault(key, {})[tuple(rest)] = c
        return {key: Scalar._make(_CTX.from_dict(terms), self.den)
                for key, terms in groups.items()}

    # -- text ---------------------------------------------------------
    def __str__(self):
        n = _poly_str(self.num)
        if self.den.is_one():
            return n
        return f"({n})/({_poly_str(self.den)})"

    def __repr__(self):
        return f"Scalar({str(self)!r})"


def _homogeneous_compose(p, vals, gens):
    if p.is_zero():
        return p, 0
    idx = list(vals)
    terms = p.to_dict()
    e = max(sum(exp[k] for k in idx) for exp in terms)
    if e == 0:
        return p, 0
    hom = {}
    for exp, c in terms.items():
        ex = list(exp)
        ex[_H] = e - sum(exp[k] for k in idx)
        hom[tuple(ex)] = c
    return _reduce_i(_CTX.from_dict(hom).compose(*gens)), e


def _poly_str(p) -> str:
    if p.is_zero():
        return "0"
    coeffs: dict[tuple[int, ...], list] = {}
    for exp, c in p.to_dict().items():
        key = exp[1:]
        slot = coeffs.setdefault(key, [Fraction(0), Fraction(0)])
        slot[1 if exp[0] else 0] = Fraction(int(c.p), int(c.q))
    parts = []
    for key in sorted(coeffs, reverse=True):
        re, im = coeffs[key]
        mono = "*".join(
            _GEN_NAMES[k + 1] + (f"^{e}" if e > 1 else "")
            for k, e in enumerate(key) if e
        )
        parts.append(_term_str(GaussRat(re, im), mono))
    text = parts[0]
    for part in parts[1:]:
        text += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
    return text


def _term_str(c: GaussRat, mono: str) -> str:
    if not mono:
        return f"({c})" if c.re and c.im else str(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    if c.re and c.im:
        return f"({c})*{mono}"
    return f"{c}*{mono}"


_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def _eval_ast(node, text):
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _eval_ast(node.left, text)
            exponent = _eval_ast(node.right, text).constant_value()
            if exponent is None or exponent.im or exponent.re.denominator != 1:
                raise ValueError(f"non-integer exponent in {text!r}")
            return base ** int(exponent.re)
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ValueError(f"unsupported operator in {text!r}")
        return op(_eval_ast(node.left, text), _eval_ast(node.right, text))
    if isinstance(node, ast.UnaryOp):
        value = _eval_ast(node.operand, text)
        if isinstance(node.op, ast.USub):
            return -value
        if isinstance(node.op, ast.UAdd):
            return value
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Scalar.coerce(node.value)
    if isinstance(node, ast.Name):
        if node.id in ("i", "I"):
            return I
        return Scalar.var(node.id)
    raise ValueError(f"unsupported syntax in {text!r}")


ZERO = Scalar(_ZERO_POLY, _ONE_POLY)
ONE = Scalar(_ONE_POLY, _ONE_POLY)
I = Scalar(_I, _ONE_POLY)


def var(name: str) -> Scalar:
    return Scalar.var(name)


def variables(names: str) -> tuple[Scalar, ...]:
    return tuple(Scalar.var(n) for n in names.replace(",", " ").split())


def normalize(f) -> Scalar:
    """Canonical form of ``f``.

    Scalars are canonical on construction, so this is the identity on them; it
    coerces numbers and strings.
    """
    return Scalar.coerce(f)


# -- Laurent expansion in eps -----------------------------------------------

@dataclass(frozen=True)
class LaurentSeries:
    variable: str
    terms: dict[int, Scalar] = field(default_factory=dict)
    truncation_order: int = 0

    @property
    def lowest_order(self) -> int | None:
        nonzero = [n for n, c in self.terms.items() if c]
        return min(nonzero) if nonzero else None

    def coefficient(self, n: int) -> Scalar:
        if n > self.truncation_order:
            raise ValueError(f"order {n} beyond truncation {self.truncation_order}")
        return self.terms.get(n, ZERO)

    def to_scalar(self) -> Scalar:
        e = Scalar.var(self.variable)
        out = ZERO
        for n, c in self.terms.items():
            out = out + c * e ** n
        return out


def _by_power(p, k):
    groups: dict[int, dict] = {}
    for exp, c in p.to_dict().items():
        rest = list(exp)
        rest[k] = 0
        groups.setdefault(int(exp[k]), {})[tuple(rest)] = c
    return {e: _CTX.from_dict(t) for e, t in groups.items()}


def _split_eps(f: Scalar, name: str):
    k = var_index(name)
    nums = _by_power(f.num, k)
    dens = _by_power(f.den, k)
    return nums, dens, min(nums), min(dens)


def eps_order(f: Scalar, name: str = EPS) -> int | None:
    """Lowest order of ``f`` in ``name``; None for the zero function."""
    if f.is_zero():
        return None
    k = var_index(name)
    n_low = min(int(exp[k]) for exp in f.num.to_dict())
    d_low = min(int(exp[k]) for exp in f.den.to_dict())
    return n_low - d_low


def leading_term(f: Scalar, name: str = EPS) -> tuple[int, Scalar]:
    """(order, coefficient) of the lowest nonvanishing Laurent term."""
    if f.is_zero():
        raise ValueError("the zero function has no leading term")
    nums, dens, kn, kd = _split_eps(f, name)
    return kn - kd, Scalar._make(nums[kn], dens[kd])


def laurent_expand(f, order: int, name: str = EPS) -> LaurentSeries:
    """Laurent series of ``f`` at ``name`` = 0 through ``name**order``."""
    f = Scalar.coerce(f)
    if f.is_zero():
        return LaurentSeries(name, {}, order)
    nums, dens, kn, kd = _split_eps(f, name)
    d0 = dens[kd]
    if d0.is_zero():
        raise EssentialSingularity("eps-free part of the denominator vanishes")
    low = kn - kd
    inv_d0 = Scalar._make(_ONE_POLY, d0)
    dcoef = {j - kd: Scalar(p, _ONE_POLY) for j, p in dens.items()}
    ncoef = {j - kn: Scalar._make(p, _ONE_POLY) for j, p in nums.items()}
    q: list[Scalar] = []
    terms = {}
    for n in range(0, order - low + 1):
        acc = ncoef.get(n, ZERO)
        for j, dj in dcoef.items():
            if 1 <= j <= n:
                acc = acc - dj * q[n - j]
        qn = acc * inv_d0
        q.append(qn)
        if qn:
            terms[low + n] = qn
    return LaurentSeries(name, terms, order)


def eps_limit(f, name: str = EPS, where: str = "") -> Scalar:
    """Limit of ``f`` as ``name`` -> 0; raises PoleAtZero for negative orders."""
    f = Scalar.coerce(f)
    if f.is_zero():
        return ZERO
    nums, dens, kn, kd = _split_eps(f, name)
    if kn < kd:
        raise PoleAtZero(kn - kd, where)
    if kn > kd:
        return ZERO
    return Scalar._make(nums[kn], dens[kd])
