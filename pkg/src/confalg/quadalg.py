"""Quadratic algebra closure of second order symmetries.

For a Hamiltonian ``H`` with second order symmetries ``L1, L2`` we form
``R = [L1, L2]`` and express ``[Lj, R]`` and ``R^2`` in fixed lists of
symmetrized operator monomials.  Coefficients may depend polynomially on the
potential parameters.  Equalities are taken modulo a constraint: the sphere
``s1^2+s2^2+s3^2 = 1`` for Helmholtz systems, or the left ideal of ``H`` for
conformal (Laplace) systems.

Coefficients are found by exact elimination on a square subsystem whose rows
and pivot columns are chosen by a modular evaluation, and every identity is
then certified by exact re-expansion.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from . import linalg
from .exactalg import _NGENS, ONE, ZERO, Scalar, var, var_index
from .orientation import PRIME, CompiledModP
from .weyl import ConstraintIdeal, DiffOperator, anticommutator, commutator, reduce

BRACKET_BASIS = ("L1^2", "L2^2", "H^2", "{L1,L2}", "H L1", "H L2", "L1", "L2", "H", "1")
R2_BASIS = (
    "L1^3", "L2^3", "H^3", "{L1^2,L2}", "{L1,L2^2}", "L1 L2 L1", "L2 L1 L2",
    "H {L1,L2}", "H L1^2", "H L2^2", "H^2 L1", "H^2 L2", "L1^2", "L2^2", "{L1,L2}",
    "H L1", "H L2", "H^2", "L1", "L2", "H", "1",
)
HAMILTONIAN_SYMBOL = "H"


class ClosureFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class SymmetrySet:
    name: str
    hamiltonian: DiffOperator
    generators: tuple[DiffOperator, ...]
    constraint: ConstraintIdeal
    parameters: tuple[str, ...]

    @property
    def conformal(self) -> bool:
        return self.constraint.kind == "hamiltonian"

    def reduce(self, op: DiffOperator) -> DiffOperator:
        return reduce(op, self.constraint)

    def with_generators(self, l1: DiffOperator, l2: DiffOperator, name: str | None = None) -> "SymmetrySet":
        return SymmetrySet(name or self.name, self.hamiltonian, (l1, l2), self.constraint, self.parameters)


# -- catalog ---------------------------------------------------------------

SPHERE = ("s1", "s2", "s3")
FLAT = ("x", "y")


def sphere_rotations() -> tuple[DiffOperator, DiffOperator, DiffOperator]:
    s1, s2, s3 = (var(c) for c in SPHERE)
    vf = lambda comps: DiffOperator.vector_field(SPHERE, comps)
    return (vf({"s3": s2, "s2": -s3}), vf({"s1": s3, "s3": -s1}), vf({"s2": s1, "s1": -s2}))


@lru_cache(maxsize=None)
def s9_operators() -> dict[str, DiffOperator]:
    """H, L1, L2, L3 of the generic 3-parameter sphere system, reduced on the sphere."""
    s1, s2, s3 = (var(c) for c in SPHERE)
    a1, a2, a3 = (var(p) for p in ("a1", "a2", "a3"))
    j1, j2, j3 = sphere_rotations()
    fn = lambda g: DiffOperator.function(SPHERE, g)
    sphere = ConstraintIdeal.sphere()
    ops = {
        "H": j1 * j1 + j2 * j2 + j3 * j3 + fn(a1 / s1 ** 2 + a2 / s2 ** 2 + a3 / s3 ** 2),
        "L1": j1 * j1 + fn(a3 * s2 ** 2 / s3 ** 2 + a2 * s3 ** 2 / s2 ** 2),
        "L2": j2 * j2 + fn(a1 * s3 ** 2 / s1 ** 2 + a3 * s1 ** 2 / s3 ** 2),
        "L3": j3 * j3 + fn(a2 * s1 ** 2 / s2 ** 2 + a1 * s2 ** 2 / s1 ** 2),
    }
    return {k: reduce(v, sphere) for k, v in ops.items()}


def s9_system(pair: tuple[str, str] = ("L1", "L2")) -> SymmetrySet:
    ops = s9_operators()
    return SymmetrySet("S9" if pair == ("L1", "L2") else f"S9 {pair[0]},{pair[1]}", ops["H"],
                       (ops[pair[0]], ops[pair[1]]), ConstraintIdeal.sphere(), ("a1", "a2", "a3"))


def flat_laplacian() -> DiffOperator:
    return DiffOperator.partial(FLAT, "x", 2) + DiffOperator.partial(FLAT, "y", 2)


def v0_system() -> SymmetrySet:
    """Conformal set for V = a1 - a2 x - a3 y + a4 (x^2 + y^2)."""
    x, y = var("x"), var("y")
    a1, a2, a3, a4 = (var(p) for p in ("a1", "a2", "a3", "a4"))
    fn = lambda g: DiffOperator.function(FLAT, g)
    h = flat_laplacian() + fn(a1 - a2 * x - a3 * y + a4 * (x * x + y * y))
    s1 = DiffOperator.partial(FLAT, "x", 2) + fn(a4 * x * x - a2 * x)
    s2 = DiffOperator(FLAT, {(1, 1): ONE}) + fn(a4 * x * y - (a3 * x + a2 * y) / 2)
    return SymmetrySet("V[0]", h, (s1, s2), ConstraintIdeal.left_ideal(h, "y"), ("a1", "a2", "a3", "a4"))


def free_flat_system() -> SymmetrySet:
    """Zero potential with the conformal symmetries J^2 and D^2."""
    x, y = var("x"), var("y")
    j = DiffOperator.vector_field(FLAT, {"x": -y, "y": x})
    d = DiffOperator.vector_field(FLAT, {"x": x, "y": y})
    h = flat_laplacian()
    return SymmetrySet("free", h, (j * j, d * d), ConstraintIdeal.left_ideal(h, "y"), ())


SYSTEMS: dict[str, Callable[[], SymmetrySet]] = {
    "S9": s9_system,
    "V[0]": v0_system,
    "free": free_flat_system,
}


def get_system(name: str) -> SymmetrySet:
    try:
        return SYSTEMS[name]()
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {', '.join(SYSTEMS)}") from None


# -- symmetry verification -----------------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    residuals: dict[str, DiffOperator]


def verify_symmetry(system: SymmetrySet) -> SymmetryReport:
    """[H, Lj] reduces to zero (on the sphere, or modulo the left ideal of H)."""
    residuals = {}
    for k, op in enumerate(system.generators, start=1):
        residuals[f"L{k}"] = system.reduce(commutator(system.hamiltonian, op))
    return SymmetryReport(all(r.is_zero() for r in residuals.values()), residuals)


# -- monomials ------------------------------------------------------------

class MonomialBuilder:
    """Reduced operator monomials in H, L1, L2 with memoized products."""

    def __init__(self, system: SymmetrySet):
        self.system = system
        l1, l2 = system.generators[:2]
        self.atoms = {"H": system.hamiltonian, "L1": l1, "L2": l2}
        self.cache: dict[tuple[str, ...], DiffOperator] = {}

    def word(self, letters: Sequence[str]) -> DiffOperator:
        key = tuple(letters)
        if key in self.cache:
            return self.cache[key]
        if not key:
            op = DiffOperator.identity(self.system.hamiltonian.coords)
        elif len(key) == 1:
            op = self.system.reduce(self.atoms[key[0]])
        else:
            op = self.system.reduce(self.atoms[key[0]] * self.word(key[1:]))
        self.cache[key] = op
        return op

    def monomial(self, name: str) -> DiffOperator:
        return sum_ops(self.system, [(c, self.word(w)) for c, w in expand_monomial(name)])


def sum_ops(system: SymmetrySet, terms) -> DiffOperator:
    out = DiffOperator.zero(system.hamiltonian.coords)
    for c, op in terms:
        out = out + op.scale(Scalar.coerce(c))
    return out


def _letters(text: str) -> list[str]:
    out = []
    for part in text.split():
        base, _, power = part.partition("^")
        out.extend([base] * (int(power) if power else 1))
    return out


def expand_monomial(name: str) -> list[tuple[int, tuple[str, ...]]]:
    """Words (with multiplicities) of a monomial name such as ``H {L1^2,L2}``."""
    name = name.strip()
    if name == "1":
        return [(1, ())]
    if "{" in name:
        prefix, _, rest = name.partition("{")
        inner, _, suffix = rest.partition("}")
        if suffix.strip():
            raise ValueError(f"unsupported monomial {name!r}")
        a, b = (tuple(_letters(p)) for p in inner.split(","))
        pre = tuple(_letters(prefix))
        return [(1, pre + a + b), (1, pre + b + a)]
    return [(1, tuple(_letters(name)))]


def monomial_h_split(name: str) -> tuple[int, str]:
    """(power of H, remaining L-word name) for a basis monomial."""
    parts = name.split(" ", 1) if name.startswith("H") else [name]
    head = parts[0]
    if head.startswith("H"):
        _, _, p = head.partition("^")
        power = int(p) if p else 1
        rest = parts[1] if len(parts) > 1 else "1"
        return power, rest
    return 0, name


# -- exact fitting ---------------------------------------------------------

class _ModPReducer:
    def __init__(self):
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    def add(self, row: Sequence[int]) -> bool:
        v = [x % PRIME for x in row]
        for prow, p in zip(self.rows, self.pivots):
            if v[p]:
                f = v[p]
                v = [(a - f * b) % PRIME for a, b in zip(v, prow)]
        for c, e in enumerate(v):
            if e:
                inv = pow(e, -1, PRIME)
                self.rows.append([x * inv % PRIME for x in v])
                self.pivots.append(c)
                return True
        return False


@dataclass(frozen=True)
class Fit:
    coefficients: list[Scalar]
    remainder: DiffOperator

    @property
    def exact(self) -> bool:
        return self.remainder.is_zero()


def fit(target: DiffOperator, columns: Sequence[DiffOperator], system: SymmetrySet,
        priority: Sequence[int] | None = None, seed: int = 7, npoints: int = 6) -> Fit:
    """Coefficients c with sum c_k columns[k] = target after reduction.

    When the columns are dependent, they are scanned in ``priority`` order
    (default: given order); each column independent of those already taken
    gets a coefficient and the rest get zero, which is the reduced-echelon
    solution for that column order.
    """
    coords = target.coords
    alphas = sorted({a for op in list(columns) + [target] for a in op.terms})
    rng = random.Random(seed)
    free_params = set()
    for op in list(columns) + [target]:
        for c in op.terms.values():
            free_params |= c.free_variables()
    free_params -= set(coords)
    param_values = {p: rng.randrange(2, PRIME - 1) for p in sorted(free_params)}

    compiled_cols = [{a: CompiledModP(c) for a, c in op.terms.items()} for op in columns]
    compiled_target = {a: CompiledModP(c) for a, c in target.terms.items()}

    points = []
    attempts = 0
    while len(points) < npoints:
        attempts += 1
        if attempts > 50 * npoints:
            raise ClosureFailure("could not find evaluation points avoiding poles")
        pt = {c: rng.randint(2, 97) for c in coords}
        vec = [0] * _NGENS
        for name, v in list(pt.items()) + list(param_values.items()):
            vec[var_index(name)] = v % PRIME
        try:
            rows = []
            for a in alphas:
                row = [cc[a](vec) if a in cc else 0 for cc in compiled_cols]
                row.append(compiled_target[a](vec) if a in compiled_target else 0)
                rows.append((a, row))
        except ZeroDivisionError:
            continue
        points.append((pt, rows))

    all_rows = [(pt, a, row) for pt, rows in points for a, row in rows]
    ncols = len(columns)
    col_reducer = _ModPReducer()
    order = list(priority) if priority is not None else list(range(ncols))
    pivots = [k for k in order if col_reducer.add([r[k] for _, _, r in all_rows])]
    row_reducer = _ModPReducer()
    chosen = []
    for pt, a, row in all_rows:
        if len(chosen) == len(pivots):
            break
        if row_reducer.add([row[k] for k in pivots]):
            chosen.append((pt, a))
    coeffs = [ZERO] * ncols
    if pivots:
        matrix = [[columns[k].coefficient(a).subs(pt) for k in pivots] for pt, a in chosen]
        rhs = [target.coefficient(a).subs(pt) for pt, a in chosen]
        sol = linalg.solve(matrix, rhs, ZERO)
        if sol is None:
            raise ClosureFailure("selected subsystem is inconsistent")
        for k, v in zip(pivots, sol):
            coeffs[k] = v
    combo = sum_ops(system, [(c, col) for c, col in zip(coeffs, columns) if c])
    return Fit(coeffs, system.reduce(combo - target))


def is_mixed_word(name: str) -> bool:
    """True for unsymmetrized words such as ``L1 L2 L1``."""
    if "{" in name:
        return False
    letters = [l for l in _letters(name) if l != "H"]
    return len(set(letters)) > 1


def column_priority(basis: Sequence[str]) -> list[int]:
    """Symmetrized monomials first; mixed words only when independent of them."""
    return sorted(range(len(basis)), key=lambda k: (is_mixed_word(basis[k]), k))


# -- closure ---------------------------------------------------------------

@dataclass
class QuadraticAlgebraReport:
    system: str
    parameters: tuple[str, ...]
    bracket_basis: tuple[str, ...]
    r2_basis: tuple[str, ...]
    brackets: dict[int, list[Scalar]]
    r_squared: list[Scalar]
    residuals: dict[str, DiffOperator] = field(default_factory=dict)
    conformal: bool = False

    @property
    def passed(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    def relations(self) -> dict[str, list[tuple[str, Scalar]]]:
        return {
            "[L1,R]": list(zip(self.bracket_basis, self.brackets[1])),
            "[L2,R]": list(zip(self.bracket_basis, self.brackets[2])),
            "R^2": list(zip(self.r2_basis, self.r_squared)),
        }

    def coefficient_table(self) -> dict[str, list[str]]:
        return {
            "A1": [str(c) for c in self.brackets[1]],
            "A2": [str(c) for c in self.brackets[2]],
            "b": [str(c) for c in self.r_squared],
        }

    def substitute(self, mapping: dict, swap_symbol: bool = False) -> "QuadraticAlgebraReport":
        return QuadraticAlgebraReport(
            self.system, self.parameters, self.bracket_basis, self.r2_basis,
            {j: [c.subs(mapping) for c in cs] for j, cs in self.brackets.items()},
            [c.subs(mapping) for c in self.r_squared], dict(self.residuals), self.conformal)

    def to_json(self) -> dict:
        return {
            "schema": "quadratic-algebra/1",
            "system": self.system,
            "parameters": list(self.parameters),
            "conformal": self.conformal,
            "bracket_basis": list(self.bracket_basis),
            "r2_basis": list(self.r2_basis),
            "A": {str(j): [str(c) for c in cs] for j, cs in sorted(self.brackets.items())},
            "b": [str(c) for c in self.r_squared],
            "residuals": {k: str(v) if not v.is_zero() else "0" for k, v in sorted(self.residuals.items())},
            "passed": self.passed,
        }

    def to_markdown(self) -> str:
        lines = [f"### Quadratic algebra of {self.system}", ""]
        if self.conformal:
            lines.append("All identities hold modulo the left ideal of H.")
            lines.append("")
        for name, terms in self.relations().items():
            body = " + ".join(f"({c})*{m}" for m, c in terms if c) or "0"
            lines.append(f"- `{name} = {body}`")
        lines.append("")
        status = "all residuals zero" if self.passed else "nonzero residuals: " + ", ".join(
            k for k, v in sorted(self.residuals.items()) if not v.is_zero())
        lines.append(f"Round trip: {status}.")
        return "\n".join(lines) + "\n"


def solve_closure(system: SymmetrySet, bracket_basis: Sequence[str] = BRACKET_BASIS,
                  r2_basis: Sequence[str] = R2_BASIS, check_symmetry: bool = True) -> QuadraticAlgebraReport:
    if check_symmetry:
        sym = verify_symmetry(system)
        if not sym.passed:
            bad = ", ".join(k for k, v in sym.residuals.items() if not v.is_zero())
            raise ClosureFailure(f"not a symmetry: {bad}")
    builder = MonomialBuilder(system)
    l1, l2 = builder.word(("L1",)), builder.word(("L2",))
    r = system.reduce(commutator(l1, l2))
    bracket_cols = [builder.monomial(m) for m in bracket_basis]
    r2_cols = [builder.monomial(m) for m in r2_basis]
    brackets, residuals = {}, {}
    for j, lj in ((1, l1), (2, l2)):
        target = system.reduce(commutator(lj, r))
        result = fit(target, bracket_cols, system, column_priority(bracket_basis))
        brackets[j] = result.coefficients
        residuals[f"[L{j},R]"] = result.remainder
    target = system.reduce(r * r)
    result = fit(target, r2_cols, system, column_priority(r2_basis))
    residuals["R^2"] = result.remainder
    return QuadraticAlgebraReport(system.name, system.parameters, tuple(bracket_basis), tuple(r2_basis),
                                  brackets, result.coefficients, residuals, system.conformal)


def conformal_closure(system: SymmetrySet, **kwargs) -> QuadraticAlgebraReport:
    if not system.conformal:
        raise ValueError("conformal closure needs a Hamiltonian left-ideal constraint")
    return solve_closure(system, **kwargs)


def round_trip(report: QuadraticAlgebraReport, system: SymmetrySet) -> dict[str, DiffOperator]:
    """Re-expand every relation from the reported coefficients and reduce."""
    builder = MonomialBuilder(system)
    l1, l2 = builder.word(("L1",)), builder.word(("L2",))
    r = system.reduce(commutator(l1, l2))
    targets = {
        "[L1,R]": commutator(l1, r),
        "[L2,R]": commutator(l2, r),
        "R^2": r * r,
    }
    out = {}
    for name, terms in report.relations().items():
        rhs = sum_ops(system, [(c, builder.monomial(m)) for m, c in terms if c])
        out[name] = system.reduce(rhs - targets[name])
    return out


def sum_rule(system: SymmetrySet | None = None) -> Scalar | None:
    """L1 + L2 + L3 - H for S9 when it reduces to a multiplication operator by a constant."""
    ops = s9_operators()
    diff = reduce(ops["L1"] + ops["L2"] + ops["L3"] - ops["H"], ConstraintIdeal.sphere())
    if diff.order() > 0:
        return None
    c = diff.coefficient((0, 0, 0))
    return c if not (c.free_variables() & set(SPHERE)) else None


CYCLE = {"a1": "a2", "a2": "a3", "a3": "a1"}


def cyclic_symmetry(report: QuadraticAlgebraReport | None = None) -> bool:
    """Closure for (L2, L3) equals closure for (L1, L2) with a1 -> a2 -> a3 -> a1."""
    base = report or solve_closure(s9_system())
    shifted = solve_closure(s9_system(("L2", "L3")))
    relabeled = base.substitute({k: var(v) for k, v in CYCLE.items()})
    return relabeled.brackets == shifted.brackets and relabeled.r_squared == shifted.r_squared


def parameter_energy_swap(report: QuadraticAlgebraReport, j: int) -> QuadraticAlgebraReport:
    """Exchange a_j <-> -H in every relation (the Stackel transform by the j-th potential term).

    Each relation is read as sum_k c_k(a, H) * H^m * W; after a_j -> -H, H -> -a_j
    it is regrouped by powers of H onto the same monomial list.
    """
    aj = f"a{j}"
    if aj not in report.parameters:
        raise ValueError(f"{aj} is not a parameter of {report.system}")
    mapping = {aj: -var(HAMILTONIAN_SYMBOL), HAMILTONIAN_SYMBOL: -var(aj)}
    h = var(HAMILTONIAN_SYMBOL)

    def regroup(basis, coeffs):
        index = {monomial_h_split(m): k for k, m in enumerate(basis)}
        out = [ZERO] * len(basis)
        for m, c in zip(basis, coeffs):
            if not c:
                continue
            power, word = monomial_h_split(m)
            moved = (c * h ** power).subs(mapping)
            for (p,), piece in moved.coefficients([HAMILTONIAN_SYMBOL]).items():
                key = (int(p), word)
                if key not in index:
                    raise ValueError(f"swap produces H^{p} {word}, outside the monomial basis")
                out[index[key]] = out[index[key]] + piece
        return out

    return QuadraticAlgebraReport(
        report.system + f" (a{j} <-> -H)", report.parameters, report.bracket_basis, report.r2_basis,
        {k: regroup(report.bracket_basis, cs) for k, cs in report.brackets.items()},
        regroup(report.r2_basis, report.r_squared), dict(report.residuals), False)


# -- dimension of second order conformal symmetries ----------------------

def second_order_dimension() -> tuple[int, int]:
    """(number of symmetrized products, their rank modulo the left ideal of H0).

    The symmetrized products {X_a, X_b} of the six flat conformal generators
    span the second order part of the enveloping algebra.
    """
    from .conformal import FLAT_NAMES, flat_generators

    gens = flat_generators()
    h0 = ConstraintIdeal.left_ideal(flat_laplacian(), "y")
    ops = []
    for a in range(6):
        for b in range(a, 6):
            op = anticommutator(gens[FLAT_NAMES[a]], gens[FLAT_NAMES[b]])
            ops.append(reduce(op, h0))
    rows, _ = linalg.coefficient_rows([dict(o.terms) for o in ops], None, list(FLAT))
    return len(ops), linalg.rank(rows, len(ops))
