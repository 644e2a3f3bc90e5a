"""Command line entry point: named verification suites with deterministic reports."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import bocher, conformal, liecontract, potentials, quadalg, stackel
from .exactalg import EPS, var
from .weyl import commutator

PASS, FAIL, UNAVAILABLE = "pass", "fail", "data-unavailable"


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def add(self, name: str, ok: bool | None, detail: str = "") -> None:
        status = UNAVAILABLE if ok is None else (PASS if ok else FAIL)
        self.checks.append(Check(name, status, detail))

    @property
    def failed(self) -> bool:
        return any(c.status == FAIL for c in self.checks)

    def to_json(self) -> dict:
        # elapsed time is left out so reports are byte-identical across runs
        return {"suite": self.name, "checks": [c.to_json() for c in self.checks],
                "artifacts": self.artifacts, "failed": self.failed}

    def to_text(self) -> str:
        lines = [f"== {self.name}"]
        for c in self.checks:
            tail = f"  {c.detail}" if c.detail else ""
            lines.append(f"{c.status.upper():16} {c.name}{tail}")
        counts = {s: sum(c.status == s for c in self.checks) for s in (PASS, FAIL, UNAVAILABLE)}
        lines.append(f"-- {counts[PASS]} pass, {counts[FAIL]} fail, {counts[UNAVAILABLE]} data-unavailable")
        return "\n".join(lines)

    def to_markdown(self) -> str:
        lines = [f"## {self.name}", "", "| check | status | detail |", "|---|---|---|"]
        for c in self.checks:
            lines.append(f"| {c.name} | {c.status} | {c.detail} |")
        lines.append("")
        return "\n".join(lines)


# -- suites ------------------------------------------------------------------

def suite_so4() -> SuiteResult:
    res = SuiteResult("verify so4")
    res.add("dictionary round trip", conformal.dictionary_round_trip())
    flat = conformal.flat_generators()
    names = conformal.FLAT_NAMES
    basis = [flat[n] for n in names]
    alg = conformal.flat_structure()
    for a in range(6):
        for b in range(a + 1, 6):
            op = commutator(basis[a], basis[b])
            coeffs = alg.bracket(alg.unit(a), alg.unit(b))
            rebuilt = None
            for c, base in zip(coeffs, basis):
                if c:
                    rebuilt = base.scale(c) if rebuilt is None else rebuilt + base.scale(c)
            ok = op.is_zero() if rebuilt is None else op == rebuilt
            res.add(f"[{names[a]},{names[b]}]", ok, _bracket_text(alg.bracket_of(names[a], names[b])))
    res.add("Jacobi identity", liecontract.jacobi_check(alg).passed)
    rank = liecontract.killing_rank(alg)
    res.add("Killing form rank", rank == 6, f"rank {rank}")
    so4 = conformal.so4_structure()
    res.add("so(4) Jacobi identity", liecontract.jacobi_check(so4).passed)
    res.add("so(4) Killing form rank", liecontract.killing_rank(so4) == 6)
    res.artifacts["flat_structure"] = alg.to_json()
    return res


def _bracket_text(terms: dict) -> str:
    if not terms:
        return "0"
    return " + ".join(f"({c})*{n}" for n, c in sorted(terms.items()))


def suite_potentials() -> SuiteResult:
    res = SuiteResult("verify potentials")
    for name in potentials.FAMILY_NAMES:
        rep = potentials.cross_chart_check(name)
        res.add(f"cross chart {name}", rep.passed,
                "" if rep.passed else f"{len(rep.mismatches)} mismatched members")
    return res


LIE_CONTRACTIONS: dict[str, Callable[[], tuple[liecontract.LieAlgebraSC, liecontract.EpsBasisMap]]] = {
    "o3-e2": lambda: (liecontract.so3(),
                      liecontract.EpsBasisMap.diagonal(["J1", "J2", "J3"], [var(EPS), var(EPS), 1])),
    "bocher-1111-211": lambda: (conformal.so4_structure(), bocher.builtin_1111_to_211().generator_map),
}


def suite_contract_lie(name: str) -> SuiteResult:
    res = SuiteResult(f"contract lie {name}")
    if name not in LIE_CONTRACTIONS:
        raise KeyError(f"unknown Lie contraction {name!r}; known: {', '.join(LIE_CONTRACTIONS)}")
    alg, m = LIE_CONTRACTIONS[name]()
    try:
        limit = liecontract.contract(alg, m)
    except liecontract.ContractionUndefined as exc:
        res.add("limit exists", False, str(exc))
        return res
    res.add("limit exists", True)
    res.add("Jacobi identity", liecontract.jacobi_check(limit).passed)
    rank = liecontract.killing_rank(limit)
    res.add("Killing form rank", True, f"rank {rank}")
    if name == "o3-e2":
        res.add("limit is e(2)", _e2_relations(limit))
    res.artifacts["contracted"] = limit.to_json()
    return res


def _e2_relations(alg) -> bool:
    return (alg.bracket_of("J2", "J1") == {}
            and alg.bracket_of("J3", "J2") == {"J1": 1}
            and alg.bracket_of("J1", "J3") == {"J2": 1})


def suite_contract_potential(name: str, family: str, data_dir: Path | None) -> SuiteResult:
    res = SuiteResult(f"contract potential {name} {family}")
    loaded = bocher.load_contractions(data_dir)
    try:
        c = bocher.get_contraction(name, loaded)
    except KeyError as exc:
        res.add("substitution available", None, str(exc.args[0]))
        return res
    potentials.get_family(family)
    space = bocher.limit_space(family, c)
    targets = bocher.limit_targets(space)
    res.add("limit space saturated", space.saturated, f"depth {space.depth}")
    res.add("limit space identified", bool(targets), ", ".join(targets) or "no family")
    res.artifacts["limit_space"] = [str(g) for g in space.basis]
    if family in c.parameter_maps:
        lp = bocher.contract_potential(potentials.generic_instance(family), c)
        res.add("limit potential identified", lp.family is not None, lp.family or "")
        res.artifacts["limit_potential"] = str(lp.tetra)
    return res


def suite_table(row: int, data_dir: Path | None, search: bool = True) -> SuiteResult:
    res = SuiteResult(f"table {row}")
    loaded = bocher.load_contractions(data_dir)
    report = bocher.verify_table(row, contractions=loaded, search=search)
    if report.validation is not None and not report.validation.passed:
        res.add(f"validate {report.contraction}", False, "; ".join(report.validation.errors))
    for cell in report.cells:
        detail = ""
        if cell.status == PASS:
            detail = f"placement {cell.matched_orientation}"
        elif cell.status == FAIL:
            detail = "observed " + ", ".join(cell.observed)
        res.add(f"{cell.source} -> {cell.expected}", None if cell.status == UNAVAILABLE else cell.status == PASS,
                detail)
    res.artifacts["table"] = report.to_json()
    return res


def suite_s9() -> SuiteResult:
    res = SuiteResult("stackel s9")
    rep = stackel.s9_check()
    for name, ok in rep.potential_terms.items():
        res.add(f"potential term {name}", ok)
    res.add("sum of squares is constant", rep.sphere_sum is not None,
            f"value {rep.sphere_sum}" if rep.sphere_sum is not None else "")
    res.add("operator identity", rep.operator_identity, f"first order term {rep.first_order_term}")
    res.artifacts["s9"] = rep.to_json()
    return res


def suite_stackel_contract(a_vec: list[str], via: str, family: str, data_dir: Path | None) -> SuiteResult:
    res = SuiteResult(f"stackel contract A=({','.join(a_vec)}) via {via}")
    loaded = bocher.load_contractions(data_dir)
    try:
        c = bocher.get_contraction(via, loaded)
    except KeyError as exc:
        res.add("substitution available", None, str(exc.args[0]))
        return res
    hc = stackel.helmholtz_contraction(stackel.StackelChoice.of(a_vec), c, family)
    res.add("leading order", True, f"alpha {hc.alpha}")
    res.add("V' in limit family", hc.member, hc.target_family or "")
    res.add("commuting diagram", hc.diagram, "; ".join(hc.notes))
    res.artifacts["helmholtz_contraction"] = hc.to_json()
    return res


def suite_quadalg(name: str) -> SuiteResult:
    res = SuiteResult(f"quadalg {name}")
    system = quadalg.get_system(name)
    sym = quadalg.verify_symmetry(system)
    res.add("symmetries", sym.passed)
    if not sym.passed:
        return res
    rep = quadalg.solve_closure(system, check_symmetry=False)
    for key, op in sorted(rep.residuals.items()):
        res.add(f"closure {key}", op.is_zero())
    trip = quadalg.round_trip(rep, system)
    res.add("round trip", all(o.is_zero() for o in trip.values()))
    if name == "S9":
        res.add("cyclic symmetry", quadalg.cyclic_symmetry(rep))
        rule = quadalg.sum_rule()
        res.add("L1 + L2 + L3 - H is constant", rule is not None, str(rule))
    res.artifacts["quadratic_algebra"] = rep.to_json()
    res.artifacts["markdown"] = rep.to_markdown()
    return res


def all_suites(data_dir: Path | None) -> list[SuiteResult]:
    suites = [suite_so4(), suite_potentials()]
    suites += [suite_contract_lie(n) for n in LIE_CONTRACTIONS]
    suites += [suite_table(row, data_dir) for row in sorted(bocher.ROW_CONTRACTIONS)]
    suites.append(suite_s9())
    for k in range(4):
        vec = ["1" if i == k else "0" for i in range(4)]
        suites.append(suite_stackel_contract(vec, bocher.ROW_CONTRACTIONS[1], "[1,1,1,1]", data_dir))
    suites += [suite_quadalg(n) for n in quadalg.SYSTEMS]
    return suites


# -- rendering -----------------------------------------------------------

def render(suites: list[SuiteResult], fmt: str) -> str:
    if fmt == "json":
        payload = {"schema": "confalg-report/1", "suites": [s.to_json() for s in suites],
                   "failed": any(s.failed for s in suites)}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt == "md":
        parts = ["# Verification report", ""]
        for s in suites:
            parts.append(s.to_markdown())
            table = s.artifacts.get("table")
            if table:
                parts.append(_table_markdown(table))
        return "\n".join(parts)
    return "\n".join(s.to_text() for s in suites) + "\n"


def _table_markdown(table: dict) -> str:
    lines = [f"Contraction {table['contraction']}:", "", "| source | expected | status | placement |",
             "|---|---|---|---|"]
    for cell in table["cells"]:
        lines.append(f"| {cell['source']} | {cell['expected']} | {cell['status']} | "
                     f"{cell['matched_orientation'] or ''} |")
    lines.append("")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    # the shared flags are accepted before or after the subcommand
    data_flag = argparse.ArgumentParser(add_help=False)
    data_flag.add_argument("--data", type=Path, default=argparse.SUPPRESS,
                           help="directory with contraction substitution files (default: ./data)")
    format_flag = argparse.ArgumentParser(add_help=False)
    format_flag.add_argument("--format", choices=("text", "json", "md"), default=argparse.SUPPRESS,
                             help="output format (default: text)")
    common = [data_flag, format_flag]

    # defaults are applied after parsing: parent actions are shared between
    # parsers, so a set_defaults here would override flags given first
    p = argparse.ArgumentParser(prog="confalg", description=__doc__, parents=common)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="structural checks", parents=common)
    v.add_argument("what", choices=("so4", "potentials"))

    c = sub.add_parser("contract", help="Lie algebra or potential contractions")
    csub = c.add_subparsers(dest="kind", required=True)
    cl = csub.add_parser("lie", parents=common)
    cl.add_argument("name", choices=sorted(LIE_CONTRACTIONS))
    cp = csub.add_parser("potential", parents=common)
    cp.add_argument("name", help="contraction name such as '[1,1,1,1]->[2,1,1]' or a table row number")
    cp.add_argument("family", choices=potentials.FAMILY_NAMES)

    t = sub.add_parser("table", help="check one row of the contraction table", parents=common)
    t.add_argument("row", type=int, choices=sorted(bocher.ROW_CONTRACTIONS))
    t.add_argument("--no-search", action="store_true", help="only use the standard placement of each family")

    s = sub.add_parser("stackel", help="Stackel transform checks")
    ssub = s.add_subparsers(dest="kind", required=True)
    ssub.add_parser("s9", parents=common)
    sc = ssub.add_parser("contract", parents=common)
    sc.add_argument("--A", required=True, help="comma separated choice vector, e.g. 1,0,0,0")
    sc.add_argument("--via", default=bocher.ROW_CONTRACTIONS[1], help="contraction name")
    sc.add_argument("--family", default="[1,1,1,1]", choices=potentials.FAMILY_NAMES)

    q = sub.add_parser("quadalg", help="quadratic algebra closure", parents=common)
    q.add_argument("system", choices=sorted(quadalg.SYSTEMS))

    r = sub.add_parser("report", help="run every suite and write a report", parents=[data_flag])
    r.add_argument("--format", dest="report_format", choices=("json", "md"), default="json")
    r.add_argument("--out", type=Path, required=True)
    return p


def run(argv: list[str] | None = None) -> tuple[int, list[SuiteResult]]:
    args = build_parser().parse_args(argv)
    data = getattr(args, "data", Path("data"))
    fmt = getattr(args, "format", "text")
    start = time.perf_counter()
    if args.command == "verify":
        suites = [suite_so4() if args.what == "so4" else suite_potentials()]
    elif args.command == "contract":
        if args.kind == "lie":
            suites = [suite_contract_lie(args.name)]
        else:
            suites = [suite_contract_potential(args.name, args.family, data)]
    elif args.command == "table":
        suites = [suite_table(args.row, data, not args.no_search)]
    elif args.command == "stackel":
        if args.kind == "s9":
            suites = [suite_s9()]
        else:
            vec = [v.strip() for v in args.A.split(",")]
            suites = [suite_stackel_contract(vec, args.via, args.family, data)]
    elif args.command == "quadalg":
        suites = [suite_quadalg(args.system)]
    else:
        suites = all_suites(data)
        args.out.write_text(render(suites, args.report_format))
    elapsed = time.perf_counter() - start
    for s in suites:
        s.elapsed = elapsed
    if args.command != "report":
        sys.stdout.write(render(suites, fmt))
    else:
        sys.stdout.write(render(suites, "text"))
    return (1 if any(s.failed for s in suites) else 0), suites


def main(argv: list[str] | None = None) -> int:
    try:
        code, _ = run(argv)
    except bocher.ContractionDataError as exc:
        print(f"error: malformed contraction data: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
