"""Command-line front end.

Exit codes: 0 success/feasible, 1 infeasible or failed verification,
2 unknown (budgets exhausted), 64 usage error, 65 parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from .conditions import EmptySurfaceError, INFEASIBLE, check_class_m, check_morse
from .moves import PlanFormatError
from .oracle import OracleOverflow, reachable_set, seed_universe, sweep
from .planner import (
    BudgetError,
    construct_theorem2,
    default_budgets,
    plan_search,
    verify_record,
)
from .surface import (
    Surface,
    SurfaceSyntaxError,
    euler_characteristic,
    format_surface,
    p_invariant,
    p_odd,
    parse_surface,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_PARSE = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _budgets(text: str | None, fa: Surface) -> tuple[int, int, int]:
    if text is None:
        return default_budgets(fa)
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--budgets expects d4,d2,d1 integers, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 0:
        raise UsageError(f"--budgets expects three non-negative integers, got {text!r}")
    return parts  # type: ignore[return-value]


def _emit(args: argparse.Namespace, text: str, payload: dict[str, Any]) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _invariants(s: Surface) -> str:
    return f"P={p_invariant(s)}, P_o={p_odd(s)}, chi={euler_characteristic(s)}"


def cmd_info(args) -> int:
    s = parse_surface(args.surface)
    lines = [f"{' + '.join(c.name for c in s) or 'empty'}: {_invariants(s)}"]
    if len(s) > 1:
        lines += [f"  {c.name}: P={c.p}, P_o={c.p % 2}, chi={c.euler}" for c in s]
    lines.append(f"canonical: {format_surface(s)}")
    payload = {"surface": format_surface(s), "P": p_invariant(s), "P_o": p_odd(s),
               "chi": euler_characteristic(s), "components": [c.name for c in s]}
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK


def cmd_check(args) -> int:
    fa, fb = parse_surface(args.fa), parse_surface(args.fb)
    verdict = (check_class_m if args.mode == "class-m" else check_morse)(fa, fb)
    lines = [f"{verdict.mode}: {verdict.status}"]
    for c in verdict.checks:
        rel = f"{c.left} even" if c.name == "parity" else f"{c.left} {c.relation} {c.right}"
        lines.append(f"  [{'ok' if c.holds else 'FAIL'}] {c.name}: {rel}")
    _emit(args, "\n".join(lines), verdict.to_dict())
    return EXIT_INFEASIBLE if verdict.status == INFEASIBLE else EXIT_OK


def _certificate_text(cert) -> list[str]:
    p = cert.plan
    lines = [f"  D4 families: {len(p.d4_moves)}, 2-handles: {len(p.d2_moves)}, "
             f"1-handles: {len(p.d1_moves)}",
             "  trace: " + " -> ".join(format_surface(s) for s in cert.trace.surfaces)]
    ch = cert.chain
    lines.append(f"  chain: {ch.po_b} <= {ch.po_s3} <= {ch.p_s3} <= {ch.p_s1} = "
                 f"{ch.p_a_plus_2l4} <= {ch.three_p_a}")
    if p.is_degenerate:
        lines.append("  note: empty plan (product cobordism, no singular value)")
    if cert.connectivity != "connected":
        lines.append(f"  note: cobordism is {cert.connectivity}")
    return lines


def cmd_plan(args) -> int:
    fa, fb = parse_surface(args.fa), parse_surface(args.fb)
    budgets = _budgets(args.budgets, fa)
    t0 = time.perf_counter()
    res = plan_search(fa, fb, budgets)
    payload = res.to_dict()
    payload["budgets"] = list(budgets)
    payload["seconds"] = round(time.perf_counter() - t0, 6)
    lines = [f"{res.status}" + (f" ({res.reason})" if res.reason else "")]
    if res.certificate is not None:
        lines += _certificate_text(res.certificate)
    _emit(args, "\n".join(lines), payload)
    return {"feasible": EXIT_OK, "infeasible": EXIT_INFEASIBLE}.get(res.status, EXIT_UNKNOWN)


def cmd_thm2(args) -> int:
    fa = parse_surface(args.fa)
    try:
        cert = construct_theorem2(fa, args.p, args.p_prime)
    except ValueError as err:
        raise UsageError(str(err)) from None
    if cert.discrepancy:
        print(f"warning: {cert.discrepancy}", file=sys.stderr)
    lines = [f"certified: {format_surface(fa)} -> {format_surface(cert.final)}",
             f"  circles of critical points: {len(cert.plan.d4_moves)}, "
             f"index-2 points: {len(cert.plan.d2_moves)}"]
    lines += _certificate_text(cert)[1:]
    _emit(args, "\n".join(lines), cert.to_dict())
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        record = json.loads(Path(args.file).read_text())
    except OSError as err:
        raise UsageError(str(err)) from None
    except json.JSONDecodeError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    if not isinstance(record, dict):
        print("parse error: expected a JSON object", file=sys.stderr)
        return EXIT_PARSE
    try:
        problems = verify_record(record)
    except (PlanFormatError, KeyError, TypeError) as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    text = "ok" if not problems else "\n".join(f"FAIL: {p}" for p in problems)
    _emit(args, text, {"ok": not problems, "problems": problems})
    return EXIT_OK if not problems else EXIT_INFEASIBLE


def cmd_reach(args) -> int:
    fa = parse_surface(args.fa)
    report = reachable_set(fa, _budgets(args.budgets, fa))
    lines = [f"{len(report.reachable)} reachable surfaces from {format_surface(fa)} "
             f"({report.plan_count} plans, budgets {','.join(map(str, report.budgets))})"]
    lines += [f"  {format_surface(s)}" for s in report.reachable]
    lines.append(f"{len(report.counterexamples)} counterexamples")
    _emit(args, "\n".join(lines), report.to_dict())
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    universe = [parse_surface(s) for s in args.starts]
    if args.seed_universe or not universe:
        universe += seed_universe(args.max_components, args.max_genus)
    t0 = time.perf_counter()
    report = sweep(universe, d2=args.d2, d1=args.d1, jobs=args.jobs)
    payload = report.to_dict()
    payload["seconds"] = round(time.perf_counter() - t0, 3)
    lines = [f"{report.starts} starts, {report.pairs} reachable pairs, {report.plans} plans",
             f"{len(report.counterexamples)} counterexamples",
             f"{len(report.parity_violations)} parity violations",
             f"{len(report.chain_violations)} chain violations"]
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="surfcob", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help: str, func, out: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--json", action="store_true", help="print JSON instead of text")
        if out:
            p.add_argument("--out", metavar="FILE", help="also write the JSON payload to FILE")
        p.set_defaults(func=func)
        return p

    p = add("info", "canonical form and invariants of a surface", cmd_info, out=False)
    p.add_argument("surface")

    p = add("check", "necessary conditions for F_a -> F_b", cmd_check, out=False)
    p.add_argument("fa")
    p.add_argument("fb")
    p.add_argument("--mode", choices=("class-m", "morse"), default="class-m")

    p = add("plan", "search for a class-M plan", cmd_plan)
    p.add_argument("fa")
    p.add_argument("fb")
    p.add_argument("--budgets", metavar="d4,d2,d1")

    p = add("thm2", "explicit plan F_a -> F_a + p*P", cmd_thm2)
    p.add_argument("fa")
    p.add_argument("p", type=int)
    p.add_argument("p_prime", type=int)

    p = add("verify", "re-check a plan or certificate JSON file", cmd_verify, out=False)
    p.add_argument("file")

    p = add("reach", "exhaustive reachable set within budgets", cmd_reach)
    p.add_argument("fa")
    p.add_argument("--budgets", metavar="d4,d2,d1")

    p = add("sweep", "exhaustive class-M condition check over a universe", cmd_sweep)
    p.add_argument("starts", nargs="*", help="extra start surfaces")
    p.add_argument("--seed-universe", action="store_true",
                   help="include the built-in universe (default when no starts given)")
    p.add_argument("--max-components", type=int, default=2)
    p.add_argument("--max-genus", type=int, default=3)
    p.add_argument("--d2", type=int, default=3)
    p.add_argument("--d1", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SurfaceSyntaxError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, EmptySurfaceError, BudgetError, OracleOverflow) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
