"""Command-line front end.

Subcommands: validate | flows | d0 | solve | check-monotone | realize |
family.  Exit codes: 0 ok, 2 invalid instance, 3 parse error, 4 domain
error.  All reports are JSON with sorted keys and exact fractions;
``--decimal N`` adds decimal renderings next to the fractions without
replacing them.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import serialize
from .dot import tree_to_dot
from .dynamics import snapshot
from .errors import DomainError, ParseError, StructureError
from .flows import compute_flow_field, specific_flow_second_moment
from .rationals import INFINITY, decimal_string, format_fraction, parse_fraction
from .realizability import decide, family_analyze
from .transport import cost_matrix, is_cyclically_monotone, solve_optimal_coupling
from .tree import gromov_product, validate_tree

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_PARSE = 3
EXIT_DOMAIN = 4


def _write_output(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _require_measures(measures):
    if measures is None:
        raise DomainError("instance file has no 'measures' section")
    return measures


def cmd_validate(args) -> int:
    data = serialize.load_raw(args.input)
    tree = serialize.parse_tree(data)
    report = validate_tree(tree)
    violations = list(report.violations)
    if "measures" in data:
        try:
            minus, plus = serialize.parse_measures(data["measures"])
        except DomainError as exc:
            violations.append(f"bad measures: {exc}")
        else:
            if report.valid:
                known = set(tree.ends)
                for name, measure in (("minus", minus), ("plus", plus)):
                    extra = sorted(measure.support - known)
                    if extra:
                        violations.append(f"measure {name} charges unknown ends: {extra}")
    out = {
        "valid": not violations,
        "violations": violations,
        "warnings": list(report.warnings),
    }
    _write_output(serialize.dumps(out), args.output)
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_flows(args) -> int:
    tree, measures, _ = serialize.load_instance(args.input)
    minus, plus = _require_measures(measures)
    ff = compute_flow_field(tree, minus, plus)
    out = serialize.flow_field_to_json(ff, decimal=args.decimal)
    moment = specific_flow_second_moment(tree, ff)
    out["specific_flow_moment"] = format_fraction(moment)
    if args.decimal is not None:
        out["specific_flow_moment_decimal"] = decimal_string(moment, args.decimal)
    _write_output(serialize.dumps(out), args.output)
    return EXIT_OK


def cmd_d0(args) -> int:
    tree, _measures, _ = serialize.load_instance(args.input)
    tree.require_valid()
    pairs = []
    ends = sorted(tree.ends)
    for i, a in enumerate(ends):
        for b in ends[i + 1 :]:
            value = gromov_product(tree, a, b)
            assert value is not INFINITY
            entry = {"a": a, "b": b, "d0": format_fraction(value)}
            if args.decimal is not None:
                entry["d0_decimal"] = decimal_string(value, args.decimal)
            pairs.append(entry)
    _write_output(serialize.dumps({"pairs": pairs}), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    tree, measures, _ = serialize.load_instance(args.input)
    minus, plus = _require_measures(measures)
    cm = cost_matrix(tree, minus, plus)
    coupling, value = solve_optimal_coupling(cm, minus, plus)
    out = {
        "value": format_fraction(value),
        "coupling": serialize.coupling_to_json(coupling)["atoms"],
    }
    if args.decimal is not None:
        out["value_decimal"] = decimal_string(value, args.decimal)
    _write_output(serialize.dumps(out), args.output)
    return EXIT_OK


def cmd_check_monotone(args) -> int:
    tree, measures, coupling = serialize.load_instance(args.input)
    minus, plus = _require_measures(measures)
    if coupling is None:
        raise DomainError("instance file has no 'coupling' section")
    left, right = coupling.marginals()
    if left != minus or right != plus:
        raise DomainError("coupling marginals do not match the measures")
    cm = cost_matrix(tree, minus, plus)
    result = is_cyclically_monotone(coupling, cm)
    _write_output(serialize.dumps(serialize.monotonicity_to_json(result)), args.output)
    return EXIT_OK


def cmd_realize(args) -> int:
    tree, measures, _ = serialize.load_instance(args.input)
    minus, plus = _require_measures(measures)
    report = decide(tree, minus, plus)
    snapshots = None
    if report.verdict == "realizable" and args.times:
        snapshots = [snapshot(report.plan, time, tree) for time in args.times]
    out = serialize.realizability_to_json(report, tree, snapshots, decimal=args.decimal)
    _write_output(serialize.dumps(out), args.output)
    if args.dot:
        ff = report.flow_field
        with open(args.dot, "w", encoding="utf-8") as handle:
            handle.write(tree_to_dot(tree, ff=ff, plan=report.plan))
    return EXIT_OK if report.verdict == "realizable" else EXIT_DOMAIN


def cmd_family(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{args.input}: invalid JSON at line {exc.lineno} column {exc.colno}"
        ) from exc
    except OSError as exc:
        raise ParseError(f"{args.input}: {exc}") from exc
    spec = serialize.parse_family_spec(data)
    max_level = args.max_level if args.max_level is not None else data.get("max_level", 10)
    verdict = family_analyze(spec, int(max_level), args.tolerance)
    out = serialize.family_verdict_to_json(verdict, decimal=args.decimal)
    _write_output(serialize.dumps(out), args.output)
    return EXIT_OK


def _times_list(text: str) -> list[Fraction]:
    return [parse_fraction(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wassertree",
        description="Exact transport between boundary measures of a metric tree.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_tolerance=False, needs_times=False, needs_level=False, dot=False):
        p.add_argument("--input", required=True, help="input JSON file")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--decimal", type=int, default=None, metavar="N",
                       help="add N-digit decimal renderings next to fractions")
        if needs_times:
            p.add_argument("--times", type=_times_list, default=[],
                           help="comma-separated rational times; use the = form "
                                "for negative values, e.g. --times=-1,0,1/2,3")
        if needs_level:
            p.add_argument("--max-level", type=int, default=None, metavar="K")
        if needs_tolerance:
            p.add_argument("--tolerance", type=parse_fraction, default=Fraction(1, 1000),
                           metavar="p/q")
        if dot:
            p.add_argument("--dot", default=None, metavar="PATH",
                           help="write a Graphviz DOT rendering of the tree")

    handlers = {
        "validate": (cmd_validate, {}),
        "flows": (cmd_flows, {}),
        "d0": (cmd_d0, {}),
        "solve": (cmd_solve, {}),
        "check-monotone": (cmd_check_monotone, {}),
        "realize": (cmd_realize, {"needs_times": True, "dot": True}),
        "family": (cmd_family, {"needs_tolerance": True, "needs_level": True}),
    }
    for name, (handler, options) in handlers.items():
        p = sub.add_parser(name)
        common(p, **options)
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StructureError as exc:
        print(f"invalid instance: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
