"""
roughlab command line.

    python -m roughlab run examples.rcl --json
    python -m roughlab metric --x x.json --y y.json --coupling joint.json
    python -m roughlab density "ap(3,1) | powers(2)"
    python -m roughlab ideal-member summable "~powers(2)"
    python -m roughlab cluster spec.rcl --r 1 --target "{ atom 0 prob 1 }"
    python -m roughlab mc-check spec.rcl --r 1 --eps 1/2 --indices 1:200
    python -m roughlab reproduce --all

Exit status: 0 on success, 1 when an expectation fails or a fatal inconsistency is
found, 2 on usage, parse or semantic errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import pandas as pd
import structlog

from roughlab.config import settings
from roughlab.errors import FatalInconsistency, RoughLabError
from roughlab.logs import configure_logging
from roughlab.services.analysis import check_rough_limit, classify_cluster
from roughlab.services.exact_dist import (
    Coupling,
    FiniteDist,
    coupling_from_json,
    diagonal_coupling,
    product_coupling,
)
from roughlab.services.ideals import ideal_member
from roughlab.services.index_sets import natural_density
from roughlab.services.kyfan import kyfan_between, kyfan_of_law
from roughlab.services.montecarlo import SampleConfig, calibration, mc_check
from roughlab.services.probes import diameter_probe, sandwich_probe
from roughlab.services.registry import reproduce, reproduce_all, run_document
from roughlab.services.spec_dsl import SpecDocument, parse, parse_ideal, parse_index_set, parse_law

log = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Share of Monte Carlo estimates that must fall inside the confidence band.
CALIBRATION_FLOOR = 0.95


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _indices(text: str) -> tuple[int, ...]:
    """`1,5,9` or `a:b` (inclusive)."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":", 1))
            values = tuple(range(lo, hi + 1))
        else:
            values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad index list: {text!r}") from exc
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("indices must be >= 1")
    return values


def _load(path: str) -> SpecDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return parse(text)


def _emit(data, as_json: bool, table: pd.DataFrame | None = None) -> None:
    if as_json:
        print(json.dumps(data, indent=2, ensure_ascii=False))
    elif table is not None:
        print(table.to_string(index=False))
    else:
        print(json.dumps(data, indent=2, ensure_ascii=False))


# ── Subcommands ─────────────────────────────────────────────────────────────


def cmd_run(args) -> int:
    report = run_document(_load(args.file))
    rows = pd.DataFrame(
        [{"query": r["query"], "outcome": _outcome(r)} for r in report["results"]],
        columns=["query", "outcome"],
    )
    _emit(report, args.json, rows)
    return EXIT_FAILED if report["fatal"] else EXIT_OK


def _outcome(result: dict) -> str:
    if "error" in result:
        return f"error: {result['error']['message']}"
    data = result["result"]
    if "answer" in data:
        return data["answer"]
    if "limit_point" in data:
        return (f"limit {data['limit_point']['answer']}, strong {data['strong_cluster']['answer']}, "
                f"weak {data['weak_cluster']['answer']}")
    if "rho" in data:
        return f"rho {data['rho']}"
    if "max_rho" in data:
        return f"max rho {data['max_rho']} (bound {data['bound']})"
    if "agree" in data:
        return f"probability {data['probability']}, kyfan {data['kyfan']}"
    return f"{len(data.get('rows', []))} rows"


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _law_file(path: str) -> FiniteDist:
    """A law in its JSON form: {"space": {...}, "atoms": [[value, "p/q"], ...]}."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path}: a law file holds a JSON object")
    try:
        return FiniteDist.from_json(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _coupling_arg(text: str, x: FiniteDist, y: FiniteDist) -> Coupling:
    """`product`, `diagonal`, or a JSON file with the joint table."""
    if text == "product":
        return product_coupling(x, y)
    if text == "diagonal":
        if x != y:
            raise UsageError("a diagonal coupling needs identical laws")
        return diagonal_coupling(x)
    data = _read_json(text)
    try:
        return coupling_from_json(data, x, y)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{text}: {exc}") from exc


def cmd_metric(args) -> int:
    forms = [args.law is not None, args.x_file is not None or args.y_file is not None, args.x is not None]
    if sum(forms) != 1:
        raise UsageError("give one of --law, --x/--y, or law blocks")
    if args.law is not None:
        result = kyfan_of_law(_law_file(args.law))
    elif args.x is None:
        if args.x_file is None or args.y_file is None:
            raise UsageError("--x and --y go together")
        x, y = _law_file(args.x_file), _law_file(args.y_file)
        result = kyfan_between(x, y, _coupling_arg(args.coupling, x, y))
    else:
        x = parse_law(args.x)
        if args.y is None:
            result = kyfan_of_law(x)
        else:
            y = parse_law(args.y)
            result = kyfan_between(x, y, _coupling_arg("diagonal" if args.diagonal else "product", x, y))
    _emit(result.to_json(), args.json)
    return EXIT_OK


def cmd_density(args) -> int:
    _emit(natural_density(parse_index_set(args.set)).to_json(), args.json)
    return EXIT_OK


def cmd_ideal_member(args) -> int:
    verdict = ideal_member(parse_ideal(args.ideal), parse_index_set(args.set))
    _emit(verdict.to_json(), args.json)
    return EXIT_OK


def _target(args, doc: SpecDocument):
    return parse_law(args.target) if args.target else doc.target


def cmd_check(args) -> int:
    doc = _load(args.file)
    _emit(check_rough_limit(doc.sequence, _target(args, doc), args.r, doc.ideal).to_json(), args.json)
    return EXIT_OK


def cmd_cluster(args) -> int:
    doc = _load(args.file)
    _emit(classify_cluster(doc.sequence, _target(args, doc), args.r, doc.ideal).to_json(), args.json)
    return EXIT_OK


def cmd_sandwich(args) -> int:
    doc = _load(args.file)
    star = parse_law(args.star)
    candidates = [(law, product_coupling(star, law)) for law in map(parse_law, args.candidate)]
    rows = [row.to_json() for row in sandwich_probe(doc.sequence, star, args.r, doc.ideal, candidates)]
    table = pd.DataFrame(rows).drop(columns=["candidate"]) if rows else None
    _emit(rows, args.json, table)
    return EXIT_OK


def cmd_diameter(args) -> int:
    doc = _load(args.file)
    members = [parse_law(m) for m in args.member]
    _emit(diameter_probe(doc.sequence, members, args.r, doc.ideal).to_json(), args.json)
    return EXIT_OK


def cmd_mc_check(args) -> int:
    doc = _load(args.file)
    cfg = SampleConfig.from_settings(args.indices, seed=args.seed, samples=args.samples)
    frame = mc_check(doc.sequence, doc.target, args.r, args.eps, cfg)
    if args.csv:
        frame.to_csv(args.csv, index=False)
    share = calibration(frame)
    _emit({"calibration": share, "rows": frame.to_dict(orient="records")}, args.json, frame)
    return EXIT_OK if share >= CALIBRATION_FLOOR else EXIT_FAILED


def cmd_reproduce(args) -> int:
    if args.all == (args.id is not None):
        raise UsageError("give exactly one of an entry id or --all")
    checks = reproduce_all() if args.all else reproduce(args.id)
    rows = [c.row() for c in checks]
    _emit(rows, args.json, pd.DataFrame(rows))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


# ── Parser ──────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="roughlab", description="Rough ideal convergence in probability.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run every query of a .rcl document")
    p.add_argument("file")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("metric", parents=[common], help="Ky Fan distance of a distance law or of two laws")
    p.add_argument("--law", help="JSON file with a distance law")
    p.add_argument("--x", dest="x_file", help="JSON file with the law of X")
    p.add_argument("--y", dest="y_file", help="JSON file with the law of Y")
    p.add_argument("--coupling", default="product", help="product, diagonal, or a JSON file with a joint table")
    p.add_argument("x", nargs="?", help="law block, e.g. '{ atom 0 prob 1/2 atom 1 prob 1/2 }'")
    p.add_argument("y", nargs="?")
    p.add_argument("--diagonal", action="store_true", help="couple identical law blocks on the diagonal")
    p.set_defaults(handler=cmd_metric)

    p = sub.add_parser("density", parents=[common], help="natural density of an index set")
    p.add_argument("set")
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("ideal-member", parents=[common], help="decide A in I")
    p.add_argument("ideal", help="fin | density | summable | exh <submeasure> [depth d] [rungs k] [tol q]")
    p.add_argument("set")
    p.set_defaults(handler=cmd_ideal_member)

    for name, handler, text in (
        ("check", cmd_check, "is the target a rough ideal limit"),
        ("cluster", cmd_cluster, "limit point / strong / weak cluster point verdicts"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("file")
        p.add_argument("--r", type=_rational, required=True)
        p.add_argument("--target", help="law block replacing the document target")
        p.set_defaults(handler=handler)

    p = sub.add_parser("sandwich", parents=[common], help="inner ball / rough limit / rho-ball for candidates")
    p.add_argument("file")
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--star", required=True)
    p.add_argument("--candidate", action="append", default=[])
    p.set_defaults(handler=cmd_sandwich)

    p = sub.add_parser("diameter", parents=[common], help="largest pairwise rho among verified rough limits")
    p.add_argument("file")
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--member", action="append", default=[])
    p.set_defaults(handler=cmd_diameter)

    p = sub.add_parser("mc-check", parents=[common], help="Monte Carlo cross-check of exceedance probabilities")
    p.add_argument("file")
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--seed", type=int, default=None, help=f"default {settings.seed} (ROUGHLAB_SEED)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--indices", type=_indices, default=tuple(range(1, 201)))
    p.add_argument("--csv", help="also write the comparison table here")
    p.set_defaults(handler=cmd_mc_check)

    p = sub.add_parser("reproduce", parents=[common], help="re-run the worked-example registry")
    p.add_argument("id", nargs="?")
    p.add_argument("--all", action="store_true")
    p.set_defaults(handler=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    configure_logging(settings.log_level, settings.json_logs)
    args = build_parser().parse_args(argv)
    log.debug("command", command=args.command)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"roughlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FatalInconsistency as exc:
        print(f"roughlab: fatal inconsistency: {exc.message}", file=sys.stderr)
        return EXIT_FAILED
    except RoughLabError as exc:
        print(f"roughlab: {exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_FAILED if exc.status_code >= 500 else EXIT_USAGE
