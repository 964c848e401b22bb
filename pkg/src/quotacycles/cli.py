"""Command-line front end.

Exit codes: 0 success, 1 falsification found, 2 usage or validation error,
3 negative search result.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from collections.abc import Iterable, Sequence
from fractions import Fraction
from typing import Any, TextIO

from . import __version__
from .core import Alphabet, Message, Profile, Quota, validate_quota
from .cyclicity import (
    construct_witness_from_violation,
    extract_witness,
    validate_witness,
)
from .errors import BudgetExceeded, ParseError, QuotaError
from .graph import Edge, ReportGraph, decompose_cycles
from .verify import (
    DEFAULT_RECORD_CAP,
    VerificationReport,
    ViolationRecord,
    enumerate_quotas,
    make_record,
    pair_count,
    resolve_budget,
    search_ineq1_violations,
    verify_theorem,
)

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_USAGE = 2
EXIT_NONE_FOUND = 3

RECORD_FIELDS = [
    "quota",
    "profile",
    "message",
    "mismatch",
    "deviation",
    "lhs_times_K",
    "rhs1_times_K",
    "lhs_times_2K",
    "rhs2_times_2K",
    "ineq1_holds",
    "ineq2_holds",
    "cyclic",
    "witness",
    "t_max",
    "note",
]

REPORT_FIELDS = [
    "kind",
    "alphabet_size",
    "k",
    "quota",
    "pairs_checked",
    "ineq2_failures",
    "theorem_violations",
    "ineq1_violations",
    "lemma2_violations",
    "lemma2_equalities",
    "witness_failures",
    "error",
    *RECORD_FIELDS[1:],
]


# --- parsing ----------------------------------------------------------------


def _split(text: str, what: str) -> list[str]:
    items = [s.strip() for s in text.split(",")]
    if not text.strip() or any(not s for s in items):
        raise ParseError(f"empty item in {what} {text!r}")
    return items


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(s) for s in _split(text, what)]
    except ValueError:
        raise ParseError(f"{what} must be comma-separated integers, got {text!r}") from None


def _first_appearance(*seqs: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for seq in seqs:
        for s in seq:
            seen.setdefault(s, None)
    return tuple(seen)


def _alphabet(args: argparse.Namespace, *fallback: Sequence[str]) -> Alphabet:
    if getattr(args, "alphabet", None):
        return Alphabet(tuple(_split(args.alphabet, "alphabet")))
    if getattr(args, "alphabet_size", None):
        return Alphabet.of_size(args.alphabet_size)
    if fallback:
        return Alphabet(_first_appearance(*fallback))
    raise ParseError("one of --alphabet or --alphabet-size is required")


def _pair(args: argparse.Namespace) -> tuple[Profile, Message]:
    profile_names = _split(args.profile, "profile")
    message_names = _split(args.message, "message")
    alphabet = _alphabet(args, profile_names, message_names)
    quota = validate_quota(alphabet, _ints(args.quota, "quota"))
    profile = Profile.from_names(alphabet, profile_names)
    if len(profile) != quota.k_total:
        raise ParseError(f"profile has length {len(profile)}, quota requires K={quota.k_total}")
    return profile, Message.from_names(quota, message_names)


_EDGE = re.compile(r"^\s*(\d+)\s*:\s*([^>:]+?)\s*>\s*([^>:]+?)\s*$")


def parse_edge_list(text: str) -> ReportGraph:
    """Parse ``label:tail>head`` items separated by commas."""
    parsed = []
    for item in _split(text, "edge list"):
        match = _EDGE.match(item)
        if not match:
            raise ParseError(f"bad edge {item!r}; expected label:tail>head")
        parsed.append((int(match.group(1)), match.group(2), match.group(3)))
    labels = [p[0] for p in parsed]
    if len(set(labels)) != len(labels):
        raise ParseError("edge labels must be distinct")
    names = _first_appearance(*((t, h) for _, t, h in parsed))
    index = {name: i for i, name in enumerate(names)}
    edges = tuple(Edge(label, index[t], index[h]) for label, t, h in parsed)
    return ReportGraph(len(names), edges, names)


def _quotas(args: argparse.Namespace, alphabet: Alphabet) -> list[Quota]:
    if args.quota:
        quota = validate_quota(alphabet, _ints(args.quota, "quota"))
        if args.k is not None and args.k != quota.k_total:
            raise ParseError(f"--k {args.k} disagrees with quota total {quota.k_total}")
        return [quota]
    if args.k is None:
        raise ParseError("--k is required with --all-quotas")
    return enumerate_quotas(alphabet, args.k)


# --- output -----------------------------------------------------------------


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ";".join(str(v) for v in value)
    return str(value)


def _csv(rows: Iterable[dict[str, Any]], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({f: _cell(row.get(f)) for f in fields})
    return buf.getvalue()


def _frac(num: int, den: int) -> str:
    f = Fraction(num, den)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _record_text(d: dict[str, Any]) -> str:
    k = len(d["profile"])
    parts = [
        f"profile {','.join(d['profile'])}",
        f"message {','.join(d['message'])}",
        f"lhs {_frac(d['mismatch'], k)}",
        f"rhs1 {_frac(d['deviation'], k)}",
        f"rhs2 {_frac(d['rhs2_times_2K'], 2 * k)}",
        f"ineq1 {'holds' if d['ineq1_holds'] else 'fails'}",
        f"ineq2 {'holds' if d['ineq2_holds'] else 'fails'}",
        f"cyclic {'yes' if d['cyclic'] else 'no'}",
    ]
    if d.get("witness"):
        parts.append(f"witness {d['witness']}")
    return "  ".join(parts) + "\n"


def _report_rows(report: dict[str, Any]) -> list[dict[str, Any]]:
    base = {key: report[key] for key in ("alphabet_size", "k", "quota")}
    rows = [{"kind": "summary", **{k: v for k, v in report.items() if k != "records"}}]
    for kind, records in report["records"].items():
        for r in records:
            rows.append({"kind": kind, **base, **r})
    return rows


class _Out:
    def __init__(self, path: str | None) -> None:
        self.path = path
        self.stream: TextIO = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout

    def write(self, text: str) -> None:
        self.stream.write(text)

    def close(self) -> None:
        if self.path:
            self.stream.close()
        else:
            self.stream.flush()


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- subcommands ----------------------------------------------------------------


def check_report(profile: Profile, message: Message) -> dict[str, Any]:
    record = make_record(profile, message)
    return {"alphabet": list(profile.alphabet.names), "k": len(profile), **record.to_dict()}


def cmd_check(args: argparse.Namespace, out: _Out) -> int:
    profile, message = _pair(args)
    report = check_report(profile, message)
    if args.format == "json":
        out.write(_dump(report))
    elif args.format == "csv":
        out.write(_csv([report], ["alphabet", "k", *RECORD_FIELDS]))
    else:
        out.write(_record_text(report))
    return EXIT_OK


def cmd_witness(args: argparse.Namespace, out: _Out) -> int:
    profile, message = _pair(args)
    record = make_record(profile, message)
    if not record.ineq2_holds:
        witness, source = construct_witness_from_violation(profile, message), "construction"
    elif record.cyclic:
        witness, source = extract_witness(profile, message), "extraction"
    else:
        witness, source = None, None
    if witness is None:
        result: dict[str, Any] = {"cyclic": False}
    else:
        result = {
            "cyclic": True,
            "tau": witness.as_list(),
            "valid": validate_witness(profile, message, witness),
            "source": source,
        }
    if args.format == "json":
        out.write(_dump(result))
    elif args.format == "csv":
        out.write(_csv([result], ["cyclic", "tau", "valid", "source"]))
    elif witness is None:
        out.write("not cyclic\n")
    else:
        out.write(f"tau {witness.as_list()} valid {result['valid']} ({source})\n")
    return EXIT_OK if witness is not None else EXIT_NONE_FOUND


def cmd_decompose(args: argparse.Namespace, out: _Out) -> int:
    graph = parse_edge_list(args.edges)
    cycles = [c.as_list() for c in decompose_cycles(graph)]
    if args.format == "json":
        out.write(_dump({"cycles": cycles}))
    elif args.format == "csv":
        out.write(_csv(({"cycle": i, "labels": c} for i, c in enumerate(cycles, 1)), ["cycle", "labels"]))
    else:
        out.write("".join(" ".join(map(str, c)) + "\n" for c in cycles))
    return EXIT_OK


def _budgeted_quotas(args: argparse.Namespace) -> tuple[Alphabet, list[Quota]]:
    alphabet = _alphabet(args)
    quotas = _quotas(args, alphabet)
    budget = resolve_budget(args.budget)
    for q in quotas:
        pairs = pair_count(q)
        if pairs > budget:
            raise BudgetExceeded(pairs, budget)
    return alphabet, quotas


def cmd_verify(args: argparse.Namespace, out: _Out) -> int:
    alphabet, quotas = _budgeted_quotas(args)
    falsified = False
    if args.format == "csv":
        out.write(_csv([], REPORT_FIELDS))
    for quota in quotas:
        report: VerificationReport = verify_theorem(
            alphabet, quota, budget=args.budget, workers=args.workers, cap=args.cap
        )
        falsified |= report.falsified
        data = report.to_dict(timing=args.timing)
        if args.format == "json":
            out.write(json.dumps(data) + "\n")
        elif args.format == "csv":
            out.write(_csv(_report_rows(data), REPORT_FIELDS).split("\n", 1)[1])
        else:
            s = report.summary()
            out.write(
                f"|Omega|={s['alphabet_size']} K={s['k']} quota={s['quota']} "
                f"pairs={s['pairs_checked']} theorem={s['theorem_violations']} "
                f"ineq1={s['ineq1_violations']} lemma2={s['lemma2_violations']} "
                f"witness_failures={s['witness_failures']}\n"
            )
    return EXIT_FALSIFIED if falsified else EXIT_OK


def cmd_search_violations(args: argparse.Namespace, out: _Out) -> int:
    alphabet, quotas = _budgeted_quotas(args)
    found = 0
    if args.format == "csv":
        out.write(_csv([], RECORD_FIELDS))
    for quota in quotas:
        records: list[ViolationRecord] = search_ineq1_violations(
            alphabet, quota, budget=args.budget, workers=args.workers, cap=args.cap
        )
        found += len(records)
        for r in records:
            d = r.to_dict()
            if args.format == "json":
                out.write(json.dumps(d) + "\n")
            elif args.format == "csv":
                out.write(_csv([d], RECORD_FIELDS).split("\n", 1)[1])
            else:
                out.write(_record_text(d))
    return EXIT_OK if found else EXIT_NONE_FOUND


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quotacycles",
        description="Check cyclic reports and quota inequalities for quota mechanisms.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    alpha = argparse.ArgumentParser(add_help=False)
    group = alpha.add_mutually_exclusive_group()
    group.add_argument("--alphabet", help="comma-separated symbol names")
    group.add_argument("--alphabet-size", type=int, help="use symbols A, B, C, ...")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--quota", required=True, help="comma-separated positive counts")
    pair.add_argument("--profile", required=True, help="true signals, comma-separated")
    pair.add_argument("--message", required=True, help="reported signals, comma-separated")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--k", type=int, help="number of tasks")
    qgroup = sweep.add_mutually_exclusive_group()
    qgroup.add_argument("--quota", help="a single quota; default is every quota")
    qgroup.add_argument("--all-quotas", action="store_true", help="every quota (the default)")
    sweep.add_argument("--budget", type=int, help="maximum pairs per quota")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--cap", type=int, default=DEFAULT_RECORD_CAP, help="records kept per list")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common, alpha, pair], help="evaluate one pair")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("witness", parents=[common, alpha, pair], help="cyclicity witness for a pair")
    p.set_defaults(func=cmd_witness)
    p = sub.add_parser("verify", parents=[common, alpha, sweep], help="exhaustive audit")
    p.add_argument("--timing", action="store_true", help="include elapsed seconds")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser(
        "search-violations", parents=[common, alpha, sweep], help="non-cyclic pairs breaking the weak inequality"
    )
    p.set_defaults(func=cmd_search_violations)
    p = sub.add_parser("decompose", parents=[common], help="split a balanced edge list into cycles")
    p.add_argument("edges", help="label:tail>head items, comma-separated")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    out = _Out(args.out)
    try:
        return args.func(args, out)
    except QuotaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        out.close()


if __name__ == "__main__":
    sys.exit(main())
