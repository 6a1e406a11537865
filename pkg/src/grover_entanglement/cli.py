"""Command-line front end: ``trace``, ``analyze``, ``verify`` and ``sweep``.

Exit status: 0 success, 1 check violation, 2 usage or input error,
3 numerically ambiguous rank decision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .dynamics import run_dynamics, trace_csv, trace_json
from .entanglement import RankPolicy, analyze, default_max_n
from .errors import GroverEntanglementError
from .statecore import parse_marked_tokens, read_oracle_file, read_state_file
from .verifier import (
    CHECK_IDS,
    SWEEP_COLUMNS,
    CheckSpec,
    check,
    count_2separable,
    fraction_report,
    sweep,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_AMBIGUOUS = 3

SIMULATION_MAX_N = 20
DEFAULT_SAMPLES = 100
SWEEP_DEFAULT_SAMPLES = 20


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser, *, fmt: bool = True):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--tol", type=float, default=None, help="relative singular-value threshold")
    p.add_argument("--max-n", type=int, default=None, help="qubit cap for entanglement scans")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grover-ent",
        description="Entanglement dynamics of Grover search.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="simulate one search and measure every state")
    p.add_argument("--n", type=int, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--marked", help="comma-separated indices or n-bit strings")
    src.add_argument("--oracle-file", help="file with one marked entry per line")
    _add_common(p)

    p = sub.add_parser("analyze", help="entanglement report for a state file")
    p.add_argument("--state", required=True, help='JSON file {"n": ..., "amplitudes": [...]}')
    _add_common(p, fmt=False)

    p = sub.add_parser("verify", help="check a lemma or theorem by enumeration")
    p.add_argument("--check", required=True, help=f"one of {', '.join(CHECK_IDS)}, fraction")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="restrict to this number of solutions")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, fmt=False)

    p = sub.add_parser("sweep", help="row-by-row conformance classification over a range of M")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-range", required=True, help="LO..HI or a single M")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=None, help="marked sets per M")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    return parser


def _policy(args) -> RankPolicy:
    return RankPolicy() if args.tol is None else RankPolicy(rel_tol=args.tol)


def _cap(args) -> int:
    return default_max_n() if args.max_n is None else args.max_n


def _emit(text: str, args, summary: str | None = None):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if summary:
            print(summary)
    else:
        sys.stdout.write(text)
        if summary:
            print(summary, file=sys.stderr)


def _mode(args, n: int, default_samples: int) -> tuple[str, int]:
    if args.exhaustive and args.samples is not None:
        raise UsageError("--exhaustive and --samples are mutually exclusive")
    if args.exhaustive:
        return "exhaustive", 0
    if args.samples is not None:
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        return "sampled", args.samples
    return ("exhaustive", 0) if n <= 4 else ("sampled", default_samples)


def cmd_trace(args) -> int:
    if args.n < 1 or args.n > SIMULATION_MAX_N:
        raise UsageError(f"--n must lie in [1, {SIMULATION_MAX_N}]")
    if args.marked is not None:
        marked = parse_marked_tokens([t for t in args.marked.split(",") if t.strip()], args.n)
    else:
        marked = read_oracle_file(args.oracle_file, args.n)
    trace = run_dynamics(args.n, marked, _policy(args), max_n=_cap(args))
    text = trace_csv(trace) if args.format == "csv" else trace_json(trace)
    last = trace.final
    p = trace.params
    summary = (
        f"n={p.n} M={p.M} theta={p.theta:.17g} R={p.R} "
        f"final_success={last.success_probability:.17g} "
        f"final_delta={last.delta} final_chi={last.chi}"
    )
    _emit(text, args, summary)
    return EXIT_AMBIGUOUS if trace.ambiguous else EXIT_OK


def cmd_analyze(args) -> int:
    state = read_state_file(args.state, atol=1e-6)
    report = analyze(state, _policy(args), max_n=_cap(args))
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args)
    return EXIT_AMBIGUOUS if report.ambiguous else EXIT_OK


def _verdict_exit(verdict: str) -> int:
    return {"pass": EXIT_OK, "fail": EXIT_VIOLATION, "pass-with-ambiguity": EXIT_AMBIGUOUS}[verdict]


def cmd_verify(args) -> int:
    policy = _policy(args)
    if args.check == "fraction":
        if args.m is None:
            raise UsageError("--check fraction needs --m")
        report = fraction_report(range(3, args.n + 1), args.m, policy)
        lines = [f"M={args.m} n={n}: {c}/{t} = {f:.6f}" for n, c, t, f in report.rows]
        lines.append(f"strictly decreasing: {report.strictly_decreasing}")
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args, "\n".join(lines))
        return EXIT_OK if report.strictly_decreasing else EXIT_VIOLATION
    if args.check not in CHECK_IDS:
        raise UsageError(f"unknown check id {args.check!r}")
    if args.n > _cap(args) and args.check != "lemma8":
        raise UsageError(f"n={args.n} exceeds --max-n {_cap(args)}")
    mode, samples = _mode(args, args.n, DEFAULT_SAMPLES)
    spec = CheckSpec(args.check, args.n, args.m, mode, samples or DEFAULT_SAMPLES, args.seed)
    result = check(spec, policy, jobs=args.jobs)
    summary = (
        f"{result.check_id} n={result.n} mode={result.mode}: "
        f"{result.instances_tested} instances, {result.violation_count} violations, "
        f"{result.ambiguous_count} ambiguous -> {result.verdict}"
    )
    if args.check == "lemma2_count":
        if args.m is not None and args.m % 2 == 0:
            brute, formula = count_2separable(args.n, args.m, policy)
            summary += f"\n2-separable count M={args.m}: brute {brute} vs formula {formula}"
        for m, (brute, formula) in result.details.get("counts", {}).items():
            if args.m is None:
                summary += f"\n2-separable count M={m}: brute {brute} vs formula {formula}"
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", args, summary)
    return _verdict_exit(result.verdict)


def _parse_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--m-range must be LO..HI or an integer, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def _csv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def cmd_sweep(args) -> int:
    if args.n < 1 or args.n > _cap(args):
        raise UsageError(f"--n must lie in [1, {_cap(args)}]")
    m_values = _parse_range(args.m_range)
    mode, samples = _mode(args, args.n, SWEEP_DEFAULT_SAMPLES)
    rows = sweep(
        args.n, m_values, _policy(args),
        mode=mode, samples=samples or SWEEP_DEFAULT_SAMPLES, seed=args.seed, jobs=args.jobs,
    )
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_csv_value(row[c]) for c in SWEEP_COLUMNS])
        text = buf.getvalue()
    else:
        text = json.dumps(rows, indent=2) + "\n"
    bad = sum(r["conformance"] == "no" for r in rows)
    out_of_table = sum(r["conformance"] == "out-of-table" for r in rows)
    ambiguous = sum(bool(r["ambiguous"]) for r in rows)
    summary = (
        f"sweep n={args.n} M={m_values[0]}..{m_values[-1]} mode={mode}: {len(rows)} rows, "
        f"{bad} nonconforming, {out_of_table} out-of-table, {ambiguous} ambiguous"
    )
    _emit(text, args, summary)
    if bad:
        return EXIT_VIOLATION
    return EXIT_AMBIGUOUS if ambiguous else EXIT_OK


COMMANDS = {"trace": cmd_trace, "analyze": cmd_analyze, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be positive")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, GroverEntanglementError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
