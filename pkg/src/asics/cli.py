"""Command-line front end.

Three subcommands: `analyze` ingests a LIBSVM file and prints selective vs
nominal adjusted p-values per selected feature, `simulate` runs scenario
grids and emits one CSV/JSON row per cell, `selftest` runs the embedded
oracle suites. Exit codes: 0 ok, 1 selftest failure, 2 usage or parse error,
3 numeric failure (singular design).

Output is deterministic byte for byte: CSV uses LF line endings and a `.`
decimal separator, rows follow grid order (never completion order), and all
randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

from .data import LabelAlphabetError, LibsvmParseError, parse_libsvm, standardize
from .logistic import SingularDesignError
from .selective import METHOD_TAGS, run_asics, run_nominal
from .selftest import run_all
from .sim import PATTERNS, SimScenario, run_scenario

ANALYZE_HEADER = (
    "feature",
    "z",
    "sign",
    "beta_hat",
    "t_stat",
    "lower",
    "upper",
    "p_selective",
    "p_selective_adj",
    "p_nominal",
    "p_nominal_adj",
    "flags",
)

SIMULATE_HEADER = (
    "rho",
    "d",
    "n",
    "method",
    "k",
    "pattern",
    "rejection_rate",
    "rejection_sd",
    "fwer",
    "power",
    "separation_rate",
    "runs",
    "seed",
)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated floats, got {text!r}"
        )
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _method_list(text: str) -> list[str]:
    methods = [tok for tok in text.split(",") if tok]
    for m in methods:
        if m not in METHOD_TAGS:
            raise argparse.ArgumentTypeError(
                f"unknown method {m!r}; expected from {','.join(METHOD_TAGS)}"
            )
    if not methods:
        raise argparse.ArgumentTypeError("empty method list")
    return methods


def _threads_arg(text: str) -> int:
    if text == "auto":
        return max(1, os.cpu_count() or 1)
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an int or 'auto', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asics",
        description="Selective inference for logistic regression after marginal screening.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser(
        "analyze", help="screen a LIBSVM dataset and report selective p-values"
    )
    analyze.add_argument("--input", required=True, help="LIBSVM text file")
    analyze.add_argument("--k", type=int, required=True, help="features to select")
    analyze.add_argument("--alpha", type=float, default=0.05, help="test level")
    analyze.add_argument("--format", choices=("csv", "json"), default="csv")
    analyze.add_argument("--out", help="output path (default: stdout)")

    simulate = sub.add_parser(
        "simulate", help="run Monte-Carlo scenario grids, one output row per cell"
    )
    simulate.add_argument("--n", type=_int_list, required=True, metavar="LIST")
    simulate.add_argument("--d", type=_int_list, required=True, metavar="LIST")
    simulate.add_argument("--rho", type=_float_list, default=[0.0], metavar="LIST")
    simulate.add_argument("--pattern", choices=PATTERNS, default="null")
    simulate.add_argument(
        "--method", type=_method_list, default=list(METHOD_TAGS[:1]), metavar="LIST"
    )
    simulate.add_argument("--k", type=_int_list, default=[1], metavar="LIST")
    simulate.add_argument("--runs", type=int, required=True)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--threads", type=_threads_arg, default=1)
    simulate.add_argument("--alpha", type=float, default=0.05)
    simulate.add_argument("--format", choices=("csv", "json"), default="csv")
    simulate.add_argument("--out", help="output path (default: stdout)")

    sub.add_parser("selftest", help="run the embedded oracle suites")
    return parser


def _fmt(value: float) -> str:
    """Render a float with 6 significant digits ('.' decimal, 'inf' allowed)."""
    return format(value, ".6g")


def _fmt_wide(value: float) -> str:
    return format(value, ".10g")


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as handle:
            handle.write(text)


def _render_csv(header: tuple[str, ...], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _render_json(header: tuple[str, ...], rows: list[list[str]]) -> str:
    records = []
    for row in rows:
        record = {}
        for key, text in zip(header, row):
            try:
                value = int(text)
            except ValueError:
                try:
                    value = float(text)
                    if math.isinf(value):
                        value = text
                except ValueError:
                    value = text
            record[key] = value
        records.append(record)
    return json.dumps(records, indent=2) + "\n"


def _cmd_analyze(args: argparse.Namespace) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    ds = parse_libsvm(text)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ds = standardize(ds)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    selective_report = run_asics(ds, args.k, args.alpha)
    nominal_report = run_nominal(ds, args.k, args.alpha)

    rows = []
    sel = selective_report.selection
    for j_local, test in enumerate(selective_report.tests):
        nominal = nominal_report.tests[j_local]
        flags = ";".join(
            name
            for name, on in (
                ("separation", test.separation_flag),
                ("saturated", test.saturated),
            )
            if on
        )
        rows.append(
            [
                str(test.feature_index + 1),  # 1-based, matching LIBSVM indices
                _fmt_wide(float(sel.z[test.feature_index])),
                str(int(sel.signs[j_local])),
                _fmt_wide(float(selective_report.fit.beta_hat[j_local])),
                _fmt_wide(test.t_stat),
                _fmt_wide(test.lower),
                _fmt_wide(test.upper),
                _fmt_wide(test.p_value),
                _fmt_wide(test.adjusted_p),
                _fmt_wide(nominal.p_value),
                _fmt_wide(nominal.adjusted_p),
                flags,
            ]
        )

    render = _render_csv if args.format == "csv" else _render_json
    _emit(render(ANALYZE_HEADER, rows), args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    rows = []
    for rho in args.rho:
        for d in args.d:
            for n in args.n:
                for method in args.method:
                    for k in args.k:
                        sc = SimScenario(
                            n=n,
                            d=d,
                            rho=rho,
                            beta_pattern=args.pattern,
                            k=k,
                            runs=args.runs,
                            alpha=args.alpha,
                            master_seed=args.seed,
                            method=method,
                        )
                        metrics = run_scenario(sc, threads=args.threads)
                        rows.append(
                            [
                                _fmt(rho),
                                str(d),
                                str(n),
                                method,
                                str(k),
                                args.pattern,
                                _fmt(metrics.rejection_rate),
                                _fmt(metrics.rejection_sd),
                                _fmt(metrics.fwer),
                                _fmt(metrics.power),
                                _fmt(metrics.separation_rate),
                                str(metrics.runs_completed),
                                str(args.seed),
                            ]
                        )

    render = _render_csv if args.format == "csv" else _render_json
    _emit(render(SIMULATE_HEADER, rows), args.out)
    return 0


def _cmd_selftest() -> int:
    started = time.monotonic()
    results = run_all()
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name} ({result.detail})")
    elapsed = time.monotonic() - started
    if elapsed > 60.0:
        print(f"warning: selftest took {elapsed:.1f}s (budget 60s)", file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_selftest()
    except (LibsvmParseError, LabelAlphabetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SingularDesignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
