"""Command-line front end.

Two subcommands: `analyze` runs the full pipeline over a panel CSV (or
the bundled published aggregates) and writes a JSON report plus
optional figure data; `validate` scans a panel CSV and reports every
violation without aborting at the first.

Exit codes: 0 success, 1 validation found violations, 2 configuration
error, 3 data error (unreadable, malformed or inconsistent input),
4 degenerate statistics (the message names the failing operation).
Stdout stays empty unless --stdout-json is given; diagnostics go to
stderr.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    BadSampleSizeError,
    ConfigError,
    DegenerateInputError,
    DegenerateTableError,
    HcrStatsError,
    MissingDataError,
    NegativeSdError,
    ParseError,
    TooFewPairsError,
    TooFewPointsError,
    UndefinedSignError,
    ValidationError,
    ZeroVarianceError,
)
from .report import (
    PAPER_DATA_SOURCE,
    AnalysisConfig,
    emit_plot_data,
    run_analysis,
    validate_input,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4

_DEGENERATE = (
    DegenerateInputError,
    DegenerateTableError,
    UndefinedSignError,
    NegativeSdError,
    ZeroVarianceError,
    BadSampleSizeError,
    TooFewPairsError,
    TooFewPointsError,
)

_DATA_ERRORS = (ParseError, ValidationError, MissingDataError, OSError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcrstats",
        description="Method-agreement statistics for highly cited "
                    "researcher count panels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser(
        "analyze",
        help="run the full pipeline and emit a JSON report")
    source = an.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", metavar="PANEL_CSV",
                        help="panel CSV (year,region,field,count)")
    source.add_argument("--paper-data", action="store_true",
                        help="analyze the bundled published aggregates")
    an.add_argument("--year-a", type=int, default=2017,
                    help="baseline year (M1), default 2017")
    an.add_argument("--year-b", type=int, default=2018,
                    help="comparison year (M2), default 2018")
    an.add_argument("--regions", default="world,us,chinese-mainland,other",
                    help="comma-separated regions to analyze")
    an.add_argument("--paper-compat", action="store_true",
                    help="use the published rounded constants "
                         "(1.25 instead of sqrt(pi/2))")
    z_group = an.add_mutually_exclusive_group()
    z_group.add_argument("--z", dest="z_mode", action="store_const",
                         const="normal",
                         help="1.96 normal quantile for the band (default)")
    z_group.add_argument("--t", dest="z_mode", action="store_const",
                         const="student",
                         help="two-sided 0.05 Student quantile, df n-1")
    an.set_defaults(z_mode="normal")
    an.add_argument("--weights", choices=("uniform", "proportional"),
                    default="uniform", help="least-products weight scheme")
    an.add_argument("--eqn5", choices=("worst", "plus-minus", "minus-plus"),
                    default="worst",
                    help="sign convention for the propagated error term")
    an.add_argument("--seed", type=int, default=0,
                    help="bootstrap seed (unsigned 64-bit)")
    an.add_argument("--resamples", type=int, default=2000,
                    help="bootstrap resamples, minimum 1000")
    an.add_argument("--consistency", choices=("strict", "per-source"),
                    default="strict",
                    help="world-total consistency mode for loaded panels")
    an.add_argument("--output", metavar="REPORT_JSON",
                    help="write the JSON report here")
    an.add_argument("--plot-data", metavar="DIR",
                    help="write figure CSV series and a manifest here")
    an.add_argument("--stdout-json", action="store_true",
                    help="print the JSON report to stdout")

    va = sub.add_parser(
        "validate",
        help="scan a panel CSV and report all violations")
    va.add_argument("--input", metavar="PANEL_CSV", required=True)
    return parser


def _cmd_analyze(args: argparse.Namespace) -> int:
    source = PAPER_DATA_SOURCE if args.paper_data else args.input
    regions = tuple(r.strip() for r in args.regions.split(",") if r.strip())
    config = AnalysisConfig(
        source=source,
        year_a=args.year_a,
        year_b=args.year_b,
        regions=regions,
        paper_compat=args.paper_compat,
        z_mode=args.z_mode,
        weight_scheme=args.weights,
        eqn5=args.eqn5,
        seed=args.seed,
        n_resamples=args.resamples,
        consistency_mode=args.consistency,
    )
    report = run_analysis(config)
    text = report.to_json()

    err = sys.stderr
    meta = report.data["metadata"]
    print(f"analyzed {meta['source']} "
          f"(sha256 {meta['dataset_checksum'][:12]}...)", file=err)
    for entry in report.data["chi_squared"]:
        print(f"  chi-squared [{entry['label']}]: "
              f"{entry['statistic']:.4f} (df {entry['df']}, "
              f"p {entry['p_value']:.4g})", file=err)
    agreement = report.data["agreement"]
    if agreement:
        line = agreement["line"]
        print(f"  agreement line ({agreement['source']}): "
              f"M2 = {line['slope']:.4f} * M1 + {line['intercept']:.4f} "
              f"(n {agreement['n']})", file=err)
    for entry in report.data["wilcoxon"]:
        print(f"  wilcoxon [{entry['region']}]: p {entry['p_value']:.4g} "
              f"({entry['method']})", file=err)
    for note in report.data["notes"]:
        print(f"  note: {note}", file=err)

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"report written to {args.output}", file=err)
    if args.plot_data:
        written = emit_plot_data(report, args.plot_data)
        names = ", ".join(sorted(written))
        print(f"plot data written to {args.plot_data} ({names})", file=err)
    if args.stdout_json:
        sys.stdout.write(text)
    elif not args.output and not args.plot_data:
        print("no --output/--plot-data/--stdout-json given; "
              "report discarded after the summary above", file=err)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    summary = validate_input(args.input)
    err = sys.stderr
    print(f"{summary.path}: {summary.n_data_rows} data rows, "
          f"{summary.n_entries} usable entries", file=err)
    for entry in summary.coverage:
        missing = len(entry["missing_fields"])
        flag = "" if not missing else f", {missing} field(s) missing"
        cf = "+cross-field" if entry["has_cross_field"] else ""
        print(f"  {entry['year']} {entry['region']}: "
              f"{entry['n_fields']} fields{cf}{flag}", file=err)
        if missing:
            print(f"    missing: {', '.join(entry['missing_fields'])}",
                  file=err)
    for lineno, message in summary.violations:
        print(f"  violation at line {lineno}: {message}", file=err)
    for warning in summary.world_warnings:
        print(f"  warning: {warning}", file=err)
    if summary.ok:
        print("no violations", file=err)
        return EXIT_OK
    print(f"{len(summary.violations)} violation(s)", file=err)
    return EXIT_VIOLATIONS


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        return _cmd_validate(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _DEGENERATE as exc:
        print(f"degenerate statistics ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        return EXIT_DEGENERATE
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except HcrStatsError as exc:
        print(f"data error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
