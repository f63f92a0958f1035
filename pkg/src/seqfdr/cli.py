"""Command-line interface.

Subcommands mirror the library's main entry points: Monte Carlo
simulation, gap-rule calibration, BH sample-size matching, dataset replay,
fixed-sample analysis, and the ASN-versus-m sweep.  Results are emitted as
JSON (default) or CSV, to stdout or --out.

Exit codes: 0 success, 2 usage error, 3 data error, 4 calibration or
search failure, 5 truncation.
"""

import argparse
import csv
import io
import json
import sys

from . import __version__
from .data import ReplayConfig, fixed_sample_analysis, preprocess, read_case_control_csv, replay
from .examples import EXAMPLE_IDS, make_example
from .exceptions import CalibrationError, DataError, SearchFailureError, SeqfdrError
from .harness import bh_matched_sample_size, calibrate_gap_sb, run_experiment, savings_pct, sweep_m

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SEARCH = 4
EXIT_TRUNCATED = 5

RULES = ("oracle", "data_driven", "gap_ao", "gap_sb")


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument("--out", help="write output to this path instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument(
        "--trace", action="store_true",
        help="emit per-stage trace records on stderr (replay)",
    )


def _add_example_args(parser):
    parser.add_argument("--example", required=True, choices=EXAMPLE_IDS)
    parser.add_argument("--m", type=int, required=True, help="number of hypotheses")
    parser.add_argument("--pi1", type=float, required=True, help="alternative fraction in [0, 1]")
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--beta", type=float, default=0.10)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="seqfdr",
        description="Sequential multiple testing with adaptive local-fdr boundaries",
    )
    parser.add_argument("--version", action="version", version=f"seqfdr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo evaluation of one procedure")
    _add_example_args(p)
    p.add_argument("--rule", choices=RULES, default="data_driven")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--pilot", type=int, default=None)
    p.add_argument("--max-stages", type=int, default=100_000)
    p.add_argument("--gap-cutoff", type=float, default=None,
                   help="calibrated cutoff for gap_sb (calibrated on the fly when omitted)")
    _add_common(p)

    p = sub.add_parser("calibrate-gap", help="grid-search the simulation-based gap cutoff")
    _add_example_args(p)
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--grid-start", type=float, default=0.1)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--grid-cap", type=float, default=50.0)
    _add_common(p)

    p = sub.add_parser("bh-match", help="find the fixed sample size matching a target FNR")
    _add_example_args(p)
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--target-fnr", type=float, default=None,
                   help="target FNR in percent (from a data-driven run when omitted)")
    _add_common(p)

    p = sub.add_parser("replay", help="sequential replay of a case-control CSV")
    p.add_argument("--csv", required=True, help="genes-by-samples CSV with labeled header")
    p.add_argument("--case-label", default="case")
    p.add_argument("--control-label", default="control")
    p.add_argument("--pilot", type=int, default=25, help="pilot samples per arm")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.10)
    p.add_argument("--welch", action="store_true", help="unpooled t statistic")
    p.add_argument("--no-preprocess", action="store_true",
                   help="skip standardization and quantile normalization")
    _add_common(p)

    p = sub.add_parser("fixed-sample", help="full-data BH and AdaptZ analysis of a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--case-label", default="case")
    p.add_argument("--control-label", default="control")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--welch", action="store_true")
    p.add_argument("--no-preprocess", action="store_true")
    _add_common(p)

    p = sub.add_parser("sweep-m", help="ASN-versus-m comparison across procedures")
    p.add_argument("--example", required=True, choices=EXAMPLE_IDS)
    p.add_argument("--m-list", required=True, help="comma-separated m values")
    p.add_argument("--pi1", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.10)
    p.add_argument("--rules", default="oracle,data_driven,gap_ao",
                   help="comma-separated subset of " + ",".join(RULES))
    p.add_argument("--runs", type=int, default=50)
    _add_common(p)

    return parser


def _emit(payload, args, csv_rows=None):
    """Write JSON (or CSV rows when provided) to --out or stdout."""
    if args.format == "csv" and csv_rows is not None:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(csv_rows[0].keys()))
        writer.writeheader()
        writer.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return obj.__dict__
    return str(obj)


def _result_payload(command, config, results, seed):
    return {
        "command": command,
        "config": config,
        "results": results,
        "seed": seed,
        "version": __version__,
    }


def _check_level_arg(parser_name, name, value):
    if not 0.0 < value < 1.0:
        raise ArgumentRangeError(f"{parser_name}: --{name} must lie in (0, 1), got {value}")


class ArgumentRangeError(Exception):
    pass


def _cmd_simulate(args):
    _check_level_arg("simulate", "alpha", args.alpha)
    _check_level_arg("simulate", "beta", args.beta)
    if not 0.0 <= args.pi1 <= 1.0:
        raise ArgumentRangeError(f"simulate: --pi1 must lie in [0, 1], got {args.pi1}")
    spec = make_example(args.example, m=args.m, pi1=args.pi1)
    cutoff = args.gap_cutoff
    if args.rule == "gap_sb" and cutoff is None:
        cutoff = calibrate_gap_sb(spec, alpha=args.alpha, beta=args.beta, runs=50, seed=args.seed)
    summary = run_experiment(
        spec,
        args.rule,
        alpha=args.alpha,
        beta=args.beta,
        runs=args.runs,
        seed=args.seed,
        pilot=args.pilot,
        max_stages=args.max_stages,
        gap_cutoff=cutoff,
    )
    row = summary.to_dict()
    payload = _result_payload("simulate", vars(args), row, args.seed)
    _emit(payload, args, csv_rows=[row])
    return EXIT_TRUNCATED if summary.truncated_runs else EXIT_OK


def _cmd_calibrate_gap(args):
    _check_level_arg("calibrate-gap", "alpha", args.alpha)
    _check_level_arg("calibrate-gap", "beta", args.beta)
    spec = make_example(args.example, m=args.m, pi1=args.pi1)
    cutoff = calibrate_gap_sb(
        spec, alpha=args.alpha, beta=args.beta, runs=args.runs, seed=args.seed,
        grid_start=args.grid_start, grid_step=args.grid_step, grid_cap=args.grid_cap,
    )
    results = {"gap_cutoff": cutoff}
    _emit(_result_payload("calibrate-gap", vars(args), results, args.seed), args,
          csv_rows=[results])
    return EXIT_OK


def _cmd_bh_match(args):
    _check_level_arg("bh-match", "alpha", args.alpha)
    spec = make_example(args.example, m=args.m, pi1=args.pi1)
    target = args.target_fnr
    reference = None
    if target is None:
        reference = run_experiment(
            spec, "data_driven", alpha=args.alpha, beta=args.beta,
            runs=args.runs, seed=args.seed,
        )
        target = reference.fnr_pct
    n_hat, summary = bh_matched_sample_size(
        spec, target, alpha=args.alpha, runs=args.runs, seed=args.seed,
    )
    row = summary.to_dict()
    if reference is not None:
        row["savings_pct"] = savings_pct(reference.asn, float(n_hat))
        row["reference_asn"] = reference.asn
    _emit(_result_payload("bh-match", vars(args), row, args.seed), args, csv_rows=[row])
    return EXIT_OK


def _load_matrix(args):
    matrix = read_case_control_csv(
        args.csv, case_label=args.case_label, control_label=args.control_label
    )
    if not args.no_preprocess:
        matrix = preprocess(matrix)
    return matrix


def _cmd_replay(args):
    _check_level_arg("replay", "alpha", args.alpha)
    _check_level_arg("replay", "beta", args.beta)
    matrix = _load_matrix(args)
    cfg = ReplayConfig(
        alpha=args.alpha, beta=args.beta, pilot_per_arm=args.pilot,
        seed=args.seed, welch=args.welch, record_trace=args.trace,
    )
    report = replay(matrix, cfg)
    results = {
        "stopping_time": report.stopping_time,
        "n_case": report.n_case,
        "n_control": report.n_control,
        "n_discoveries": report.n_discoveries,
        "stopped": report.stopped,
        "exhausted": report.exhausted,
        "pi0_hat": report.pi0_hat,
        "discovered_genes": report.discovered_genes,
    }
    if args.trace:
        # line-oriented stage records on stderr, one JSON object per stage
        for snap in report.trace:
            print(json.dumps(vars(snap)), file=sys.stderr)
    _emit(_result_payload("replay", {k: v for k, v in vars(args).items()},
                          results, args.seed), args)
    return EXIT_OK


def _cmd_fixed_sample(args):
    _check_level_arg("fixed-sample", "alpha", args.alpha)
    matrix = _load_matrix(args)
    report = fixed_sample_analysis(matrix, alpha=args.alpha, welch=args.welch)
    results = {
        "bh_count": report.bh_count,
        "adaptz_count": report.adaptz_count,
        "pi0_hat": report.pi0_hat,
        "bh_genes": [g for g, d in zip(matrix.gene_ids, report.bh_decisions) if d],
        "adaptz_genes": [g for g, d in zip(matrix.gene_ids, report.adaptz_decisions) if d],
    }
    _emit(_result_payload("fixed-sample", vars(args), results, args.seed), args)
    return EXIT_OK


def _cmd_sweep_m(args):
    _check_level_arg("sweep-m", "alpha", args.alpha)
    _check_level_arg("sweep-m", "beta", args.beta)
    try:
        m_list = [int(tok) for tok in args.m_list.split(",") if tok.strip()]
    except ValueError:
        raise ArgumentRangeError(f"sweep-m: bad --m-list {args.m_list!r}") from None
    rules = [tok.strip() for tok in args.rules.split(",") if tok.strip()]
    bad = [r for r in rules if r not in RULES]
    if bad:
        raise ArgumentRangeError(f"sweep-m: unknown rules {bad}")
    rows = sweep_m(
        lambda m: make_example(args.example, m=m, pi1=args.pi1),
        m_list,
        procedures=rules,
        alpha=args.alpha,
        beta=args.beta,
        runs=args.runs,
        seed=args.seed,
    )
    dict_rows = [r.to_dict() for r in rows]
    _emit(_result_payload("sweep-m", vars(args), dict_rows, args.seed), args,
          csv_rows=dict_rows)
    return EXIT_TRUNCATED if any(r.truncated_runs for r in rows) else EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "calibrate-gap": _cmd_calibrate_gap,
    "bh-match": _cmd_bh_match,
    "replay": _cmd_replay,
    "fixed-sample": _cmd_fixed_sample,
    "sweep-m": _cmd_sweep_m,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ArgumentRangeError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (CalibrationError, SearchFailureError) as err:
        print(f"search failure: {err}", file=sys.stderr)
        return EXIT_SEARCH
    except SeqfdrError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
