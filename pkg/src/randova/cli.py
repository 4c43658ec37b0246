"""Command-line front end.

Every subcommand prints a single JSON report document on standard output;
`curve` can additionally write the curve as CSV.  Exit status: 0 on success,
1 when `reproduce` finds a failing check, 2 on malformed input or bad flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .documents import dumps_report, load_table, report_document, table_to_document
from .enumeration import (
    LsMeasure,
    RandomizationSpace,
    latin_square_count,
    rcb_space_size,
)
from .errors import RandovaError, SpaceTooLarge
from .expected_ms import expected_ms, ls_difference_decomposition
from .inference import (
    DEFAULT_MC_ERROR_SD,
    DEFAULT_MC_REPLICATIONS,
    monte_carlo_with_errors,
    survival_curve,
    type1_error,
)
from .potential_outcomes import DesignKind, PotentialOutcomeTable
from .reproduce import (
    checks_to_payload,
    format_report,
    load_bundled_tables,
    run_reproduction,
)


def _table_inputs(path: str, table: PotentialOutcomeTable) -> dict:
    doc = table_to_document(table)
    doc.pop("outcomes")
    doc["table"] = path
    return doc


def _space_from_args(args: argparse.Namespace) -> RandomizationSpace:
    if getattr(args, "sample", None) is not None:
        if args.sample < 1:
            raise RandovaError(f"--sample must be >= 1, got {args.sample}")
        seed = args.seed if args.seed is not None else 0
        return RandomizationSpace.sample(
            args.sample,
            seed=seed,
            burn_in=args.burn_in,
            ls_measure=LsMeasure(args.ls_measure),
        )
    return RandomizationSpace.exact()


def _add_space_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sample",
        type=int,
        default=None,
        metavar="N",
        help="sample N assignments uniformly instead of exact enumeration",
    )
    parser.add_argument(
        "--burn-in",
        type=int,
        default=None,
        help="Latin-square sampler moves between draws (default 2*T^3)",
    )
    parser.add_argument(
        "--ls-measure",
        choices=[m.value for m in LsMeasure],
        default=LsMeasure.ALL_SQUARES.value,
        help="Latin-square sampling measure (default: all squares)",
    )


def _cmd_expected_ms(args: argparse.Namespace) -> int:
    table = load_table(args.table)
    ems = expected_ms(table)
    payload = {
        "design": table.design.value,
        "e_s0": ems.e_s0,
        "e_s1": ems.e_s1,
        "e_s0_neyman": ems.e_s0_neyman,
        "interaction_term": ems.interaction_term,
        "treatment_effect_term": ems.treatment_effect_term,
        "difference": ems.difference,
        "ls_lower_bound": ems.ls_lower_bound,
    }
    if table.design is DesignKind.LS:
        dec = ls_difference_decomposition(table)
        payload["ls_difference_decomposition"] = {
            "interaction_sum": dec.interaction_sum,
            "neg_eta_variance_sum": dec.neg_eta_variance_sum,
            "correlation_term": dec.correlation_term,
            "constant_case_difference": dec.constant_case_difference,
        }
    doc = report_document("expected_ms", _table_inputs(args.table, table), payload)
    print(dumps_report(doc))
    return 0


def _cmd_type1(args: argparse.Namespace) -> int:
    table = load_table(args.table)
    space = _space_from_args(args)
    report = type1_error(table, alpha=args.alpha, space=space)
    payload = {
        "rejection_probability": report.rejection_probability,
        "cutoff": report.cutoff,
        "alpha": report.alpha,
        "null_status": {
            "neyman_null_holds": report.null_status.neyman_null_holds,
            "fisher_sharp_null_holds": report.null_status.fisher_sharp_null_holds,
        },
    }
    doc = report_document(
        "type1_error", _table_inputs(args.table, table), payload, seed=args.seed
    )
    print(dumps_report(doc))
    return 0


def _cmd_curve(args: argparse.Namespace) -> int:
    table = load_table(args.table)
    space = _space_from_args(args)
    points = args.grid if args.grid is not None else 200
    if points < 2:
        raise RandovaError(f"--grid needs at least 2 points, got {points}")
    curve = survival_curve(table, space=space, grid_points=points)
    payload = {
        "df_treatment": curve.df_treatment,
        "df_residual": curve.df_residual,
        "cutoffs": curve.cutoffs,
        "p_randomization": curve.p_randomization,
        "p_reference": curve.p_reference,
    }
    if args.csv is not None:
        path = Path(args.csv)
        rows = ["k,p_randomization,p_reference"]
        for k, pr, pf in zip(
            curve.cutoffs.tolist(),
            curve.p_randomization.tolist(),
            curve.p_reference.tolist(),
        ):
            rows.append(f"{k!r},{pr!r},{pf!r}")
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        payload["csv"] = str(path)
    doc = report_document(
        "survival_curve", _table_inputs(args.table, table), payload, seed=args.seed
    )
    print(dumps_report(doc))
    return 0


def _cmd_mc(args: argparse.Namespace) -> int:
    table = load_table(args.table)
    space = _space_from_args(args)
    seed = args.seed if args.seed is not None else 0
    report = monte_carlo_with_errors(
        table,
        sigma_eps=args.sigma_eps,
        replications=args.reps,
        alpha=args.alpha,
        seed=seed,
        space=space,
        keep_replications=args.keep_reps,
    )
    payload = {
        "replications": report.replications,
        "error_sd": report.error_sd,
        "alpha": report.alpha,
        "cutoff": report.cutoff,
        "mean_rejection": report.mean_rejection,
        "standard_error": report.standard_error,
        "rejection_probabilities": report.rejection_probabilities,
    }
    doc = report_document(
        "monte_carlo", _table_inputs(args.table, table), payload, seed=seed
    )
    print(dumps_report(doc))
    return 0


def _cmd_enumerate_count(args: argparse.Namespace) -> int:
    design = DesignKind(args.design)
    if design is DesignKind.RCB:
        if args.blocks is None or args.treatments is None:
            raise RandovaError("rcb counts need --blocks and --treatments")
        count = rcb_space_size(args.blocks, args.treatments)
        payload = {
            "design": design.value,
            "blocks": args.blocks,
            "treatments": args.treatments,
            "count": count,
        }
    else:
        order = args.order if args.order is not None else args.treatments
        if order is None:
            raise RandovaError("ls counts need --order")
        count = latin_square_count(order)
        if count is None:
            raise RandovaError(
                f"no exact Latin-square count available for order {order}"
            )
        payload = {"design": design.value, "order": order, "count": count}
    doc = report_document("enumerate_count", {}, payload)
    print(dumps_report(doc))
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    tables = load_bundled_tables(args.tables_dir)
    checks = run_reproduction(tables)
    if args.json:
        doc = report_document(
            "reproduce",
            {"tables_dir": args.tables_dir or "bundled"},
            checks_to_payload(checks),
        )
        print(dumps_report(doc))
    else:
        print(format_report(checks))
    return 0 if all(check.passed for check in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randova",
        description=(
            "Exact randomization inference for randomized complete block "
            "and Latin square designs"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ems = sub.add_parser(
        "expected-ms", help="closed-form expected mean sums of squares"
    )
    p_ems.add_argument("table", help="path to a table JSON document")
    p_ems.set_defaults(func=_cmd_expected_ms)

    p_type1 = sub.add_parser(
        "type1", help="exact Type I error of the standard ANOVA F-test"
    )
    p_type1.add_argument("table")
    p_type1.add_argument("--alpha", type=float, default=0.05)
    p_type1.add_argument("--seed", type=int, default=None)
    _add_space_flags(p_type1)
    p_type1.set_defaults(func=_cmd_type1)

    p_curve = sub.add_parser(
        "curve", help="survival curve of F under randomization vs the F reference"
    )
    p_curve.add_argument("table")
    p_curve.add_argument(
        "--grid", type=int, default=None, help="number of grid points (default 200)"
    )
    p_curve.add_argument("--csv", default=None, help="also write the curve as CSV")
    p_curve.add_argument("--seed", type=int, default=None)
    _add_space_flags(p_curve)
    p_curve.set_defaults(func=_cmd_curve)

    p_mc = sub.add_parser(
        "mc", help="Monte Carlo rejection probability with technical errors"
    )
    p_mc.add_argument("table")
    p_mc.add_argument("--sigma-eps", type=float, default=DEFAULT_MC_ERROR_SD)
    p_mc.add_argument("--reps", type=int, default=DEFAULT_MC_REPLICATIONS)
    p_mc.add_argument("--alpha", type=float, default=0.05)
    p_mc.add_argument("--seed", type=int, default=None)
    p_mc.add_argument(
        "--keep-reps",
        action="store_true",
        help="retain per-replication rejection probabilities in the report",
    )
    _add_space_flags(p_mc)
    p_mc.set_defaults(func=_cmd_mc)

    p_count = sub.add_parser(
        "enumerate-count", help="cardinality of a randomization space"
    )
    p_count.add_argument("--design", choices=["rcb", "ls"], required=True)
    p_count.add_argument("--blocks", type=int, default=None)
    p_count.add_argument("--treatments", type=int, default=None)
    p_count.add_argument("--order", type=int, default=None)
    p_count.set_defaults(func=_cmd_enumerate_count)

    p_rep = sub.add_parser(
        "reproduce", help="verify the bundled reference tables end to end"
    )
    p_rep.add_argument("--json", action="store_true", help="machine-readable results")
    p_rep.add_argument(
        "--tables-dir",
        default=None,
        help="load table1..table4 from this directory instead of the bundled data",
    )
    p_rep.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(
            "hint: pass --sample N (and --seed) to sample the space uniformly",
            file=sys.stderr,
        )
        return 2
    except RandovaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
