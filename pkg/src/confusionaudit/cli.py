"""Command-line frontend: audit data files, COMPAS extracts, or bundled tables.

Subcommands
-----------
audit
    Audit a labeled CSV (``--data``) across one or more sensitive
    attributes, or a pre-built contingency table (``--contingency``).
compas
    Ingest a COMPAS-style pretrial extract, apply the screening-window /
    assessment-presence / time-outside filters, binarize decile scores,
    and audit the result.
reproduce
    Recompute the bundled case-study tables and compare against the
    published values.

Exit status: 0 when every audit is fair at alpha (or every reproduction
check passes), 2 when at least one audit is unfair, 1 on execution errors.
Defaults can be supplied by a JSON config file named in the
``CONFUSION_AUDIT_CONFIG`` environment variable; explicit flags win over
the config file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, TextIO

from .contingency import build_contingency
from .estimator import resolve_policy
from .groups import GroupingSpec, audit_plan, expand_groups
from .ingestion import (
    NEGATIVE_LABEL,
    POSITIVE_LABEL,
    CompasAdapterConfig,
    DatasetConfig,
    compas_filter,
    load_contingency,
    load_samples,
)
from .report import FairnessReport, compose_report, render, report_to_structured
from .reproduce import run_reproduce

CONFIG_ENV_VAR = "CONFUSION_AUDIT_CONFIG"

EXIT_FAIR = 0
EXIT_ERROR = 1
EXIT_UNFAIR = 2


def _comma_list(text: str) -> list[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}")
    return items


def _add_shared_audit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.001, help="significance level (default 0.001)")
    parser.add_argument(
        "--residual-policy",
        choices=("strict", "bonferroni"),
        default="strict",
        help="residual significance policy (default strict)",
    )
    parser.add_argument(
        "--policy-alpha",
        type=float,
        default=None,
        help="base level for the residual policy (default 0.001 strict, 0.05 bonferroni)",
    )
    parser.add_argument(
        "--format",
        choices=("structured", "table"),
        default="table",
        help="report rendering (default table)",
    )
    parser.add_argument("--out", default=None, help="directory to write one report file per grouping")
    parser.add_argument(
        "--min-group-size",
        type=int,
        default=0,
        help="drop groups smaller than this before auditing (default 0)",
    )
    parser.add_argument(
        "--timestamp",
        action="store_true",
        help="include a generation timestamp in the output (off by default, keeps output deterministic)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confusion-audit",
        description="Equal confusion fairness auditing for classification systems.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    audit = subparsers.add_parser("audit", help="audit a labeled CSV or a contingency table")
    source = audit.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", help="labeled CSV with a header row")
    source.add_argument("--contingency", help="pre-built contingency table (JSON)")
    audit.add_argument("--attrs", type=_comma_list, default=None, help="sensitive attribute columns, comma-separated")
    audit.add_argument("--intersect", action="store_true", help="also audit the intersection of all attributes")
    audit.add_argument("--pred-col", default="predicted", help="prediction column (default 'predicted')")
    audit.add_argument("--actual-col", default="actual", help="ground-truth column (default 'actual')")
    audit.add_argument(
        "--positive-labels",
        type=_comma_list,
        default=None,
        help="raw label values mapped to the positive class; everything else is negative",
    )
    audit.add_argument(
        "--missing-policy",
        choices=("drop_row", "fail"),
        default="drop_row",
        help="what to do with rows missing a configured value (default drop_row)",
    )
    _add_shared_audit_arguments(audit)

    compas = subparsers.add_parser("compas", help="audit a COMPAS-style pretrial extract")
    compas.add_argument("data", help="CSV extract with a header row")
    compas.add_argument("--attrs", type=_comma_list, default=["sex", "race"], help="sensitive attribute columns")
    compas.add_argument("--intersect", action="store_true", help="also audit the intersection of all attributes")
    compas.add_argument("--score-col", default="v_decile_score", help="decile score column")
    compas.add_argument(
        "--score-threshold",
        type=int,
        default=5,
        help="scores >= threshold count as a positive prediction (default 5)",
    )
    compas.add_argument("--outcome-col", default="two_year_recid", help="two-year outcome column")
    compas.add_argument(
        "--positive-outcome",
        type=_comma_list,
        default=["1"],
        help="outcome values mapped to actual positive (default '1')",
    )
    compas.add_argument("--window-days", type=int, default=30, help="screening window in days (default 30)")
    compas.add_argument(
        "--screening-days-col",
        default="days_b_screening_arrest",
        help="days between screening and arrest/charge",
    )
    compas.add_argument(
        "--assessment-col",
        default="is_recid",
        help="assessment presence flag column ('' disables the flag check)",
    )
    compas.add_argument("--assessment-missing", default="-1", help="flag value marking a missing assessment")
    compas.add_argument(
        "--days-outside-col",
        default=None,
        help="days outside a correctional facility ('' or unset skips the rule)",
    )
    compas.add_argument("--two-years-days", type=int, default=730, help="minimum days outside (default 730)")
    compas.add_argument(
        "--charge-degree-col",
        default="c_charge_degree",
        help="charge degree column ('' disables the exclusion)",
    )
    compas.add_argument(
        "--exclude-charge-degrees",
        type=_comma_list,
        default=["O"],
        help="charge degrees to exclude (default 'O', ordinary traffic offenses)",
    )
    compas.add_argument(
        "--on-invalid",
        choices=("fail", "drop_row"),
        default="fail",
        help="unparseable scores and missing attributes: fail or drop (default fail)",
    )
    _add_shared_audit_arguments(compas)

    reproduce = subparsers.add_parser("reproduce", help="compare bundled tables against published values")
    reproduce.add_argument(
        "--only",
        type=_comma_list,
        default=None,
        help="restrict to named analyses (sex, race, intersectional)",
    )
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    config_path = os.environ.get(CONFIG_ENV_VAR)
    if not config_path:
        return
    raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError(f"{config_path}: config must be a JSON object")
    # Defaults apply to whichever subcommand is being run; unknown keys are
    # rejected so typos do not silently do nothing.
    subparsers = next(
        action for action in parser._actions if isinstance(action, argparse._SubParsersAction)
    )
    command = next((arg for arg in argv if not arg.startswith("-")), None)
    if command not in subparsers.choices:
        return
    sub = subparsers.choices[command]
    known = {action.dest for action in sub._actions}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"{config_path}: unknown config key(s) {unknown}")
    sub.set_defaults(**raw)


def _emit(reports: list[tuple[str, FairnessReport]], args: argparse.Namespace, err: TextIO) -> None:
    stamp = (
        datetime.now(timezone.utc).isoformat(timespec="seconds") if getattr(args, "timestamp", False) else None
    )
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    for slug, report in reports:
        if args.format == "structured":
            payload = report_to_structured(report)
            if stamp is not None:
                payload["generated_at"] = stamp
            text = json.dumps(payload, indent=2) + "\n"
        else:
            text = render(report, "table")
            if stamp is not None:
                text = f"generated-at: {stamp}\n{text}"
        if out_dir is None:
            sys.stdout.write(text)
        else:
            target = out_dir / f"{slug}.{'json' if args.format == 'structured' else 'txt'}"
            target.write_text(text, encoding="utf-8")
            print(f"wrote {target}", file=err)


def _slugify(label: str) -> str:
    safe = [ch if ch.isalnum() or ch in "-_." else "-" for ch in label]
    slug = "".join(safe).strip("-")
    while "--" in slug:
        slug = slug.replace("--", "-")
    return slug or "report"


def _audit_samples(samples, attribute_names, args, err: TextIO, label_order) -> list[tuple[str, FairnessReport]]:
    if not samples:
        raise ValueError("no samples survived ingestion")
    policy = resolve_policy(args.residual_policy, args.policy_alpha)
    plan = [
        GroupingSpec(attributes=spec.attributes, min_group_size=args.min_group_size)
        for spec in audit_plan(attribute_names, args.intersect)
    ]
    reports = []
    for spec in plan:
        expansion = expand_groups(samples, attribute_names, spec)
        if not expansion.samples:
            raise ValueError(f"no samples left for grouping {spec.describe()!r} after dropping groups")
        matrix = build_contingency(
            expansion.samples, label_order=label_order, group_order=expansion.group_order
        )
        report = compose_report(
            matrix,
            alpha=args.alpha,
            policy=policy,
            grouping=spec.describe(),
            dropped_groups=expansion.dropped,
        )
        reports.append((_slugify("-x-".join(spec.attributes)), report))
    return reports


def _run_audit(args: argparse.Namespace, err: TextIO) -> int:
    if args.contingency is not None:
        if args.attrs is not None or args.intersect:
            raise ValueError("--attrs/--intersect apply to --data audits, not --contingency")
        matrix = load_contingency(args.contingency)
        policy = resolve_policy(args.residual_policy, args.policy_alpha)
        report = compose_report(
            matrix, alpha=args.alpha, policy=policy, grouping=Path(args.contingency).stem
        )
        reports = [(_slugify(Path(args.contingency).stem), report)]
    else:
        if not args.attrs:
            raise ValueError("--data audits require --attrs")
        config = DatasetConfig(
            path=args.data,
            attribute_columns=tuple(args.attrs),
            predicted_column=args.pred_col,
            actual_column=args.actual_col,
            positive_labels=frozenset(args.positive_labels) if args.positive_labels else None,
            missing_policy=args.missing_policy,
        )
        samples, ingest_report = load_samples(config)
        print(f"[ingest] {ingest_report.describe()}", file=err)
        label_order = (POSITIVE_LABEL, NEGATIVE_LABEL) if args.positive_labels else None
        reports = _audit_samples(samples, tuple(args.attrs), args, err, label_order)
    _emit(reports, args, err)
    return EXIT_UNFAIR if any(report.unfair for _, report in reports) else EXIT_FAIR


def _run_compas(args: argparse.Namespace, err: TextIO) -> int:
    config = CompasAdapterConfig(
        screening_window_days=args.window_days,
        score_column=args.score_col,
        score_positive_threshold=args.score_threshold,
        outcome_column=args.outcome_col,
        positive_outcome_values=frozenset(args.positive_outcome),
        screening_days_column=args.screening_days_col,
        assessment_flag_column=args.assessment_col or None,
        assessment_missing_value=args.assessment_missing,
        days_outside_column=args.days_outside_col or None,
        two_years_days=args.two_years_days,
        charge_degree_column=args.charge_degree_col or None,
        excluded_charge_degrees=frozenset(args.exclude_charge_degrees),
        attribute_columns=tuple(args.attrs),
        on_invalid=args.on_invalid,
    )
    try:
        with open(args.data, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise ValueError(f"cannot read {args.data}: {exc}") from exc
    samples, filter_report = compas_filter(rows, config)
    print(f"[compas] {filter_report.describe()}", file=err)
    reports = _audit_samples(samples, tuple(args.attrs), args, err, (POSITIVE_LABEL, NEGATIVE_LABEL))
    _emit(reports, args, err)
    return EXIT_UNFAIR if any(report.unfair for _, report in reports) else EXIT_FAIR


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    args = parser.parse_args(argv)
    try:
        if args.command == "audit":
            return _run_audit(args, sys.stderr)
        if args.command == "compas":
            return _run_compas(args, sys.stderr)
        return run_reproduce(args.only, sys.stdout)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
