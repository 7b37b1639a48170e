"""Composes audit verdicts and renders them as JSON or aligned text.

A fairness report runs the three-stage pipeline in order: the equal
confusion test, the confusion parity error, then the post hoc residual
analysis (always computed; flagged as post hoc of a non-significant
omnibus test when the test itself is not significant).  Per-group
confusion matrices are summarized both as derived rates and as the two
percentage views (prediction basis and ground-truth basis).

Rendering is deterministic and purely presentational: every number shown
is stored in the report structure at full precision, the renderer only
formats.  The ``structured`` format is versioned JSON that round-trips
losslessly through :func:`report_from_structured`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Literal, Sequence

import numpy as np

from .contingency import (
    ContingencyMatrix,
    DerivedRates,
    OutcomeCell,
    confusion_matrix_of,
    derived_rates,
    outcome_cells_for,
)
from .groups import DroppedGroup, display_group_name
from .stats import (
    ChiSquaredTestResult,
    CochranDiagnostics,
    ConfusionParityError,
    ResidualMatrix,
    SignificancePolicy,
    adjusted_residuals,
    confusion_parity_error,
    equal_confusion_test,
)

__all__ = [
    "FairnessReport",
    "compose_report",
    "render",
    "report_to_structured",
    "report_from_structured",
]

SCHEMA_VERSION = 1

ReportFormat = Literal["structured", "table"]


@dataclass(frozen=True)
class FairnessReport:
    """Composed audit verdict for one grouping of the data."""

    grouping: str
    alpha: float
    observed: ContingencyMatrix
    test: ChiSquaredTestResult
    parity: ConfusionParityError
    residuals: ResidualMatrix
    rate_tables: dict[str, Any]
    warnings: tuple[str, ...]

    @property
    def unfair(self) -> bool:
        return self.test.p_value < self.alpha


def compose_report(
    observed: ContingencyMatrix,
    alpha: float = 0.001,
    policy: SignificancePolicy | None = None,
    grouping: str = "groups",
    dropped_groups: Sequence[DroppedGroup] = (),
) -> FairnessReport:
    """Run test, parity metric, and residual analysis on one matrix."""
    if policy is None:
        policy = SignificancePolicy.strict()
    test = equal_confusion_test(observed, alpha)
    parity = confusion_parity_error(test, observed)
    residuals = adjusted_residuals(observed, test.expected, policy)

    warnings: list[str] = []
    for dropped in dropped_groups:
        warnings.append(f"dropped group: {dropped.describe()}")
    if test.pruned_rows:
        names = ", ".join(display_group_name(name) for name in test.pruned_rows)
        warnings.append(f"pruned zero-total groups before testing: {names}")
    if test.pruned_columns:
        cells = ", ".join(cell.describe() for cell in test.pruned_columns)
        warnings.append(f"pruned zero-total outcome columns before testing: {cells}")
    if not test.cochran.passes:
        warnings.append(
            "Cochran validity check failed: "
            f"{test.cochran.fraction_cells_expected_ge_5 * 100:.0f}% of cells have "
            f"expected count >= 5 (need >= 80%) and the minimum expected count is "
            f"{test.cochran.min_expected:.2f} (need >= 1); "
            "interpret the test with caution"
        )
    if test.p_value >= alpha:
        warnings.append(
            "residual analysis is post hoc of a non-significant omnibus test "
            f"(p = {test.p_value:.3f} >= alpha = {alpha:g})"
        )

    return FairnessReport(
        grouping=grouping,
        alpha=alpha,
        observed=observed,
        test=test,
        parity=parity,
        residuals=residuals,
        rate_tables=_rate_tables(observed, residuals),
        warnings=tuple(warnings),
    )


def _significance_lookup(residuals: ResidualMatrix) -> dict[tuple[str, OutcomeCell], bool]:
    lookup: dict[tuple[str, OutcomeCell], bool] = {}
    for i, name in enumerate(residuals.group_names):
        for j, cell in enumerate(residuals.outcome_cells):
            lookup[(name, cell)] = bool(residuals.significant[i, j])
    return lookup


def _rates_payload(rates: DerivedRates, binary: bool) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "accuracy": rates.accuracy,
        "per_class": [
            {
                "label": c.label,
                "precision": c.precision,
                "recall": c.recall,
                "specificity": c.specificity,
            }
            for c in rates.per_class
        ],
    }
    if binary:
        payload["precision"] = rates.precision
        payload["negative_predictive_value"] = rates.negative_predictive_value
        payload["recall"] = rates.recall
        payload["specificity"] = rates.specificity
    return payload


def _pct(numerator: int, denominator: int) -> float | None:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def _basis_view(
    confusion: np.ndarray,
    labels: tuple[str, ...],
    group_total: int,
    basis: Literal["predicted", "actual"],
    significant_cell: dict[OutcomeCell, bool],
) -> list[dict[str, Any]]:
    view = []
    k = len(labels)
    for b in range(k):
        slice_counts = confusion[:, b] if basis == "predicted" else confusion[b, :]
        subtotal = int(slice_counts.sum())
        cells = []
        for other in range(k):
            if basis == "predicted":
                actual_label, predicted_label = labels[other], labels[b]
                count = int(confusion[other, b])
            else:
                actual_label, predicted_label = labels[b], labels[other]
                count = int(confusion[b, other])
            cells.append(
                {
                    "label": labels[other],
                    "pct": _pct(count, group_total),
                    "basis_pct": _pct(count, subtotal),
                    "significant": significant_cell.get(OutcomeCell(actual_label, predicted_label), False),
                }
            )
        view.append({"class": labels[b], "cells": cells, "subtotal_pct": _pct(subtotal, group_total)})
    return view


def _rate_tables(observed: ContingencyMatrix, residuals: ResidualMatrix) -> dict[str, Any]:
    labels = observed.labels
    binary = len(labels) == 2
    lookup = _significance_lookup(residuals)
    groups = []
    for i, name in enumerate(observed.group_names):
        confusion = confusion_matrix_of(observed, i)
        group_total = int(confusion.sum())
        significant_cell = {
            cell: flag for (group, cell), flag in lookup.items() if group == name
        }
        entry: dict[str, Any] = {
            "name": name,
            "size": group_total,
            "confusion": [[int(v) for v in row] for row in confusion],
            "rates": _rates_payload(derived_rates(confusion, labels), binary)
            if group_total > 0
            else None,
            "prediction_basis": _basis_view(confusion, labels, group_total, "predicted", significant_cell),
            "actual_basis": _basis_view(confusion, labels, group_total, "actual", significant_cell),
        }
        groups.append(entry)
    return {"labels": list(labels), "groups": groups}


# --------------------------------------------------------------------------
# Structured (JSON) format


def report_to_structured(report: FairnessReport) -> dict[str, Any]:
    """Lossless dict form of a report with schema-stable field names."""
    test = report.test
    residuals = report.residuals
    return {
        "schema_version": SCHEMA_VERSION,
        "grouping": report.grouping,
        "alpha": report.alpha,
        "verdict": "unfair" if report.unfair else "fair",
        "n": report.observed.n,
        "labels": list(report.observed.labels),
        "group_names": list(report.observed.group_names),
        "outcome_cells": [
            {"actual": c.actual, "predicted": c.predicted} for c in report.observed.outcome_cells
        ],
        "observed": [[int(v) for v in row] for row in report.observed.counts],
        "test": {
            "statistic": float(test.statistic),
            "dof": int(test.dof),
            "p_value": float(test.p_value),
            "pruned_rows": list(test.pruned_rows),
            "pruned_columns": [
                {"actual": c.actual, "predicted": c.predicted} for c in test.pruned_columns
            ],
            "expected": [[float(v) for v in row] for row in test.expected],
            "cochran": {
                "fraction_cells_expected_ge_5": float(test.cochran.fraction_cells_expected_ge_5),
                "min_expected": float(test.cochran.min_expected),
                "passes": bool(test.cochran.passes),
            },
        },
        "parity": {
            "phi": float(report.parity.phi),
            "strength": report.parity.strength,
            "min_qr": int(report.parity.min_qr),
        },
        "residuals": {
            "policy": {"kind": residuals.policy.kind, "alpha": float(residuals.policy.alpha)},
            "critical_value": float(residuals.critical_value),
            "values": [[float(v) for v in row] for row in residuals.residuals],
            "significant": [[bool(v) for v in row] for row in residuals.significant],
        },
        "rate_tables": report.rate_tables,
        "warnings": list(report.warnings),
    }


def report_from_structured(data: dict[str, Any] | str) -> FairnessReport:
    """Rebuild a report from its structured form (inverse of rendering)."""
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {data.get('schema_version')!r}")

    labels = tuple(data["labels"])
    observed = ContingencyMatrix(
        np.array(data["observed"], dtype=np.int64),
        tuple(data["group_names"]),
        outcome_cells_for(labels),
    )
    pruned_rows = tuple(data["test"]["pruned_rows"])
    pruned_columns = tuple(
        OutcomeCell(c["actual"], c["predicted"]) for c in data["test"]["pruned_columns"]
    )
    kept_row_idx = [i for i, name in enumerate(observed.group_names) if name not in pruned_rows]
    kept_col_idx = [
        j for j, cell in enumerate(observed.outcome_cells) if cell not in pruned_columns
    ]
    kept_names = tuple(observed.group_names[i] for i in kept_row_idx)
    kept_cells = tuple(observed.outcome_cells[j] for j in kept_col_idx)
    pruned_observed = observed.counts[np.ix_(kept_row_idx, kept_col_idx)]

    cochran = CochranDiagnostics(
        fraction_cells_expected_ge_5=data["test"]["cochran"]["fraction_cells_expected_ge_5"],
        min_expected=data["test"]["cochran"]["min_expected"],
        passes=data["test"]["cochran"]["passes"],
    )
    test = ChiSquaredTestResult(
        statistic=data["test"]["statistic"],
        dof=data["test"]["dof"],
        p_value=data["test"]["p_value"],
        observed=pruned_observed,
        expected=np.array(data["test"]["expected"], dtype=float),
        group_names=kept_names,
        outcome_cells=kept_cells,
        n=int(pruned_observed.sum()),
        pruned_rows=pruned_rows,
        pruned_columns=pruned_columns,
        cochran=cochran,
        alpha=data["alpha"],
    )
    residuals = ResidualMatrix(
        residuals=np.array(data["residuals"]["values"], dtype=float),
        policy=SignificancePolicy(
            kind=data["residuals"]["policy"]["kind"],
            alpha=data["residuals"]["policy"]["alpha"],
        ),
        critical_value=data["residuals"]["critical_value"],
        significant=np.array(data["residuals"]["significant"], dtype=bool),
        group_names=kept_names,
        outcome_cells=kept_cells,
    )
    parity = ConfusionParityError(
        phi=data["parity"]["phi"],
        strength=data["parity"]["strength"],
        min_qr=data["parity"]["min_qr"],
    )
    return FairnessReport(
        grouping=data["grouping"],
        alpha=data["alpha"],
        observed=observed,
        test=test,
        parity=parity,
        residuals=residuals,
        rate_tables=data["rate_tables"],
        warnings=tuple(data["warnings"]),
    )


# --------------------------------------------------------------------------
# Table-text format


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5)) if value >= 0 else -int(math.floor(-value + 0.5))


def _fmt_pct_pair(pct: float | None, basis_pct: float | None, mark: str = "") -> str:
    pct_text = "n/a" if pct is None else f"{_round_half_up(pct)}%"
    basis_text = "n/a" if basis_pct is None else f"{_round_half_up(basis_pct)}%"
    return f"{pct_text} ({basis_text}){mark}"


def _fmt_rate(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _fmt_p(p_value: float) -> str:
    if p_value < 0.001:
        return "p < 0.001"
    return f"p = {p_value:.3f}"


def _aligned(rows: list[list[str]], sep: str = "  ") -> list[str]:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [text.ljust(widths[0]) if i == 0 else text.rjust(widths[i]) for i, text in enumerate(row)]
        lines.append(sep.join(cells).rstrip())
    return lines


def _render_table(report: FairnessReport) -> str:
    test = report.test
    residuals = report.residuals
    lines: list[str] = []
    title = f"equal confusion audit: {report.grouping}"
    lines.append(title)
    lines.append("=" * len(title))
    lines.append(
        f"n = {report.observed.n} | groups = {report.observed.q} | "
        f"outcome cells = {report.observed.r} | labels: {', '.join(report.observed.labels)}"
    )
    lines.append("")
    verdict = "unfair" if report.unfair else "fair"
    lines.append(f"verdict: {verdict} at alpha = {report.alpha:g} ({_fmt_p(test.p_value)})")
    lines.append(f"chi-squared = {test.statistic:.2f}, dof = {test.dof}")
    lines.append(
        f"confusion parity error: phi = {report.parity.phi:.2f} "
        f"({report.parity.strength}; min(q, r) = {report.parity.min_qr})"
    )
    lines.append(
        f"residual policy: {residuals.policy.describe()}, "
        f"cells with |R| > {residuals.critical_value:.2f} marked *"
    )
    lines.append("")

    lines.append("observed / expected / residual by outcome cell (actual, predicted):")
    header = ["group"]
    for cell in residuals.outcome_cells:
        header.extend([f"({cell.actual},{cell.predicted}) O", "E", "R"])
    table = [header]
    for i, name in enumerate(residuals.group_names):
        row = [display_group_name(name)]
        for j in range(len(residuals.outcome_cells)):
            mark = "*" if residuals.significant[i, j] else ""
            row.extend(
                [
                    str(int(test.observed[i, j])),
                    str(_round_half_up(float(test.expected[i, j]))),
                    f"{residuals.residuals[i, j]:.1f}{mark}",
                ]
            )
        table.append(row)
    lines.extend(_aligned(table))
    lines.append("")

    if report.warnings:
        lines.append("warnings:")
        lines.extend(f"  - {warning}" for warning in report.warnings)
        lines.append("")

    lines.extend(_render_rates(report))
    labels = report.rate_tables["labels"]
    lines.extend(
        _render_basis(
            report,
            "prediction_basis",
            "per-group shares with predictions as the basis "
            "(% of group, (% of predicted-class subtotal)):",
            "pred",
            "act",
            labels,
        )
    )
    lines.extend(
        _render_basis(
            report,
            "actual_basis",
            "per-group shares with actual values as the basis "
            "(% of group, (% of actual-class subtotal)):",
            "act",
            "pred",
            labels,
        )
    )
    return "\n".join(lines).rstrip("\n") + "\n"


def _render_rates(report: FairnessReport) -> list[str]:
    labels = report.rate_tables["labels"]
    binary = len(labels) == 2
    lines = ["derived rates by group:"]
    if binary:
        table = [["group", "accuracy", "precision", "npv", "recall", "specificity"]]
        for group in report.rate_tables["groups"]:
            rates = group["rates"]
            if rates is None:
                table.append([display_group_name(group["name"]), "n/a", "n/a", "n/a", "n/a", "n/a"])
            else:
                table.append(
                    [
                        display_group_name(group["name"]),
                        _fmt_rate(rates["accuracy"]),
                        _fmt_rate(rates["precision"]),
                        _fmt_rate(rates["negative_predictive_value"]),
                        _fmt_rate(rates["recall"]),
                        _fmt_rate(rates["specificity"]),
                    ]
                )
    else:
        table = [["group", "class", "accuracy", "precision", "recall", "specificity"]]
        for group in report.rate_tables["groups"]:
            rates = group["rates"]
            if rates is None:
                table.append([display_group_name(group["name"]), "-", "n/a", "n/a", "n/a", "n/a"])
                continue
            for index, per_class in enumerate(rates["per_class"]):
                table.append(
                    [
                        display_group_name(group["name"]) if index == 0 else "",
                        per_class["label"],
                        _fmt_rate(rates["accuracy"]) if index == 0 else "",
                        _fmt_rate(per_class["precision"]),
                        _fmt_rate(per_class["recall"]),
                        _fmt_rate(per_class["specificity"]),
                    ]
                )
    lines.extend(_aligned(table))
    lines.append("")
    return lines


def _render_basis(
    report: FairnessReport,
    view_key: str,
    title: str,
    basis_tag: str,
    other_tag: str,
    labels: list[str],
) -> list[str]:
    lines = [title]
    header = ["group"]
    for basis_label in labels:
        for other_label in labels:
            header.append(f"{basis_tag}={basis_label} {other_tag}={other_label}")
        header.append(f"{basis_tag}={basis_label} total")
    table = [header]
    for group in report.rate_tables["groups"]:
        row = [display_group_name(group["name"])]
        for block in group[view_key]:
            for cell in block["cells"]:
                mark = "*" if cell["significant"] else ""
                row.append(_fmt_pct_pair(cell["pct"], cell["basis_pct"], mark))
            subtotal = block["subtotal_pct"]
            row.append("n/a" if subtotal is None else f"{_round_half_up(subtotal)}% (100%)")
        table.append(row)
    lines.extend(_aligned(table))
    lines.append("")
    return lines


def render(report: FairnessReport, format: ReportFormat = "table") -> str:
    """Render a report as versioned JSON (``structured``) or text tables."""
    if format == "structured":
        return json.dumps(report_to_structured(report), indent=2) + "\n"
    if format == "table":
        return _render_table(report)
    raise ValueError(f"unknown format {format!r}; use 'structured' or 'table'")
