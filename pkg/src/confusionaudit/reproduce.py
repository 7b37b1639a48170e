"""Recompute the bundled case-study tables and compare against published values.

The package ships the observed contingency tables for the sex, race, and
intersectional analyses of the COMPAS pretrial data, together with the
published expected counts, adjusted residuals, significance marks, parity
values, and overall confusion-matrix rates.  This module re-runs the full
pipeline on the observed counts and prints a side-by-side comparison with
a pass/fail status per check.
"""

from __future__ import annotations

import json
from contextlib import ExitStack
from importlib.resources import as_file, files
from typing import Any, Sequence, TextIO

import numpy as np

from .contingency import derived_rates
from .groups import display_group_name
from .ingestion import load_contingency
from .report import compose_report

__all__ = ["run_reproduce", "load_bundled_table", "load_published_values"]

_TABLES = files("confusionaudit") / "tables"


def load_bundled_table(name: str):
    """Load one bundled contingency fixture (for example ``sex.json``)."""
    with ExitStack() as stack:
        path = stack.enter_context(as_file(_TABLES / name))
        return load_contingency(path)


def load_published_values() -> dict[str, Any]:
    """The published reference values shipped alongside the fixtures."""
    return json.loads((_TABLES / "published.json").read_text(encoding="utf-8"))


class _Comparison:
    def __init__(self, out: TextIO) -> None:
        self.out = out
        self.checks = 0
        self.failures = 0
        self.noted = 0

    def line(self, text: str = "") -> None:
        print(text, file=self.out)

    def check(self, label: str, computed: str, published: str, tolerance: str, ok: bool) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
        status = "PASS" if ok else "FAIL"
        self.line(f"  {label:<34} {computed:>12}  {published:>12}  {tolerance:>10}  {status}")

    def note(self, label: str, computed: str, published: str, tolerance: str, detail: str) -> None:
        self.noted += 1
        self.line(f"  {label:<34} {computed:>12}  {published:>12}  {tolerance:>10}  NOTED")
        self.line(f"    discrepancy: {detail}")


def _compare_analysis(spec: dict[str, Any], tolerances: dict[str, float], cmp: _Comparison) -> None:
    observed = load_bundled_table(spec["fixture"])
    report = compose_report(observed, alpha=0.001, grouping=spec["name"])

    cmp.line(
        f"{spec['name']} ({observed.q} groups x {observed.r} outcome cells, n = {observed.n})"
    )
    cmp.line(f"  {'check':<34} {'computed':>12}  {'published':>12}  {'tolerance':>10}  status")

    phi_tol = tolerances["phi"]
    phi = report.parity.phi
    cmp.check(
        "confusion parity error phi",
        f"{phi:.4f}",
        f"{spec['phi']:.2f}",
        f"{phi_tol:g}",
        abs(phi - spec["phi"]) <= phi_tol,
    )

    p = report.test.p_value
    cmp.check(
        "omnibus verdict",
        "p < 0.001" if p < 0.001 else f"p = {p:.3f}",
        "p < 0.001",
        "-",
        p < 0.001,
    )

    expected_tol = tolerances["expected"]
    expected_dev = float(np.max(np.abs(report.test.expected - np.array(spec["expected"], dtype=float))))
    cmp.check(
        "expected counts max |dev|",
        f"{expected_dev:.3f}",
        "integers",
        f"{expected_tol:g}",
        expected_dev <= expected_tol,
    )

    residual_tol = tolerances["residual"]
    residual_dev = float(
        np.max(np.abs(report.residuals.residuals - np.array(spec["residuals"], dtype=float)))
    )
    cmp.check(
        "residuals max |dev|",
        f"{residual_dev:.4f}",
        "1 decimal",
        f"{residual_tol:g}",
        residual_dev <= residual_tol,
    )

    published_flags = np.array(spec["significant"], dtype=bool)
    computed_flags = report.residuals.significant
    matches = bool(np.array_equal(computed_flags, published_flags))
    computed_count = int(computed_flags.sum())
    published_count = int(published_flags.sum())
    if matches or spec["enforce_significance"]:
        cmp.check(
            "significant cells",
            str(computed_count),
            str(published_count),
            "set match",
            matches,
        )
    else:
        cells = [
            f"{display_group_name(report.residuals.group_names[i])} {report.residuals.outcome_cells[j].describe()}"
            for i, j in zip(*np.nonzero(computed_flags != published_flags))
        ]
        cmp.note(
            "significant cells",
            str(computed_count),
            str(published_count),
            "set match",
            "; ".join(cells),
        )
    for note in spec.get("notes", ()):
        cmp.line(f"  note: {note}")
    cmp.line()


def _compare_overall(published: dict[str, Any], cmp: _Comparison) -> None:
    overall = published["overall_confusion"]
    counts = np.array(overall["counts"], dtype=np.int64)
    rates = derived_rates(counts, overall["labels"])
    cmp.line(f"overall confusion matrix (n = {int(counts.sum())})")
    cmp.line(f"  {'check':<34} {'computed':>12}  {'published':>12}  {'tolerance':>10}  status")
    computed = {
        "accuracy": rates.accuracy,
        "precision": rates.precision,
        "recall": rates.recall,
    }
    for name, value in computed.items():
        target = overall["rates"][name]
        cmp.check(name, f"{value:.4f}", f"{target:.2f}", "0.005", abs(value - target) <= 0.005)
    cmp.line()


def run_reproduce(only: Sequence[str] | None, out: TextIO) -> int:
    """Print the comparison; exit status 0 when every enforced check passes."""
    published = load_published_values()
    names = [spec["name"] for spec in published["analyses"]]
    if only:
        unknown = sorted(set(only) - set(names))
        if unknown:
            raise ValueError(f"unknown analysis name(s) {unknown}; choose from {names}")

    cmp = _Comparison(out)
    title = "published case-study reproduction"
    cmp.line(title)
    cmp.line("=" * len(title))
    cmp.line()
    for spec in published["analyses"]:
        if only and spec["name"] not in only:
            continue
        _compare_analysis(spec, published["tolerances"], cmp)
    if not only:
        _compare_overall(published, cmp)

    verdict = "PASS" if cmp.failures == 0 else "FAIL"
    noted = f", {cmp.noted} discrepancy noted" if cmp.noted else ""
    cmp.line(f"result: {verdict} ({cmp.checks} checks, {cmp.failures} failures{noted})")
    return 0 if cmp.failures == 0 else 1
