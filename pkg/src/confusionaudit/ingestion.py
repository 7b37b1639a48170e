"""Readers that turn record files into labeled samples or count tables.

Three entry points: :func:`load_samples` for generic delimited text with a
header row, :func:`compas_filter` for the COMPAS-style pretrial extract
(screening-window, assessment-presence and time-outside filters plus
decile-score binarization), and :func:`load_contingency` for pre-built
count tables, which lets published aggregate tables be audited without
raw data.  Every loader returns a report accounting for each input row;
none of them mutate their input files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .contingency import (
    COMPOSITE_SEPARATOR,
    ContingencyMatrix,
    LabeledSample,
    outcome_cells_for,
)

__all__ = [
    "DatasetConfig",
    "CompasAdapterConfig",
    "IngestReport",
    "load_samples",
    "compas_filter",
    "load_contingency",
    "write_contingency",
    "POSITIVE_LABEL",
    "NEGATIVE_LABEL",
]

POSITIVE_LABEL = "+"
NEGATIVE_LABEL = "-"

MissingPolicy = Literal["drop_row", "fail"]


@dataclass(frozen=True)
class DatasetConfig:
    """Column mapping for a delimited-text dataset with a header row."""

    path: str | Path
    attribute_columns: tuple[str, ...]
    predicted_column: str
    actual_column: str
    positive_labels: frozenset[str] | None = None
    missing_policy: MissingPolicy = "drop_row"

    def __post_init__(self) -> None:
        object.__setattr__(self, "attribute_columns", tuple(self.attribute_columns))
        if not self.attribute_columns:
            raise ValueError("attribute_columns must not be empty")
        named = (*self.attribute_columns, self.predicted_column, self.actual_column)
        if len(set(named)) != len(named):
            raise ValueError(f"configured columns must be distinct, got {named}")
        if self.missing_policy not in ("drop_row", "fail"):
            raise ValueError(f"unknown missing_policy {self.missing_policy!r}")
        if self.positive_labels is not None:
            object.__setattr__(self, "positive_labels", frozenset(self.positive_labels))


@dataclass(frozen=True)
class IngestReport:
    """Row bookkeeping: every input row is either emitted or in ``drops``."""

    rows_read: int
    rows_emitted: int
    drops: dict[str, int] = field(default_factory=dict)

    @property
    def rows_dropped(self) -> int:
        return sum(self.drops.values())

    def describe(self) -> str:
        parts = [f"read {self.rows_read} rows, kept {self.rows_emitted}"]
        parts.extend(f"dropped {count}: {reason}" for reason, count in self.drops.items())
        return "; ".join(parts)


class _RowAccountant:
    def __init__(self) -> None:
        self.rows_read = 0
        self.drops: dict[str, int] = {}

    def drop(self, reason: str) -> None:
        self.drops[reason] = self.drops.get(reason, 0) + 1

    def report(self, emitted: int) -> IngestReport:
        return IngestReport(rows_read=self.rows_read, rows_emitted=emitted, drops=dict(self.drops))


def _require_columns(fieldnames: Iterable[str] | None, required: Iterable[str], path: object) -> None:
    have = set(fieldnames or ())
    for column in required:
        if column not in have:
            raise ValueError(f"{path}: missing required column {column!r}")


def _clean(value: str | None) -> str:
    return (value or "").strip()


def load_samples(config: DatasetConfig) -> tuple[list[LabeledSample], IngestReport]:
    """Read one labeled sample per surviving row of a CSV file.

    Values are trimmed of surrounding whitespace; rows with a missing
    value in any configured column are dropped or rejected according to
    ``missing_policy``.  When ``positive_labels`` is set, label values are
    binarized to ``+``/``-``; otherwise they pass through verbatim.
    """
    path = Path(config.path)
    samples: list[LabeledSample] = []
    accountant = _RowAccountant()
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        _require_columns(
            reader.fieldnames,
            (*config.attribute_columns, config.predicted_column, config.actual_column),
            path,
        )
        for row in reader:
            accountant.rows_read += 1
            if any(value is None for value in row.values()) or None in row:
                raise ValueError(f"{path}: row {reader.line_num} is ragged")
            problem = _row_problem(row, config)
            if problem is not None:
                if config.missing_policy == "fail":
                    raise ValueError(f"{path}: row {reader.line_num}: {problem}")
                accountant.drop(problem)
                continue
            attributes = tuple(_clean(row[c]) for c in config.attribute_columns)
            samples.append(
                LabeledSample(
                    group_key=attributes,
                    predicted=_map_label(_clean(row[config.predicted_column]), config.positive_labels),
                    actual=_map_label(_clean(row[config.actual_column]), config.positive_labels),
                )
            )
    return samples, accountant.report(len(samples))


def _row_problem(row: Mapping[str, str], config: DatasetConfig) -> str | None:
    for column in (*config.attribute_columns, config.predicted_column, config.actual_column):
        value = _clean(row.get(column))
        if not value:
            return f"missing value in column {column!r}"
        if COMPOSITE_SEPARATOR in value:
            return f"separator control character in column {column!r}"
    return None


def _map_label(value: str, positive_labels: frozenset[str] | None) -> str:
    if positive_labels is None:
        return value
    return POSITIVE_LABEL if value in positive_labels else NEGATIVE_LABEL


@dataclass(frozen=True)
class CompasAdapterConfig:
    """Column mapping and filter thresholds for COMPAS-style extracts.

    Defaults follow the public pretrial violent-recidivism schema: decile
    scores of 5 and above (medium/high risk) count as a positive
    prediction, and the actual label is positive when a violent charge
    occurred within the two-year window.  Filters remove rows whose
    screening date is more than ``screening_window_days`` from arrest or
    charge (two-sided, inclusive), rows without an assessment, and, when
    ``days_outside_column`` is configured, rows with less than two years
    spent outside a correctional facility.  ``charge_degree_column``
    optionally excludes listed charge degrees (ordinary traffic offenses
    by default), mirroring the published preprocessing of this dataset.
    """

    screening_window_days: int = 30
    score_column: str = "v_decile_score"
    score_positive_threshold: int = 5
    outcome_column: str = "two_year_recid"
    positive_outcome_values: frozenset[str] = frozenset({"1"})
    screening_days_column: str = "days_b_screening_arrest"
    assessment_flag_column: str | None = "is_recid"
    assessment_missing_value: str = "-1"
    days_outside_column: str | None = None
    two_years_days: int = 730
    charge_degree_column: str | None = "c_charge_degree"
    excluded_charge_degrees: frozenset[str] = frozenset({"O"})
    attribute_columns: tuple[str, ...] = ("sex", "race")
    on_invalid: MissingPolicy = "fail"

    def __post_init__(self) -> None:
        object.__setattr__(self, "attribute_columns", tuple(self.attribute_columns))
        object.__setattr__(self, "positive_outcome_values", frozenset(self.positive_outcome_values))
        object.__setattr__(self, "excluded_charge_degrees", frozenset(self.excluded_charge_degrees))
        if self.screening_window_days <= 0:
            raise ValueError(f"screening_window_days must be positive, got {self.screening_window_days}")
        if not 1 <= self.score_positive_threshold <= 10:
            raise ValueError(
                f"score_positive_threshold must be in [1, 10], got {self.score_positive_threshold}"
            )
        if self.on_invalid not in ("drop_row", "fail"):
            raise ValueError(f"unknown on_invalid policy {self.on_invalid!r}")

    def required_columns(self) -> tuple[str, ...]:
        columns = [self.screening_days_column, self.score_column, self.outcome_column]
        if self.assessment_flag_column:
            columns.append(self.assessment_flag_column)
        if self.days_outside_column:
            columns.append(self.days_outside_column)
        if self.charge_degree_column:
            columns.append(self.charge_degree_column)
        columns.extend(self.attribute_columns)
        return tuple(dict.fromkeys(columns))


# Filter reasons in application order; a row is attributed to the first
# rule it violates.
_SCREENING = "screening window exceeded"
_ASSESSMENT = "assessment missing"
_TIME_OUTSIDE = "less than two years outside a correctional facility"
_CHARGE_DEGREE = "excluded charge degree"


def compas_filter(
    rows: Sequence[Mapping[str, str]],
    config: CompasAdapterConfig | None = None,
) -> tuple[list[LabeledSample], IngestReport]:
    """Apply COMPAS-style filtering and score binarization to parsed rows.

    Returns surviving rows as labeled samples (group key built from
    ``attribute_columns``) and a report attributing every removal to the
    first rule it violated.
    """
    if config is None:
        config = CompasAdapterConfig()
    if rows:
        _require_columns(rows[0].keys(), config.required_columns(), "compas rows")

    samples: list[LabeledSample] = []
    accountant = _RowAccountant()
    for index, row in enumerate(rows, start=1):
        accountant.rows_read += 1
        reason = _compas_removal_reason(row, config)
        if reason is not None:
            accountant.drop(reason)
            continue

        score_text = _clean(row.get(config.score_column))
        try:
            score = int(score_text)
        except ValueError:
            if config.on_invalid == "fail":
                raise ValueError(
                    f"row {index}: cannot parse score {score_text!r} in column "
                    f"{config.score_column!r}"
                ) from None
            accountant.drop("unparseable score")
            continue

        attributes = tuple(_clean(row.get(column)) for column in config.attribute_columns)
        if not all(attributes):
            if config.on_invalid == "fail":
                empty = config.attribute_columns[attributes.index("")]
                raise ValueError(f"row {index}: missing value in column {empty!r}")
            accountant.drop("missing attribute value")
            continue

        predicted = POSITIVE_LABEL if score >= config.score_positive_threshold else NEGATIVE_LABEL
        outcome = _clean(row.get(config.outcome_column))
        actual = POSITIVE_LABEL if outcome in config.positive_outcome_values else NEGATIVE_LABEL
        samples.append(LabeledSample(group_key=attributes, predicted=predicted, actual=actual))
    return samples, accountant.report(len(samples))


def _compas_removal_reason(row: Mapping[str, str], config: CompasAdapterConfig) -> str | None:
    days_text = _clean(row.get(config.screening_days_column))
    try:
        days = float(days_text)
    except ValueError:
        return _SCREENING
    if abs(days) > config.screening_window_days:
        return _SCREENING

    if config.assessment_flag_column is not None:
        flag = _clean(row.get(config.assessment_flag_column))
        if flag == config.assessment_missing_value or not flag:
            return _ASSESSMENT
    if not _clean(row.get(config.score_column)) or _clean(row.get(config.score_column)).upper() == "N/A":
        return _ASSESSMENT

    if config.days_outside_column is not None:
        outside_text = _clean(row.get(config.days_outside_column))
        try:
            outside = float(outside_text)
        except ValueError:
            return _TIME_OUTSIDE
        if outside < config.two_years_days:
            return _TIME_OUTSIDE

    if config.charge_degree_column is not None:
        degree = _clean(row.get(config.charge_degree_column))
        if degree in config.excluded_charge_degrees:
            return _CHARGE_DEGREE
    return None


def load_contingency(path: str | Path) -> ContingencyMatrix:
    """Load a pre-built contingency matrix from its JSON file format.

    The file must contain ``group_names`` (list of strings), ``labels``
    (list of strings), ``column_order`` equal to ``"actual-major"``, and
    ``counts`` (one row of exact integers per group, k*k columns for k
    labels).  Schema violations are reported with their location.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc

    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be an object")
    for key in ("group_names", "labels", "column_order", "counts"):
        if key not in raw:
            raise ValueError(f"{path}: missing required key {key!r}")
    if raw["column_order"] != "actual-major":
        raise ValueError(f"{path}: column_order must be 'actual-major', got {raw['column_order']!r}")

    group_names = raw["group_names"]
    labels = raw["labels"]
    counts = raw["counts"]
    for name, values in (("group_names", group_names), ("labels", labels)):
        if not isinstance(values, list) or not all(isinstance(v, str) and v for v in values):
            raise ValueError(f"{path}: {name} must be a list of non-empty strings")
    if not isinstance(counts, list) or len(counts) != len(group_names):
        raise ValueError(
            f"{path}: counts must have one row per group "
            f"({len(group_names)} expected, got {len(counts) if isinstance(counts, list) else 'non-list'})"
        )
    width = len(labels) ** 2
    for i, row in enumerate(counts):
        if not isinstance(row, list) or len(row) != width:
            raise ValueError(f"{path}: counts[{i}] must have {width} entries")
        for j, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"{path}: counts[{i}][{j}] must be an integer, got {value!r}")
            if value < 0:
                raise ValueError(f"{path}: counts[{i}][{j}] must be non-negative, got {value}")
    if all(value == 0 for row in counts for value in row):
        raise ValueError(f"{path}: counts are all zero")

    try:
        return ContingencyMatrix(
            np.array(counts, dtype=np.int64),
            tuple(group_names),
            outcome_cells_for(labels),
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def write_contingency(matrix: ContingencyMatrix, path: str | Path) -> None:
    """Write a contingency matrix in the :func:`load_contingency` format."""
    payload = {
        "group_names": list(matrix.group_names),
        "labels": list(matrix.labels),
        "column_order": "actual-major",
        "counts": [[int(v) for v in row] for row in matrix.counts],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
