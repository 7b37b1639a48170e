"""Labeled decision records and the group-by-outcome contingency matrix.

Each sensitive group's confusion matrix is flattened into one row of a
``ContingencyMatrix``: columns are (actual, predicted) outcome cells in
actual-major order, so a label alphabet of size k always yields k*k
columns, zero counts included.  All types are immutable after
construction and the builders are pure functions, so values can be
shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "COMPOSITE_SEPARATOR",
    "LabeledSample",
    "OutcomeCell",
    "ContingencyMatrix",
    "ClassRates",
    "DerivedRates",
    "build_contingency",
    "confusion_matrix_of",
    "derived_rates",
]

# Joins multi-attribute group keys into a single row name.  Ingestion
# rejects this control character inside attribute values, which keeps the
# mapping from value tuples to composite names injective; renderers show
# it as " x ".
COMPOSITE_SEPARATOR = "\x1f"


class OutcomeCell(NamedTuple):
    """One (actual, predicted) label pair, i.e. one confusion-matrix cell."""

    actual: str
    predicted: str

    def describe(self) -> str:
        return f"actual={self.actual},predicted={self.predicted}"


@dataclass(frozen=True, slots=True)
class LabeledSample:
    """One decision record: sensitive attribute values plus both labels.

    ``group_key`` holds one category string per sensitive attribute; after
    intersectional expansion it is a single composite string.
    """

    group_key: tuple[str, ...]
    predicted: str
    actual: str

    def __post_init__(self) -> None:
        if isinstance(self.group_key, str):
            object.__setattr__(self, "group_key", (self.group_key,))
        else:
            object.__setattr__(self, "group_key", tuple(self.group_key))
        if not self.group_key:
            raise ValueError("group_key must not be empty")
        for part in self.group_key:
            if not isinstance(part, str) or not part:
                raise ValueError(f"group_key elements must be non-empty strings, got {part!r}")
        if not isinstance(self.predicted, str) or not self.predicted:
            raise ValueError(f"predicted label must be a non-empty string, got {self.predicted!r}")
        if not isinstance(self.actual, str) or not self.actual:
            raise ValueError(f"actual label must be a non-empty string, got {self.actual!r}")

    @property
    def group_name(self) -> str:
        return COMPOSITE_SEPARATOR.join(self.group_key)


def outcome_cells_for(labels: Sequence[str]) -> tuple[OutcomeCell, ...]:
    """The canonical actual-major, predicted-minor cell order for ``labels``."""
    return tuple(OutcomeCell(actual, predicted) for actual in labels for predicted in labels)


@dataclass(frozen=True)
class ContingencyMatrix:
    """q x r table of group-by-outcome counts.

    Matrices from :func:`build_contingency` or the contingency file loader
    always carry the complete canonical cell grid of
    :func:`outcome_cells_for` (row i is the flattening of group i's
    confusion matrix, so r = k*k).  Directly constructed matrices may
    carry any distinct cell subset or ordering; the statistics are
    invariant to that, but per-group confusion matrices and rate tables
    need the complete grid.
    """

    counts: np.ndarray
    group_names: tuple[str, ...]
    outcome_cells: tuple[OutcomeCell, ...]

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim != 2:
            raise ValueError(f"counts must be a 2-D grid, got shape {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(counts == np.floor(counts)):
                raise ValueError("counts must be integers")
            counts = counts.astype(np.int64)
        else:
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            i, j = np.argwhere(counts < 0)[0]
            raise ValueError(f"counts must be non-negative, got {counts[i, j]} at row {i}, column {j}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "group_names", tuple(self.group_names))
        object.__setattr__(self, "outcome_cells", tuple(self.outcome_cells))

        q, r = counts.shape
        if q < 2:
            raise ValueError(f"need at least 2 groups, got {q}")
        if r < 2:
            raise ValueError(f"need at least 2 outcome cells, got {r}")
        if len(self.group_names) != q:
            raise ValueError(f"{len(self.group_names)} group names for {q} rows")
        if len(set(self.group_names)) != q:
            raise ValueError("group names must be unique")
        if len(self.outcome_cells) != r:
            raise ValueError(f"{len(self.outcome_cells)} outcome cells for {r} columns")
        if len(set(self.outcome_cells)) != r:
            raise ValueError("outcome cells must be distinct")

    @property
    def q(self) -> int:
        return self.counts.shape[0]

    @property
    def r(self) -> int:
        return self.counts.shape[1]

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def has_complete_grid(self) -> bool:
        try:
            self.labels
        except ValueError:
            return False
        return True

    @property
    def labels(self) -> tuple[str, ...]:
        k = math.isqrt(len(self.outcome_cells))
        if k * k == len(self.outcome_cells):
            candidate = tuple(dict.fromkeys(cell.actual for cell in self.outcome_cells))
            if len(candidate) == k and self.outcome_cells == outcome_cells_for(candidate):
                return candidate
        raise ValueError(
            "matrix does not carry a complete canonical outcome grid "
            "(k*k cells in actual-major order)"
        )

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def column_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def build_contingency(
    samples: Sequence[LabeledSample],
    label_order: Sequence[str] | None = None,
    group_order: Sequence[str] | None = None,
) -> ContingencyMatrix:
    """Tally samples into a contingency matrix.

    Groups are ordered by ``group_order`` when given, otherwise by first
    appearance; labels by ``label_order`` when given, otherwise
    lexicographically.  Every k*k outcome column is present even when its
    count is zero.

    Raises
    ------
    ValueError
        On an empty sample list, inconsistent group-key arity, or an
        ordering that misses an observed value.
    """
    if not samples:
        raise ValueError("cannot build a contingency matrix from an empty sample list")

    arity = len(samples[0].group_key)
    for sample in samples:
        if len(sample.group_key) != arity:
            raise ValueError(
                f"inconsistent group-key arity: expected {arity}, got "
                f"{len(sample.group_key)} for {sample.group_key!r}"
            )

    observed_labels: dict[str, None] = {}
    for sample in samples:
        observed_labels.setdefault(sample.actual)
        observed_labels.setdefault(sample.predicted)
    if label_order is not None:
        labels = tuple(label_order)
        if len(set(labels)) != len(labels):
            raise ValueError("label_order contains duplicates")
        missing = [label for label in observed_labels if label not in labels]
        if missing:
            raise ValueError(f"label_order is missing observed label {missing[0]!r}")
    else:
        labels = tuple(sorted(observed_labels))

    observed_groups: dict[str, None] = {}
    for sample in samples:
        observed_groups.setdefault(sample.group_name)
    if group_order is not None:
        groups = tuple(group_order)
        if len(set(groups)) != len(groups):
            raise ValueError("group_order contains duplicates")
        missing = [group for group in observed_groups if group not in groups]
        if missing:
            raise ValueError(f"group_order is missing observed group {missing[0]!r}")
    else:
        groups = tuple(observed_groups)

    k = len(labels)
    label_index = {label: i for i, label in enumerate(labels)}
    group_index = {group: i for i, group in enumerate(groups)}
    counts = np.zeros((len(groups), k * k), dtype=np.int64)
    for sample in samples:
        column = label_index[sample.actual] * k + label_index[sample.predicted]
        counts[group_index[sample.group_name], column] += 1

    return ContingencyMatrix(counts, groups, outcome_cells_for(labels))


def confusion_matrix_of(contingency: ContingencyMatrix, group_index: int) -> np.ndarray:
    """Un-flatten one contingency row into its k x k confusion matrix.

    Rows of the result are actual labels, columns are predicted labels, in
    the matrix's canonical label order; re-flattening in row-major order
    reproduces the contingency row exactly.
    """
    if not 0 <= group_index < contingency.q:
        raise IndexError(f"group index {group_index} out of range for {contingency.q} groups")
    k = len(contingency.labels)
    matrix = contingency.counts[group_index].reshape(k, k).copy()
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, slots=True)
class ClassRates:
    """One-vs-rest rates for a single class; None marks a 0/0 rate."""

    label: str
    precision: float | None
    recall: float | None
    specificity: float | None


@dataclass(frozen=True)
class DerivedRates:
    """Accuracy plus per-class one-vs-rest rates for a confusion matrix.

    For binary matrices the positive class is row/column 0, and the four
    headline rates are exposed directly; undefined rates (zero
    denominators) are None rather than 0 or an error.
    """

    accuracy: float | None
    per_class: tuple[ClassRates, ...]

    @property
    def _binary(self) -> tuple[ClassRates, ClassRates]:
        if len(self.per_class) != 2:
            raise ValueError("headline rates are defined for binary matrices only")
        return self.per_class[0], self.per_class[1]

    @property
    def precision(self) -> float | None:
        return self._binary[0].precision

    @property
    def negative_predictive_value(self) -> float | None:
        return self._binary[1].precision

    @property
    def recall(self) -> float | None:
        return self._binary[0].recall

    @property
    def specificity(self) -> float | None:
        return self._binary[0].specificity


def _ratio(numerator: int, denominator: int) -> float | None:
    if denominator == 0:
        return None
    return numerator / denominator


def derived_rates(confusion: np.ndarray, labels: Sequence[str] | None = None) -> DerivedRates:
    """Accuracy, precision, NPV, recall, and specificity for a confusion matrix.

    ``confusion`` follows the :func:`confusion_matrix_of` convention, rows
    actual and columns predicted.  Rates with a zero denominator come back
    as None.
    """
    matrix = np.asarray(confusion, dtype=np.int64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {matrix.shape}")
    k = matrix.shape[0]
    if k < 2:
        raise ValueError(f"confusion matrix must have at least 2 classes, got {k}")
    if np.any(matrix < 0):
        raise ValueError("confusion matrix counts must be non-negative")
    if labels is None:
        labels = tuple(str(i) for i in range(k))
    elif len(labels) != k:
        raise ValueError(f"{len(labels)} labels for a {k}-class matrix")

    total = int(matrix.sum())
    accuracy = _ratio(int(np.trace(matrix)), total)
    per_class = []
    for c in range(k):
        tp = int(matrix[c, c])
        fn = int(matrix[c].sum()) - tp
        fp = int(matrix[:, c].sum()) - tp
        tn = total - tp - fn - fp
        per_class.append(
            ClassRates(
                label=str(labels[c]),
                precision=_ratio(tp, tp + fp),
                recall=_ratio(tp, tp + fn),
                specificity=_ratio(tn, tn + fp),
            )
        )
    return DerivedRates(accuracy=accuracy, per_class=tuple(per_class))
