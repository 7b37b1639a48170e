"""Shared fixtures: published case-study tables and small builders."""

from __future__ import annotations

import numpy as np
import pytest

from confusionaudit.contingency import (
    ContingencyMatrix,
    LabeledSample,
    OutcomeCell,
    outcome_cells_for,
)

BINARY_CELLS = outcome_cells_for(("+", "-"))

# Observed counts, published integer expected counts, published one-decimal
# residuals, and published significance marks for the three case-study
# contingency tables, columns in (A+P+, A+P-, A-P+, A-P-) order.

SEX_GROUPS = ("Female", "Male")
SEX_OBSERVED = np.array([[27, 50, 137, 627], [319, 256, 624, 1980]])
SEX_EXPECTED_PUBLISHED = np.array([[72, 64, 159, 545], [274, 242, 602, 2062]])
SEX_RESIDUALS_PUBLISHED = np.array([[-6.3, -2.0, -2.2, 6.6], [6.3, 2.0, 2.2, -6.6]])
SEX_SIGNIFICANT_PUBLISHED = np.array(
    [[True, False, False, True], [True, False, False, True]]
)

RACE_GROUPS = ("African-American", "Asian", "Caucasian", "Hispanic", "Native American", "Other")
RACE_OBSERVED = np.array(
    [
        [250, 154, 468, 1046],
        [3, 0, 1, 22],
        [64, 110, 198, 1087],
        [10, 25, 61, 259],
        [1, 0, 1, 5],
        [18, 17, 32, 188],
    ]
)
RACE_RESIDUALS_PUBLISHED = np.array(
    [
        [9.6, 1.0, 8.5, -13.1],
        [0.5, -1.5, -2.0, 2.1],
        [-7.2, -0.1, -6.5, 9.7],
        [-4.1, -0.4, -0.9, 3.4],
        [0.5, -0.8, -0.3, 0.4],
        [-0.9, -0.6, -2.7, 3.1],
    ]
)
RACE_SIGNIFICANT_PUBLISHED = np.array(
    [
        [True, False, True, True],
        [False, False, False, False],
        [True, False, True, True],
        [True, False, False, True],
        [False, False, False, False],
        [False, False, False, False],
    ]
)

INTER_GROUPS = (
    "Female\x1fAfrican-American",
    "Female\x1fAsian",
    "Female\x1fCaucasian",
    "Female\x1fHispanic",
    "Female\x1fOther",
    "Male\x1fAfrican-American",
    "Male\x1fAsian",
    "Male\x1fCaucasian",
    "Male\x1fHispanic",
    "Male\x1fNative American",
    "Male\x1fOther",
)
INTER_OBSERVED = np.array(
    [
        [19, 28, 81, 265],
        [0, 0, 0, 1],
        [8, 15, 41, 272],
        [0, 5, 5, 51],
        [0, 2, 10, 38],
        [231, 126, 387, 781],
        [3, 0, 1, 21],
        [56, 95, 157, 815],
        [10, 20, 56, 208],
        [1, 0, 1, 5],
        [18, 15, 22, 150],
    ]
)
INTER_RESIDUALS_PUBLISHED = np.array(
    [
        [-2.8, -0.4, 0.9, 1.1],
        [-0.3, -0.3, -0.5, 0.7],
        [-4.3, -2.3, -3.3, 6.5],
        [-2.4, 0.2, -2.2, 3.1],
        [-2.2, -1.0, 0.2, 1.7],
        [11.6, 1.2, 8.2, -14.2],
        [0.6, -1.4, -1.9, 2.0],
        [-5.1, 1.3, -5.0, 6.4],
        [-3.3, -0.5, 0.1, 2.2],
        [0.5, -0.8, -0.3, 0.4],
        [0.1, -0.2, -3.1, 2.6],
    ]
)

# Overall confusion matrix in actual-major layout: [[TP, FN], [FP, TN]].
OVERALL_CONFUSION = np.array([[346, 306], [761, 2607]])


def plain_cells(r: int) -> tuple[OutcomeCell, ...]:
    """Distinct synthetic cells for matrices without a full label grid."""
    return tuple(OutcomeCell(f"c{j}", f"c{j}") for j in range(r))


def make_matrix(counts, group_names=None, cells=None) -> ContingencyMatrix:
    counts = np.asarray(counts)
    if group_names is None:
        group_names = tuple(f"g{i}" for i in range(counts.shape[0]))
    if cells is None:
        cells = plain_cells(counts.shape[1])
    return ContingencyMatrix(counts, group_names, cells)


def samples_from_counts(counts, group_names, labels) -> list[LabeledSample]:
    """Expand a canonical contingency table back into individual samples."""
    counts = np.asarray(counts)
    k = len(labels)
    samples = []
    for i, name in enumerate(group_names):
        for j in range(counts.shape[1]):
            actual, predicted = labels[j // k], labels[j % k]
            samples.extend(
                LabeledSample(group_key=(name,), predicted=predicted, actual=actual)
                for _ in range(int(counts[i, j]))
            )
    return samples


@pytest.fixture
def sex_matrix() -> ContingencyMatrix:
    return ContingencyMatrix(SEX_OBSERVED, SEX_GROUPS, BINARY_CELLS)


@pytest.fixture
def race_matrix() -> ContingencyMatrix:
    return ContingencyMatrix(RACE_OBSERVED, RACE_GROUPS, BINARY_CELLS)


@pytest.fixture
def inter_matrix() -> ContingencyMatrix:
    return ContingencyMatrix(INTER_OBSERVED, INTER_GROUPS, BINARY_CELLS)
