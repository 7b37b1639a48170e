"""Equal confusion test, confusion parity error, and post hoc residuals.

The omnibus test is Pearson's chi-squared test of independence between
group membership and confusion-matrix cell, run on the contingency matrix.
Zero-total rows and columns are pruned first (their expected counts would
be zero) and the pruning is recorded on the result.  Effect size is
Cramer's V; post hoc localization uses adjusted standardized residuals
tested against normal critical values under either a strict or a
Bonferroni-corrected significance policy.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .contingency import ContingencyMatrix, OutcomeCell
from .special import chi_squared_sf, normal_two_tailed_quantile

__all__ = [
    "CochranDiagnostics",
    "ChiSquaredTestResult",
    "ConfusionParityError",
    "ResidualMatrix",
    "SignificancePolicy",
    "EffectStrength",
    "expected_matrix",
    "equal_confusion_test",
    "confusion_parity_error",
    "interpret_effect_size",
    "effect_size_bounds",
    "adjusted_residuals",
]

EffectStrength = Literal["negligible", "small", "moderate", "strong"]

# Cohen's effect-size index: lower bounds for small/moderate/strong
# association are these constants divided by sqrt(min(q, r) - 1).
_COHEN_SMALL = 0.1
_COHEN_MODERATE = 0.3
_COHEN_STRONG = 0.5


@dataclass(frozen=True, slots=True)
class SignificancePolicy:
    """Residual significance policy: a stricter level, or Bonferroni.

    ``strict`` tests every cell at ``alpha`` directly (default 0.001,
    critical value 3.29); ``bonferroni`` divides ``alpha`` (default 0.05)
    by the number of contingency cells.
    """

    kind: Literal["strict", "bonferroni"]
    alpha: float

    def __post_init__(self) -> None:
        if self.kind not in ("strict", "bonferroni"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"policy alpha must be in (0, 1), got {self.alpha}")

    @classmethod
    def strict(cls, alpha: float = 0.001) -> "SignificancePolicy":
        return cls("strict", alpha)

    @classmethod
    def bonferroni(cls, alpha: float = 0.05) -> "SignificancePolicy":
        return cls("bonferroni", alpha)

    def effective_alpha(self, q: int, r: int) -> float:
        if self.kind == "bonferroni":
            return self.alpha / (q * r)
        return self.alpha

    def describe(self) -> str:
        return f"{self.kind}({self.alpha:g})"


@dataclass(frozen=True, slots=True)
class CochranDiagnostics:
    """Cochran's rule of thumb for chi-squared validity.

    Passes when at least 80% of expected counts are >= 5 and every
    expected count is >= 1.
    """

    fraction_cells_expected_ge_5: float
    min_expected: float
    passes: bool

    @classmethod
    def from_expected(cls, expected: np.ndarray) -> "CochranDiagnostics":
        expected = np.asarray(expected, dtype=float)
        fraction = float(np.mean(expected >= 5.0))
        min_expected = float(expected.min())
        return cls(
            fraction_cells_expected_ge_5=fraction,
            min_expected=min_expected,
            passes=fraction >= 0.8 and min_expected >= 1.0,
        )


@dataclass(frozen=True)
class ChiSquaredTestResult:
    """Outcome of the equal confusion test on a (possibly pruned) matrix.

    ``observed``, ``expected``, ``group_names`` and ``outcome_cells``
    describe the pruned table the statistic was computed on;
    ``pruned_rows`` and ``pruned_columns`` record what was removed.
    """

    statistic: float
    dof: int
    p_value: float
    observed: np.ndarray
    expected: np.ndarray
    group_names: tuple[str, ...]
    outcome_cells: tuple[OutcomeCell, ...]
    n: int
    pruned_rows: tuple[str, ...]
    pruned_columns: tuple[OutcomeCell, ...]
    cochran: CochranDiagnostics
    alpha: float

    def __post_init__(self) -> None:
        for name in ("observed", "expected"):
            grid = np.asarray(getattr(self, name))
            grid.setflags(write=False)
            object.__setattr__(self, name, grid)

    @property
    def unfair(self) -> bool:
        return self.p_value < self.alpha


@dataclass(frozen=True, slots=True)
class ConfusionParityError:
    """Cramer's V on the contingency matrix, with its strength bucket."""

    phi: float
    strength: EffectStrength
    min_qr: int


@dataclass(frozen=True)
class ResidualMatrix:
    """Adjusted standardized residuals with per-cell significance flags."""

    residuals: np.ndarray
    policy: SignificancePolicy
    critical_value: float
    significant: np.ndarray
    group_names: tuple[str, ...]
    outcome_cells: tuple[OutcomeCell, ...]

    def __post_init__(self) -> None:
        for name in ("residuals", "significant"):
            grid = np.asarray(getattr(self, name))
            grid.setflags(write=False)
            object.__setattr__(self, name, grid)


def expected_matrix(observed: ContingencyMatrix) -> np.ndarray:
    """Expected counts under independence of group and outcome cell.

    ``E[i][j] = row_total[i] * column_total[j] / n``; marginals are
    preserved exactly up to floating-point rounding.
    """
    n = observed.n
    if n == 0:
        raise ValueError("cannot compute expected counts for an all-zero matrix")
    expected = np.outer(observed.row_totals(), observed.column_totals()) / float(n)
    expected.setflags(write=False)
    return expected


def _pruned_table(
    observed: ContingencyMatrix,
) -> tuple[np.ndarray, tuple[str, ...], tuple[OutcomeCell, ...], tuple[str, ...], tuple[OutcomeCell, ...]]:
    counts = observed.counts
    keep_rows = counts.sum(axis=1) > 0
    keep_cols = counts.sum(axis=0) > 0
    pruned_rows = tuple(name for name, keep in zip(observed.group_names, keep_rows) if not keep)
    pruned_cols = tuple(cell for cell, keep in zip(observed.outcome_cells, keep_cols) if not keep)
    kept = counts[np.ix_(keep_rows, keep_cols)]
    kept_names = tuple(name for name, keep in zip(observed.group_names, keep_rows) if keep)
    kept_cells = tuple(cell for cell, keep in zip(observed.outcome_cells, keep_cols) if keep)
    return kept, kept_names, kept_cells, pruned_rows, pruned_cols


def equal_confusion_test(observed: ContingencyMatrix, alpha: float = 0.001) -> ChiSquaredTestResult:
    """Pearson chi-squared test of group-versus-outcome independence.

    Zero-total rows and columns are pruned before computation and listed
    on the result; degrees of freedom use the pruned shape.  The p-value
    is the chi-squared survival function at the statistic, and the system
    is flagged unfair when ``p < alpha``.

    Raises
    ------
    ValueError
        If ``alpha`` is outside (0, 1), or fewer than two nonzero rows or
        columns remain after pruning (the test is undefined).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    counts, names, cells, pruned_rows, pruned_cols = _pruned_table(observed)
    q, r = counts.shape
    if q < 2:
        raise ValueError(f"test undefined: only {q} nonzero group row(s) after pruning")
    if r < 2:
        raise ValueError(f"test undefined: only {r} nonzero outcome column(s) after pruning")

    n = counts.sum()
    expected = np.outer(counts.sum(axis=1), counts.sum(axis=0)) / float(n)
    statistic = float((((counts - expected) ** 2) / expected).sum())
    dof = (q - 1) * (r - 1)
    # Floor at 1e-300 so log-scale consumers of reported p-values are safe;
    # the survival function itself saturates at exactly 0 for huge statistics.
    p_value = max(chi_squared_sf(statistic, dof), 1e-300)
    return ChiSquaredTestResult(
        statistic=statistic,
        dof=dof,
        p_value=p_value,
        observed=counts,
        expected=expected,
        group_names=names,
        outcome_cells=cells,
        n=int(n),
        pruned_rows=pruned_rows,
        pruned_columns=pruned_cols,
        cochran=CochranDiagnostics.from_expected(expected),
        alpha=alpha,
    )


def interpret_effect_size(phi: float, min_qr: int) -> EffectStrength:
    """Strength bucket for a Cramer's V value.

    The small/moderate/strong lower bounds are Cohen's 0.1/0.3/0.5
    divided by ``sqrt(min_qr - 1)``; anything below the small bound is
    negligible.
    """
    if min_qr < 2:
        raise ValueError(f"min_qr must be >= 2, got {min_qr}")
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must be in [0, 1], got {phi}")
    scale = math.sqrt(min_qr - 1)
    if phi >= _COHEN_STRONG / scale:
        return "strong"
    if phi >= _COHEN_MODERATE / scale:
        return "moderate"
    if phi >= _COHEN_SMALL / scale:
        return "small"
    return "negligible"


def effect_size_bounds(min_qr: int) -> tuple[float, float, float]:
    """Lower bounds (small, moderate, strong) for ``min(q, r) = min_qr``."""
    if min_qr < 2:
        raise ValueError(f"min_qr must be >= 2, got {min_qr}")
    scale = math.sqrt(min_qr - 1)
    return (_COHEN_SMALL / scale, _COHEN_MODERATE / scale, _COHEN_STRONG / scale)


def confusion_parity_error(
    test: ChiSquaredTestResult, observed: ContingencyMatrix
) -> ConfusionParityError:
    """Cramer's V for the tested table: sqrt((chi2 / n) / min(q-1, r-1)).

    Uses the pruned dimensions recorded on ``test``; ``observed`` supplies
    the total count (invariant under zero-row/column pruning).
    """
    n = observed.n
    if n == 0:
        raise ValueError("confusion parity error is undefined for an all-zero matrix")
    q, r = test.observed.shape
    phi = math.sqrt((test.statistic / n) / min(q - 1, r - 1))
    phi = min(max(phi, 0.0), 1.0)
    min_qr = min(q, r)
    return ConfusionParityError(phi=phi, strength=interpret_effect_size(phi, min_qr), min_qr=min_qr)


def adjusted_residuals(
    observed: ContingencyMatrix,
    expected: np.ndarray,
    policy: SignificancePolicy | None = None,
) -> ResidualMatrix:
    """Adjusted standardized residual for every contingency cell.

    ``R[i][j] = (O[i][j] - E[i][j]) / sqrt(E[i][j] * (1 - row_i/n) *
    (1 - col_j/n))``, computed on the zero-pruned table (``expected`` must
    match that pruned shape).  A cell is significant when ``|R|`` exceeds
    the two-tailed normal quantile at the policy's effective alpha.

    Raises
    ------
    ValueError
        On a zero expected cell, or a degenerate marginal (a row or column
        holding the entire total), each identified by name.
    """
    if policy is None:
        policy = SignificancePolicy.strict()
    counts, names, cells, _, _ = _pruned_table(observed)
    expected = np.asarray(expected, dtype=float)
    if expected.shape != counts.shape:
        raise ValueError(
            f"expected grid shape {expected.shape} does not match pruned observed shape {counts.shape}"
        )
    if np.any(expected <= 0):
        i, j = np.argwhere(expected <= 0)[0]
        raise ValueError(
            f"expected count must be positive, got {expected[i, j]} for group "
            f"{names[i]!r}, cell {cells[j].describe()}"
        )

    n = counts.sum()
    row_fraction = counts.sum(axis=1) / float(n)
    col_fraction = counts.sum(axis=0) / float(n)
    if np.any(row_fraction >= 1.0):
        i = int(np.argwhere(row_fraction >= 1.0)[0][0])
        raise ValueError(f"degenerate marginal: group {names[i]!r} holds the entire total")
    if np.any(col_fraction >= 1.0):
        j = int(np.argwhere(col_fraction >= 1.0)[0][0])
        raise ValueError(f"degenerate marginal: cell {cells[j].describe()} holds the entire total")

    denom = np.sqrt(expected * np.outer(1.0 - row_fraction, 1.0 - col_fraction))
    residuals = (counts - expected) / denom
    q, r = counts.shape
    critical = normal_two_tailed_quantile(policy.effective_alpha(q, r))
    return ResidualMatrix(
        residuals=residuals,
        policy=policy,
        critical_value=critical,
        significant=np.abs(residuals) > critical,
        group_names=names,
        outcome_cells=cells,
    )
