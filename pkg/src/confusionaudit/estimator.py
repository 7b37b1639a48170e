"""Scikit-learn style front door for the audit pipeline.

``EqualConfusionAudit`` follows the estimator protocol (constructor
parameters only store themselves, ``fit`` computes, fitted state lives in
trailing-underscore attributes, ``get_params``/``set_params`` come from
``BaseEstimator``), so audits drop into sklearn-based evaluation tooling.
It is an evaluator of predictions rather than a predictor: ``fit`` takes
ground truth, predictions, and sensitive group memberships.
"""

from __future__ import annotations

from typing import Any, Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .contingency import LabeledSample, build_contingency
from .report import FairnessReport, compose_report, render
from .stats import SignificancePolicy
from .validation import as_group_keys, as_label_list, check_consistent_length

__all__ = ["EqualConfusionAudit"]


def resolve_policy(kind: str, alpha: float | None) -> SignificancePolicy:
    """Build a significance policy from CLI/estimator style parameters."""
    if kind == "strict":
        return SignificancePolicy.strict(0.001 if alpha is None else alpha)
    if kind == "bonferroni":
        return SignificancePolicy.bonferroni(0.05 if alpha is None else alpha)
    raise ValueError(f"unknown residual policy {kind!r}; use 'strict' or 'bonferroni'")


class EqualConfusionAudit(BaseEstimator):
    """Audit a classifier's confusion-matrix distribution across groups.

    Parameters
    ----------
    alpha : float, default=0.001
        Significance level for the omnibus equal confusion test.
    policy : {"strict", "bonferroni"}, default="strict"
        How residual significance is judged: at ``policy_alpha`` directly,
        or Bonferroni-corrected by the number of contingency cells.
    policy_alpha : float or None, default=None
        Base level for the residual policy; defaults to 0.001 for strict
        and 0.05 for Bonferroni.
    label_order : sequence of str or None
        Fixed label ordering (first label is treated as the positive
        class in binary summaries); lexicographic when None.
    group_order : sequence of str or None
        Fixed group row ordering; first appearance when None.

    Attributes
    ----------
    report_ : FairnessReport
        Full composed report.
    contingency_ : ContingencyMatrix
    statistic_, dof_, p_value_, phi_, strength_, critical_value_ : scalars
    residuals_, significant_ : ndarray
        Adjusted standardized residuals and their significance flags.
    unfair_ : bool
        True when the test rejects equal confusion at ``alpha``.

    Examples
    --------
    >>> audit = EqualConfusionAudit(alpha=0.001)
    >>> audit.fit(["a", "b", "a", "b"], ["a", "b", "b", "a"],
    ...           ["g1", "g1", "g2", "g2"])  # doctest: +ELLIPSIS
    EqualConfusionAudit(...)
    """

    def __init__(
        self,
        alpha: float = 0.001,
        policy: str = "strict",
        policy_alpha: float | None = None,
        label_order: Sequence[str] | None = None,
        group_order: Sequence[str] | None = None,
    ) -> None:
        self.alpha = alpha
        self.policy = policy
        self.policy_alpha = policy_alpha
        self.label_order = label_order
        self.group_order = group_order

    def fit(
        self,
        y_true: Sequence[Any],
        y_pred: Sequence[Any],
        groups: Sequence[Any],
        grouping: str = "groups",
    ) -> "EqualConfusionAudit":
        """Run the audit on ground truth, predictions, and group labels."""
        actual = as_label_list(y_true, "y_true")
        predicted = as_label_list(y_pred, "y_pred")
        keys = as_group_keys(groups)
        check_consistent_length(y_true=actual, y_pred=predicted, groups=keys)

        samples = [
            LabeledSample(group_key=key, predicted=pred, actual=act)
            for key, pred, act in zip(keys, predicted, actual)
        ]
        self.contingency_ = build_contingency(
            samples, label_order=self.label_order, group_order=self.group_order
        )
        self.report_ = compose_report(
            self.contingency_,
            alpha=self.alpha,
            policy=resolve_policy(self.policy, self.policy_alpha),
            grouping=grouping,
        )
        return self

    def _fitted_report(self) -> FairnessReport:
        if not hasattr(self, "report_"):
            raise NotFittedError("this EqualConfusionAudit instance is not fitted yet; call fit first")
        return self.report_

    @property
    def statistic_(self) -> float:
        return self._fitted_report().test.statistic

    @property
    def dof_(self) -> int:
        return self._fitted_report().test.dof

    @property
    def p_value_(self) -> float:
        return self._fitted_report().test.p_value

    @property
    def phi_(self) -> float:
        return self._fitted_report().parity.phi

    @property
    def strength_(self) -> str:
        return self._fitted_report().parity.strength

    @property
    def critical_value_(self) -> float:
        return self._fitted_report().residuals.critical_value

    @property
    def residuals_(self):
        return self._fitted_report().residuals.residuals

    @property
    def significant_(self):
        return self._fitted_report().residuals.significant

    @property
    def unfair_(self) -> bool:
        return self._fitted_report().unfair

    def render(self, format: str = "table") -> str:
        """Render the fitted report (see :func:`confusionaudit.report.render`)."""
        return render(self._fitted_report(), format)
