"""Equal confusion fairness auditing for classification systems.

Checks whether a decision system's confusion-matrix distribution is the
same across sensitive groups: a chi-squared equal confusion test gives
the verdict, the confusion parity error (Cramer's V) quantifies it, and
adjusted standardized residuals localize which groups and outcome cells
drive it.  Works from raw labeled records, COMPAS-style extracts, or
pre-built contingency tables.
"""

from .contingency import (
    ContingencyMatrix,
    DerivedRates,
    LabeledSample,
    OutcomeCell,
    build_contingency,
    confusion_matrix_of,
    derived_rates,
)
from .estimator import EqualConfusionAudit
from .groups import GroupingSpec, audit_plan, expand_groups
from .ingestion import (
    CompasAdapterConfig,
    DatasetConfig,
    compas_filter,
    load_contingency,
    load_samples,
    write_contingency,
)
from .report import FairnessReport, compose_report, render, report_from_structured
from .special import chi_squared_sf, normal_two_tailed_p, normal_two_tailed_quantile
from .stats import (
    ChiSquaredTestResult,
    CochranDiagnostics,
    ConfusionParityError,
    ResidualMatrix,
    SignificancePolicy,
    adjusted_residuals,
    confusion_parity_error,
    equal_confusion_test,
    expected_matrix,
    interpret_effect_size,
)

__version__ = "0.1.0"

__all__ = [
    "ContingencyMatrix",
    "DerivedRates",
    "LabeledSample",
    "OutcomeCell",
    "build_contingency",
    "confusion_matrix_of",
    "derived_rates",
    "EqualConfusionAudit",
    "GroupingSpec",
    "audit_plan",
    "expand_groups",
    "CompasAdapterConfig",
    "DatasetConfig",
    "compas_filter",
    "load_contingency",
    "load_samples",
    "write_contingency",
    "FairnessReport",
    "compose_report",
    "render",
    "report_from_structured",
    "chi_squared_sf",
    "normal_two_tailed_p",
    "normal_two_tailed_quantile",
    "ChiSquaredTestResult",
    "CochranDiagnostics",
    "ConfusionParityError",
    "ResidualMatrix",
    "SignificancePolicy",
    "adjusted_residuals",
    "confusion_parity_error",
    "equal_confusion_test",
    "expected_matrix",
    "interpret_effect_size",
]
