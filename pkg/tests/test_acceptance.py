"""Acceptance gate: every exit criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

import functools
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from confusionaudit.contingency import (
    LabeledSample,
    build_contingency,
    confusion_matrix_of,
    derived_rates,
)
from confusionaudit.report import compose_report
from confusionaudit.special import (
    chi_squared_sf,
    normal_two_tailed_p,
    normal_two_tailed_quantile,
)
from confusionaudit.stats import (
    adjusted_residuals,
    confusion_parity_error,
    effect_size_bounds,
    equal_confusion_test,
)

from conftest import (
    BINARY_CELLS,
    INTER_GROUPS,
    INTER_OBSERVED,
    INTER_RESIDUALS_PUBLISHED,
    OVERALL_CONFUSION,
    RACE_GROUPS,
    RACE_OBSERVED,
    RACE_RESIDUALS_PUBLISHED,
    RACE_SIGNIFICANT_PUBLISHED,
    SEX_EXPECTED_PUBLISHED,
    SEX_GROUPS,
    SEX_OBSERVED,
    SEX_RESIDUALS_PUBLISHED,
    SEX_SIGNIFICANT_PUBLISHED,
    make_matrix,
)

ORACLE_TABLE = json.loads((Path(__file__).parent / "data" / "chi2_sf_oracle.json").read_text())

# Cells marked significant in the published intersectional table; the
# (Female x Caucasian, actual=-, predicted=+) entry is a boundary case
# whose full-precision residual (-3.289) sits just inside the 3.291
# critical value, so flag disagreement there is reported, not failed.
INTER_SIGNIFICANT_PUBLISHED = np.zeros((11, 4), dtype=bool)
for _i, _j in [
    (2, 0), (2, 2), (2, 3),
    (5, 0), (5, 2), (5, 3),
    (7, 0), (7, 2), (7, 3),
    (8, 0),
]:
    INTER_SIGNIFICANT_PUBLISHED[_i, _j] = True


def criterion(number, description):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"criterion {number}: FAIL - {description}")
                raise
            print(f"criterion {number}: PASS - {description}")

        return wrapper

    return decorate


def timed_report(matrix, grouping):
    start = time.perf_counter()
    report = compose_report(matrix, alpha=0.001, grouping=grouping)
    elapsed = time.perf_counter() - start
    return report, elapsed


@criterion(1, "sex audit reproduces published E, R, phi, verdict, bold set in < 1 s")
def test_criterion_1_sex_audit():
    matrix = make_matrix(SEX_OBSERVED, SEX_GROUPS, BINARY_CELLS)
    report, elapsed = timed_report(matrix, "sex")
    assert np.max(np.abs(report.test.expected - SEX_EXPECTED_PUBLISHED)) <= 0.5
    assert np.max(np.abs(report.residuals.residuals - SEX_RESIDUALS_PUBLISHED)) <= 0.05
    assert abs(report.parity.phi - 0.12) <= 0.005
    assert report.test.p_value < 0.001
    assert np.array_equal(report.residuals.significant, SEX_SIGNIFICANT_PUBLISHED)
    assert elapsed < 1.0


@criterion(2, "race audit reproduces all 24 R values, phi, verdict, bold set in < 1 s")
def test_criterion_2_race_audit():
    matrix = make_matrix(RACE_OBSERVED, RACE_GROUPS, BINARY_CELLS)
    report, elapsed = timed_report(matrix, "race")
    assert report.residuals.residuals.size == 24
    assert np.max(np.abs(report.residuals.residuals - RACE_RESIDUALS_PUBLISHED)) <= 0.05
    assert abs(report.parity.phi - 0.13) <= 0.005
    assert report.test.p_value < 0.001
    # exactly the published boldface cells, and only those, are flagged
    # under strict(0.001)
    assert np.array_equal(report.residuals.significant, RACE_SIGNIFICANT_PUBLISHED)
    assert int(report.residuals.significant.sum()) == 8
    assert elapsed < 1.0


@criterion(3, "intersectional audit (11 groups) reproduces phi, verdict, bold residuals in < 1 s")
def test_criterion_3_intersectional_audit():
    matrix = make_matrix(INTER_OBSERVED, INTER_GROUPS, BINARY_CELLS)
    assert matrix.q == 11
    report, elapsed = timed_report(matrix, "sex x race")
    assert abs(report.parity.phi - 0.16) <= 0.005
    assert report.test.p_value < 0.001
    residuals = report.residuals.residuals
    bold_deviation = np.max(
        np.abs(residuals[INTER_SIGNIFICANT_PUBLISHED] - INTER_RESIDUALS_PUBLISHED[INTER_SIGNIFICANT_PUBLISHED])
    )
    assert bold_deviation <= 0.05
    # full grid agrees too, not only the bold cells
    assert np.max(np.abs(residuals - INTER_RESIDUALS_PUBLISHED)) <= 0.05
    # flag disagreements are reported rather than forced: the only one is
    # the known boundary cell
    disagreements = list(zip(*np.nonzero(report.residuals.significant != INTER_SIGNIFICANT_PUBLISHED)))
    assert disagreements in ([], [(2, 2)])
    if disagreements:
        print(
            "  noted discrepancy: published bold cell (Female x Caucasian, "
            f"actual=-, predicted=+) has full-precision residual {residuals[2, 2]:.4f}, "
            f"inside the {report.residuals.critical_value:.4f} critical value"
        )
    assert elapsed < 1.0


@criterion(4, "overall confusion-matrix rates match published accuracy/precision/recall")
def test_criterion_4_overall_rates():
    rates = derived_rates(OVERALL_CONFUSION, ("+", "-"))
    assert abs(rates.accuracy - 0.73) <= 0.005
    assert abs(rates.precision - 0.31) <= 0.005
    assert abs(rates.recall - 0.53) <= 0.005


@criterion(5, "special functions match the quadrature oracle and closed forms")
def test_criterion_5_special_functions():
    # 204-point grid over dof in {1..10, 50, 200}, x in [0, 1000], frozen
    # from the adaptive-quadrature oracle (tests/oracles.py)
    points = ORACLE_TABLE["points"]
    dofs = sorted({p["dof"] for p in points})
    assert dofs == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 200]
    assert len(points) >= 200
    assert max(p["x"] for p in points) == 1000.0
    worst = max(abs(chi_squared_sf(p["x"], p["dof"]) - p["sf"]) for p in points)
    assert worst <= 1e-10

    for x in [0.0, 0.5, 1.0, 2.0, 5.0, 12.5, 40.0, 120.0, 500.0, 1000.0]:
        assert abs(chi_squared_sf(x, 2) - math.exp(-x / 2.0)) <= 1e-12

    z = 0.05
    while z <= 8.0:
        assert abs(normal_two_tailed_quantile(normal_two_tailed_p(z)) - z) <= 1e-9
        z += 0.05

    assert abs(normal_two_tailed_p(3.29) - 0.001) <= 5e-5


@criterion(6, "randomized property suite (>= 1000 cases)")
def test_criterion_6_property_suite():
    rng = np.random.default_rng(12345)
    cases = 0

    def random_valid_counts():
        while True:
            q = int(rng.integers(2, 6))
            r = int(rng.integers(2, 7))
            counts = rng.integers(0, 60, size=(q, r))
            if (counts.sum(axis=1) > 0).sum() >= 2 and (counts.sum(axis=0) > 0).sum() >= 2:
                return counts

    def proportional_check(counts):
        rows = [[int(v) for v in row] for row in counts]
        n = sum(map(sum, rows))
        row_totals = [sum(row) for row in rows]
        col_totals = [sum(row[j] for row in rows) for j in range(len(rows[0]))]
        return all(
            rows[i][j] * n == row_totals[i] * col_totals[j]
            for i in range(len(rows))
            for j in range(len(rows[0]))
        )

    for _ in range(150):
        counts = random_valid_counts()
        matrix = make_matrix(counts)
        test = equal_confusion_test(matrix, 0.05)
        parity = confusion_parity_error(test, matrix)
        residuals = adjusted_residuals(matrix, test.expected)

        # phi scale invariance under integer count scaling
        scale = int(rng.integers(2, 11))
        scaled = make_matrix(counts * scale)
        scaled_test = equal_confusion_test(scaled, 0.05)
        assert scaled_test.statistic == (
            0.0 if test.statistic == 0.0 else scaled_test.statistic
        )
        if test.statistic > 0:
            assert abs(scaled_test.statistic - scale * test.statistic) <= 1e-9 * scaled_test.statistic
            scaled_phi = confusion_parity_error(scaled_test, scaled).phi
            assert abs(scaled_phi - parity.phi) <= 1e-9 * max(parity.phi, 1e-30)
        cases += 1

        # row/column permutation invariance
        row_perm = rng.permutation(counts.shape[0])
        col_perm = rng.permutation(counts.shape[1])
        permuted = make_matrix(
            counts[np.ix_(row_perm, col_perm)],
            tuple(matrix.group_names[i] for i in row_perm),
            tuple(matrix.outcome_cells[j] for j in col_perm),
        )
        perm_test = equal_confusion_test(permuted, 0.05)
        assert abs(perm_test.statistic - test.statistic) <= 1e-9 * max(test.statistic, 1e-12)
        assert perm_test.dof == test.dof
        assert abs(perm_test.p_value - test.p_value) <= 1e-9 * max(test.p_value, 1e-15)
        perm_phi = confusion_parity_error(perm_test, permuted).phi
        assert abs(perm_phi - parity.phi) <= 1e-9 * max(parity.phi, 1e-12)
        perm_residuals = adjusted_residuals(permuted, perm_test.expected)
        assert np.allclose(
            np.sort(residuals.residuals.ravel()),
            np.sort(perm_residuals.residuals.ravel()),
            rtol=1e-9,
            atol=1e-12,
        )
        cases += 1

        # chi2 = 0 iff proportional rows iff all residuals zero
        proportional = proportional_check(counts)
        assert (test.statistic < 1e-11) == proportional
        assert (np.abs(residuals.residuals).max() < 1e-9) == proportional
        cases += 1

        # phi in [0, 1]
        assert 0.0 <= parity.phi <= 1.0
        cases += 1

    # exactly proportional tables hit the zero branch of the iff
    for _ in range(60):
        multipliers = rng.integers(1, 6, size=int(rng.integers(2, 5)))
        base = rng.integers(0, 10, size=int(rng.integers(2, 6)))
        while (base > 0).sum() < 2:
            base = rng.integers(0, 10, size=base.size)
        matrix = make_matrix(np.outer(multipliers, base))
        test = equal_confusion_test(matrix, 0.05)
        assert test.statistic == 0.0
        assert test.p_value == 1.0
        residuals = adjusted_residuals(matrix, test.expected)
        assert np.abs(residuals.residuals).max() < 1e-9
        cases += 1

    # 2x2 residual magnitude symmetry
    for _ in range(150):
        a, b, c, d = (int(v) for v in rng.integers(1, 200, size=4))
        matrix = make_matrix(np.array([[a, b], [c, d]]))
        test = equal_confusion_test(matrix, 0.05)
        magnitudes = np.abs(adjusted_residuals(matrix, test.expected).residuals).ravel()
        assert magnitudes.max() - magnitudes.min() <= 1e-9 * max(magnitudes.max(), 1.0)
        cases += 1

    # contingency round trip and sum preservation
    groups = ("g1", "g2", "g3")
    labels = ("a", "b", "c")
    for _ in range(150):
        size = int(rng.integers(1, 100))
        samples = [
            LabeledSample(
                group_key=(str(rng.choice(groups)),),
                predicted=str(rng.choice(labels)),
                actual=str(rng.choice(labels)),
            )
            for _ in range(size)
        ]
        matrix = build_contingency(samples, label_order=labels, group_order=groups)
        assert matrix.n == len(samples)
        cases += 1
        for i, name in enumerate(groups):
            confusion = confusion_matrix_of(matrix, i)
            direct = np.zeros((3, 3), dtype=int)
            for sample in samples:
                if sample.group_name == name:
                    direct[labels.index(sample.actual), labels.index(sample.predicted)] += 1
            assert np.array_equal(confusion, direct)
        cases += 1

    assert cases >= 1000
    print(f"  ran {cases} randomized property cases")


@criterion(7, "effect-size interpretation table reproduced (21 values)")
def test_criterion_7_effect_size_table():
    published = {
        4: (0.06, 0.17, 0.29),
        5: (0.05, 0.15, 0.25),
        6: (0.04, 0.13, 0.22),
        7: (0.04, 0.12, 0.20),
        8: (0.04, 0.11, 0.19),
        9: (0.04, 0.11, 0.18),
        10: (0.03, 0.10, 0.17),
    }
    checked = 0
    for min_qr, bounds in published.items():
        computed = tuple(round(v, 2) for v in effect_size_bounds(min_qr))
        assert computed == bounds
        checked += 3
    assert checked == 21


@criterion(8, "reproduce command is byte-identical across runs and passes")
def test_criterion_8_reproduce_determinism():
    command = [sys.executable, "-m", "confusionaudit.cli", "reproduce"]
    first = subprocess.run(command, capture_output=True, timeout=120)
    second = subprocess.run(command, capture_output=True, timeout=120)
    assert first.returncode == 0, first.stderr.decode()
    assert second.returncode == 0
    assert first.stdout == second.stdout
    assert b"result: PASS" in first.stdout
