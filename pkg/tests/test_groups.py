"""Group expansion, intersections, and audit planning."""

import numpy as np
import pytest

from confusionaudit.contingency import COMPOSITE_SEPARATOR, LabeledSample, build_contingency
from confusionaudit.groups import GroupingSpec, audit_plan, display_group_name, expand_groups

from conftest import INTER_OBSERVED, samples_from_counts


def compas_style_samples():
    """Samples whose (sex, race) tallies reproduce the intersectional table."""
    names = [
        ("Female", "African-American"),
        ("Female", "Asian"),
        ("Female", "Caucasian"),
        ("Female", "Hispanic"),
        ("Female", "Other"),
        ("Male", "African-American"),
        ("Male", "Asian"),
        ("Male", "Caucasian"),
        ("Male", "Hispanic"),
        ("Male", "Native American"),
        ("Male", "Other"),
    ]
    samples = []
    for (sex, race), row in zip(names, INTER_OBSERVED):
        flat = samples_from_counts(np.array([row, row]), ("x", "y"), ("+", "-"))
        for sample in flat[: len(flat) // 2]:
            samples.append(
                LabeledSample(group_key=(sex, race), predicted=sample.predicted, actual=sample.actual)
            )
    return samples


class TestGroupingSpec:
    def test_modes(self):
        assert GroupingSpec(("sex",)).mode == "single"
        assert GroupingSpec(("sex", "race")).mode == "intersection"

    def test_rejects_duplicates_and_empty(self):
        with pytest.raises(ValueError):
            GroupingSpec(("sex", "sex"))
        with pytest.raises(ValueError):
            GroupingSpec(())
        with pytest.raises(ValueError):
            GroupingSpec(("sex",), min_group_size=-1)


class TestExpandGroups:
    def test_single_projection_preserves_samples(self):
        samples = compas_style_samples()
        expansion = expand_groups(samples, ("sex", "race"), GroupingSpec(("sex",)))
        assert len(expansion.samples) == len(samples) == 4020
        assert expansion.group_order == ("Female", "Male")
        assert expansion.dropped == ()

    def test_intersection_drops_empty_combination(self):
        samples = compas_style_samples()
        expansion = expand_groups(samples, ("sex", "race"), GroupingSpec(("sex", "race")))
        # 2 x 6 combinations, one of which has no members
        assert len(expansion.group_order) == 11
        assert len(expansion.dropped) == 1
        dropped = expansion.dropped[0]
        assert dropped.reason == "empty"
        assert dropped.size == 0
        assert display_group_name(dropped.name) == "Female × Native American"
        assert len(expansion.samples) == 4020

    def test_intersection_reproduces_published_table(self):
        from conftest import INTER_GROUPS

        samples = compas_style_samples()
        expansion = expand_groups(samples, ("sex", "race"), GroupingSpec(("sex", "race")))
        assert set(expansion.group_order) == set(INTER_GROUPS)
        matrix = build_contingency(
            expansion.samples, label_order=("+", "-"), group_order=INTER_GROUPS
        )
        assert np.array_equal(matrix.counts, INTER_OBSERVED)

    def test_keep_empty_combination_as_zero_row(self):
        samples = compas_style_samples()
        spec = GroupingSpec(("sex", "race"), drop_empty=False)
        expansion = expand_groups(samples, ("sex", "race"), spec)
        assert len(expansion.group_order) == 12
        empty_name = "Female" + COMPOSITE_SEPARATOR + "Native American"
        assert empty_name in expansion.group_order
        matrix = build_contingency(
            expansion.samples, label_order=("+", "-"), group_order=expansion.group_order
        )
        assert matrix.counts[expansion.group_order.index(empty_name)].sum() == 0

    def test_min_group_size_drops_and_reports(self):
        samples = compas_style_samples()
        spec = GroupingSpec(("sex", "race"), min_group_size=30)
        expansion = expand_groups(samples, ("sex", "race"), spec)
        dropped_names = {display_group_name(d.name) for d in expansion.dropped}
        # Asian female (1), Native American male (7), Asian male (25) fall
        # under 30; the empty combination is also reported.
        assert dropped_names == {
            "Female × Asian",
            "Female × Native American",
            "Male × Asian",
            "Male × Native American",
        }
        assert len(expansion.samples) == 4020 - 1 - 7 - 25

    def test_group_count_matches_distinct_scan(self):
        rng = np.random.default_rng(2)
        values_a = ["a1", "a2", "a3"]
        values_b = ["b1", "b2", "b3", "b4"]
        samples = [
            LabeledSample(
                group_key=(str(rng.choice(values_a)), str(rng.choice(values_b))),
                predicted=str(rng.choice(["+", "-"])),
                actual=str(rng.choice(["+", "-"])),
            )
            for _ in range(300)
        ]
        expansion = expand_groups(samples, ("a", "b"), GroupingSpec(("a", "b")))
        distinct = {(s.group_key[0], s.group_key[1]) for s in samples}
        assert len(expansion.group_order) == len(distinct)

    def test_never_invents_samples(self):
        rng = np.random.default_rng(9)
        samples = [
            LabeledSample(
                group_key=(str(rng.choice(["x", "y"])), str(rng.choice(["u", "v"]))),
                predicted="+",
                actual="-",
            )
            for _ in range(50)
        ]
        spec = GroupingSpec(("x_attr", "y_attr"), min_group_size=10)
        expansion = expand_groups(samples, ("x_attr", "y_attr"), spec)
        assert len(expansion.samples) <= len(samples)
        kept_plus_dropped = len(expansion.samples) + sum(d.size for d in expansion.dropped)
        assert kept_plus_dropped == len(samples)

    def test_composite_names_are_injective(self):
        a = LabeledSample(group_key=("x", "y z"), predicted="+", actual="-")
        b = LabeledSample(group_key=("x y", "z"), predicted="+", actual="-")
        expansion = expand_groups([a, b], ("p", "q"), GroupingSpec(("p", "q")))
        assert len(expansion.group_order) == 2

    def test_unknown_attribute_rejected(self):
        samples = [LabeledSample(group_key=("x", "y"), predicted="+", actual="-")]
        with pytest.raises(ValueError, match="unknown attribute"):
            expand_groups(samples, ("a", "b"), GroupingSpec(("c",)))

    def test_arity_mismatch_rejected(self):
        samples = [LabeledSample(group_key=("x",), predicted="+", actual="-")]
        with pytest.raises(ValueError, match="does not match"):
            expand_groups(samples, ("a", "b"), GroupingSpec(("a",)))


class TestAuditPlan:
    def test_two_attributes_with_intersection(self):
        plan = audit_plan(["sex", "race"], True)
        assert [spec.attributes for spec in plan] == [("sex",), ("race",), ("sex", "race")]

    def test_single_attribute(self):
        plan = audit_plan(["sex"], False)
        assert [spec.attributes for spec in plan] == [("sex",)]
        # intersection of one attribute is meaningless and not emitted
        assert [spec.attributes for spec in audit_plan(["sex"], True)] == [("sex",)]

    def test_three_attributes(self):
        plan = audit_plan(["a", "b", "c"], True)
        assert [spec.attributes for spec in plan] == [("a",), ("b",), ("c",), ("a", "b", "c")]
        assert plan[-1].mode == "intersection"

    def test_rejects_empty_or_duplicate(self):
        with pytest.raises(ValueError):
            audit_plan([], False)
        with pytest.raises(ValueError):
            audit_plan(["a", "a"], False)
