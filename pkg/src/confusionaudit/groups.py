"""Sensitive-attribute handling: selection, intersection, audit plans.

A grouping spec either projects a single attribute or crosses several
into intersectional groups (for example sex by race).  Expansion rewrites
each sample's multi-attribute group key into one composite group name and
reports every group it dropped, so sparse subgroups are surfaced rather
than silently vanishing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .contingency import COMPOSITE_SEPARATOR, LabeledSample

__all__ = [
    "GroupingSpec",
    "DroppedGroup",
    "GroupExpansion",
    "expand_groups",
    "audit_plan",
    "display_group_name",
]

# How composite group names are shown to humans; the raw separator is the
# unit separator control character, which ingestion keeps out of values.
DISPLAY_SEPARATOR = " × "


def display_group_name(name: str) -> str:
    return name.replace(COMPOSITE_SEPARATOR, DISPLAY_SEPARATOR)


@dataclass(frozen=True)
class GroupingSpec:
    """Which sensitive attributes define the groups of one audit.

    One attribute means single-attribute grouping; two or more mean
    intersectional grouping over their value combinations.
    """

    attributes: tuple[str, ...]
    min_group_size: int = 0
    drop_empty: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise ValueError("a grouping spec needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError(f"grouping attributes must be distinct, got {self.attributes}")
        if self.min_group_size < 0:
            raise ValueError(f"min_group_size must be >= 0, got {self.min_group_size}")

    @property
    def mode(self) -> str:
        return "intersection" if len(self.attributes) > 1 else "single"

    def describe(self) -> str:
        return DISPLAY_SEPARATOR.join(self.attributes)


@dataclass(frozen=True, slots=True)
class DroppedGroup:
    name: str
    size: int
    reason: str

    def describe(self) -> str:
        return f"{display_group_name(self.name)} (n={self.size}, {self.reason})"


@dataclass(frozen=True)
class GroupExpansion:
    """Samples rewritten to composite groups, plus drop bookkeeping."""

    samples: tuple[LabeledSample, ...]
    group_order: tuple[str, ...]
    dropped: tuple[DroppedGroup, ...] = field(default_factory=tuple)


def expand_groups(
    samples: Sequence[LabeledSample],
    attribute_names: Sequence[str],
    spec: GroupingSpec,
) -> GroupExpansion:
    """Project or intersect sensitive attributes into composite groups.

    ``attribute_names`` gives the meaning of each ``group_key`` position.
    Groups with zero members never appear in the output samples; empty
    intersections and groups below ``min_group_size`` are listed in
    ``dropped``.  With ``drop_empty=False`` empty combinations stay in
    ``group_order`` so a downstream contingency matrix carries them as
    zero rows.

    Raises
    ------
    ValueError
        If a spec attribute is not in ``attribute_names`` or a sample's
        key arity does not match.
    """
    names = tuple(attribute_names)
    positions = []
    for attribute in spec.attributes:
        if attribute not in names:
            raise ValueError(f"unknown attribute {attribute!r}; dataset has {names}")
        positions.append(names.index(attribute))

    # Per-attribute observed values in first-appearance order, so empty
    # intersections can be enumerated deterministically.
    observed_values: list[dict[str, None]] = [{} for _ in positions]
    members: dict[str, list[LabeledSample]] = {}
    for sample in samples:
        if len(sample.group_key) != len(names):
            raise ValueError(
                f"sample group key {sample.group_key!r} does not match attributes {names}"
            )
        values = tuple(sample.group_key[p] for p in positions)
        for slot, value in zip(observed_values, values):
            slot.setdefault(value)
        members.setdefault(COMPOSITE_SEPARATOR.join(values), []).append(sample)

    dropped: list[DroppedGroup] = []
    group_order: list[str] = []
    kept: dict[str, list[LabeledSample]] = {}
    for combo in itertools.product(*(tuple(slot) for slot in observed_values)):
        name = COMPOSITE_SEPARATOR.join(combo)
        group = members.get(name, [])
        if not group:
            dropped.append(DroppedGroup(name, 0, "empty"))
            if not spec.drop_empty:
                group_order.append(name)
        elif len(group) < spec.min_group_size:
            dropped.append(DroppedGroup(name, len(group), f"below min_group_size={spec.min_group_size}"))
        else:
            group_order.append(name)
            kept[name] = group

    expanded = tuple(
        LabeledSample(group_key=(name,), predicted=s.predicted, actual=s.actual)
        for name in kept
        for s in kept[name]
    )
    return GroupExpansion(samples=expanded, group_order=tuple(group_order), dropped=tuple(dropped))


def audit_plan(attributes: Sequence[str], include_intersections: bool) -> list[GroupingSpec]:
    """One single-attribute spec per attribute, plus the full intersection.

    The intersection spec over all attributes is appended when requested
    and at least two attributes are given; order is deterministic.
    """
    names = tuple(attributes)
    if not names:
        raise ValueError("audit plan needs at least one attribute")
    if len(set(names)) != len(names):
        raise ValueError(f"attributes must be distinct, got {names}")
    plan = [GroupingSpec(attributes=(name,)) for name in names]
    if include_intersections and len(names) >= 2:
        plan.append(GroupingSpec(attributes=names))
    return plan
