"""Input validation helpers for array-like label and group inputs.

These coerce what callers typically have at hand (numpy arrays, pandas
columns, plain lists, numbers) into the string labels and group-key
tuples the core types expect, with errors that name the offending input.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

__all__ = ["as_label_list", "as_group_keys", "check_consistent_length"]


def _as_string(value: Any, name: str) -> str:
    if isinstance(value, bytes):
        value = value.decode("utf-8")
    text = value if isinstance(value, str) else str(value)
    text = text.strip()
    if not text:
        raise ValueError(f"{name} contains an empty value")
    return text


def as_label_list(values: Sequence[Any], name: str) -> list[str]:
    """Coerce a 1-D array-like of labels to a list of non-empty strings."""
    array = np.asarray(values, dtype=object)
    if array.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {array.shape}")
    if array.size == 0:
        raise ValueError(f"{name} must not be empty")
    return [_as_string(v, name) for v in array]


def as_group_keys(values: Sequence[Any], name: str = "groups") -> list[tuple[str, ...]]:
    """Coerce group memberships to key tuples.

    Accepts a 1-D array-like (one sensitive attribute) or a 2-D array-like
    / sequence of tuples (one column per attribute).
    """
    array = np.asarray(values, dtype=object)
    if array.ndim == 1:
        first = array[0] if array.size else None
        if isinstance(first, (tuple, list, np.ndarray)):
            keys = [tuple(_as_string(v, name) for v in row) for row in array]
            arities = {len(key) for key in keys}
            if len(arities) > 1:
                raise ValueError(f"{name} rows have inconsistent arity: {sorted(arities)}")
            return keys
        return [(_as_string(v, name),) for v in array]
    if array.ndim == 2:
        return [tuple(_as_string(v, name) for v in row) for row in array]
    raise ValueError(f"{name} must be 1- or 2-dimensional, got shape {array.shape}")


def check_consistent_length(**named: Sequence[Any]) -> int:
    """Assert all named sequences share one length and return it."""
    lengths = {name: len(seq) for name, seq in named.items()}
    unique = set(lengths.values())
    if len(unique) != 1:
        detail = ", ".join(f"{name}={length}" for name, length in lengths.items())
        raise ValueError(f"inconsistent input lengths: {detail}")
    return unique.pop()
