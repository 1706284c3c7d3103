"""Bitmask utilities for subsets of a finite criteria set.

Criteria are numbered 1..m and criterion j owns bit j-1, so the subset
{1, 3} is the mask 0b101. The "paper list" ordering sorts subsets by
cardinality and then lexicographically by sorted member tuple; it is used
for display and serialization, while all array storage is bitmask-indexed.
"""

from functools import lru_cache

import numpy as np

from .errors import DimensionError, DomainError


def full_set(m: int) -> int:
    """Mask of the complete criteria set {1, ..., m}."""
    return (1 << m) - 1


def cardinality(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=None)
def cardinalities(m: int) -> np.ndarray:
    """Cardinality of every mask 0 .. 2^m - 1 as an int64 array."""
    card = np.zeros(1 << m, dtype=np.int64)
    for j in range(m):
        card[(np.arange(1 << m) >> j) & 1 == 1] += 1
    card.setflags(write=False)
    return card


def members(mask: int) -> tuple[int, ...]:
    """Criteria in the subset, ascending, 1-based."""
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def mask_of(criteria) -> int:
    """Mask of an iterable of 1-based criterion indices."""
    mask = 0
    for j in criteria:
        j = int(j)
        if j < 1:
            raise DomainError(f"criterion indices are 1-based, got {j}")
        mask |= 1 << (j - 1)
    return mask


def iter_submasks(mask: int):
    """All submasks of `mask`, ascending, including 0 and `mask` itself."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def subset_label(mask: int) -> str:
    """Sorted comma-joined criterion indices; the empty set is ''."""
    return ",".join(str(j) for j in members(mask))


def parse_subset_label(label: str) -> int:
    """Inverse of subset_label; whitespace is tolerated."""
    text = label.strip()
    if not text:
        return 0
    try:
        return mask_of(int(part) for part in text.split(","))
    except ValueError as exc:
        raise DomainError(f"cannot parse subset label {label!r}") from exc


@lru_cache(maxsize=None)
def paper_order(m: int) -> tuple[int, ...]:
    """Masks 0 .. 2^m - 1 sorted by (cardinality, sorted members)."""
    return tuple(sorted(range(1 << m), key=lambda a: (cardinality(a), members(a))))


def to_paper_list(values: np.ndarray) -> list[float]:
    """Reorder a bitmask-indexed vector into the paper-list ordering."""
    values = np.asarray(values)
    m = _m_from_length(values.shape[0])
    return [float(values[a]) for a in paper_order(m)]


def from_paper_list(values) -> np.ndarray:
    """Inverse of to_paper_list: build the bitmask-indexed vector."""
    values = list(values)
    m = _m_from_length(len(values))
    out = np.empty(1 << m, dtype=np.float64)
    for value, mask in zip(values, paper_order(m)):
        out[mask] = float(value)
    return out


def _m_from_length(length: int) -> int:
    m = max(length - 1, 0).bit_length()
    if length != 1 << m or m < 1:
        raise DimensionError(f"set-function vectors have length 2^m, got {length}")
    return m
