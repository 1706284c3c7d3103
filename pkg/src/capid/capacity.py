"""Capacities on the subset lattice and their interaction representations.

A capacity is a set function mu: 2^C -> R with mu(empty) = 0, mu(C) = 1,
and mu(A) <= mu(B) whenever A is a subset of B. Vectors are bitmask-indexed
(criterion j owns bit j-1); the paper-list ordering from ``subsets`` is
used only at the serialization boundary.

Every transform ships in two routes: a fast per-bit butterfly in
O(m 2^m), and a literal double-sum in O(4^m) whose only job is to be
obviously faithful to the defining formula. Tests pin the two together.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import subsets
from .errors import DimensionError, DomainError, InvalidCapacityError

# ---------------------------------------------------------------------------
# -- Vector types -----------------------------------------------------------


def _prepare_values(values, m: int | None) -> tuple[np.ndarray, int]:
    vals = np.array(values, dtype=np.float64)
    if vals.ndim != 1:
        raise DimensionError("set-function values must be a 1-d vector")
    inferred = subsets._m_from_length(vals.shape[0])
    if m is not None and m != inferred:
        raise DimensionError(f"m={m} does not match vector of length {vals.shape[0]}")
    if not np.all(np.isfinite(vals)):
        raise DomainError("set-function values must be finite")
    vals.setflags(write=False)
    return vals, inferred


@dataclass(frozen=True)
class Capacity:
    """A set function in capacity coordinates, bitmask-indexed."""

    values: np.ndarray
    m: int = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        vals, m = _prepare_values(self.values, self.m)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "m", m)

    @classmethod
    def additive(cls, weights) -> "Capacity":
        """The additive capacity mu(A) = sum of weights over A."""
        w = np.asarray(weights, dtype=np.float64)
        masses = np.zeros(1 << w.shape[0])
        for j in range(w.shape[0]):
            masses[1 << j] = w[j]
        return cls(zeta_transform(masses))

    @classmethod
    def uniform(cls, m: int) -> "Capacity":
        """The additive capacity with equal weights 1/m."""
        return cls.additive(np.full(m, 1.0 / m))

    @classmethod
    def from_paper_list(cls, values) -> "Capacity":
        return cls(subsets.from_paper_list(values))

    def to_paper_list(self) -> list[float]:
        return subsets.to_paper_list(self.values)


@dataclass(frozen=True)
class InteractionVector:
    """A set function in interaction coordinates, bitmask-indexed."""

    values: np.ndarray
    m: int = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        vals, m = _prepare_values(self.values, self.m)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_paper_list(cls, values) -> "InteractionVector":
        return cls(subsets.from_paper_list(values))

    def to_paper_list(self) -> list[float]:
        return subsets.to_paper_list(self.values)


@dataclass(frozen=True)
class FourierVector:
    """Fourier coefficients of a set function over {-1, +1}^m, bitmask-indexed."""

    values: np.ndarray
    m: int = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        vals, m = _prepare_values(self.values, self.m)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "m", m)


# ---------------------------------------------------------------------------
# -- Per-bit butterfly transforms, O(m 2^m) ---------------------------------


def _per_bit(values: np.ndarray, m: int, combine) -> np.ndarray:
    """Apply `combine((without_j, with_j)) -> (new0, new1)` once per bit."""
    t = np.array(values, dtype=np.float64).reshape([2] * m)
    for axis in range(m):
        a = np.take(t, 0, axis=axis)
        b = np.take(t, 1, axis=axis)
        new0, new1 = combine(a, b)
        t = np.stack((new0, new1), axis=axis)
    return t.reshape(-1)


def interaction_transform(mu_values: np.ndarray) -> np.ndarray:
    """Capacity coordinates -> interaction coordinates.

    One butterfly pass per criterion: the without/with pair (a, b) maps to
    ((a + b) / 2, b - a), i.e. averaging over absent criteria and taking
    discrete derivatives over present ones.
    """
    vals, m = _prepare_values(mu_values, None)
    return _per_bit(vals, m, lambda a, b: ((a + b) * 0.5, b - a))


def capacity_transform(interaction_values: np.ndarray) -> np.ndarray:
    """Interaction coordinates -> capacity coordinates (exact inverse)."""
    vals, m = _prepare_values(interaction_values, None)
    return _per_bit(vals, m, lambda x, y: (x - 0.5 * y, x + 0.5 * y))


def mobius_transform(mu_values: np.ndarray) -> np.ndarray:
    """Capacity coordinates -> Moebius masses."""
    vals, m = _prepare_values(mu_values, None)
    return _per_bit(vals, m, lambda a, b: (a, b - a))


def zeta_transform(masses: np.ndarray) -> np.ndarray:
    """Moebius masses -> capacity coordinates (exact inverse)."""
    vals, m = _prepare_values(masses, None)
    return _per_bit(vals, m, lambda a, b: (a, a + b))


def banzhaf_from_capacity(mu: Capacity) -> InteractionVector:
    """Interaction index of every subset, fast route."""
    return InteractionVector(interaction_transform(mu.values))


def capacity_from_banzhaf(interactions: InteractionVector) -> Capacity:
    """Capacity recovered from a full interaction vector, fast route."""
    return Capacity(capacity_transform(interactions.values))


# ---------------------------------------------------------------------------
# -- Literal double-sum transforms, O(4^m) ----------------------------------
#
# These follow the defining sums term by term and exist as an independent
# route for the fast transforms to be checked against. Do not "optimize".


def interaction_transform_direct(mu_values: np.ndarray) -> np.ndarray:
    vals, m = _prepare_values(mu_values, None)
    full = subsets.full_set(m)
    out = np.zeros(1 << m)
    for a in range(1 << m):
        comp = full ^ a
        scale = 0.5 ** subsets.cardinality(comp)
        card_a = subsets.cardinality(a)
        total = 0.0
        for d in subsets.iter_submasks(comp):
            for dp in subsets.iter_submasks(a):
                sign = -1.0 if (card_a - subsets.cardinality(dp)) % 2 else 1.0
                total += sign * vals[dp | d]
        out[a] = scale * total
    return out


def capacity_transform_direct(interaction_values: np.ndarray) -> np.ndarray:
    vals, m = _prepare_values(interaction_values, None)
    out = np.zeros(1 << m)
    for a in range(1 << m):
        total = 0.0
        for d in range(1 << m):
            outside = subsets.cardinality(d & ~a)
            sign = -1.0 if outside % 2 else 1.0
            total += 0.5 ** subsets.cardinality(d) * sign * vals[d]
        out[a] = total
    return out


def power_index(mu: Capacity, j: int) -> float:
    """Average marginal contribution of criterion j over all coalitions.

    Literal sum: (1/2^{m-1}) sum over A not containing j of
    mu(A + j) - mu(A).
    """
    _check_criterion(mu.m, j)
    bit = 1 << (j - 1)
    total = 0.0
    for a in range(1 << mu.m):
        if a & bit:
            continue
        total += mu.values[a | bit] - mu.values[a]
    return float(total / 2 ** (mu.m - 1))


def pair_interaction(mu: Capacity, j: int, k: int) -> float:
    """Interaction of the pair {j, k}: the average second difference.

    Literal sum: (1/2^{m-2}) sum over A avoiding both of
    mu(A+jk) - mu(A+j) - mu(A+k) + mu(A).
    """
    _check_criterion(mu.m, j)
    _check_criterion(mu.m, k)
    if j == k:
        raise DomainError("pair interaction needs two distinct criteria")
    bj, bk = 1 << (j - 1), 1 << (k - 1)
    total = 0.0
    for a in range(1 << mu.m):
        if a & (bj | bk):
            continue
        total += (
            mu.values[a | bj | bk]
            - mu.values[a | bj]
            - mu.values[a | bk]
            + mu.values[a]
        )
    return float(total / 2 ** (mu.m - 2))


def _check_criterion(m: int, j: int):
    if not 1 <= j <= m:
        raise DomainError(f"criterion index {j} outside 1..{m}")


# ---------------------------------------------------------------------------
# -- Fourier coordinates ----------------------------------------------------


def fourier_from_banzhaf(interactions: InteractionVector) -> FourierVector:
    """Fourier coefficients: hat(A) = (-1/2)^|A| I(A)."""
    card = subsets.cardinalities(interactions.m)
    return FourierVector((-0.5) ** card * interactions.values)


def banzhaf_from_fourier(coeffs: FourierVector) -> InteractionVector:
    card = subsets.cardinalities(coeffs.m)
    return InteractionVector((-2.0) ** card * coeffs.values)


# ---------------------------------------------------------------------------
# -- Validation and structure -----------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of capacity validation.

    monotonicity_violations lists (subset, subset + j) index pairs whose
    adjacent difference is below -tolerance.
    """

    bounded: bool
    monotone: bool
    monotonicity_violations: tuple[tuple[int, int], ...]
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.bounded and self.monotone


def validate(mu: Capacity, tolerance: float = 1e-12) -> ValidationReport:
    """Check boundedness and monotonicity along all adjacent subset pairs."""
    vals = mu.values
    bounded = abs(vals[0]) <= tolerance and abs(vals[-1] - 1.0) <= tolerance
    violations = []
    idx = np.arange(1 << mu.m)
    for j in range(mu.m):
        bit = 1 << j
        without = idx[(idx & bit) == 0]
        with_j = without | bit
        bad = np.nonzero(vals[with_j] < vals[without] - tolerance)[0]
        violations.extend((int(without[i]), int(with_j[i])) for i in bad)
    violations.sort()
    return ValidationReport(
        bounded=bool(bounded),
        monotone=not violations,
        monotonicity_violations=tuple(violations),
        tolerance=tolerance,
    )


def require_valid(mu: Capacity, tolerance: float = 1e-12) -> None:
    """Raise InvalidCapacityError when validation fails."""
    report = validate(mu, tolerance)
    if not report.ok:
        parts = []
        if not report.bounded:
            parts.append("boundedness violated (mu(empty) = 0 and mu(full) = 1 required)")
        if not report.monotone:
            a, b = report.monotonicity_violations[0]
            parts.append(
                f"monotonicity violated on {len(report.monotonicity_violations)} "
                f"adjacent pairs, first at subsets {a} -> {b}"
            )
        raise InvalidCapacityError("; ".join(parts))


def is_two_additive(interactions: InteractionVector, tolerance: float = 1e-9) -> bool:
    """True when every interaction of cardinality >= 3 vanishes within tolerance."""
    card = subsets.cardinalities(interactions.m)
    high = interactions.values[card >= 3]
    return bool(high.size == 0 or np.max(np.abs(high)) <= tolerance)


def mobius_from_capacity(mu: Capacity) -> np.ndarray:
    """Moebius masses of a capacity, bitmask-indexed."""
    return mobius_transform(mu.values)


def capacity_from_mobius(masses) -> Capacity:
    """Capacity built from Moebius masses, bitmask-indexed."""
    return Capacity(zeta_transform(np.asarray(masses, dtype=np.float64)))


def two_additive_capacity(m: int, singletons, pair_masses) -> Capacity:
    """Capacity from singleton masses and a {(j, k): mass} pair mapping."""
    masses = np.zeros(1 << m)
    singles = np.asarray(singletons, dtype=np.float64)
    if singles.shape != (m,):
        raise DimensionError(f"need {m} singleton masses, got {singles.shape}")
    for j in range(m):
        masses[1 << j] = singles[j]
    for (j, k), value in pair_masses.items():
        _check_criterion(m, j)
        _check_criterion(m, k)
        if j == k:
            raise DomainError("pair masses need two distinct criteria")
        masses[(1 << (j - 1)) | (1 << (k - 1))] = float(value)
    return capacity_from_mobius(masses)


# ---------------------------------------------------------------------------
# -- Serialization ----------------------------------------------------------
#
# JSON schema: {"m": int, "ordering": "paper-list", "values": [floats]}.
# CSV export: one row per subset with its label and value, paper-list order.


def to_json_dict(obj) -> dict:
    return {"m": obj.m, "ordering": "paper-list", "values": subsets.to_paper_list(obj.values)}


def save_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(to_json_dict(obj), handle, indent=2)
        handle.write("\n")


def _values_from_json_dict(data: dict) -> np.ndarray:
    try:
        m = int(data["m"])
        ordering = data["ordering"]
        values = data["values"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed set-function JSON: missing {exc}") from exc
    if ordering != "paper-list":
        raise DomainError(f"unsupported ordering {ordering!r}")
    if len(values) != 1 << m:
        raise DimensionError(f"m={m} needs {1 << m} values, got {len(values)}")
    return subsets.from_paper_list(values)


def capacity_from_json_dict(data: dict) -> Capacity:
    return Capacity(_values_from_json_dict(data))


def interactions_from_json_dict(data: dict) -> InteractionVector:
    return InteractionVector(_values_from_json_dict(data))


def load_capacity_json(path) -> Capacity:
    with open(path, "r", encoding="utf-8") as handle:
        return capacity_from_json_dict(json.load(handle))


def load_interactions_json(path) -> InteractionVector:
    with open(path, "r", encoding="utf-8") as handle:
        return interactions_from_json_dict(json.load(handle))


def set_function_to_csv(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["subset", "value"])
        for mask in subsets.paper_order(obj.m):
            writer.writerow([subsets.subset_label(mask), repr(float(obj.values[mask]))])
