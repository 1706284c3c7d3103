"""Decision matrices, aggregation models, and rankings.

Rows are alternatives, columns are criteria, entries are degrees of
satisfaction in [0, 1]. The multilinear model averages the capacity over
the random coalition that includes each criterion j independently with
probability v_ij; the weighted arithmetic mean is its additive special
case.
"""

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels, subsets
from .capacity import Capacity, mobius_from_capacity
from .errors import DimensionError, DomainError

# ---------------------------------------------------------------------------
# -- Types ------------------------------------------------------------------


@dataclass(frozen=True)
class DecisionMatrix:
    """An (n, m) array of satisfaction degrees with optional names."""

    values: np.ndarray
    criteria: Optional[tuple] = None
    labels: Optional[tuple] = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DimensionError("decision matrix must be 2-d")
        n, m = vals.shape
        if n < 1 or m < 2:
            raise DimensionError(f"need at least 1 row and 2 criteria, got {vals.shape}")
        _check_unit_range(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.criteria is not None:
            crit = tuple(str(c) for c in self.criteria)
            if len(crit) != m:
                raise DimensionError(f"{len(crit)} criterion names for {m} columns")
            object.__setattr__(self, "criteria", crit)
        if self.labels is not None:
            labels = tuple(str(c) for c in self.labels)
            if len(labels) != n:
                raise DimensionError(f"{len(labels)} labels for {n} rows")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def criterion_names(self) -> tuple:
        if self.criteria is not None:
            return self.criteria
        return tuple(f"c{j}" for j in range(1, self.m + 1))


def _check_unit_range(vals: np.ndarray) -> None:
    bad = ~np.isfinite(vals) | (vals < 0.0) | (vals > 1.0)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise DomainError(
            f"entry {vals[i, j]!r} at row {i + 1}, column {j + 1} is outside [0, 1]"
        )


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative criterion weights summing to one."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape[0] < 1:
            raise DimensionError("weights must be a 1-d vector")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
            raise DomainError("weights must be finite and nonnegative")
        if abs(float(vals.sum()) - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {float(vals.sum())!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def equal(cls, m: int) -> "WeightVector":
        return cls(np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Ranking:
    """Overall evaluations with competition-ranked positions.

    order[k] is the row index holding rank k (best first, ties broken by
    row index); positions[i] = 1 + number of rows strictly better than i,
    so tied rows share the smallest applicable position.
    """

    overall: np.ndarray
    order: np.ndarray
    positions: np.ndarray


# ---------------------------------------------------------------------------
# -- CSV --------------------------------------------------------------------


def matrix_from_csv(path, normalize: bool = False) -> DecisionMatrix:
    """Load a decision matrix from CSV.

    The file needs a header row of criterion names; a non-numeric first
    column is treated as row labels. With normalize=True every column is
    min-max rescaled to [0, 1] (a constant column maps to 0.5); without
    it, entries must already lie in [0, 1].
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if len(rows) < 2:
        raise DomainError(f"{path}: need a header row and at least one data row")
    header, data = rows[0], rows[1:]
    width = len(header)
    for k, row in enumerate(data):
        if len(row) != width:
            raise DomainError(f"{path}: row {k + 2} has {len(row)} fields, header has {width}")
    has_labels = not _is_number(data[0][0])
    start = 1 if has_labels else 0
    labels = tuple(row[0] for row in data) if has_labels else None
    criteria = tuple(header[start:])
    values = np.empty((len(data), width - start), dtype=np.float64)
    for i, row in enumerate(data):
        for j, cell in enumerate(row[start:]):
            if not _is_number(cell):
                raise DomainError(
                    f"{path}: row {i + 2}, column {criteria[j]!r}: {cell!r} is not a number"
                )
            values[i, j] = float(cell)
    if normalize:
        values = normalize_minmax(values)
    return DecisionMatrix(values, criteria=criteria, labels=labels)


def matrix_to_csv(matrix: DecisionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        names = list(matrix.criterion_names())
        if matrix.labels is not None:
            writer.writerow(["label"] + names)
            for label, row in zip(matrix.labels, matrix.values):
                writer.writerow([label] + [repr(float(x)) for x in row])
        else:
            writer.writerow(names)
            for row in matrix.values:
                writer.writerow([repr(float(x)) for x in row])


def normalize_minmax(values: np.ndarray) -> np.ndarray:
    """Column-wise min-max rescaling; constant columns map to 0.5."""
    values = np.asarray(values, dtype=np.float64)
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    out = np.empty_like(values)
    for j in range(values.shape[1]):
        if span[j] > 0.0:
            out[:, j] = (values[:, j] - lo[j]) / span[j]
        else:
            out[:, j] = 0.5
    return out


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# -- Aggregation models -----------------------------------------------------


def _matrix_values(matrix) -> np.ndarray:
    if isinstance(matrix, DecisionMatrix):
        return matrix.values
    vals = np.ascontiguousarray(matrix, dtype=np.float64)
    if vals.ndim != 2:
        raise DimensionError("decision matrix must be 2-d")
    _check_unit_range(vals)
    return vals


def wam(matrix, weights: WeightVector) -> np.ndarray:
    """Weighted arithmetic mean of each row."""
    vals = _matrix_values(matrix)
    if weights.m != vals.shape[1]:
        raise DimensionError(f"{weights.m} weights for {vals.shape[1]} criteria")
    return vals @ weights.values


def multilinear(matrix, mu: Capacity) -> np.ndarray:
    """Multilinear aggregation of each row under the capacity mu.

    r_i = sum over subsets A of mu(A) * prod_{j in A} v_ij
    * prod_{j not in A} (1 - v_ij), evaluated in O(2^m) per row.
    """
    vals = _matrix_values(matrix)
    if mu.m != vals.shape[1]:
        raise DimensionError(f"capacity on {mu.m} criteria, matrix has {vals.shape[1]}")
    return kernels.multilinear_eval(vals, mu.values)


def multilinear_pairwise(matrix, mu: Capacity) -> np.ndarray:
    """Multilinear aggregation through Moebius masses, for 2-additive mu.

    r_i = sum_j m_j v_ij + sum_{j<k} m_jk v_ij v_ik. Exact for 2-additive
    capacities; silently wrong otherwise, so callers must check.
    """
    vals = _matrix_values(matrix)
    if mu.m != vals.shape[1]:
        raise DimensionError(f"capacity on {mu.m} criteria, matrix has {vals.shape[1]}")
    masses = mobius_from_capacity(mu)
    singles = np.array([masses[1 << j] for j in range(mu.m)])
    out = vals @ singles + masses[0]
    for j in range(mu.m):
        for k in range(j + 1, mu.m):
            pair_mass = masses[(1 << j) | (1 << k)]
            if pair_mass != 0.0:
                out = out + pair_mass * vals[:, j] * vals[:, k]
    return out


def multilinear_basis(matrix) -> np.ndarray:
    """The (n, 2^m) matrix of subset products B[i, A] =
    prod_{j in A} v_ij * prod_{j not in A} (1 - v_ij).

    Row i of the matrix aggregates as B[i] . mu for any capacity vector,
    which makes downstream statistics linear in the capacity.
    """
    vals = _matrix_values(matrix)
    basis = np.ones((vals.shape[0], 1))
    for j in range(vals.shape[1]):
        x = vals[:, j : j + 1]
        basis = np.hstack((basis * (1.0 - x), basis * x))
    return basis


def rank(overall) -> Ranking:
    """Competition ranking of overall evaluations, best first."""
    vals = np.asarray(overall, dtype=np.float64)
    if vals.ndim != 1 or vals.shape[0] < 1:
        raise DimensionError("overall evaluations must be a nonempty 1-d vector")
    if not np.all(np.isfinite(vals)):
        raise DomainError("overall evaluations must be finite")
    n = vals.shape[0]
    order = np.lexsort((np.arange(n), -vals))
    sorted_vals = vals[order]
    first = np.arange(n)
    ties = np.nonzero(sorted_vals[1:] == sorted_vals[:-1])[0] + 1
    for start in ties:
        first[start] = first[start - 1]
    positions = np.empty(n, dtype=np.int64)
    positions[order] = first + 1
    return Ranking(overall=vals.copy(), order=order, positions=positions)
