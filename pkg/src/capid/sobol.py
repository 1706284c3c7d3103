"""Slice-based estimation of variance contributions per criterion subset.

The aggregated output Y is decomposed against the criteria columns of the
decision matrix: conditional expectations E[Y | Z_D] are estimated by
averaging Y inside equal-width bins ("slices") of the conditioning
columns, component functions come from inclusion-exclusion over those
expectations, and each subset's index is the population variance of its
component. For 2-additive capacities under independent uniform inputs the
same indices are available in closed form from the interaction vector.
"""

import csv
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels, subsets
from .aggregation import DecisionMatrix
from .capacity import InteractionVector
from .errors import DimensionError, DomainError, EstimationError

# ---------------------------------------------------------------------------
# -- Configuration and reports ----------------------------------------------


@dataclass(frozen=True)
class SliceConfig:
    """Binning policy for conditional expectations.

    slice_count is the number of equal-width bins per conditioning
    criterion; min_slice_population triggers a warning when a populated
    cell carries fewer rows (empty cells are simply unused).
    """

    slice_count: int = 20
    min_slice_population: int = 1

    def __post_init__(self):
        if self.slice_count < 2:
            raise DomainError(f"slice_count must be >= 2, got {self.slice_count}")
        if self.min_slice_population < 1:
            raise DomainError("min_slice_population must be >= 1")


@dataclass(frozen=True)
class SobolReport:
    """One subset's estimated contribution to Var[Y]."""

    subset: int
    raw_variance: float
    normalized: Optional[float]
    estimator: str
    sample_size: int


@dataclass(frozen=True)
class HdmrTerm:
    """A component function evaluated at every sample row."""

    subset: int
    values: np.ndarray


# ---------------------------------------------------------------------------
# -- Slices -----------------------------------------------------------------


def slice_index(column: np.ndarray, slice_count: int) -> np.ndarray:
    """Equal-width bin of each value in [0, 1]: min(floor(v * k), k - 1)."""
    idx = (np.asarray(column, dtype=np.float64) * slice_count).astype(np.int64)
    return np.minimum(idx, slice_count - 1)


def cell_index(matrix, subset: int, slice_count: int) -> tuple[np.ndarray, int]:
    """Joint bin of the conditioning columns, plus the number of cells.

    Cells enumerate the member criteria in ascending order, the first
    member varying slowest.
    """
    vals = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix)
    crits = subsets.members(subset)
    if not crits:
        raise DomainError("cell_index needs a nonempty subset")
    if crits[-1] > vals.shape[1]:
        raise DimensionError(f"subset {crits} exceeds {vals.shape[1]} criteria")
    cells = np.zeros(vals.shape[0], dtype=np.int64)
    for j in crits:
        cells = cells * slice_count + slice_index(vals[:, j - 1], slice_count)
    return cells, slice_count ** len(crits)


def conditional_expectation(y, matrix, subset: int, config: SliceConfig = SliceConfig()):
    """E[Y | Z_subset] estimated per row via slice means.

    Subsets of up to two criteria are supported; the empty subset yields
    the constant overall mean.
    """
    yv = np.asarray(y, dtype=np.float64)
    vals = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix)
    if yv.ndim != 1 or yv.shape[0] != vals.shape[0]:
        raise DimensionError("y must be 1-d with one entry per matrix row")
    if subset == 0:
        return np.full(yv.shape[0], float(yv.mean()))
    if subsets.cardinality(subset) > 2:
        raise EstimationError(
            "conditional expectations are estimated for at most two conditioning criteria"
        )
    cells, n_cells = cell_index(vals, subset, config.slice_count)
    estimate, _, counts = kernels.group_mean_estimate(yv, cells, n_cells)
    populated = counts[counts > 0]
    if populated.size and int(populated.min()) < config.min_slice_population:
        warnings.warn(
            f"slices for subset {subsets.subset_label(subset)!r} hold as few as "
            f"{int(populated.min())} rows (threshold {config.min_slice_population})",
            stacklevel=2,
        )
    return estimate


def hdmr_term(y, matrix, subset: int, config: SliceConfig = SliceConfig()) -> HdmrTerm:
    """Component function of a subset by inclusion-exclusion:

    f_A = sum over D subset of A of (-1)^{|A| - |D|} E[Y | Z_D].
    """
    if subset == 0:
        raise DomainError("component functions are defined for nonempty subsets")
    card_a = subsets.cardinality(subset)
    yv = np.asarray(y, dtype=np.float64)
    total = np.zeros(yv.shape[0])
    for d in subsets.iter_submasks(subset):
        sign = -1.0 if (card_a - subsets.cardinality(d)) % 2 else 1.0
        total += sign * conditional_expectation(yv, matrix, d, config)
    return HdmrTerm(subset=subset, values=total)


# ---------------------------------------------------------------------------
# -- Indices ----------------------------------------------------------------


def empirical_sobol(
    y,
    matrix,
    subset: int,
    config: SliceConfig = SliceConfig(),
    normalize: bool = False,
) -> SobolReport:
    """Variance contribution of a subset of one or two criteria.

    The raw index is the population variance of the subset's component
    function; normalize=True divides by the population variance of Y.
    """
    if subsets.cardinality(subset) not in (1, 2):
        raise DomainError("empirical indices cover subsets of one or two criteria")
    yv = np.asarray(y, dtype=np.float64)
    term = hdmr_term(yv, matrix, subset, config)
    raw = float(np.var(term.values))
    normalized = None
    if normalize:
        total = float(np.var(yv))
        if total == 0.0:
            raise EstimationError("normalization undefined: Var[Y] is zero")
        normalized = raw / total
    return SobolReport(
        subset=subset,
        raw_variance=raw,
        normalized=normalized,
        estimator="empirical-slices",
        sample_size=int(yv.shape[0]),
    )


def first_order_empirical(
    y,
    matrix,
    criterion: int,
    config: SliceConfig = SliceConfig(),
    normalize: bool = False,
) -> SobolReport:
    """First-order index of one criterion (1-based)."""
    vals = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix)
    if not 1 <= criterion <= vals.shape[1]:
        raise DomainError(f"criterion index {criterion} outside 1..{vals.shape[1]}")
    if vals.shape[0] < 10 * config.slice_count:
        warnings.warn(
            f"{vals.shape[0]} rows across {config.slice_count} slices is thin; "
            "estimates will be noisy",
            stacklevel=2,
        )
    return empirical_sobol(y, matrix, 1 << (criterion - 1), config, normalize)


def analytic_sobol(interactions: InteractionVector, subset: int) -> float:
    """Closed-form index of a subset for 2-additive capacities under
    independent uniform inputs: (1/12^|A|) I(A)^2."""
    if subset == 0:
        raise DomainError("the empty subset has no variance contribution")
    if subset >= 1 << interactions.m:
        raise DimensionError(f"subset {subset} exceeds m={interactions.m}")
    card = subsets.cardinality(subset)
    return float(interactions.values[subset] ** 2 / 12.0**card)


def analytic_total_variance(interactions: InteractionVector) -> float:
    """Sum of all nonempty-subset closed-form contributions."""
    card = subsets.cardinalities(interactions.m)
    contributions = interactions.values**2 / 12.0**card
    return float(contributions[1:].sum())


# ---------------------------------------------------------------------------
# -- CSV --------------------------------------------------------------------


def write_report_csv(path, reports, analytic: Optional[dict] = None) -> None:
    """One row per report: subset, order, n, estimator, raw, normalized,
    and (when provided) the closed-form columns keyed by subset."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        header = ["subset", "order", "n", "estimator", "raw", "normalized"]
        if analytic is not None:
            header += ["analytic_raw", "analytic_normalized"]
        writer.writerow(header)
        for report in reports:
            row = [
                subsets.subset_label(report.subset),
                subsets.cardinality(report.subset),
                report.sample_size,
                report.estimator,
                repr(report.raw_variance),
                "" if report.normalized is None else repr(report.normalized),
            ]
            if analytic is not None:
                raw, normalized = analytic[report.subset]
                row += [repr(raw), "" if normalized is None else repr(normalized)]
            writer.writerow(row)
