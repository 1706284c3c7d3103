"""Unsupervised identification of 2-additive capacities.

The identified capacity equalizes the criteria's variance contributions to
the aggregated output: on correlated data a plain average inflates the
sensitivity of redundant criteria, and the minimizer compensates by
putting negative interaction on correlated pairs and extra power on
independent ones.

Search space: singleton capacities are fixed to a common value, pair
capacities move subject to a fixed total (so the interaction vector stays
normalized), and every step moves one pair coordinate along its feasible
interval while a second pair coordinate absorbs the difference. The line
search is golden-section; candidate points are accepted only when they
improve the incumbent, so the objective trace never increases.
"""

import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional, Tuple

import numpy as np

from . import subsets
from .aggregation import DecisionMatrix, multilinear, multilinear_basis
from .capacity import (
    Capacity,
    InteractionVector,
    banzhaf_from_capacity,
    require_valid,
    to_json_dict,
)
from .errors import DimensionError, DomainError, EstimationError, InfeasibleError
from .sobol import SliceConfig, cell_index, empirical_sobol

# ---------------------------------------------------------------------------
# -- Constraint structure ---------------------------------------------------


@dataclass(frozen=True)
class PairConstraint:
    """The coupled constraints of the search space.

    With singleton capacities fixed at `singleton_value`, keeping the sum
    of pair Moebius masses at `pair_mass_sum` = 1 - m * singleton_value
    normalizes the capacity; in capacity coordinates the pair values must
    total `pair_capacity_sum` = 1 + m (m - 2) * singleton_value.
    """

    m: int
    singleton_value: float
    pairs: Tuple[Tuple[int, int], ...]
    pair_capacity_sum: float
    pair_mass_sum: float


def pair_constraint_targets(m: int, singleton_value: float) -> PairConstraint:
    """Constraint targets for m criteria with fixed singleton capacities."""
    if m < 2:
        raise DomainError(f"need at least two criteria, got m={m}")
    s = float(singleton_value)
    if not s > 0.0:
        raise DomainError(f"singleton value must be positive, got {s}")
    if m * s > 1.0 + 1e-12:
        raise InfeasibleError(
            f"m * singleton_value = {m * s} exceeds the unit total mass"
        )
    pairs = tuple((j, k) for j in range(1, m + 1) for k in range(j + 1, m + 1))
    return PairConstraint(
        m=m,
        singleton_value=s,
        pairs=pairs,
        pair_capacity_sum=1.0 + m * (m - 2) * s,
        pair_mass_sum=1.0 - m * s,
    )


def _pair_position(constraint: PairConstraint, pair) -> int:
    if isinstance(pair, (int, np.integer)):
        if not 0 <= pair < len(constraint.pairs):
            raise DomainError(f"pair position {pair} outside the {len(constraint.pairs)} pairs")
        return int(pair)
    j, k = sorted(int(x) for x in pair)
    try:
        return constraint.pairs.index((j, k))
    except ValueError as exc:
        raise DomainError(f"({j}, {k}) is not a criterion pair for m={constraint.m}") from exc


def _mass_interval(
    constraint: PairConstraint,
    masses: np.ndarray,
    moving: int,
    balancing: int,
    eps: float = 1e-12,
) -> Tuple[float, float]:
    """Feasible interval for the moving pair's Moebius mass.

    Monotonicity of a 2-additive capacity holds exactly when, for every
    criterion j, the singleton mass plus the sum of its negative incident
    pair masses is nonnegative. Along the move the incident part is a
    concave piecewise-linear function of t with kinks where the moving or
    balancing mass crosses zero, so the feasible set per criterion is one
    interval found by scanning the kink points.
    """
    s = constraint.singleton_value
    budget = constraint.pair_mass_sum - (float(masses.sum()) - masses[moving] - masses[balancing])
    lo0, hi0 = -s, budget + s
    if lo0 > hi0 + eps:
        raise InfeasibleError(
            "moving and balancing masses cannot both stay above their lower bound"
        )
    knots = {lo0, hi0}
    for kink in (0.0, budget):
        if lo0 < kink < hi0:
            knots.add(kink)
    ts = sorted(knots)

    lo, hi = lo0, hi0
    for j in range(1, constraint.m + 1):
        fixed = s
        in_moving = j in constraint.pairs[moving]
        in_balancing = j in constraint.pairs[balancing]
        for p, (a, b) in enumerate(constraint.pairs):
            if p in (moving, balancing) or j not in (a, b):
                continue
            fixed += min(float(masses[p]), 0.0)
        if not (in_moving or in_balancing):
            if fixed < -eps:
                raise InfeasibleError(f"criterion {j} is infeasible at the current point")
            continue
        gs = []
        for t in ts:
            g = fixed
            if in_moving:
                g += min(t, 0.0)
            if in_balancing:
                g += min(budget - t, 0.0)
            gs.append(g)
        window = _nonneg_window(ts, gs, eps)
        if window is None:
            raise InfeasibleError(f"criterion {j} admits no feasible move")
        lo = max(lo, window[0])
        hi = min(hi, window[1])
    if lo > hi + eps:
        raise InfeasibleError("the feasible intervals of the criteria do not intersect")
    return lo, min(hi, max(lo, hi))


def _nonneg_window(ts, gs, eps) -> Optional[Tuple[float, float]]:
    """{t : g(t) >= -eps} for a concave piecewise-linear g given at knots."""
    feasible = [i for i, g in enumerate(gs) if g >= -eps]
    if not feasible:
        return None
    i_left, i_right = feasible[0], feasible[-1]
    lo = ts[i_left]
    if i_left > 0:
        t0, t1 = ts[i_left - 1], ts[i_left]
        g0, g1 = gs[i_left - 1], gs[i_left]
        if g1 > g0:
            lo = min(max(t0 + (t1 - t0) * (0.0 - g0) / (g1 - g0), t0), t1)
    hi = ts[i_right]
    if i_right < len(ts) - 1:
        t0, t1 = ts[i_right], ts[i_right + 1]
        g0, g1 = gs[i_right], gs[i_right + 1]
        if g0 > g1:
            hi = min(max(t0 + (t1 - t0) * (g0 - 0.0) / (g0 - g1), t0), t1)
    return lo, hi


def feasible_interval(
    constraint: PairConstraint,
    pair_capacities,
    moving,
    balancing,
) -> Tuple[float, float]:
    """Closed interval of capacity values available to the moving pair.

    `pair_capacities` lists the current pair capacities in
    constraint.pairs order; `moving` and `balancing` are (j, k) tuples or
    positions into that order. Every other pair stays fixed and the
    balancing pair absorbs the moved difference, so the returned interval
    is exactly the set of moving-pair capacities keeping the 2-additive
    capacity monotone. Raises InfeasibleError when the current point
    itself is infeasible.
    """
    values = np.asarray(pair_capacities, dtype=np.float64)
    if values.shape != (len(constraint.pairs),):
        raise DimensionError(
            f"need {len(constraint.pairs)} pair capacities, got {values.shape}"
        )
    o = _pair_position(constraint, moving)
    b = _pair_position(constraint, balancing)
    if o == b:
        raise DomainError("moving and balancing pairs must differ")
    masses = values - 2.0 * constraint.singleton_value
    lo, hi = _mass_interval(constraint, masses, o, b)
    shift = 2.0 * constraint.singleton_value
    return lo + shift, hi + shift


# ---------------------------------------------------------------------------
# -- Golden-section line search ---------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(fn, lo: float, hi: float, tolerance: float):
    """Minimize fn on [lo, hi] by golden-section; returns (x, fn(x)).

    Deterministic bracket shrinking with one evaluation per step; the best
    evaluated point is tracked, so the result never exceeds fn at any
    probed point even if fn is not unimodal.
    """
    if not hi >= lo:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    if tolerance <= 0.0:
        raise DomainError("tolerance must be positive")
    if hi - lo <= tolerance:
        x = 0.5 * (lo + hi)
        return x, fn(x)
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = fn(c), fn(d)
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    while hi - lo > tolerance:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = fn(d)
        x, f = (c, fc) if fc <= fd else (d, fd)
        if f < best_f:
            best_x, best_f = x, f
    return best_x, best_f


# ---------------------------------------------------------------------------
# -- Objective --------------------------------------------------------------


@dataclass(frozen=True)
class IdentificationConfig:
    """Knobs of the identification loop.

    singleton_value defaults to 1/m at run time; objective_orders picks
    which same-cardinality index families are equalized (1, 2, or both);
    starts > 1 adds randomized warm starts and keeps the best run.
    """

    singleton_value: Optional[float] = None
    objective_orders: Tuple[int, ...] = (1,)
    slices: SliceConfig = SliceConfig()
    gs_tolerance: float = 1e-6
    objective_tolerance: float = 1e-10
    max_outer_iterations: int = 500
    rng_seed: int = 0
    normalized_objective: bool = False
    starts: int = 1
    validate_steps: bool = False

    def __post_init__(self):
        orders = tuple(sorted(set(int(o) for o in self.objective_orders)))
        if not orders or any(o not in (1, 2) for o in orders):
            raise DomainError(f"objective orders must be within {{1, 2}}, got {orders}")
        object.__setattr__(self, "objective_orders", orders)
        if self.gs_tolerance <= 0.0 or self.objective_tolerance < 0.0:
            raise DomainError("tolerances must be positive")
        if self.max_outer_iterations < 1:
            raise DomainError("max_outer_iterations must be >= 1")
        if self.starts < 1:
            raise DomainError("starts must be >= 1")
        if self.singleton_value is not None and not float(self.singleton_value) > 0.0:
            raise DomainError("singleton_value must be positive")


def _order_subsets(m: int, order: int) -> list:
    card = subsets.cardinalities(m)
    return [int(a) for a in np.nonzero(card == order)[0]]


def objective(mu: Capacity, matrix: DecisionMatrix, config: IdentificationConfig) -> float:
    """Equalization objective: the sum of squared differences between the
    indices of every unordered pair of same-cardinality subsets, over the
    configured orders. Estimated directly from slice means."""
    y = multilinear(matrix, mu)
    total = 0.0
    for order in config.objective_orders:
        values = [
            empirical_sobol(
                y, matrix, a, config.slices, normalize=config.normalized_objective
            )
            for a in _order_subsets(mu.m, order)
        ]
        scores = [
            v.normalized if config.normalized_objective else v.raw_variance
            for v in values
        ]
        for i in range(len(scores)):
            for j in range(i + 1, len(scores)):
                total += (scores[i] - scores[j]) ** 2
    return total


class SliceObjective:
    """Precomputed engine for the equalization objective.

    With the matrix fixed, every aggregated output is basis . mu, a linear
    function of the capacity vector, and so is every slice mean. The
    engine therefore precomputes, per subset, the matrix of slice-mean
    basis rows and the slice weights; one objective evaluation reduces to
    a few small matrix-vector products, exactly equal to the direct
    estimator path.
    """

    def __init__(
        self,
        matrix: DecisionMatrix,
        orders: Tuple[int, ...] = (1,),
        config: SliceConfig = SliceConfig(),
        normalized: bool = False,
    ):
        vals = matrix.values
        n, m = vals.shape
        self.m = m
        self.orders = tuple(sorted(set(orders)))
        if any(o not in (1, 2) for o in self.orders):
            raise DomainError(f"engine orders must be within {{1, 2}}, got {orders}")
        self.normalized = normalized
        basis = multilinear_basis(vals)
        self.mean_row = basis.mean(axis=0)
        self.second_moment = basis.T @ basis / n if normalized else None
        k = config.slice_count

        slice_means = {}
        slice_weights = {}
        for j in range(1, m + 1):
            cells, n_cells = cell_index(vals, 1 << (j - 1), k)
            counts = np.bincount(cells, minlength=n_cells)
            means = np.zeros((n_cells, basis.shape[1]))
            np.add.at(means, cells, basis)
            populated = counts > 0
            means[populated] /= counts[populated, None]
            slice_means[j] = means
            slice_weights[j] = counts / n

        self._terms = {}
        if 1 in self.orders:
            for j in range(1, m + 1):
                populated = slice_weights[j] > 0
                self._terms[1 << (j - 1)] = (
                    slice_means[j][populated],
                    slice_weights[j][populated],
                )
        if 2 in self.orders:
            for a in _order_subsets(m, 2):
                j, kk = subsets.members(a)
                cells, n_cells = cell_index(vals, a, k)
                counts = np.bincount(cells, minlength=n_cells)
                means = np.zeros((n_cells, basis.shape[1]))
                np.add.at(means, cells, basis)
                populated = np.nonzero(counts > 0)[0]
                means[populated] /= counts[populated, None]
                rows = (
                    means[populated]
                    - slice_means[j][populated // k]
                    - slice_means[kk][populated % k]
                    + self.mean_row
                )
                self._terms[a] = (rows, counts[populated] / n)

    def subset_variance(self, mu_values: np.ndarray, subset: int) -> float:
        """Raw variance contribution of one subset at the given capacity."""
        rows, weights = self._terms[subset]
        x = rows @ mu_values
        center = weights @ x
        return float(weights @ (x - center) ** 2)

    def total_variance(self, mu_values: np.ndarray) -> float:
        if self.second_moment is None:
            raise EstimationError("engine was built without normalization support")
        mean = float(self.mean_row @ mu_values)
        return float(mu_values @ self.second_moment @ mu_values) - mean * mean

    def first_order(self, mu_values: np.ndarray) -> np.ndarray:
        return np.array(
            [self.subset_variance(mu_values, 1 << j) for j in range(self.m)]
        )

    def objective(self, mu_values: np.ndarray) -> float:
        scale = 1.0
        if self.normalized:
            total_var = self.total_variance(mu_values)
            if total_var <= 0.0:
                raise EstimationError("normalization undefined: Var[Y] is zero")
            scale = 1.0 / total_var
        total = 0.0
        for order in self.orders:
            scores = [
                scale * self.subset_variance(mu_values, a)
                for a in _order_subsets(self.m, order)
            ]
            for i in range(len(scores)):
                for j in range(i + 1, len(scores)):
                    total += (scores[i] - scores[j]) ** 2
        return total


# ---------------------------------------------------------------------------
# -- Identification loop ----------------------------------------------------


@dataclass(frozen=True)
class IdentificationResult:
    """Outcome of one identification run (best start when starts > 1)."""

    capacity: Capacity
    interactions: InteractionVector
    sobol_before: np.ndarray
    sobol_after: np.ndarray
    objective_trace: Tuple[float, ...]
    iterations: int
    converged: bool
    seed: int
    config: IdentificationConfig


# Beyond this many basis floats the precomputed engine is skipped and the
# objective is estimated directly per evaluation.
_ENGINE_FLOAT_BUDGET = 1 << 24


def identify(matrix: DecisionMatrix, config: IdentificationConfig = IdentificationConfig()):
    """Identify the 2-additive capacity equalizing the configured indices.

    Runs seeded coordinate descent from the symmetric start (plus extra
    randomized starts when configured) and returns the best run as an
    IdentificationResult. Deterministic in (matrix, config).
    """
    m = matrix.m
    s = 1.0 / m if config.singleton_value is None else float(config.singleton_value)
    constraint = pair_constraint_targets(m, s)
    resolved = replace(config, singleton_value=s)
    if matrix.n < 10 * config.slices.slice_count:
        warnings.warn(
            f"{matrix.n} rows across {config.slices.slice_count} slices is thin; "
            "identified capacities will be noisy",
            stacklevel=2,
        )

    pairs = constraint.pairs
    n_pairs = len(pairs)
    full = 1 << m
    base = s * subsets.cardinalities(m).astype(np.float64)
    incidence = np.zeros((full, n_pairs))
    for position, pair in enumerate(pairs):
        mask = subsets.mask_of(pair)
        hit = (np.arange(full) & mask) == mask
        incidence[hit, position] = 1.0

    def mu_vector(masses: np.ndarray) -> np.ndarray:
        return base + incidence @ masses

    if matrix.n * full <= _ENGINE_FLOAT_BUDGET:
        engine = SliceObjective(
            matrix, resolved.objective_orders, resolved.slices, resolved.normalized_objective
        )
        evaluate = lambda masses: engine.objective(mu_vector(masses))
    else:
        evaluate = lambda masses: objective(Capacity(mu_vector(masses)), matrix, resolved)

    start_masses = np.full(n_pairs, constraint.pair_mass_sum / n_pairs)
    rng = np.random.default_rng(resolved.rng_seed)

    def report_first_order(masses: np.ndarray) -> np.ndarray:
        y = multilinear(matrix, Capacity(mu_vector(masses)))
        return np.array(
            [
                empirical_sobol(y, matrix, 1 << j, resolved.slices).raw_variance
                for j in range(m)
            ]
        )

    sobol_before = report_first_order(start_masses)

    if n_pairs == 1:
        # m = 2: normalization forces the only pair mass, nothing to search.
        masses = np.array([constraint.pair_mass_sum])
        capacity = Capacity(mu_vector(masses))
        require_valid(capacity)
        return IdentificationResult(
            capacity=capacity,
            interactions=banzhaf_from_capacity(capacity),
            sobol_before=sobol_before,
            sobol_after=report_first_order(masses),
            objective_trace=(evaluate(masses),),
            iterations=0,
            converged=True,
            seed=resolved.rng_seed,
            config=resolved,
        )

    def draw_roles():
        moving = int(rng.integers(n_pairs))
        balancing = (moving + 1 + int(rng.integers(n_pairs - 1))) % n_pairs
        return moving, balancing

    def descend(masses: np.ndarray):
        best = evaluate(masses)
        trace = [best]
        window = 3 * n_pairs
        stall = 0
        iterations = 0
        converged = False
        while iterations < resolved.max_outer_iterations:
            iterations += 1
            moving, balancing = draw_roles()
            budget = constraint.pair_mass_sum - (
                float(masses.sum()) - masses[moving] - masses[balancing]
            )
            lo, hi = _mass_interval(constraint, masses, moving, balancing)
            improvement = 0.0
            if hi - lo > 1e-15:

                def line(t):
                    trial = masses.copy()
                    trial[moving] = t
                    trial[balancing] = budget - t
                    return evaluate(trial)

                t_best, f_best = golden_section_minimize(
                    line, lo, hi, resolved.gs_tolerance
                )
                if f_best < best:
                    improvement = best - f_best
                    masses[moving] = t_best
                    masses[balancing] = budget - t_best
                    best = f_best
                    if resolved.validate_steps:
                        require_valid(Capacity(mu_vector(masses)))
            trace.append(best)
            stall = 0 if improvement >= resolved.objective_tolerance else stall + 1
            if stall >= window:
                converged = True
                break
        return masses, trace, iterations, converged

    best_run = None
    for start in range(resolved.starts):
        masses = start_masses.copy()
        if start > 0:
            for _ in range(2 * n_pairs):
                moving, balancing = draw_roles()
                budget = constraint.pair_mass_sum - (
                    float(masses.sum()) - masses[moving] - masses[balancing]
                )
                lo, hi = _mass_interval(constraint, masses, moving, balancing)
                t = lo + (hi - lo) * float(rng.random())
                masses[moving] = t
                masses[balancing] = budget - t
        outcome = descend(masses)
        if best_run is None or outcome[1][-1] < best_run[1][-1]:
            best_run = outcome

    masses, trace, iterations, converged = best_run
    capacity = Capacity(mu_vector(masses))
    require_valid(capacity)
    return IdentificationResult(
        capacity=capacity,
        interactions=banzhaf_from_capacity(capacity),
        sobol_before=sobol_before,
        sobol_after=report_first_order(masses),
        objective_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
        seed=resolved.rng_seed,
        config=resolved,
    )


# ---------------------------------------------------------------------------
# -- Serialization ----------------------------------------------------------


def result_to_json_dict(result: IdentificationResult) -> dict:
    return {
        "capacity": to_json_dict(result.capacity),
        "interactions": to_json_dict(result.interactions),
        "sobol_before": [float(x) for x in result.sobol_before],
        "sobol_after": [float(x) for x in result.sobol_after],
        "objective_trace": [float(x) for x in result.objective_trace],
        "iterations": result.iterations,
        "converged": result.converged,
        "seed": result.seed,
        "config": asdict(result.config),
    }


def save_result_json(result: IdentificationResult, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as handle:
        json.dump(result_to_json_dict(result), handle, indent=2)
        handle.write("\n")
