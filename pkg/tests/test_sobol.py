"""Slice estimator, component functions, empirical and closed-form indices."""

import csv
import random

import numpy as np
import pytest

import oracles
from capid import (
    Capacity,
    DimensionError,
    DomainError,
    EstimationError,
    GenSpec,
    InteractionVector,
    SliceConfig,
    WeightVector,
    analytic_sobol,
    analytic_total_variance,
    banzhaf_from_capacity,
    cell_index,
    conditional_expectation,
    empirical_sobol,
    first_order_empirical,
    fourier_from_banzhaf,
    generate,
    hdmr_term,
    multilinear,
    slice_index,
    wam,
    write_report_csv,
)
from capid import subsets

UNIFORM_VARIANCE = 1.0 / 12.0


def uniform_matrix(seed: int, n: int, m: int = 3):
    rng = np.random.default_rng(seed)
    return rng.random((n, m))


# ---------------------------------------------------------------------------
# -- Slices --------------------------------------------------------------------


def test_slice_config_validation():
    with pytest.raises(DomainError):
        SliceConfig(slice_count=1)
    with pytest.raises(DomainError):
        SliceConfig(min_slice_population=0)


def test_slice_index_boundaries():
    column = np.array([0.0, 0.049, 0.05, 0.9999, 1.0])
    assert list(slice_index(column, 20)) == [0, 0, 1, 19, 19]
    fine = slice_index(np.linspace(0.0, 1.0, 101), 10)
    assert fine.min() == 0 and fine.max() == 9
    assert np.all(np.diff(fine) >= 0)


def test_cell_index_enumerates_first_member_slowest():
    vals = np.array([[0.05, 0.5, 0.35], [0.45, 0.5, 0.15], [0.85, 0.5, 0.95]])
    cells, n_cells = cell_index(vals, subsets.mask_of((1, 3)), 10)
    assert n_cells == 100
    assert list(cells) == [0 * 10 + 3, 4 * 10 + 1, 8 * 10 + 9]
    with pytest.raises(DomainError):
        cell_index(vals, 0, 10)
    with pytest.raises(DimensionError):
        cell_index(vals, subsets.mask_of((4,)), 10)


def test_conditional_expectation_basics():
    vals = uniform_matrix(0, 500)
    y = np.full(500, 0.42)
    assert conditional_expectation(y, vals, 1) == pytest.approx([0.42] * 500)
    mixed = uniform_matrix(1, 500)[:, 0]
    assert conditional_expectation(mixed, vals, 0) == pytest.approx(
        [float(mixed.mean())] * 500
    )
    with pytest.raises(EstimationError):
        conditional_expectation(mixed, vals, subsets.mask_of((1, 2, 3)))
    with pytest.raises(DimensionError):
        conditional_expectation(mixed[:10], vals, 1)


def test_conditional_expectation_matches_dict_oracle():
    vals = uniform_matrix(2, 300)
    y = uniform_matrix(3, 300)[:, 0]
    config = SliceConfig(slice_count=7)
    for subset in (1, 2, 4, 3, 5, 6):
        got = conditional_expectation(y, vals, subset, config)
        cols = [list(vals[:, j - 1]) for j in subsets.members(subset)]
        want = oracles.conditional_mean_oracle(list(y), cols, 7)
        assert got == pytest.approx(want, abs=1e-15)


def test_conditional_expectation_identity_model():
    vals = uniform_matrix(4, 5000)
    y = vals[:, 1].copy()
    estimate = conditional_expectation(y, vals, subsets.mask_of((2,)))
    assert float(np.var(estimate)) == pytest.approx(UNIFORM_VARIANCE, rel=0.05)


def test_conditional_expectation_thin_cells_warn():
    vals = uniform_matrix(5, 60)
    y = vals[:, 0]
    with pytest.warns(UserWarning, match="as few as"):
        conditional_expectation(y, vals, 1, SliceConfig(slice_count=20, min_slice_population=50))


def test_reference_regime_conditional_variances():
    # n = 5000 with the first pair correlated at ~0.68, additive equal
    # weights: the correlated block inflates to ~0.0263 while the free
    # criterion stays near its independent value ~0.0091.
    matrix = generate(GenSpec(n=5000, m=3, correlations=((1, 2, 0.68),), seed=42))
    y = multilinear(matrix, Capacity.uniform(3))
    var_1 = float(np.var(conditional_expectation(y, matrix, subsets.mask_of((1,)))))
    var_3 = float(np.var(conditional_expectation(y, matrix, subsets.mask_of((3,)))))
    assert abs(var_1 - 0.0263) <= 0.003
    assert abs(var_3 - 0.0091) <= 0.003


# ---------------------------------------------------------------------------
# -- Component functions ---------------------------------------------------------


def test_hdmr_empty_subset_is_rejected():
    vals = uniform_matrix(6, 100)
    with pytest.raises(DomainError):
        hdmr_term(vals[:, 0], vals, 0)


def test_hdmr_singleton_recovers_identity_up_to_slice_width():
    vals = uniform_matrix(7, 5000)
    y = vals[:, 0].copy()
    config = SliceConfig(slice_count=20)
    term = hdmr_term(y, vals, 1, config)
    deviation = np.abs(term.values - (y - y.mean()))
    assert float(deviation.max()) <= 1.0 / 20 + 1e-9


def test_hdmr_terms_are_centered():
    vals = uniform_matrix(8, 400)
    y = multilinear(vals, Capacity.uniform(3))
    for subset in (1, 2, 4, 3, 5, 6):
        term = hdmr_term(y, vals, subset)
        assert abs(float(term.values.mean())) < 1e-10


def test_hdmr_pair_terms_vanish_for_additive_models():
    # pair cells hold n / k^2 rows, so the no-interaction noise floor
    # shrinks like k^2 / n; n = 20000 puts it well under the 10% bound
    vals = uniform_matrix(9, 20000)
    y = wam(vals, WeightVector.equal(3))
    config = SliceConfig(slice_count=20)
    singleton_var = min(
        float(np.var(hdmr_term(y, vals, 1 << j, config).values)) for j in range(3)
    )
    for subset in (3, 5, 6):
        pair_var = float(np.var(hdmr_term(y, vals, subset, config).values))
        assert pair_var <= 0.10 * singleton_var


# ---------------------------------------------------------------------------
# -- Empirical indices ------------------------------------------------------------


def test_empirical_sobol_is_the_component_variance():
    vals = uniform_matrix(10, 800)
    y = multilinear(vals, Capacity.uniform(3))
    report = empirical_sobol(y, vals, 1)
    assert report.raw_variance == pytest.approx(
        oracles.population_variance(list(hdmr_term(y, vals, 1).values)), abs=1e-15
    )
    assert report.estimator == "empirical-slices"
    assert report.sample_size == 800
    assert report.normalized is None
    with pytest.raises(DomainError):
        empirical_sobol(y, vals, subsets.mask_of((1, 2, 3)))
    with pytest.raises(DomainError):
        empirical_sobol(y, vals, 0)


def test_empirical_sobol_constant_output():
    vals = uniform_matrix(11, 500)
    y = np.full(500, 0.5)  # exactly representable, so the zeros are exact
    assert empirical_sobol(y, vals, 1).raw_variance == 0.0
    with pytest.raises(EstimationError):
        empirical_sobol(y, vals, 1, normalize=True)
    # a constant without an exact float form leaves only accumulation dust
    dusty = np.full(500, 0.6)
    assert empirical_sobol(dusty, vals, 1).raw_variance <= 1e-30


def test_first_order_empirical_checks_and_warns():
    vals = uniform_matrix(12, 120)
    y = vals[:, 0]
    with pytest.warns(UserWarning, match="thin"):
        first_order_empirical(y, vals, 1)
    with pytest.raises(DomainError):
        first_order_empirical(y, vals, 0)
    with pytest.raises(DomainError):
        first_order_empirical(y, vals, 4)


def test_first_order_on_independent_additive_data():
    vals = uniform_matrix(13, 5000)
    y = multilinear(vals, Capacity.uniform(3))
    for j in (1, 2, 3):
        report = first_order_empirical(y, vals, j)
        assert abs(report.raw_variance - 0.0093) <= 0.002


def test_normalized_indices_divide_by_total_variance():
    vals = uniform_matrix(14, 2000)
    y = multilinear(vals, Capacity.uniform(3))
    report = first_order_empirical(y, vals, 1, normalize=True)
    assert report.normalized == pytest.approx(
        report.raw_variance / float(np.var(y)), abs=1e-15
    )
    assert 0.0 <= report.normalized <= 1.0


# ---------------------------------------------------------------------------
# -- Closed-form indices -----------------------------------------------------------


def test_analytic_sobol_values():
    ib = InteractionVector.from_paper_list([0.5, 1 / 3, 0.0, 0.25, 0.0, 0.0, 0.1, 0.0])
    assert analytic_sobol(ib, subsets.mask_of((1,))) == pytest.approx(1.0 / 108.0)
    assert analytic_sobol(ib, subsets.mask_of((2,))) == 0.0
    assert analytic_sobol(ib, subsets.mask_of((2, 3))) == pytest.approx(0.01 / 144.0)
    with pytest.raises(DomainError):
        analytic_sobol(ib, 0)
    with pytest.raises(DimensionError):
        analytic_sobol(ib, 1 << 3)


def test_analytic_sobol_equals_fourier_form():
    rng = np.random.default_rng(15)
    ib = InteractionVector(rng.standard_normal(16))
    coeffs = fourier_from_banzhaf(ib)
    card = subsets.cardinalities(4)
    total = 0.0
    for mask in range(1, 16):
        left = float(coeffs.values[mask] ** 2 / 3.0 ** card[mask])
        right = analytic_sobol(ib, mask)
        assert abs(left - right) < 1e-15
        total += right
    assert analytic_total_variance(ib) == pytest.approx(total, abs=1e-12)


def test_empirical_agrees_with_analytic_under_independence():
    rng = random.Random(77)
    mu = Capacity(np.array(oracles.random_two_additive_capacity(rng, 3, min_power=0.15)))
    ib = banzhaf_from_capacity(mu)
    vals = uniform_matrix(16, 100000)
    y = multilinear(vals, mu)
    for j in (1, 2, 3):
        want = analytic_sobol(ib, 1 << (j - 1))
        got = first_order_empirical(y, vals, j).raw_variance
        assert abs(got - want) <= 0.10 * want


def test_slice_estimator_is_consistent_across_reruns():
    rng = random.Random(6)
    mu = Capacity(np.array(oracles.random_two_additive_capacity(rng, 3, min_power=0.15)))
    estimates = []
    for seed in range(20):
        vals = uniform_matrix(1000 + seed, 20000)
        y = multilinear(vals, mu)
        estimates.append(first_order_empirical(y, vals, 1).raw_variance)
    estimates = np.asarray(estimates)
    assert float(estimates.std()) < 0.05 * float(estimates.mean())


# ---------------------------------------------------------------------------
# -- CSV -----------------------------------------------------------------------


def test_write_report_csv(tmp_path):
    vals = uniform_matrix(17, 600)
    mu = Capacity.uniform(3)
    ib = banzhaf_from_capacity(mu)
    y = multilinear(vals, mu)
    reports = [empirical_sobol(y, vals, mask) for mask in (1, 2, 4, 3)]
    analytic = {r.subset: (analytic_sobol(ib, r.subset), None) for r in reports}
    path = tmp_path / "report.csv"
    write_report_csv(path, reports, analytic)
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == [
        "subset", "order", "n", "estimator", "raw", "normalized",
        "analytic_raw", "analytic_normalized",
    ]
    assert [row[0] for row in rows[1:]] == ["1", "2", "3", "1,2"]
    for row, report in zip(rows[1:], reports):
        assert float(row[4]) == report.raw_variance
        assert row[5] == ""
    first = path.read_bytes()
    write_report_csv(path, reports, analytic)
    assert path.read_bytes() == first


def test_write_report_csv_without_analytic(tmp_path):
    vals = uniform_matrix(18, 300)
    y = multilinear(vals, Capacity.uniform(3))
    path = tmp_path / "plain.csv"
    write_report_csv(path, [empirical_sobol(y, vals, 1, normalize=True)])
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][-1] == "normalized"
    assert float(rows[1][5]) > 0.0
