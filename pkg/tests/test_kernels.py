"""Parity between the compiled kernels and their numpy twins."""

import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from capid import _kernels_py, kernels

compiled = kernels.available_backends().get("compiled")
needs_compiled = pytest.mark.skipif(
    compiled is None, reason="compiled extension not built in this environment"
)


def random_inputs(seed, n=400, m=4):
    rng = np.random.default_rng(seed)
    values = rng.random((n, m))
    mu = np.sort(rng.random(1 << m))
    mu[0], mu[-1] = 0.0, 1.0
    y = rng.random(n)
    cells = rng.integers(0, 25, size=n, dtype=np.int64)
    return values, mu, y, cells


def test_numpy_multilinear_matches_row_oracle():
    values, mu, _, _ = random_inputs(0, n=60, m=3)
    got = _kernels_py.multilinear_eval(values, mu)
    want = [oracles.multilinear_row_oracle(mu, row) for row in values]
    assert got == pytest.approx(want, abs=1e-13)


@needs_compiled
def test_backends_agree_on_multilinear():
    for seed in range(3):
        values, mu, _, _ = random_inputs(seed)
        a = _kernels_py.multilinear_eval(values, mu)
        b = compiled.multilinear_eval(values, mu)
        assert np.max(np.abs(a - b)) <= 1e-15


@needs_compiled
def test_backends_agree_on_group_means():
    for seed in range(3):
        _, _, y, cells = random_inputs(seed)
        est_a, means_a, counts_a = _kernels_py.group_mean_estimate(y, cells, 25)
        est_b, means_b, counts_b = compiled.group_mean_estimate(y, cells, 25)
        assert np.max(np.abs(est_a - est_b)) <= 1e-15
        assert np.max(np.abs(means_a - means_b)) <= 1e-15
        assert np.array_equal(counts_a, counts_b)


def test_group_means_empty_cells_stay_zero():
    y = np.array([1.0, 3.0])
    cells = np.array([0, 3], dtype=np.int64)
    for mod in kernels.available_backends().values():
        est, means, counts = mod.group_mean_estimate(y, cells, 5)
        assert means.tolist() == [1.0, 0.0, 0.0, 3.0, 0.0]
        assert counts.tolist() == [1, 0, 0, 1, 0]
        assert est.tolist() == [1.0, 3.0]


def test_kernels_accept_read_only_arrays():
    # estimators hand the kernels views that may not be writable
    values, mu, y, cells = random_inputs(5)
    for arr in (values, mu, y, cells):
        arr.setflags(write=False)
    for mod in kernels.available_backends().values():
        mod.multilinear_eval(values, mu)
        mod.group_mean_estimate(y, cells, 25)


def test_kernels_handle_empty_input():
    for mod in kernels.available_backends().values():
        assert mod.multilinear_eval(np.empty((0, 3)), np.zeros(8)).shape == (0,)
        est, means, counts = mod.group_mean_estimate(
            np.empty(0), np.empty(0, dtype=np.int64), 4
        )
        assert est.shape == (0,)
        assert means.tolist() == [0.0] * 4
        assert counts.tolist() == [0] * 4


def test_kernel_error_messages_match():
    for mod in kernels.available_backends().values():
        with pytest.raises(ValueError, match="cell index out of range"):
            mod.group_mean_estimate(np.zeros(3), np.array([0, 1, 9], dtype=np.int64), 4)
        with pytest.raises(ValueError, match="cell index out of range"):
            mod.group_mean_estimate(np.zeros(3), np.array([0, -1, 2], dtype=np.int64), 4)
        with pytest.raises(ValueError, match="must have length 4"):
            mod.multilinear_eval(np.zeros((4, 2)), np.zeros(5))
        with pytest.raises(ValueError, match="2-d"):
            mod.multilinear_eval(np.zeros(4), np.zeros(4))
        with pytest.raises(ValueError, match="equal length"):
            mod.group_mean_estimate(np.zeros(3), np.zeros(4, dtype=np.int64), 4)


def test_numpy_chunked_path(monkeypatch):
    # force several chunks through the fallback and compare with one pass
    values, mu, _, _ = random_inputs(9, n=1000, m=5)
    whole = _kernels_py.multilinear_eval(values, mu)
    monkeypatch.setattr(_kernels_py, "_CHUNK_FLOATS", 1 << 8)
    chunked = _kernels_py.multilinear_eval(values, mu)
    assert np.array_equal(whole, chunked)


def test_fallback_env_var_selects_numpy_backend():
    env = dict(os.environ, CAPID_FORCE_FALLBACK="1")
    code = "from capid import kernels; print(kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_available_backends_lists_numpy():
    backends = kernels.available_backends()
    assert backends["numpy"] is _kernels_py
    assert kernels.BACKEND in backends
