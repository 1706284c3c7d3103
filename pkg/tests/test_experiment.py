"""Correlation-sweep bookkeeping: seeding, resume, and summary statistics."""

import json

import numpy as np
import pytest

from capid import DomainError, IdentificationConfig
from capid.experiment import (
    ExperimentSpec,
    run_experiment,
    run_key,
    run_seeds,
    run_single,
    stat_columns,
)


def tiny_spec(**overrides) -> ExperimentSpec:
    settings = dict(
        rho_values=(0.75,),
        n_grid=(400,),
        runs=2,
        base_seed=5,
        m=3,
        corr_pair=(1, 2),
        identification=IdentificationConfig(),
    )
    settings.update(overrides)
    return ExperimentSpec(**settings)


def test_spec_validation():
    with pytest.raises(DomainError):
        tiny_spec(runs=0)
    with pytest.raises(DomainError):
        tiny_spec(m=1)
    with pytest.raises(DomainError):
        tiny_spec(rho_values=())
    with pytest.raises(DomainError):
        tiny_spec(corr_pair=(1, 1))
    with pytest.raises(DomainError):
        tiny_spec(corr_pair=(1, 4))
    assert tiny_spec(corr_pair=(2, 1)).corr_pair == (1, 2)


def test_fingerprint_survives_json():
    fingerprint = tiny_spec().fingerprint()
    assert json.loads(json.dumps(fingerprint)) == fingerprint


def test_stat_columns():
    assert stat_columns(3) == ["phi1", "phi2", "phi3", "i12", "i13", "i23"]
    assert stat_columns(4) == [
        "phi1", "phi2", "phi3", "phi4", "i12", "i13", "i14", "i23", "i24", "i34",
    ]


def test_run_key_format():
    assert run_key(0.75, 400, 1) == "rho+0.750_n400_run001"
    assert run_key(-0.75, 5000, 12) == "rho-0.750_n5000_run012"
    assert run_key(0.0, 100, 0) == "rho+0.000_n100_run000"


def test_run_seeds_are_stable_and_distinct():
    first = run_seeds(5, 0.75, 400, 0)
    assert first == run_seeds(5, 0.75, 400, 0)
    seen = {first}
    for args in [(5, 0.75, 400, 1), (5, 0.75, 500, 0), (5, -0.75, 400, 0),
                 (6, 0.75, 400, 0)]:
        seeds = run_seeds(*args)
        assert seeds not in seen
        seen.add(seeds)
    data_seed, identify_seed = first
    assert data_seed != identify_seed


def test_run_single_is_deterministic():
    spec = tiny_spec()
    first = run_single(spec, 0.75, 400, 0)
    second = run_single(spec, 0.75, 400, 0)
    assert first == second
    assert set(first) == {
        "rho", "n", "run", "data_seed", "identify_seed", "phi",
        "pair_interactions", "objective", "iterations", "converged",
    }
    assert len(first["phi"]) == 3
    assert set(first["pair_interactions"]) == {"1,2", "1,3", "2,3"}
    # positively correlated pair: redundancy shows up as a negative interaction
    assert first["pair_interactions"]["1,2"] < 0.0


def test_run_experiment_writes_summary_and_run_files(tmp_path):
    spec = tiny_spec()
    calls = []
    paths = run_experiment(spec, tmp_path, progress=lambda *a: calls.append(a))
    assert len(calls) == 2 and calls[-1][0] == 2
    assert sorted(paths["runs"]) == [
        "rho+0.750_n400_run000", "rho+0.750_n400_run001",
    ]
    csv_path = paths["csv"][0.75]
    assert csv_path.name == "indices_rho+0.750.csv"

    # the summary row reproduces mean and sample std of the stored runs
    runs = [json.loads(paths["runs"][k].read_text()) for k in sorted(paths["runs"])]
    table = np.array([run["phi"] + [run["pair_interactions"][p]
                                    for p in ("1,2", "1,3", "2,3")] for run in runs])
    header, row = csv_path.read_text().splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert values["n"] == "400" and values["runs"] == "2"
    for idx, stat in enumerate(stat_columns(3)):
        assert float(values[f"mean_{stat}"]) == pytest.approx(
            table[:, idx].mean(), abs=1e-15
        )
        assert float(values[f"std_{stat}"]) == pytest.approx(
            table[:, idx].std(ddof=1), abs=1e-15
        )


def test_run_experiment_resumes_without_recomputing(tmp_path):
    spec = tiny_spec()
    first = run_experiment(spec, tmp_path)
    body = first["csv"][0.75].read_bytes()
    calls = []
    second = run_experiment(spec, tmp_path, progress=lambda *a: calls.append(a))
    assert calls == []
    assert second["csv"][0.75].read_bytes() == body


def test_run_experiment_extends_runs_in_place(tmp_path):
    run_experiment(tiny_spec(runs=1), tmp_path)
    stamp = (tmp_path / "runs" / "rho+0.750_n400_run000.json").stat().st_mtime_ns
    calls = []
    extended = run_experiment(
        tiny_spec(runs=2), tmp_path, progress=lambda *a: calls.append(a)
    )
    # only the new repetition ran, the finished file is untouched
    assert [c[2] for c in calls] == ["rho+0.750_n400_run001"]
    assert (tmp_path / "runs" / "rho+0.750_n400_run000.json").stat().st_mtime_ns == stamp
    assert len(extended["runs"]) == 2


def test_run_experiment_single_run_std_is_zero(tmp_path):
    paths = run_experiment(tiny_spec(runs=1), tmp_path)
    header, row = paths["csv"][0.75].read_text().splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    for stat in stat_columns(3):
        assert values[f"std_{stat}"] == "0.0"


def test_run_experiment_rejects_foreign_manifest(tmp_path):
    run_experiment(tiny_spec(runs=1), tmp_path)
    with pytest.raises(DomainError, match="different experiment"):
        run_experiment(tiny_spec(runs=1, base_seed=6), tmp_path)


def test_parallel_jobs_match_sequential(tmp_path):
    spec = tiny_spec()
    sequential = run_experiment(spec, tmp_path / "seq")
    parallel = run_experiment(spec, tmp_path / "par", jobs=2)
    assert (
        sequential["csv"][0.75].read_bytes() == parallel["csv"][0.75].read_bytes()
    )
    for key in sequential["runs"]:
        assert (
            sequential["runs"][key].read_bytes() == parallel["runs"][key].read_bytes()
        )
