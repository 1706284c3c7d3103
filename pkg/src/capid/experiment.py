"""Correlation-sweep experiment: identify capacities across (rho, n) grids.

For every grid point the runner draws a fresh matrix whose first
correlated pair follows the requested rank correlation, identifies the
equalizing capacity, and records power indices and pair interactions.
Per-run seeds derive from SeedSequence(base_seed, spawn_key), so results
are byte-identical regardless of worker count, scheduling, or grid order,
and an interrupted sweep resumes from its manifest without recomputing
finished runs.
"""

import json
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .datagen import GenSpec, generate
from .errors import DomainError
from .identification import IdentificationConfig, identify

# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    """Grid description: rank correlations for one pair, sample sizes,
    repetitions per cell, and the identification configuration."""

    rho_values: Tuple[float, ...] = (0.75, 0.0, -0.75)
    n_grid: Tuple[int, ...] = (100, 250, 500, 1000, 2500, 5000, 10000)
    runs: int = 100
    base_seed: int = 0
    m: int = 3
    corr_pair: Tuple[int, int] = (1, 2)
    identification: IdentificationConfig = IdentificationConfig()

    def __post_init__(self):
        if self.runs < 1:
            raise DomainError(f"runs must be >= 1, got {self.runs}")
        if self.m < 2:
            raise DomainError(f"need at least two criteria, got m={self.m}")
        if not self.rho_values or not self.n_grid:
            raise DomainError("rho_values and n_grid must be nonempty")
        j, k = (int(x) for x in self.corr_pair)
        if not (1 <= j <= self.m and 1 <= k <= self.m) or j == k:
            raise DomainError(f"corr_pair ({j}, {k}) invalid for m={self.m}")
        object.__setattr__(self, "rho_values", tuple(float(r) for r in self.rho_values))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "corr_pair", (min(j, k), max(j, k)))

    def fingerprint(self) -> dict:
        """The parts that must match for runs to be reusable.

        Passed through JSON so it compares equal to a stored manifest
        (tuples become lists either way).
        """
        raw = {
            "base_seed": self.base_seed,
            "m": self.m,
            "corr_pair": list(self.corr_pair),
            "identification": asdict(self.identification),
        }
        return json.loads(json.dumps(raw))


def _pairs(m: int) -> list:
    return [(j, k) for j in range(1, m + 1) for k in range(j + 1, m + 1)]


def stat_columns(m: int) -> list:
    """CSV statistic names: power indices then pair interactions."""
    return [f"phi{j}" for j in range(1, m + 1)] + [
        f"i{j}{k}" for j, k in _pairs(m)
    ]


def run_key(rho: float, n: int, run_idx: int) -> str:
    return f"rho{rho:+.3f}_n{n}_run{run_idx:03d}"


def run_seeds(base_seed: int, rho: float, n: int, run_idx: int) -> Tuple[int, int]:
    """(data_seed, identify_seed), stable across scheduling and grid order."""
    rho_key = int(round(rho * 1000)) + 1_000_000
    root = np.random.SeedSequence(entropy=base_seed, spawn_key=(rho_key, n, run_idx))
    data, ident = root.spawn(2)
    return int(data.generate_state(1)[0]), int(ident.generate_state(1)[0])


def run_single(spec: ExperimentSpec, rho: float, n: int, run_idx: int) -> dict:
    """One grid cell repetition: generate, identify, extract indices."""
    data_seed, identify_seed = run_seeds(spec.base_seed, rho, n, run_idx)
    j, k = spec.corr_pair
    matrix = generate(GenSpec(n=n, m=spec.m, correlations=((j, k, rho),), seed=data_seed))
    config = replace(spec.identification, rng_seed=identify_seed)
    result = identify(matrix, config)
    interactions = result.interactions.values
    return {
        "rho": rho,
        "n": n,
        "run": run_idx,
        "data_seed": data_seed,
        "identify_seed": identify_seed,
        "phi": [float(interactions[1 << (jj - 1)]) for jj in range(1, spec.m + 1)],
        "pair_interactions": {
            f"{a},{b}": float(interactions[(1 << (a - 1)) | (1 << (b - 1))])
            for a, b in _pairs(spec.m)
        },
        "objective": float(result.objective_trace[-1]),
        "iterations": result.iterations,
        "converged": result.converged,
    }


def _task_wrapper(args):
    spec, rho, n, run_idx = args
    return run_key(rho, n, run_idx), run_single(spec, rho, n, run_idx)


# ---------------------------------------------------------------------------


def run_experiment(
    spec: ExperimentSpec,
    out_dir,
    jobs: int = 1,
    progress: Optional[callable] = None,
) -> dict:
    """Execute (or resume) the sweep and write per-rho summary CSVs.

    Returns {"manifest": path, "csv": {rho: path}, "runs": {key: path}}.
    Raises DomainError when out_dir holds a manifest from an incompatible
    spec (different seed or identification settings).
    """
    out = Path(out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"

    fingerprint = spec.fingerprint()
    completed: dict = {}
    if manifest_path.exists():
        with open(manifest_path, "r", encoding="utf-8") as handle:
            manifest = json.load(handle)
        if manifest.get("fingerprint") != fingerprint:
            raise DomainError(
                f"{manifest_path} belongs to a different experiment "
                "(seed or identification settings differ); use a fresh out-dir"
            )
        completed = {
            key: path
            for key, path in manifest.get("completed", {}).items()
            if (out / path).exists()
        }

    tasks = [
        (rho, n, run_idx)
        for rho in spec.rho_values
        for n in spec.n_grid
        for run_idx in range(spec.runs)
    ]
    pending = [t for t in tasks if run_key(*t) not in completed]
    total = len(tasks)
    done = total - len(pending)

    def record(key: str, payload: dict) -> None:
        path = runs_dir / f"{key}.json"
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        completed[key] = str(path.relative_to(out))
        _write_manifest(manifest_path, fingerprint, completed)

    if jobs > 1 and pending:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(_task_wrapper, (spec, rho, n, run_idx)): (rho, n, run_idx)
                for rho, n, run_idx in pending
            }
            for future in as_completed(futures):
                key, payload = future.result()
                record(key, payload)
                done += 1
                if progress is not None:
                    progress(done, total, key)
    else:
        for rho, n, run_idx in pending:
            key, payload = _task_wrapper((spec, rho, n, run_idx))
            record(key, payload)
            done += 1
            if progress is not None:
                progress(done, total, key)

    _write_manifest(manifest_path, fingerprint, completed)

    csv_paths = {}
    for rho in spec.rho_values:
        csv_paths[rho] = _write_rho_csv(spec, rho, out, completed)
    return {
        "manifest": manifest_path,
        "csv": csv_paths,
        "runs": {key: out / path for key, path in sorted(completed.items())},
    }


def _write_manifest(path, fingerprint: dict, completed: dict) -> None:
    payload = {
        "fingerprint": fingerprint,
        "completed": {key: completed[key] for key in sorted(completed)},
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _load_run(out: Path, completed: dict, key: str) -> dict:
    with open(out / completed[key], "r", encoding="utf-8") as handle:
        return json.load(handle)


def _write_rho_csv(spec: ExperimentSpec, rho: float, out: Path, completed: dict):
    """Across-run mean and sample std of every statistic, one row per n."""
    import csv as csv_module

    columns = stat_columns(spec.m)
    path = out / f"indices_rho{rho:+.3f}.csv"
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_module.writer(handle)
        header = ["n", "runs"]
        for name in columns:
            header += [f"mean_{name}", f"std_{name}"]
        writer.writerow(header)
        for n in spec.n_grid:
            samples = {name: [] for name in columns}
            for run_idx in range(spec.runs):
                payload = _load_run(out, completed, run_key(rho, n, run_idx))
                for j in range(1, spec.m + 1):
                    samples[f"phi{j}"].append(payload["phi"][j - 1])
                for a, b in _pairs(spec.m):
                    samples[f"i{a}{b}"].append(payload["pair_interactions"][f"{a},{b}"])
            row = [n, spec.runs]
            for name in columns:
                data = np.asarray(samples[name], dtype=np.float64)
                mean = float(data.mean())
                std = float(data.std(ddof=1)) if data.size > 1 else 0.0
                row += [repr(mean), repr(std)]
            writer.writerow(row)
    return path
