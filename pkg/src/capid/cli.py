"""Command line interface.

Subcommands: gen, rank, sobol, identify, experiment. Every subcommand
accepts --config pointing at a JSON file keyed by subcommand name whose
entries fill flags the user did not pass; explicit flags win. Exit codes:
0 success, 2 input or configuration error, 3 invalid capacity, 4 runtime
numerical failure.
"""

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import subsets
from .aggregation import (
    DecisionMatrix,
    WeightVector,
    matrix_from_csv,
    matrix_to_csv,
    multilinear,
    rank,
    wam,
)
from .capacity import (
    banzhaf_from_capacity,
    load_capacity_json,
    require_valid,
    save_json,
)
from .datagen import GenSpec, generate, pearson, save_spec_json
from .errors import (
    CapidError,
    DomainError,
    EstimationError,
    InvalidCapacityError,
)
from .experiment import ExperimentSpec, run_experiment
from .identification import IdentificationConfig, identify, save_result_json
from .sobol import (
    SliceConfig,
    analytic_sobol,
    analytic_total_variance,
    empirical_sobol,
    write_report_csv,
)

# ---------------------------------------------------------------------------
# -- Shared coercions (flags arrive as strings, --config as JSON natives) ----


def _as_float_list(value) -> list:
    try:
        if isinstance(value, str):
            return [float(part) for part in value.split(",") if part.strip()]
        return [float(x) for x in value]
    except (TypeError, ValueError):
        raise DomainError(f"expected a comma-separated list of numbers, got {value!r}")


def _as_int_list(value) -> list:
    try:
        if isinstance(value, str):
            return [int(part) for part in value.split(",") if part.strip()]
        return [int(x) for x in value]
    except (TypeError, ValueError):
        raise DomainError(f"expected a comma-separated list of integers, got {value!r}")


def _as_correlations(items) -> tuple:
    out = []
    for item in items or []:
        try:
            if isinstance(item, str):
                parts = [part.strip() for part in item.split(",")]
                if len(parts) != 3:
                    raise ValueError
                out.append((int(parts[0]), int(parts[1]), float(parts[2])))
            else:
                j, k, rho = item
                out.append((int(j), int(k), float(rho)))
        except (TypeError, ValueError):
            raise DomainError(f"--rho expects 'J,K,RHO', got {item!r}")
    return tuple(out)


def _require(args, *names) -> None:
    missing = [name for name in names if getattr(args, name.replace("-", "_")) is None]
    if missing:
        raise DomainError("missing required options: " + ", ".join(f"--{n}" for n in missing))


# ---------------------------------------------------------------------------
# -- Subcommands ------------------------------------------------------------


def cmd_gen(args) -> int:
    _require(args, "n", "m", "out")
    spec = GenSpec(
        n=args.n,
        m=args.m,
        correlations=_as_correlations(args.rho),
        seed=args.seed,
    )
    matrix = generate(spec)
    matrix_to_csv(matrix, args.out)
    sidecar = f"{args.out}.spec.json"
    save_spec_json(spec, sidecar)
    print(f"wrote {matrix.n} x {matrix.m} matrix to {args.out} (spec: {sidecar})")
    for j, k, rho in spec.correlations:
        realized = pearson(matrix.values[:, j - 1], matrix.values[:, k - 1])
        print(f"  pair ({j}, {k}): target rho {rho:+.3f}, realized {realized:+.4f}")
    return 0


def _load_matrix(args) -> DecisionMatrix:
    return matrix_from_csv(args.data, normalize=args.normalize)


def _load_validated_capacity(path):
    capacity = load_capacity_json(path)
    require_valid(capacity)
    return capacity


def _print_ranking(title: str, matrix: DecisionMatrix, overall: np.ndarray) -> None:
    ranking = rank(overall)
    labels = matrix.labels or tuple(f"a{i + 1}" for i in range(matrix.n))
    print(title)
    for i in ranking.order:
        print(f"  {labels[i]:<12} {overall[i]:.6f}  position {ranking.positions[i]}")


def cmd_rank(args) -> int:
    if args.weights is None and args.capacity is None:
        raise DomainError("rank needs --weights (additive) and/or --capacity (multilinear)")
    matrix = _load_matrix(args)
    results = []
    if args.weights is not None:
        weights = WeightVector(np.asarray(_as_float_list(args.weights)))
        overall = wam(matrix, weights)
        results.append(("wam", overall))
        _print_ranking("weighted mean:", matrix, overall)
    if args.capacity is not None:
        capacity = _load_validated_capacity(args.capacity)
        overall = multilinear(matrix, capacity)
        results.append(("multilinear", overall))
        _print_ranking("multilinear:", matrix, overall)
    if args.out:
        _write_rank_csv(args.out, matrix, results)
        print(f"wrote {args.out}")
    return 0


def _write_rank_csv(path, matrix: DecisionMatrix, results) -> None:
    import csv

    labels = matrix.labels or tuple(f"a{i + 1}" for i in range(matrix.n))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        header = ["label"]
        for name, _ in results:
            header += [f"overall_{name}", f"position_{name}"]
        writer.writerow(header)
        rankings = [(overall, rank(overall)) for _, overall in results]
        for i in range(matrix.n):
            row = [labels[i]]
            for overall, ranking in rankings:
                row += [repr(float(overall[i])), int(ranking.positions[i])]
            writer.writerow(row)


def cmd_sobol(args) -> int:
    _require(args, "capacity")
    # here --normalize selects normalized indices; the matrix must already be in [0, 1]
    matrix = matrix_from_csv(args.data)
    capacity = _load_validated_capacity(args.capacity)
    config = SliceConfig(slice_count=args.slices)
    orders = _as_int_list(args.orders)
    if any(o not in (1, 2) for o in orders):
        raise DomainError(f"--orders must be within {{1, 2}}, got {orders}")
    y = multilinear(matrix, capacity)
    interactions = banzhaf_from_capacity(capacity)
    masks = []
    card = subsets.cardinalities(matrix.m)
    for order in sorted(set(orders)):
        masks.extend(int(a) for a in np.nonzero(card == order)[0])
    reports = [
        empirical_sobol(y, matrix, a, config, normalize=args.normalize) for a in masks
    ]
    analytic_total = analytic_total_variance(interactions) if args.normalize else None
    analytic = {}
    for a in masks:
        raw = analytic_sobol(interactions, a)
        analytic[a] = (raw, raw / analytic_total if args.normalize else None)
    print(f"{'subset':<8} {'empirical':>12} {'analytic':>12}" + ("  (normalized)" if args.normalize else ""))
    for report in reports:
        value = report.normalized if args.normalize else report.raw_variance
        reference = analytic[report.subset][1 if args.normalize else 0]
        print(f"{subsets.subset_label(report.subset):<8} {value:>12.6f} {reference:>12.6f}")
    if args.out:
        write_report_csv(args.out, reports, analytic)
        print(f"wrote {args.out}")
    return 0


def _identification_config(args) -> IdentificationConfig:
    return IdentificationConfig(
        singleton_value=args.singleton_value,
        objective_orders=tuple(_as_int_list(args.orders)),
        slices=SliceConfig(
            slice_count=args.slices, min_slice_population=args.min_slice_population
        ),
        gs_tolerance=args.gs_tol,
        objective_tolerance=args.obj_tol,
        max_outer_iterations=args.max_iter,
        rng_seed=args.seed,
        normalized_objective=args.normalized,
        starts=args.starts,
    )


def cmd_identify(args) -> int:
    matrix = _load_matrix(args)
    config = _identification_config(args)
    result = identify(matrix, config)
    print(f"converged: {result.converged} after {result.iterations} iterations")
    print(f"objective: {result.objective_trace[0]:.6e} -> {result.objective_trace[-1]:.6e}")
    print("first-order indices before:", " ".join(f"{x:.5f}" for x in result.sobol_before))
    print("first-order indices after: ", " ".join(f"{x:.5f}" for x in result.sobol_after))
    print("capacity:", " ".join(f"{x:.5f}" for x in result.capacity.to_paper_list()))
    interactions = result.interactions
    print("power indices:", " ".join(f"{interactions.values[1 << j]:.5f}" for j in range(matrix.m)))
    pair_text = []
    for j in range(1, matrix.m + 1):
        for k in range(j + 1, matrix.m + 1):
            value = interactions.values[(1 << (j - 1)) | (1 << (k - 1))]
            pair_text.append(f"I({j},{k})={value:+.5f}")
    print("pair interactions:", " ".join(pair_text))
    if args.out:
        save_result_json(result, args.out)
        print(f"wrote {args.out}")
    if args.capacity_out:
        save_json(result.capacity, args.capacity_out)
        print(f"wrote {args.capacity_out}")
    return 0


_EXPERIMENT_DEFAULT_RHOS = "0.75,0,-0.75"
_EXPERIMENT_DEFAULT_GRID = "100,250,500,1000,2500,5000,10000"


def cmd_experiment(args) -> int:
    _require(args, "out-dir")
    rhos = _as_float_list(args.rhos)
    n_grid = _as_int_list(args.n_grid)
    identification = _identification_config(args)
    spec = ExperimentSpec(
        rho_values=tuple(rhos),
        n_grid=tuple(n_grid),
        runs=args.runs,
        base_seed=args.seed,
        m=args.m,
        corr_pair=tuple(_as_int_list(args.pair)),
        identification=identification,
    )
    total = len(spec.rho_values) * len(spec.n_grid) * spec.runs
    if args.rhos == _EXPERIMENT_DEFAULT_RHOS and args.n_grid == _EXPERIMENT_DEFAULT_GRID and args.runs == 100:
        print(
            f"note: the full default grid is {total} identification runs and takes a "
            "while; --runs and --n-grid shrink it",
            file=sys.stderr,
        )

    def progress(done, total_tasks, key):
        print(f"  [{done}/{total_tasks}] {key}", file=sys.stderr)

    paths = run_experiment(spec, args.out_dir, jobs=args.jobs, progress=progress)
    for rho in spec.rho_values:
        print(f"rho {rho:+.3f}: {paths['csv'][rho]}")
    print(f"manifest: {paths['manifest']}")
    return 0


# ---------------------------------------------------------------------------
# -- Parser -----------------------------------------------------------------


def build_parser() -> tuple:
    parser = argparse.ArgumentParser(
        prog="capid",
        description="capacity identification and sensitivity analysis for "
        "multilinear aggregation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = {}

    def register(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON file keyed by subcommand")
        return p

    g = register("gen", "generate a synthetic decision matrix")
    g.add_argument("--n", type=int, default=None, help="number of rows")
    g.add_argument("--m", type=int, default=None, help="number of criteria")
    g.add_argument(
        "--rho",
        action="append",
        default=None,
        metavar="J,K,RHO",
        help="target rank correlation for a pair; repeatable",
    )
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None, help="output CSV path")
    g.set_defaults(func=cmd_gen)

    r = register("rank", "rank alternatives by weighted mean and/or multilinear model")
    r.add_argument("data", help="decision matrix CSV")
    r.add_argument("--weights", default=None, help="comma-separated weights (additive model)")
    r.add_argument("--capacity", default=None, help="capacity JSON (multilinear model)")
    r.add_argument("--normalize", action="store_true", help="min-max rescale input columns")
    r.add_argument("--out", default=None, help="optional output CSV")
    r.set_defaults(func=cmd_rank)

    s = register("sobol", "per-subset variance contributions of an aggregation")
    s.add_argument("data", help="decision matrix CSV")
    s.add_argument("--capacity", default=None, help="capacity JSON", required=False)
    s.add_argument("--slices", type=int, default=20)
    s.add_argument("--orders", default="1", help="subset orders, e.g. '1' or '1,2'")
    s.add_argument("--normalize", action="store_true", help="divide by total variance")
    s.add_argument("--out", default=None, help="optional output CSV")
    s.set_defaults(func=cmd_sobol)

    def add_identification_flags(p):
        p.add_argument("--singleton-value", type=float, default=None, dest="singleton_value")
        p.add_argument("--orders", default="1", help="equalized subset orders")
        p.add_argument("--slices", type=int, default=20)
        p.add_argument(
            "--min-slice-population", type=int, default=1, dest="min_slice_population"
        )
        p.add_argument("--gs-tol", type=float, default=1e-6, dest="gs_tol")
        p.add_argument("--obj-tol", type=float, default=1e-10, dest="obj_tol")
        p.add_argument("--max-iter", type=int, default=500, dest="max_iter")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--normalized", action="store_true", help="equalize normalized indices")
        p.add_argument("--starts", type=int, default=1, help="randomized extra starts")

    i = register("identify", "identify the equalizing 2-additive capacity")
    i.add_argument("data", help="decision matrix CSV")
    i.add_argument("--normalize", action="store_true", help="min-max rescale input columns")
    add_identification_flags(i)
    i.add_argument("--out", default=None, help="result JSON path")
    i.add_argument(
        "--capacity-out", default=None, dest="capacity_out", help="capacity-only JSON path"
    )
    i.set_defaults(func=cmd_identify)

    e = register("experiment", "correlation sweep over (rho, n) grid")
    e.add_argument("--rhos", default=_EXPERIMENT_DEFAULT_RHOS)
    e.add_argument("--n-grid", default=_EXPERIMENT_DEFAULT_GRID, dest="n_grid")
    e.add_argument("--runs", type=int, default=100)
    e.add_argument("--m", type=int, default=3)
    e.add_argument("--pair", default="1,2", help="correlated criterion pair")
    e.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    add_identification_flags(e)
    e.add_argument("--out-dir", default=None, dest="out_dir")
    e.set_defaults(func=cmd_experiment)

    for name, p in sub.choices.items():
        defaults[name] = {
            action.dest: action.default
            for action in p._actions
            if action.dest not in ("help", "func")
        }
    return parser, defaults


def _merge_config(args, defaults: dict) -> None:
    if not args.config:
        return
    with open(args.config, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise DomainError(f"{args.config}: config must be a JSON object")
    section = data.get(args.command, {})
    if not isinstance(section, dict):
        raise DomainError(f"{args.config}: section {args.command!r} must be an object")
    known = defaults[args.command]
    for key, value in section.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise DomainError(f"{args.config}: unknown option {key!r} for {args.command}")
        if getattr(args, dest) == known[dest]:
            setattr(args, dest, value)


def main(argv=None) -> int:
    parser, defaults = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args, defaults)
        return args.func(args)
    except InvalidCapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FloatingPointError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 4
    except (CapidError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
