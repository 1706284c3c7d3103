"""Compare the compiled kernels with their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--n 200000] [--m 4] [--repeats 7]
"""

import argparse
import time

import numpy as np

from capid.kernels import available_backends


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200000, help="rows")
    parser.add_argument("--m", type=int, default=4, help="criteria")
    parser.add_argument("--cells", type=int, default=400, help="slice cells")
    parser.add_argument("--repeats", type=int, default=7, help="best-of repeats")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    values = rng.random((args.n, args.m))
    mu = np.sort(rng.random(1 << args.m))
    mu[0], mu[-1] = 0.0, 1.0
    y = rng.random(args.n)
    cells = rng.integers(0, args.cells, size=args.n, dtype=np.int64)

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not available; timing the numpy fallback only")

    workloads = [
        ("multilinear_eval", lambda mod: best_of(
            args.repeats, mod.multilinear_eval, values, mu)),
        ("group_mean_estimate", lambda mod: best_of(
            args.repeats, mod.group_mean_estimate, y, cells, args.cells)),
    ]

    print(f"n={args.n} m={args.m} cells={args.cells} (best of {args.repeats})")
    print(f"{'kernel':<22} " + " ".join(f"{name:>12}" for name in backends))
    for name, runner in workloads:
        times = {backend: runner(mod) for backend, mod in backends.items()}
        row = f"{name:<22} " + " ".join(
            f"{times[backend] * 1e3:>10.2f}ms" for backend in backends
        )
        if "compiled" in times and "numpy" in times:
            row += f"   x{times['numpy'] / times['compiled']:.1f}"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
