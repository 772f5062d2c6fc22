"""Benchmark the jitted vs vectorized-numpy subset-mean sampling paths.

Times ``sample_means_without_replacement`` with the jitted kernel enabled and
with it disabled (STABREG_DISABLE_NUMBA=1 semantics, toggled in-process), and
reports the agreement between the two result arrays.  Integer-valued
populations agree bit for bit; float populations may differ in the last ulp
because the two paths sum the selected values in different orders.

Usage: python benchmarks/bench_kernels.py [--trials 100000] [--n 1000]
"""

import argparse
import os
import time

import numpy as np

from stabreg import _kernels


def _time_path(disable_numba: bool, pop, m, trials, seed, repeats=3) -> tuple[float, np.ndarray]:
    previous = os.environ.get("STABREG_DISABLE_NUMBA")
    os.environ["STABREG_DISABLE_NUMBA"] = "1" if disable_numba else "0"
    try:
        # warm-up run covers one-time JIT compilation
        result = _kernels.sample_means_without_replacement(pop, m, trials, seed)
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            _kernels.sample_means_without_replacement(pop, m, trials, seed)
            best = min(best, time.perf_counter() - start)
        return best, result
    finally:
        if previous is None:
            del os.environ["STABREG_DISABLE_NUMBA"]
        else:
            os.environ["STABREG_DISABLE_NUMBA"] = previous


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000, help="population size")
    parser.add_argument("--m", type=int, default=500, help="subset size")
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = {
        "binary {0,1}": np.repeat([0.0, 1.0], args.n // 2 + 1)[: args.n],
        "uniform floats": rng.uniform(-1.0, 1.0, args.n),
    }

    if not _kernels.numba_available():
        print("numba is not importable; only the numpy path can be timed")

    header = f"{'population':<16} {'path':<8} {'seconds':>9}   agreement"
    print(f"n={args.n} m={args.m} trials={args.trials} seed={args.seed}")
    print(header)
    print("-" * len(header))
    for name, pop in cases.items():
        t_np, means_np = _time_path(True, pop, args.m, args.trials, args.seed)
        print(f"{name:<16} {'numpy':<8} {t_np:9.3f}")
        if _kernels.numba_available():
            t_nb, means_nb = _time_path(False, pop, args.m, args.trials, args.seed)
            diff = float(np.max(np.abs(means_nb - means_np)))
            exact = "bit-identical" if diff == 0.0 else f"max |diff| {diff:.3e}"
            speedup = t_np / t_nb if t_nb > 0 else float("inf")
            print(
                f"{name:<16} {'numba':<8} {t_nb:9.3f}   "
                f"{exact}, {speedup:.1f}x vs numpy"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
