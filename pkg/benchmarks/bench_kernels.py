"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--reps 20000] [--repeat 5]

The first numba call includes JIT compilation (or a cache load); it is timed
separately and excluded from the steady-state numbers.
"""
import argparse
import time

import numpy as np

from stripsplit import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=20_000, help="layouts per ss_batch call")
    parser.add_argument("--dims", default="2,4,3,3")
    parser.add_argument("--points", type=int, default=200_000, help="betainc evaluations")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    dims = tuple(int(v) for v in args.dims.split(","))
    y = rng.normal(size=(args.reps,) + dims)
    a = rng.uniform(0.5, 60, args.points)
    b = rng.uniform(0.5, 60, args.points)
    x = rng.uniform(0, 1, args.points)

    cases = [
        ("ss_batch", lambda: kernels.ss_batch_numba(y), lambda: kernels.ss_batch_numpy(y)),
        ("betainc", lambda: kernels.betainc_numba(a, b, x), lambda: kernels.betainc_numpy(a, b, x)),
    ]
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<10}{'first numba':>14}{'numba':>12}{'numpy':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, fast, slow in cases:
        start = time.perf_counter()
        fast()
        first = time.perf_counter() - start
        t_fast, out_fast = best_of(fast, args.repeat)
        t_slow, out_slow = best_of(slow, args.repeat)
        diff = float(np.max(np.abs(out_fast - out_slow)))
        print(f"{name:<10}{first:>13.3f}s{t_fast:>11.4f}s{t_slow:>11.4f}s{t_slow / t_fast:>9.1f}x{diff:>13.1e}")


if __name__ == "__main__":
    main()
