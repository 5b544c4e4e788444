"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from sparsegenre import _kernels_py
from sparsegenre.solvers import normalize_columns

try:
    from sparsegenre import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _best(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_omp():
    rng = np.random.default_rng(0)
    for m, n, k in [(35, 160, 10), (35, 800, 10), (64, 256, 5), (128, 1024, 30)]:
        A = normalize_columns(rng.standard_normal((m, n)))
        y = rng.standard_normal(m)
        yield f"omp_kernel {m}x{n} k={k}", (lambda kern: lambda: kern.omp_kernel(A, y, k, 0.0))


def bench_row_stats():
    rng = np.random.default_rng(1)
    for frames, bins in [(98, 2049), (599, 4097)]:
        mags = np.abs(rng.standard_normal((frames, bins)))
        yield f"normalized_row_stats {frames}x{bins}", (lambda kern: lambda: kern.normalized_row_stats(mags))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats, best is kept (default: 5)")
    args = ap.parse_args()
    print(f"{'case':<36}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for gen in (bench_omp, bench_row_stats):
        for name, make in gen():
            t_py = _best(make(_kernels_py), args.repeat) * 1e6
            if _compiled is None:
                print(f"{name:<36}{t_py:>14.1f}{'n/a':>14}{'':>10}")
                continue
            t_cy = _best(make(_compiled), args.repeat) * 1e6
            print(f"{name:<36}{t_py:>14.1f}{t_cy:>14.1f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
