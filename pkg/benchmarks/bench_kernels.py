"""Time the numba and numpy forms of each hot kernel.

    python benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

The first numba call compiles (or loads the on-disk cache), so each kernel
is warmed up once before timing. Reported figures are the best of
``--repeat`` runs.
"""

import argparse
import timeit

import numpy as np

from churnkit import _kernels
from churnkit.core import Cohort, sorted_arrays
from churnkit.parametric import Family
from churnkit.sim import SimSpec, simulate_cohort


def _inputs(n, grid_points):
    cohort = simulate_cohort(SimSpec(Family.weibull(0.3, 0.8), n, censor_time=20.0, seed=7))
    # quantise to the second so that ties occur, as in ingested data
    cohort = Cohort(np.round(cohort.durations * 3600.0) / 3600.0, cohort.censored)
    durations, events = sorted_arrays(cohort)
    times = np.unique(durations[events])
    n_at, d_at = _kernels.risk_counts_numpy(durations, events, times)
    increments = d_at / n_at
    grid = np.linspace(0.0, times[-1], grid_points)
    return durations, events, times, increments, grid


def _best(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200_000, help="cohort size")
    parser.add_argument("--grid-points", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    durations, events, times, increments, grid = _inputs(args.n, args.grid_points)
    cases = {
        "risk_counts": (
            lambda: _kernels.risk_counts_numpy(durations, events, times),
            lambda: _kernels.risk_counts_numba(durations, events, times),
        ),
        "kernel_smooth": (
            lambda: _kernels.kernel_smooth_numpy(grid, times, increments, 2.0, _kernels.EPANECHNIKOV, True),
            lambda: _kernels.kernel_smooth_numba(grid, times, increments, 2.0, _kernels.EPANECHNIKOV, True),
        ),
        "bin_exposure": (
            lambda: _kernels.bin_exposure_numpy(durations, events, 1.0, 21),
            lambda: _kernels.bin_exposure_numba(durations, events, 1.0, 21),
        ),
    }

    print(f"n={args.n}  event times={times.size}  grid={grid.size}")
    print(f"{'kernel':<14} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, (np_fn, nb_fn) in cases.items():
        t_np = _best(np_fn, args.repeat)
        t_nb = _best(nb_fn, args.repeat)
        print(f"{name:<14} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
