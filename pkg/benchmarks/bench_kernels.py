"""Compare the numba and numpy kernel backends on workbench-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 20]

Timings are best-of-N wall clock per call; the first numba call (JIT or
cache load) is reported separately as warm-up.
"""

import argparse
import time

import numpy as np

from diwbench import kernels


def _inputs(rng):
    n_seg = 20_000
    return {
        # a long cyclic log reduced to groups, as in analysis.build_curves
        "group_means": (rng.integers(0, 2_500, 200_000), rng.normal(1.0, 0.01, 200_000), 2_500),
        "trapezoid": (np.linspace(0, 6, 100_001), rng.random(100_001)),
        "linear_fit": (rng.uniform(0, 3, 100_000), rng.normal(size=100_000)),
        "segment_kinematics": (
            rng.uniform(0, 350, (n_seg, 3)),
            rng.uniform(0, 350, (n_seg, 3)),
            rng.normal(size=n_seg),
            np.full(n_seg, 300.0),
            np.zeros(3),
            np.array([350.0, 350.0, 400.0]),
        ),
    }


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    inputs = _inputs(rng)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<20} {'numpy ms':>10} {'loop ms':>10} {'warm-up ms':>11} {'speedup':>8}")
    for name, fargs in inputs.items():
        np_fn = kernels.NUMPY_KERNELS[name]
        loop_fn = kernels.ACTIVE_KERNELS[name]
        t0 = time.perf_counter()
        loop_fn(*fargs)
        warm = time.perf_counter() - t0
        t_np = _best(np_fn, fargs, args.repeat)
        t_loop = _best(loop_fn, fargs, args.repeat)
        print(f"{name:<20} {t_np * 1e3:>10.3f} {t_loop * 1e3:>10.3f} {warm * 1e3:>11.1f} {t_np / t_loop:>7.1f}x")


if __name__ == "__main__":
    main()
