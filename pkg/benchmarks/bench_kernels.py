#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Times the two hot primitives on large point arrays and one end-to-end
residual scan. Run from a build with the extension compiled; the fallback
is loaded directly from ``feistab._kernels._pyref`` so both backends are
measured in one process.

    python3 benchmarks/bench_kernels.py [--points 200000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from feistab import Exact, dk_grid, powers, sup_residual
from feistab._kernels import BACKEND, _pyref
from feistab._kernels import mult_eval as active_mult
from feistab._kernels import noise_eval as active_noise


def best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    pts = rng.random((args.points, 2))
    kinds = np.array([0, 0], dtype=np.int8)
    alphas = np.array([2.0, 0.5])

    rows = []
    for label, size in (("mult_eval", args.points), ("noise_eval", args.points)):
        if label == "mult_eval":
            t_active = best_of(args.repeat, active_mult, kinds, alphas, pts)
            t_ref = best_of(args.repeat, _pyref.mult_eval, kinds, alphas, pts)
            same = np.allclose(
                active_mult(kinds, alphas, pts), _pyref.mult_eval(kinds, alphas, pts),
                rtol=1e-14, atol=0,
            )
        else:
            t_active = best_of(args.repeat, active_noise, 12345, 0, 1e-3, pts)
            t_ref = best_of(args.repeat, _pyref.noise_eval, 12345, 0, 1e-3, pts)
            same = np.array_equal(
                active_noise(12345, 0, 1e-3, pts), _pyref.noise_eval(12345, 0, 1e-3, pts)
            )
        rows.append((label, size, t_active, t_ref, same))

    M = powers(2.0, 0.5)
    grid = dk_grid(2, 16)
    grid.xs  # force array construction outside the timer
    f = Exact(1.25, -0.5, M)
    t_scan = best_of(args.repeat, sup_residual, f, M, grid)
    rows.append(("sup_residual k=2 m=16", len(grid), t_scan, None, True))

    print(f"active backend: {BACKEND}")
    print(f"{'kernel':<24}{'n':>10}{'active s':>12}{'pyref s':>12}{'speedup':>9}  agree")
    for label, n, t_active, t_ref, same in rows:
        ref = f"{t_ref:12.6f}" if t_ref is not None else " " * 12
        speedup = f"{t_ref / t_active:8.2f}x" if t_ref else " " * 9
        print(f"{label:<24}{n:>10}{t_active:12.6f}{ref}{speedup}  {same}")
    if BACKEND != "cython":
        print("note: extension not loaded; both columns measure python paths")


if __name__ == "__main__":
    main()
