#!/usr/bin/env python3
"""Timing comparison of the JIT-compiled solver kernels vs the fallback.

Times the parametric path solve on batches of random mixed coordinate
problems.  When launched normally it measures the compiled backend, then
re-executes itself with TVMRF_DISABLE_NUMBA=1 to measure the plain-Python
fallback on the same workload, and prints one table row per configuration.

    python3 benchmarks/bench_dp.py
    python3 benchmarks/bench_dp.py --horizons 40,80 --coords 100 --q 0
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def make_batch(coords, horizon, q, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.where(rng.random((coords, horizon + 1)) < 0.5, 0.3, 0.0)
    lower = centers - 0.2
    upper = centers + 0.2
    return lower, upper


def run_backend(horizons, coords, q, repeats):
    from tvmrf import NUMBA_ENABLED
    from tvmrf.dp import solve_parametric_batch, warmup

    warmup()
    backend = "numba" if NUMBA_ENABLED else "python"
    for T in horizons:
        lower, upper = make_batch(coords, T, q)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            solve_parametric_batch(lower, upper, q, workers=1)
            times.append(time.perf_counter() - t0)
        best = min(times)
        print(
            f"{backend:>7}  T={T:<5d} coords={coords:<6d} q={q:g}  "
            f"total={best:8.3f} s  per-coord={1e3 * best / coords:8.3f} ms",
            flush=True,
        )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizons", default="20,40,80", help="comma-separated T values")
    ap.add_argument("--coords", type=int, default=64, help="coordinates per batch")
    ap.add_argument("--q", type=float, default=0.0, choices=(0.0, 1.0, 2.0))
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--backend-only", action="store_true",
                    help="time only the current backend (no fallback respawn)")
    args = ap.parse_args()
    horizons = [int(x) for x in args.horizons.split(",")]

    run_backend(horizons, args.coords, args.q, args.repeats)
    disabled = os.environ.get("TVMRF_DISABLE_NUMBA", "") not in ("", "0")
    if not args.backend_only and not disabled:
        env = dict(os.environ, TVMRF_DISABLE_NUMBA="1")
        subprocess.run(
            [sys.executable, __file__, "--backend-only",
             "--horizons", args.horizons, "--coords", str(args.coords),
             "--q", str(args.q), "--repeats", str(args.repeats)],
            env=env,
            check=True,
        )


if __name__ == "__main__":
    main()
