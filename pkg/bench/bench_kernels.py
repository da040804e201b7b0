#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the three hot paths (pairwise construction, median of pairs, weighted
median of pairs) at several sample sizes, then a full replication-study
batch through each backend. Both backends return bit-identical results, so
this is purely a speed comparison.

Usage: python bench/bench_kernels.py [--reps 2000]
"""

import argparse
import time

import numpy as np

from whlkit._kernels import available_backends, get_backend
from whlkit.estimators import EstimatorKind
from whlkit.samples import PairScheme
from whlkit.simkit import run_replications, table_sample


def time_call(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(backends, sizes=(30, 100, 300), repeat=30):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'n':>5}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for n in sizes:
        x = rng.normal(size=n)
        w = rng.uniform(0.1, 2.0, size=n)
        w = w / w.sum()
        mods = [get_backend(b) for b in backends]
        pv, praw = mods[0].pair_arrays(x, w, 2)
        pw = praw / praw.sum()
        rows = {
            "pair_arrays (all scheme)": [
                time_call(m.pair_arrays, x, w, 2, repeat=repeat) for m in mods
            ],
            "median of pairs": [time_call(m.median, pv, repeat=repeat) for m in mods],
            "weighted median of pairs": [
                time_call(m.weighted_median, pv, pw, repeat=repeat) for m in mods
            ],
        }
        for label, times in rows.items():
            speed = f"{times[0] / times[-1]:9.2f}x" if len(times) > 1 else "       n/a"
            print(
                f"{label:<28}{n:>5}"
                + "".join(f"{t * 1e6:>12.1f}us" for t in times)
                + speed
            )


def bench_simulation(backends, reps):
    import os

    print(f"\nreplication study: sample 4, n=15, 8 estimators, reps={reps}")
    kinds = tuple(
        [EstimatorKind("weighted_mean"), EstimatorKind("weighted_median")]
        + [EstimatorKind(f, s) for f in ("whl1", "whl2") for s in PairScheme]
    )
    results = {}
    for backend in backends:
        os.environ["WHLKIT_BACKEND"] = backend
        import importlib

        import whlkit._kernels as _k
        import whlkit.estimators as _e
        import whlkit.simkit as _s

        importlib.reload(_k)
        importlib.reload(_e)
        importlib.reload(_s)
        start = time.perf_counter()
        rows = _s.run_replications(_s.table_sample(4, 15), kinds, reps, seed=1)
        elapsed = time.perf_counter() - start
        results[backend] = (elapsed, rows[0].relative_efficiency)
        print(f"  {backend:<8} {elapsed:7.2f}s  (re_wm={rows[0].relative_efficiency:.3f})")
    if len(results) == 2:
        py, cy = results["python"][0], results["cython"][0]
        print(f"  speedup: {py / cy:.2f}x")
        assert results["python"][1] == results["cython"][1], "backends disagree"
    os.environ.pop("WHLKIT_BACKEND", None)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=2000)
    args = parser.parse_args()
    backends = list(available_backends())
    print(f"available backends: {', '.join(backends)}")
    bench_kernels(backends)
    bench_simulation(backends, args.reps)


if __name__ == "__main__":
    main()
