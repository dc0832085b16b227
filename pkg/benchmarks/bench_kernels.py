"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel (front_mask, min_scaled_distances,
hv_improvement_batch) on identical inputs under both implementations and
prints per-call timings plus the speedup.  The fallback is selected by
re-executing this script with QORSEEK_PURE=1, so each implementation is
measured in a clean process.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def make_inputs(seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 10, size=(400, 5))
    front = rng.uniform(0, 1, size=(10, 5))
    ref = np.full(5, 1.5)
    draws = rng.uniform(0, 1.4, size=(64, 5))
    inv = rng.uniform(0.1, 1.0, size=5)
    return pts, front, ref, draws, inv


def bench(repeat):
    from qorseek import _kernels
    pts, front, ref, draws, inv = make_inputs()
    results = {"implementation": _kernels.IMPLEMENTATION}

    def time_call(fn, *args):
        fn(*args)  # warm up
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        return (time.perf_counter() - t0) / repeat

    results["front_mask"] = time_call(_kernels.front_mask, pts)
    results["min_scaled_distances"] = time_call(
        _kernels.min_scaled_distances, pts, front, inv)
    results["hv_improvement_batch"] = time_call(
        _kernels.hv_improvement_batch, draws, front, ref)
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=50)
    parser.add_argument("--emit-json", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.emit_json:
        print(json.dumps(bench(args.repeat)))
        return

    here = bench(args.repeat)
    env = dict(os.environ, QORSEEK_PURE="1")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__),
         "--repeat", str(args.repeat), "--emit-json"],
        capture_output=True, text=True, env=env, check=True)
    pure = json.loads(out.stdout)

    print(f"primary implementation: {here['implementation']}")
    print(f"fallback implementation: {pure['implementation']}")
    print(f"{'kernel':<24}{'primary (ms)':>14}{'fallback (ms)':>15}"
          f"{'speedup':>10}")
    for name in ("front_mask", "min_scaled_distances",
                 "hv_improvement_batch"):
        a = here[name] * 1e3
        b = pure[name] * 1e3
        ratio = b / a if a > 0 else float("inf")
        print(f"{name:<24}{a:>14.4f}{b:>15.4f}{ratio:>9.2f}x")


if __name__ == "__main__":
    main()
