#!/usr/bin/env python3
"""Benchmark the compiled extension core against the pure-Python fallback.

Usage: python benchmarks/bench_backends.py [--episodes N] [--samples N]

Both backends consume identical uniform streams, so outputs are checked for
agreement while timing.
"""

import argparse
import time

import numpy as np

from credosim import _kernels_py
from credosim.credo import TeamStructure

try:
    from credosim import _kernels
except ImportError:
    _kernels = None


def _ipd_args(n=25, teams=5):
    ts = TeamStructure.contiguous(n, teams)
    size = n // teams
    agent_team = np.array([ts.team_of(a) for a in range(n)], dtype=np.int64)
    teammates = np.array([ts.teammates_of(a) for a in range(n)], dtype=np.int64)
    teammates = teammates.reshape(n, size - 1)
    outsiders = np.array([ts.outsiders_of(a) for a in range(n)], dtype=np.int64)
    psi = np.full(n, 0.2)
    phi = np.full(n, 0.3)
    omega = np.full(n, 0.5)
    return agent_team, teammates, outsiders, psi, phi, omega


def bench_ipd(backend, episodes, seed=5):
    args = _ipd_args()
    q = np.zeros((25, 5, 2))
    start = time.perf_counter()
    out = backend.run_ipd(q, *args, 5.0, 1.0, 0.2, episodes, 2000,
                          0.05, 1.0, 0.01, episodes // 5, seed)
    elapsed = time.perf_counter() - start
    return elapsed, (q.sum(), out["pair_in"])


def bench_mc(backend, samples, seed=5):
    start = time.perf_counter()
    est, stderr = backend.mc_incentive(0.2, 0.3, 0.5, 5.0, 1.0, 0.2, 0.4, 0.6,
                                       samples, seed)
    elapsed = time.perf_counter() - start
    return elapsed, est


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--episodes", type=int, default=20_000)
    parser.add_argument("--samples", type=int, default=2_000_000)
    args = parser.parse_args()

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("compiled", _kernels))

    print(f"{'kernel':<14} {'backend':<10} {'time':>10} {'speedup':>9}")
    for name, bench, work in (
        ("ipd episodes", bench_ipd, args.episodes),
        ("mc estimator", bench_mc, args.samples),
    ):
        times = {}
        checks = {}
        for bname, module in backends:
            elapsed, check = bench(module, work)
            times[bname] = elapsed
            checks[bname] = check
            base = times.get("compiled", elapsed)
            speedup = times["python"] / base if bname == "python" and "compiled" in times else 1.0
            print(f"{name:<14} {bname:<10} {elapsed:>9.3f}s {speedup:>8.1f}x")
        if len(checks) == 2:
            a, b = checks["compiled"], checks["python"]
            agree = np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                                rtol=1e-9, atol=1e-9)
            print(f"{'':<14} outputs agree: {agree}")


if __name__ == "__main__":
    main()
