#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy/Python fallback.

Runs representative workloads through both backends and prints a timing
table. Results are identical bit for bit (see tests/test_backends.py); only
speed differs.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from envyalloc import DistributionSpec, generate_instance
from envyalloc import _kernels_py as py_kernels
from envyalloc.rng import Stream, derive_key

try:
    from envyalloc import _kernels as cy_kernels
except ImportError:
    cy_kernels = None


def csr_from_mask(mask):
    indptr = np.zeros(mask.shape[0] + 1, dtype=np.int32)
    indptr[1:] = np.cumsum(mask.sum(axis=1))
    return indptr, np.nonzero(mask)[1].astype(np.int32)


def bench(label, workload, backends, repeats):
    results = {}
    for name, kernels in backends.items():
        best = min(workload(kernels) for _ in range(repeats))
        results[name] = best
    line = f"{label:<38}"
    for name in backends:
        line += f" {results[name] * 1e3:>10.1f} ms"
    if len(results) == 2:
        a, b = results.values()
        line += f"   x{b / a:5.1f}"
    print(line)


def matching_workload(n, r, p, seed, graphs):
    stream = Stream(seed)
    masks = [(lambda m: csr_from_mask(m))(
        (stream.uniform_block(k * n * r * n, n * r * n) < p).reshape(n, r * n))
        for k in range(graphs)]

    def run(kernels):
        t0 = time.perf_counter()
        for indptr, indices in masks:
            kernels.solve_r_matching(indptr, indices, n, r * n, r)
        return time.perf_counter() - t0

    return run


def removal_workload(n, r, tau, seed, instances):
    mats = [generate_instance(n, n * r, DistributionSpec.uniform(), derive_key(seed, k)).utilities
            for k in range(instances)]

    def run(kernels):
        t0 = time.perf_counter()
        for u in mats:
            kernels.removal_phase(u, r, tau)
        return time.perf_counter() - t0

    return run


def brute_workload(n, m, seed, instances):
    mats = [generate_instance(n, m, DistributionSpec.uniform(), derive_key(seed, k)).utilities
            for k in range(instances)]

    def run(kernels):
        t0 = time.perf_counter()
        for u in mats:
            kernels.brute_force_count(u)
        return time.perf_counter() - t0

    return run


def envy_workload(n, m, seed, instances):
    work = []
    for k in range(instances):
        u = generate_instance(n, m, DistributionSpec.uniform(), derive_key(seed, k)).utilities
        owner = np.argmax(u, axis=0).astype(np.int32)
        work.append((u, owner))

    def run(kernels):
        t0 = time.perf_counter()
        for u, owner in work:
            kernels.max_envy(u, owner)
        return time.perf_counter() - t0

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    backends = {}
    if cy_kernels is not None:
        backends["cython"] = cy_kernels
    backends["python"] = py_kernels

    scale = 0.2 if args.quick else 1.0
    repeats = 2 if args.quick else 3

    header = f"{'workload':<38}"
    for name in backends:
        header += f" {name:>13}"
    if len(backends) == 2:
        header += "   speedup"
    print(header)
    print("-" * len(header))

    g = max(1, int(400 * scale))
    bench(f"r-matching 100x200 p=0.1 ({g} graphs)",
          matching_workload(100, 2, 0.1, 1, g), backends, repeats)
    i = max(1, int(150 * scale))
    bench(f"removal pass n=60 r=3 tau=0.8 ({i} runs)",
          removal_workload(60, 3, 0.8, 2, i), backends, repeats)
    i = max(1, int(20 * scale))
    bench(f"brute force 3x7 = 2187 allocs ({i} runs)",
          brute_workload(3, 7, 3, i), backends, repeats)
    i = max(1, int(100 * scale))
    bench(f"envy audit n=50 m=500 ({i} runs)",
          envy_workload(50, 500, 4, i), backends, repeats)


if __name__ == "__main__":
    main()
