#!/usr/bin/env python3
"""Benchmark the compiled classification kernel against the pure-Python
fallback on the density-counting workload (exhaustive tuple enumeration
of the graded lattice of {sqrt2/8, sqrt3/4} against one interval).

Both backends classify every integer tuple with the same conservative
float filter and hand near-edge tuples back for exact resolution, so the
counts they produce are identical; only the speed differs.

Run:  python3 benchmarks/bench_kernel.py
"""

import time
from fractions import Fraction as F

from sweepout import kernel
from sweepout.exactreal import GeneratorBasis, IntervalSet
from sweepout.lattice import _filter_data, decompose


def workload(m):
    basis = GeneratorBasis.from_specs(["sqrt:2", "sqrt:3"])
    spec = decompose([basis.point(["0", "1/8", "0"]),
                      basis.point(["0", "0", "1/4"])])
    window = IntervalSet.single(basis, basis.rational(0), basis.rational(F(2, 5)))
    bounds = spec.bounds(m)
    y_hat, edges, guard, ok = _filter_data(spec, window, bounds)
    assert ok
    tuples = 1
    for b in bounds:
        tuples *= 2 * b + 1
    return y_hat, bounds, edges, guard, tuples


def main():
    backends = kernel.backends()
    print(f"active backend: {kernel.BACKEND}")
    if "compiled" not in backends:
        print("compiled extension not built; benchmarking the fallback only")
    header = f"{'m':>5} {'tuples':>12}"
    for name in backends:
        header += f" {name + ' (s)':>18}"
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    for m in (100, 200, 400, 800):
        y_hat, bounds, edges, guard, tuples = workload(m)
        row = f"{m:>5} {tuples:>12}"
        times = {}
        result = None
        for name, fn in backends.items():
            reps = 3 if tuples < 10**6 else 1
            best = float("inf")
            for _ in range(reps):
                t0 = time.perf_counter()
                out = fn(y_hat, bounds, edges, guard, False)
                best = min(best, time.perf_counter() - t0)
            times[name] = best
            if result is None:
                result = out
            else:
                assert out == result, "backends disagree"
            row += f" {best:>18.4f}"
        if len(times) == 2:
            row += f" {times['pure-python'] / times['compiled']:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
