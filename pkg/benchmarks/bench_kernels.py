#!/usr/bin/env python3
"""Benchmark the current-flow accumulation kernel: compiled vs numpy fallback.

The accumulation is the hot inner loop of the betweenness computation,
O(edges x pairs); everything else in the pipeline is BLAS-bound already.

    python benchmarks/bench_kernels.py [--sizes 100 159 250] [--repeats 3]
"""

import argparse
import time

import numpy as np

from tradenet import _kernels
from tradenet._kernels import accumulate_current_flow_pure


def setup(n, density=0.6, seed=0):
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) * (rng.random((n, n)) < density), 1)
    w = upper + upper.T
    w /= w.max()
    lap = np.diag(w.sum(axis=1)) - w
    T = np.zeros((n, n))
    T[1:, 1:] = np.linalg.inv(lap[1:, 1:])
    ei, ej = np.nonzero(np.triu(w, 1))
    return (
        np.ascontiguousarray(T),
        ei.astype(np.intp),
        ej.astype(np.intp),
        np.ascontiguousarray(w[ei, ej]),
    )


def timeit(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 159, 250])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    compiled = None
    if _kernels.BACKEND == "compiled":
        compiled = _kernels.accumulate_current_flow
    print(f"active backend: {_kernels.BACKEND}")
    header = f"{'n':>5} {'edges':>7} {'pure (s)':>10}"
    if compiled is not None:
        header += f" {'compiled (s)':>13} {'speedup':>8} {'max|diff|':>10}"
    print(header)

    for n in args.sizes:
        case = setup(n)
        t_pure, out_pure = timeit(accumulate_current_flow_pure, case, args.repeats)
        line = f"{n:>5} {case[1].size:>7} {t_pure:>10.3f}"
        if compiled is not None:
            t_c, out_c = timeit(compiled, case, args.repeats)
            diff = float(np.abs(out_c - out_pure).max())
            line += f" {t_c:>13.3f} {t_pure / t_c:>8.1f} {diff:>10.2e}"
        print(line)


if __name__ == "__main__":
    main()
