#!/usr/bin/env python3
"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per workload with the best time for each backend and
the speedup.  Workloads mirror the hot loops of the estimators.
"""
import argparse
import timeit

import numpy as np

from zplab import kernels


def workloads(k, rng):
    A, X = rng.standard_normal((2000, 16)), rng.standard_normal((2000, 16))
    Z = rng.standard_normal((4, 2000, 16))
    small = [rng.standard_normal(8) for _ in range(2000)]
    B, Am = rng.standard_normal((3, 24)), rng.standard_normal((4, 24))
    C = rng.standard_normal((2000, 3))
    vals = rng.standard_normal(64 * 4)
    off = np.arange(0, 64 * 4 + 1, 4)
    return {
        "defect_ratios 2000x16": lambda: k.defect_ratios(A, X, 1.5),
        "triangle_ratios 2000x16": lambda: k.triangle_ratios(*Z, 1.5),
        "omega 2000 x dim 8": lambda: [k.omega(v, 2.0) for v in small],
        "sphere_objective 2000 evals": lambda: [k.sphere_objective(c, B, Am, 3.0) for c in C],
        "lift_disjoint 64 blocks x200": lambda: [k.lift_disjoint(vals, off, 2.0) for _ in range(200)],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = kernels.available_backends()
    if "cython" not in names:
        print("compiled kernels not built; only the numpy fallback is available")
    timings = {}
    for name in names:
        wl = workloads(kernels.get_backend(name), np.random.default_rng(0))
        timings[name] = {w: min(timeit.repeat(f, number=1, repeat=args.repeat)) for w, f in wl.items()}
    print(f"{'workload':32s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for w in timings["python"]:
        row = f"{w:32s}" + "".join(f"{timings[n][w] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{timings['python'][w] / timings['cython'][w]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
