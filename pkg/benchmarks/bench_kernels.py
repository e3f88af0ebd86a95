"""Compare the compiled and NumPy grid kernels on an oracle-sized workload.

    python3 benchmarks/bench_kernels.py [--nodes 1000000] [--points 400] [--repeat 5]
"""
import argparse
import time

import numpy as np

from acif import kernels


def workload(nodes, points, intervals, seed=0):
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 4.0, nodes)
    pts = np.sort(rng.uniform(0.0, 4.0, points))
    vals = rng.normal(size=points)
    classes = rng.integers(0, 4, points)
    tables = kernels.cone_tables(pts, vals, classes, [18.0, 6.6, 1.2, 4.4])
    j_grid = rng.normal(size=nodes)
    nu_grid = rng.integers(1, 5, nodes).astype(np.int64)
    cuts = np.linspace(0, nodes - 1, intervals + 1).astype(np.int64)
    lo, hi = cuts[:-1], cuts[1:] - 1
    nubar = rng.integers(1, 5, intervals).astype(np.int64)
    return grid, tables, (grid, j_grid, nu_grid, lo, hi, nubar)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=10**6)
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--intervals", type=int, default=150)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    grid, tables, minima_args = workload(args.nodes, args.points, args.intervals)
    impls = kernels.backends()
    print(f"nodes={args.nodes} points={args.points} intervals={args.intervals} "
          f"backends={', '.join(impls)} (default: {kernels.BACKEND})")
    results = {}
    for name, impl in impls.items():
        env = best_of(lambda: kernels.cone_envelope(grid, *tables, impl=impl), args.repeat)
        mins = best_of(lambda: kernels.envelope_interval_minima(*minima_args, *tables, impl=impl),
                       args.repeat)
        results[name] = (env, mins)
        print(f"{name:>8}: cone_envelope {env * 1e3:8.2f} ms   "
              f"envelope_interval_minima {mins * 1e3:8.2f} ms")
    if "cython" in results:
        (pe, pm), (ce, cm) = results["python"], results["cython"]
        print(f" speedup: cone_envelope x{pe / ce:.1f}   envelope_interval_minima x{pm / cm:.1f}")
        a = kernels.envelope_interval_minima(*minima_args, *tables, impl=impls["python"])
        b = kernels.envelope_interval_minima(*minima_args, *tables, impl=impls["cython"])
        print(f" max |difference| = {np.max(np.abs(a - b)):.3g}")


if __name__ == "__main__":
    main()
