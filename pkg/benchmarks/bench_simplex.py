#!/usr/bin/env python3
"""Benchmark the compiled network-simplex kernel against the pure-Python twin.

Usage: python benchmarks/bench_simplex.py [--sizes 50,100,200,400] [--seed 0]

Two instance families:
  random  -- dense uniform-random costs (forces heavy pivoting)
  mixture -- sorted 1D supports with squared-distance costs (Monge structure,
             the northwest-corner start is optimal; measures scan cost only)
"""

import argparse
import time

import numpy as np

from transportlab import _simplex_py

try:
    from transportlab import _simplex_core
except ImportError:
    _simplex_core = None


def _instance(kind, size, rng):
    if kind == "random":
        wmu = rng.random(size)
        wmu /= wmu.sum()
        wnu = rng.random(size)
        wnu /= wnu.sum()
        cost = rng.random(size * size)
        return wmu, wnu, cost
    grid = (2.0 * np.arange(1, size + 1) - 1.0) / (2.0 * size)
    sup = np.concatenate([grid, [2.0]])
    wmu = np.concatenate([np.full(size, 0.9 / size), [0.1]])
    wnu = np.full(size, 1.0 / size)
    cost = ((sup[:, None] - grid[None, :]) ** 2).ravel()
    return wmu, wnu, cost


def _run(kernel, args, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="50,100,200,400")
    parser.add_argument("--seed", type=int, default=0)
    opts = parser.parse_args()
    sizes = [int(s) for s in opts.sizes.split(",")]
    rng = np.random.default_rng(opts.seed)

    print(f"{'family':8s} {'size':>5s} {'pivots':>7s} {'pure (s)':>10s} "
          f"{'compiled (s)':>13s} {'speedup':>8s} {'identical':>9s}")
    for kind in ("random", "mixture"):
        for size in sizes:
            wmu, wnu, cost = _instance(kind, size, rng)
            v = wmu.size + wnu.size
            args = (wmu, wnu, cost, 1e-11, 100 * v + 1000, 2000 * v + 100_000)
            t_py, res_py = _run(_simplex_py.solve_dense, args)
            if _simplex_core is None:
                print(f"{kind:8s} {size:5d} {res_py[3]:7d} {t_py:10.4f} "
                      f"{'(not built)':>13s} {'-':>8s} {'-':>9s}")
                continue
            t_c, res_c = _run(_simplex_core.solve_dense, args)
            same = (np.array_equal(res_py[0], res_c[0])
                    and np.array_equal(res_py[1], res_c[1])
                    and np.array_equal(res_py[2], res_c[2])
                    and res_py[3] == res_c[3])
            print(f"{kind:8s} {size:5d} {res_c[3]:7d} {t_py:10.4f} "
                  f"{t_c:13.4f} {t_py / t_c:7.1f}x {str(same):>9s}")


if __name__ == "__main__":
    main()
