"""Compiled vs pure-Python lattice-sum kernel.

    python3 benchmarks/bench_kernel.py [--repeat 5] [--points 200]

Times both backends on the same points (from the table region, L_rho and the
arc, for k = 1200, m = 90), and checks that they return identical tuples.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
import timeit

from poincare_zeros import kernel

K, M = 1200, 90
LOG_TOL = math.log(1e-20)


def sample_points(n: int, seed: int = 0) -> list[tuple[float, float, int]]:
    rng = random.Random(seed)
    pts = []
    for i in range(n):
        kind = i % 3
        if kind == 0:
            pts.append((rng.uniform(-0.5, 0.5), rng.uniform(1.7, 2.1), kernel.MODE_FULL))
        elif kind == 1:
            pts.append((0.5, rng.uniform(0.87, 20.0), kernel.MODE_LRHO))
        else:
            th = rng.uniform(math.pi / 3, math.pi / 2)
            pts.append((math.cos(th), math.sin(th), kernel.MODE_FULL))
    return pts


def run(fn, pts) -> list[tuple]:
    return [fn(x, y, K, M, mode, LOG_TOL) for x, y, mode in pts]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args(argv)
    pts = sample_points(args.points)
    backends = [("python", kernel.python_evaluate)]
    if kernel.compiled_evaluate is None:
        print("compiled kernel not built; timing the Python fallback only")
    else:
        backends.append(("compiled", kernel.compiled_evaluate))
    timings = {}
    for name, fn in backends:
        best = min(timeit.repeat(lambda: run(fn, pts), number=1, repeat=args.repeat))
        timings[name] = best / len(pts)
        print(f"{name:>9}: {timings[name] * 1e6:9.2f} us per evaluation")
    if len(backends) == 2:
        same = run(kernel.python_evaluate, pts) == run(kernel.compiled_evaluate, pts)
        print(f"  speedup: {timings['python'] / timings['compiled']:9.1f}x")
        print(f"identical: {same}")
        if not same:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
