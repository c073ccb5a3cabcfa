"""Compare the compiled monomial-table kernel against the numpy fallback.

Run: python3 benchmarks/bench_kernels.py [--degree D] [--points N]
"""

import argparse
import time

import numpy as np

from sfwg import _mono_py
from sfwg import backend


def bench(fn, args, repeat=7, warmup=2):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", default="2,4,6,8",
                    help="comma-separated polynomial degrees")
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    pts = np.ascontiguousarray(rng.random((args.points, 2)))

    if backend.HAVE_COMPILED:
        from sfwg import _mono
        kernels = [("compiled", _mono.monomial_table),
                   ("python", _mono_py.monomial_table)]
    else:
        print("compiled extension not available; timing the fallback only")
        kernels = [("python", _mono_py.monomial_table)]

    print(f"monomial tables at {args.points} points "
          f"(values, gradients, Laplacians)")
    print(f"{'degree':>7} " + "".join(f"{name:>12}" for name, _ in kernels)
          + ("   speedup" if len(kernels) == 2 else ""))
    for d in (int(t) for t in args.degrees.split(",")):
        call = (pts, 0.5, 0.5, 0.7, d)
        times = [bench(fn, call) for _, fn in kernels]
        line = f"{d:>7} " + "".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if len(times) == 2:
            line += f"   {times[1] / times[0]:>6.2f}x"
        print(line)


if __name__ == "__main__":
    main()
