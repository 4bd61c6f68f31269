#!/usr/bin/env python3
"""Time the per-draw kernels under the numpy and Cython backends.

usage: python benchmarks/bench_kernels.py [--n 1000000] [--repeat 7]
"""

import argparse
import statistics
import time

import numpy as np

from unitri import kernels
from unitri.rng import Stream


def cases(n):
    s = Stream(2718)
    u = s.uniforms(n)
    uvw = s.uniforms(3 * n).reshape(n, 3)
    uv = s.uniforms(2 * n).reshape(n, 2)
    a = 1.0 + uv[:, 0]
    b = 1.0 + uv[:, 1]
    c = 0.5 * (a + b)
    plus = uvw[:, 2] >= 0.5
    a2 = np.sqrt(2.0) * np.exp(uv[:, 0])
    b2 = np.sqrt(2.0) * np.exp(uv[:, 1])
    return {
        "heron": lambda m: m.heron(a, b, c),
        "c_from_ab": lambda m: m.c_from_ab(a2, b2, plus),
        "right": lambda m: m.right(u, 0.5 * np.log(2.0), 1.0),
        "isosceles": lambda m: m.isosceles(u, -0.5, 1.0),
        "arbitrary": lambda m: m.arbitrary(uvw, 1.0),
        "stick_twice": lambda m: m.stick_twice(uv),
        "stick_once": lambda m: m.stick_once(uv),
    }


def bench(fn, impl, repeat):
    fn(impl)  # warm-up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(impl)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()

    backends = kernels.available_backends()
    names = sorted(backends)
    print(f"n={args.n} repeat={args.repeat} (median seconds)")
    print(f"{'kernel':<12}" + "".join(f"{b:>12}" for b in names)
          + ("     speedup" if len(names) > 1 else "") + "    selected")
    for kname, fn in cases(args.n).items():
        t = {b: bench(fn, backends[b], args.repeat) for b in names}
        row = f"{kname:<12}" + "".join(f"{t[b]:>12.4f}" for b in names)
        if "cython" in t:
            row += f"{t['python'] / t['cython']:>11.2f}x"
        print(row + f"    {kernels.SELECTED[kname]}")


if __name__ == "__main__":
    main()
