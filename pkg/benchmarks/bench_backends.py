#!/usr/bin/env python3
"""Timing harness for the two hot kernels, numpy versus numba flavours.

Runs the sup-min composition kernel over a sweep of output bin counts
and the four-product jet kernel over a sweep of level counts, reporting
the best-of-N wall time for each flavour and the resulting speedup.
The numba flavour is compiled once before timing so JIT cost never
pollutes the numbers.

Usage:
    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --sizes 101 1001 --repeats 9
"""

import argparse
import sys
import time

import numpy as np

from fuzzcalc import _kernels
from fuzzcalc.oracle import OP_ADD, OP_MUL, sample_triangular


def best_of(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _fmt(seconds: float) -> str:
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.3f} s "


def _report(label: str, t_numpy: float, t_numba: float | None) -> None:
    if t_numba is None:
        print(f"{label:<34} numpy {_fmt(t_numpy)}   numba      n/a")
    else:
        print(f"{label:<34} numpy {_fmt(t_numpy)}   numba {_fmt(t_numba)}"
              f"   speedup {t_numpy / t_numba:6.2f}x")


def bench_supmin(nbins_list, repeats: int, rng) -> None:
    print("sup-min composition (operand samples = output bins):")
    for nbins in nbins_list:
        pa = np.sort(rng.uniform(-5.0, 5.0, 3))
        pb = np.sort(rng.uniform(-5.0, 5.0, 3))
        a = sample_triangular(*pa, n=nbins)
        b = sample_triangular(*pb, n=nbins)
        for op, name in ((OP_ADD, "add"), (OP_MUL, "mul")):
            if op == OP_ADD:
                zmin = a.support[0] + b.support[0]
                zmax = a.support[1] + b.support[1]
            else:
                prods = np.multiply.outer(np.array(a.support),
                                          np.array(b.support))
                zmin, zmax = float(prods.min()), float(prods.max())
            args = (a.points, a.membership, b.points, b.membership,
                    op, zmin, zmax, nbins)
            t_np = best_of(_kernels.supmin_compose_numpy, args, repeats)
            t_nb = (best_of(_kernels.supmin_compose_numba, args, repeats)
                    if _kernels.supmin_compose_numba is not None else None)
            _report(f"  {name}, nbins={nbins}", t_np, t_nb)


def bench_jets(level_counts, repeats: int, rng) -> None:
    print("four-product jet propagation:")
    for n in level_counts:
        streams = tuple(rng.standard_normal(n) for _ in range(12))
        t_np = best_of(_kernels.four_product_jets_numpy, streams, repeats)
        t_nb = (best_of(_kernels.four_product_jets_numba, streams, repeats)
                if _kernels.four_product_jets_numba is not None else None)
        _report(f"  levels={n}", t_np, t_nb)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Time the numpy and numba kernel flavours side by side."
    )
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[101, 1001, 2001, 4001],
                        help="sup-min sample/bin counts to sweep")
    parser.add_argument("--levels", type=int, nargs="+",
                        default=[11, 101, 1001, 100001],
                        help="jet-kernel level counts to sweep")
    parser.add_argument("--repeats", type=int, default=5,
                        help="repetitions per measurement (best is kept)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if args.repeats < 1:
        parser.error("--repeats must be at least 1")

    print(f"active backend: {_kernels.BACKEND}")
    if _kernels.four_product_jets_numba is None:
        print("numba unavailable: timing the numpy flavour only",
              file=sys.stderr)
    else:
        t0 = time.perf_counter()
        _kernels.warmup()
        print(f"numba warmup: {time.perf_counter() - t0:.2f} s")

    rng = np.random.default_rng(args.seed)
    bench_supmin(args.sizes, args.repeats, rng)
    bench_jets(args.levels, args.repeats, rng)
    return 0


if __name__ == "__main__":
    sys.exit(main())
