#!/usr/bin/env python3
"""Benchmark the hot kernels: compiled extension vs pure-Python fallback.

The two loops that dominate desk-scale runs are the rank-two pair audit of
the refutation sweep and the grid scan of the brute-force hom reference.
Run:

    python benchmarks/bench_kernels.py [--pairs N] [--grid-bound B]
"""

import argparse
import random
import time

from cellcover import _accel, _kernels

try:
    from cellcover import _kernels_c
except ImportError:
    _kernels_c = None


def time_call(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_pair_audit(n_codes):
    rng = random.Random(0)
    codes = [0 if rng.random() < 0.005 else 1 for _ in range(n_codes)]
    rows = []
    t_pure, r_pure = time_call(_kernels.pair_audit, codes)
    rows.append(("pure", t_pure, r_pure))
    if _kernels_c is not None:
        t_c, r_c = time_call(_kernels_c.pair_audit, codes)
        assert r_c == r_pure
        rows.append(("cython", t_c, r_c))
    return rows


def bench_grid_scan(bound):
    rng = random.Random(1)
    d = 4
    bounds = [bound] * d
    checks = [[rng.randint(-9, 9) for _ in range(d)] for _ in range(8)]
    moduli = [rng.choice([3, 5, 7, 11]) for _ in range(8)]
    rows = []
    t_pure, r_pure = time_call(_kernels.grid_scan, bounds, checks, moduli, repeat=1)
    rows.append(("pure", t_pure, len(r_pure)))
    if _kernels_c is not None:
        t_c, r_c = time_call(_kernels_c.grid_scan, bounds, checks, moduli, repeat=1)
        assert list(r_c) == r_pure
        rows.append(("cython", t_c, len(r_c)))
    return rows


def show(title, rows, unit):
    print(f"\n{title}")
    base = rows[0][1]
    for name, t, extra in rows:
        speedup = base / t if t else float("inf")
        print(f"  {name:<8} {t * 1000:10.1f} ms   x{speedup:5.1f}   ({unit}: {extra})")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--pairs", type=int, default=4221)
    parser.add_argument("--grid-bound", type=int, default=8)
    args = parser.parse_args()

    print(f"active kernel implementation: {_accel.IMPL}")
    if _kernels_c is None:
        print("compiled extension not built; showing pure numbers only")

    show(
        f"pair audit over {args.pairs}^2 = {args.pairs**2} rank-two candidates",
        bench_pair_audit(args.pairs),
        "pairs/splits/contradictions",
    )
    show(
        f"grid scan over {(2 * args.grid_bound + 1) ** 4} matrices, 8 checks",
        bench_grid_scan(args.grid_bound),
        "accepted",
    )


if __name__ == "__main__":
    main()
