#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure support-scan kernels.

Builds one Gram matrix and a batch of random supports, then times
least_squares_scan and gram_extremes_scan on both backends.  The compiled
core is the default at import time; this script calls both directly so the
numbers come from the same process and inputs.

    python3 benchmarks/bench_scan.py --count 96 --size 4 --supports 200000
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lpgreedy.kernels import _pure

try:
    from lpgreedy import _scan as _compiled
except ImportError:
    _compiled = None


def build_problem(n, count, size, n_supports, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, count))
    B /= np.linalg.norm(B, axis=0)
    y = rng.standard_normal(n)
    supports = np.sort(
        np.array([rng.choice(count, size=size, replace=False) for _ in range(n_supports)]),
        axis=1,
    ).astype(np.int64)
    return B.T @ B, B.T @ y, float(y @ y), supports


def timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=64, help="ambient dimension")
    parser.add_argument("--count", type=int, default=96, help="dictionary size")
    parser.add_argument("--size", type=int, default=4, help="support size")
    parser.add_argument("--supports", type=int, default=100_000, help="batch size")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best-of")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    G, b, f2, supports = build_problem(args.dim, args.count, args.size, args.supports, args.seed)
    print(
        f"count={args.count} size={args.size} supports={args.supports} "
        f"repeats={args.repeats} (best-of)"
    )

    rows = []
    t_pure, ref = timed(lambda: _pure.least_squares_scan(G, b, f2, supports), args.repeats)
    rows.append(("least_squares_scan", "pure", t_pure, args.supports / t_pure))
    if _compiled is not None:
        t_fast, out = timed(lambda: _compiled.least_squares_scan(G, b, f2, supports), args.repeats)
        mask = ~np.isnan(ref)
        worst = float(np.max(np.abs(out[mask] - ref[mask]))) if mask.any() else 0.0
        rows.append(("least_squares_scan", "compiled", t_fast, args.supports / t_fast))
        print(f"  backend agreement (max abs diff): {worst:.3e}")

    t_pure_e, ref_e = timed(lambda: _pure.gram_extremes_scan(G, supports), args.repeats)
    rows.append(("gram_extremes_scan", "pure", t_pure_e, args.supports / t_pure_e))
    if _compiled is not None:
        t_fast_e, out_e = timed(lambda: _compiled.gram_extremes_scan(G, supports), args.repeats)
        worst_e = max(
            float(np.max(np.abs(out_e[0] - ref_e[0]))),
            float(np.max(np.abs(out_e[1] - ref_e[1]))),
        )
        rows.append(("gram_extremes_scan", "compiled", t_fast_e, args.supports / t_fast_e))
        print(f"  extremes agreement (max abs diff): {worst_e:.3e}")

    print(f"\n{'kernel':<22} {'backend':<10} {'seconds':>10} {'supports/s':>14}")
    for kernel, backend, secs, rate in rows:
        print(f"{kernel:<22} {backend:<10} {secs:>10.4f} {rate:>14,.0f}")

    if _compiled is None:
        print("\ncompiled core not built; only the pure backend was timed")
    else:
        ls = [r for r in rows if r[0] == "least_squares_scan"]
        ge = [r for r in rows if r[0] == "gram_extremes_scan"]
        print(
            f"\nspeedup: least_squares_scan x{ls[0][2] / ls[1][2]:.1f}, "
            f"gram_extremes_scan x{ge[0][2] / ge[1][2]:.1f}"
        )


if __name__ == "__main__":
    main()
