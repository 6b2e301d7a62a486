"""Time the numba kernels against their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--dim 4] [--degree 8]

Reports the best wall time of each path and checks that they agree.
The first numba call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from ncpot import kernels
from ncpot.generators import random_symbol
from ncpot.poly import unit_circle


def best_of(func, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = func()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_cholesky(coeffs, blocks, repeat):
    def run(use_jit):
        def go():
            bc = kernels.BandCholesky(coeffs, use_jit=use_jit)
            assert bc.advance(blocks) < 0
            return bc.last_block_row()

        return go

    run(True)()  # warm up
    t_jit, a = best_of(run(True), repeat)
    t_np, b = best_of(run(False), repeat)
    return t_jit, t_np, float(np.abs(a - b).max())


def bench_polyval(coeffs, z, repeat):
    kernels.polyval_matrix_numba(coeffs, z[:2], derivative=True)
    t_jit, a = best_of(lambda: kernels.polyval_matrix_numba(coeffs, z, True), repeat)
    t_np, b = best_of(lambda: kernels.polyval_matrix_numpy(coeffs, z, True), repeat)
    err = max(float(np.abs(a[0] - b[0]).max()), float(np.abs(a[1] - b[1]).max()))
    return t_jit, t_np, err


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--blocks", type=int, default=512)
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if kernels.numba is None:
        print("numba not installed; both columns time the same numpy code")
    rng = np.random.default_rng(args.seed)
    f = random_symbol(rng, args.dim, args.degree)
    coeffs = f.coeffs[f.degree :]
    z = 0.9 * unit_circle(args.points)

    print(f"{'kernel':<28}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max diff':>12}")
    rows = [
        (f"band cholesky m={args.blocks}", *bench_cholesky(coeffs, args.blocks, args.repeat)),
        (f"polyval M={args.points}", *bench_polyval(f.coeffs, z, args.repeat)),
    ]
    for name, tj, tn, err in rows:
        print(f"{name:<28}{tj:>12.4g}{tn:>12.4g}{tn / tj:>10.1f}{err:>12.2e}")


if __name__ == "__main__":
    main()
