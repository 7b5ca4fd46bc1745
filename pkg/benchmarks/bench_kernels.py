"""Time each hot kernel in its numba and numpy flavour on the same inputs.

    python3 benchmarks/bench_kernels.py --size 200000 --repeat 5
"""
import argparse
import math
import time

import numpy as np

from goldbach_ap import kernels
from goldbach_ap.arith import build_lambda_table, small_primes
from goldbach_ap.lfunctions import _dd_log_table, _table_length


def best_of(fn, repeat):
    fn()  # warm-up (numba compile, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size):
    base = small_primes(math.isqrt(2 * size))
    yield "prime_mask_segment", (size, 2 * size, base)

    tab = build_lambda_table(size)
    idx, w = tab.progression_support(3, 1, size)
    idx2, w2 = tab.progression_support(4, 3, size)
    n = min(size, 20_000)
    yield "pair_convolution", (idx[idx <= n], w[idx <= n], idx2[idx2 <= n], w2[idx2 <= n], n)
    yield "pair_sum", (idx[idx <= n], w[idx <= n], idx2[idx2 <= n], w2[idx2 <= n], n)
    yield "compensated_cumsum", (tab.values,)

    s = 0.5 + 1j * np.linspace(10, 1000, 256)
    residues, q = [1, 2, 3, 4], 5
    alphas = np.array([r / q for r in residues])
    coeffs = np.array([1, 1j, -1j, -1], dtype=complex)
    shifts, _ = kernels.em_shifts(s, alphas.min(), np.abs(coeffs).sum(), 1e-13)
    length = _table_length(int(shifts.max()) + 1)
    tabs = [_dd_log_table(r, q, length) for r in residues]
    loghi = np.stack([t[0] for t in tabs])
    loglo = np.stack([t[1] for t in tabs])
    yield "em_series", (s, shifts, alphas, coeffs, loghi, loglo)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':22s} {'numba [s]':>12s} {'numpy [s]':>12s} {'speed-up':>9s}  max|diff|")
    for name, inputs in cases(args.size):
        impl = kernels.IMPLEMENTATIONS[name]
        out_nb = impl["numba"](*inputs)
        out_np = impl["numpy"](*inputs)
        diff = float(np.max(np.abs(np.asarray(out_nb, dtype=complex) - np.asarray(out_np, dtype=complex))))
        t_nb = best_of(lambda: impl["numba"](*inputs), args.repeat)
        t_np = best_of(lambda: impl["numpy"](*inputs), args.repeat)
        print(f"{name:22s} {t_nb:12.5f} {t_np:12.5f} {t_np / t_nb:9.2f}  {diff:.2e}")


if __name__ == "__main__":
    main()
