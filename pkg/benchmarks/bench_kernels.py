"""Time the compiled kernels against the numpy reference kernels.

    python3 benchmarks/bench_kernels.py [--N 65536] [--repeat 5]

Each kernel runs once untimed (compilation, caches) and then ``repeat``
times; the best time is reported together with the speedup.
"""
import argparse
import time

import numpy as np

from smilansky._kernels import _numba, _numpy
from smilansky.special import d_entry, y_entry


def _best(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(N):
    n = np.arange(N)
    diag = 2.0 * 1.2 * (n + 0.5)
    off2 = d_entry(np.arange(1, N)) ** 2
    pivmin = np.finfo(float).tiny * off2.max()
    d = np.asarray(d_entry(np.arange(N + 2)), dtype=float)
    p = 2.0 * 0.7 * y_entry(np.arange(N + 1), 0.3 + 0.2j)
    dl = d_entry(np.arange(1, N)).astype(complex)
    dd = (2.0 * 0.7 * y_entry(n, 1j)).astype(complex)
    rhs = np.zeros(N, dtype=complex)
    rhs[0] = 1.0
    inc = np.exp(-np.linspace(0, 20, N)).astype(complex)
    cuts = np.unique(np.geomspace(10, N - 1, 40).astype(np.int64))
    idx = np.arange(20, dtype=np.int64)
    return {
        "sturm_count": lambda k: k.sturm_count(diag, off2, 50.0, pivmin),
        "bisect_eigenvalues(20)": lambda k: k.bisect_eigenvalues(
            diag, off2, idx, 0.0, 200.0, 1e-10, pivmin),
        "gt_factor+gt_solve": lambda k: k.gt_solve(*k.gt_factor(dl, dd, dl.copy())[:5], rhs),
        "forward_scaled": lambda k: k.forward_scaled(d, p, 1.0 + 0j, 0.5 + 0j, N),
        "backward_ratios": lambda k: k.backward_ratios(d, p, 0j),
        "exp_sweep": lambda k: k.exp_sweep(np.exp(-0.01 + 0j), inc),
        "pair_gram": lambda k: k.pair_gram(d, p, 1 + 0j, 0j, 0j, 1 + 0j, N - 1, cuts),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=65536)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':26s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}")
    for name, fn in cases(args.N).items():
        tn = _best(lambda: fn(_numpy), args.repeat)
        tc = _best(lambda: fn(_numba), args.repeat)
        print(f"{name:26s} {1e3 * tn:12.3f} {1e3 * tc:12.3f} {tn / tc:9.1f}")


if __name__ == "__main__":
    main()
