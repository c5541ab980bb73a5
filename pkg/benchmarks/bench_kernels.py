"""Compare the numba and numpy versions of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both versions run on identical inputs and must agree before timing is reported.
"""
import argparse
import time

import numpy as np

from fuzzopt import _kernels


def _pivot_case(rng, m, n):
    # feasible tableau: rows A | I | b >= 0, objective row of random costs
    A = rng.uniform(-1.0, 1.0, (m, n))
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = rng.uniform(1.0, 2.0, m)
    T[m, :n] = rng.uniform(-1.0, 0.5, n)
    basis = np.arange(n, n + m, dtype=np.int64)
    return T, basis


def time_pivot(use_numba, cases, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for T, basis in cases:
            _kernels.pivot_loop(T.copy(), basis.copy(), T.shape[1] - 1, 1e-11, 5000, use_numba=use_numba)
        best = min(best, time.perf_counter() - t0)
    return best


def time_dot(use_numba, taus, lo, hi, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        _kernels.interval_dot_batch(taus, lo, hi, use_numba=use_numba)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
        return 0
    rng = np.random.default_rng(args.seed)

    cases = [_pivot_case(rng, 12, 20) for _ in range(200)]
    for T, basis in cases[:20]:
        a, b = T.copy(), T.copy()
        ra = _kernels.pivot_loop(a, basis.copy(), T.shape[1] - 1, 1e-11, 5000, use_numba=False)
        rb = _kernels.pivot_loop(b, basis.copy(), T.shape[1] - 1, 1e-11, 5000, use_numba=True)
        assert ra == rb and np.allclose(a, b), "pivot kernels disagree"
    time_pivot(True, cases[:1], 1)  # compile

    taus = rng.standard_normal((10_000, 4))
    lo = rng.uniform(-2.0, 0.0, (4, 21))
    hi = lo + rng.uniform(0.0, 2.0, (4, 21))
    pa = _kernels.interval_dot_batch(taus, lo, hi, use_numba=False)
    pb = _kernels.interval_dot_batch(taus, lo, hi, use_numba=True)
    assert all(np.allclose(x, y) for x, y in zip(pa, pb)), "interval dot kernels disagree"

    rows = [
        ("pivot_loop (200 LPs, 12x20)", time_pivot(False, cases, args.repeat), time_pivot(True, cases, args.repeat)),
        ("interval_dot_batch (1e4 x 4 x 21)", time_dot(False, taus, lo, hi, args.repeat),
         time_dot(True, taus, lo, hi, args.repeat)),
    ]
    print(f"{'kernel':36s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, tp, tn in rows:
        print(f"{name:36s} {1e3 * tp:11.3f} {1e3 * tn:11.3f} {tp / tn:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
