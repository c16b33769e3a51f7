"""Time the numpy and numba versions of the hot kernels side by side.

    python3 benchmarks/bench_kernels.py --size 200000 --repeat 5
"""
import argparse
import time

import numpy as np

from dixtrace._kernels import NUMBA_KERNELS, NUMPY_KERNELS


def _best(fn, repeat):
    fn()                          # warm-up, includes JIT compilation
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(size, n_weyl, seed):
    rng = np.random.default_rng(seed)
    v = np.sort(rng.uniform(0.5, 1.5, size) / np.arange(1, size + 1))[::-1].copy()
    w = np.ones(size)
    q = 1.0 + 1.0 / np.linspace(2.0, 30.0, 32)
    lam = np.geomspace(1e2, 1e12, 32)
    F = rng.standard_normal((2 * n_weyl - 1, 2 * n_weyl)) + 1j * rng.standard_normal((2 * n_weyl - 1, 2 * n_weyl))
    return {
        "power_sums": lambda k: k["power_sums"](v, w, q),
        "heat_sums": lambda k: k["heat_sums"](v, w, lam),
        "heat_closed": lambda k: k["heat_closed"](v, w, lam),
        "weyl_gather": lambda k: k["weyl_gather"](F, n_weyl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--weyl-n", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if NUMBA_KERNELS is None:
        print("numba is not importable; only the numpy timings are shown")
    print(f"{'kernel':<12} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max rel diff':>13}")
    for name, call in cases(args.size, args.weyl_n, args.seed).items():
        t_np = _best(lambda: call(NUMPY_KERNELS), args.repeat)
        if NUMBA_KERNELS is None:
            print(f"{name:<12} {t_np:10.4f}")
            continue
        t_nb = _best(lambda: call(NUMBA_KERNELS), args.repeat)
        a, b = call(NUMPY_KERNELS), call(NUMBA_KERNELS)
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
        print(f"{name:<12} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
