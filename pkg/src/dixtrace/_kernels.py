"""Hot loops, compiled with numba when available.

Set ``DIXTRACE_DISABLE_NUMBA=1`` to force the pure numpy versions.  Both
implementations are kept importable (``NUMPY_KERNELS`` / ``NUMBA_KERNELS``)
so the benchmark and the tests can compare them directly.
"""
import os

import numpy as np


def _power_sums_np(values, weights, exps):
    # sum_i w_i v_i^q for each q; zero values contribute nothing
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    q = np.asarray(exps, dtype=float)
    pos = v > 0
    lv = np.log(v[pos])
    return np.exp(np.outer(q, lv)) @ w[pos]


def _heat_sums_np(values, weights, lams):
    # sum_i w_i exp(-1/(lam v_i))
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    lam = np.asarray(lams, dtype=float)
    pos = v > 0
    inv = 1.0 / v[pos]
    return np.exp(-np.outer(1.0 / lam, inv)) @ w[pos]


def _heat_closed_np(values, weights, lams):
    # sum_i w_i v_i (exp(-1/(lam v_i)) - exp(-1/v_i))
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    lam = np.asarray(lams, dtype=float)
    pos = v > 0
    vv = v[pos]
    inv = 1.0 / vv
    e = np.exp(-np.outer(1.0 / lam, inv)) - np.exp(-inv)[None, :]
    return e @ (w[pos] * vv)


def _weyl_gather_np(F, n):
    # A[i, j] = F[i + j, (i - j) mod 2n]
    i = np.arange(n)
    s = i[:, None] + i[None, :]
    d = (i[:, None] - i[None, :]) % (2 * n)
    return F[s, d]


NUMPY_KERNELS = {
    "power_sums": _power_sums_np,
    "heat_sums": _heat_sums_np,
    "heat_closed": _heat_closed_np,
    "weyl_gather": _weyl_gather_np,
}


def _build_numba():
    import numba
    from numba import prange

    if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ and "NUMBA_THREADING_LAYER" not in os.environ:
        # the system TBB is often too old for numba and only produces a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    # values are split into chunks (prange); each chunk keeps its own row of
    # partial sums, so there is no shared accumulator
    @numba.njit(parallel=True, cache=True, fastmath=True)
    def _chunked(values, weights, xs, mode):
        n = values.shape[0]
        m = xs.shape[0]
        nchunk = min(n, 64) if n > 0 else 1
        part = np.zeros((nchunk, m))
        for c in prange(nchunk):
            lo = c * n // nchunk
            hi = (c + 1) * n // nchunk
            row = part[c]
            for i in range(lo, hi):
                v = values[i]
                if v <= 0.0:
                    continue
                wi = weights[i]
                if mode == 0:
                    lv = np.log(v)
                    for j in range(m):
                        row[j] += wi * np.exp(xs[j] * lv)
                elif mode == 1:
                    iv = 1.0 / v
                    for j in range(m):
                        row[j] += wi * np.exp(-iv * xs[j])
                else:
                    iv = 1.0 / v
                    base = np.exp(-iv)
                    for j in range(m):
                        row[j] += wi * v * (np.exp(-iv * xs[j]) - base)
        return part.sum(axis=0)

    def power_sums(values, weights, exps):
        return _chunked(values, weights, exps, 0)

    def heat_sums(values, weights, lams):
        return _chunked(values, weights, 1.0 / lams, 1)

    def heat_closed(values, weights, lams):
        return _chunked(values, weights, 1.0 / lams, 2)

    @numba.njit(parallel=True, cache=True)
    def weyl_gather(F, n):
        A = np.empty((n, n), dtype=F.dtype)
        for i in prange(n):
            for j in range(n):
                d = i - j
                if d < 0:
                    d += 2 * n
                A[i, j] = F[i + j, d]
        return A

    def _arr(f):
        def call(values, weights, xs):
            return f(np.ascontiguousarray(values, dtype=np.float64),
                     np.ascontiguousarray(weights, dtype=np.float64),
                     np.ascontiguousarray(np.atleast_1d(xs), dtype=np.float64))
        return call

    return {
        "power_sums": _arr(power_sums),
        "heat_sums": _arr(heat_sums),
        "heat_closed": _arr(heat_closed),
        "weyl_gather": lambda F, n: weyl_gather(np.ascontiguousarray(F), int(n)),
    }


def _numba_wanted():
    flag = os.environ.get("DIXTRACE_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    NUMBA_KERNELS = _build_numba()
except ImportError:
    NUMBA_KERNELS = None

USING_NUMBA = NUMBA_KERNELS is not None and _numba_wanted()
_ACTIVE = NUMBA_KERNELS if USING_NUMBA else NUMPY_KERNELS


def set_threads_from_env():
    n = os.environ.get("DIXTRACE_THREADS")
    if not n or not USING_NUMBA:
        return
    import numba
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def power_sums(values, weights, exps):
    return _ACTIVE["power_sums"](values, weights, np.atleast_1d(exps))


def heat_sums(values, weights, lams):
    return _ACTIVE["heat_sums"](values, weights, np.atleast_1d(lams))


def heat_closed(values, weights, lams):
    return _ACTIVE["heat_closed"](values, weights, np.atleast_1d(lams))


def weyl_gather(F, n):
    return _ACTIVE["weyl_gather"](F, n)
