import os
import subprocess
import sys

import numpy as np
import pytest

from dixtrace import _kernels
from dixtrace._kernels import NUMBA_KERNELS, NUMPY_KERNELS

needs_numba = pytest.mark.skipif(NUMBA_KERNELS is None, reason="numba not importable")


def _data(n=3000, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0, 2, n)
    v[::7] = 0.0
    return v, rng.uniform(0.5, 1.5, n)


def test_numpy_power_sums_oracle():
    v, w = _data(50)
    q = np.array([1.1, 2.0, 3.5])
    expect = [np.sum(w * np.where(v > 0, v, 0) ** qq) for qq in q]
    np.testing.assert_allclose(NUMPY_KERNELS["power_sums"](v, w, q), expect, rtol=1e-13)


def test_numpy_heat_oracle():
    v, w = _data(50)
    lam = np.array([0.5, 10.0, 1e6])
    pos = v > 0
    expect = [np.sum(w[pos] * np.exp(-1 / (l * v[pos]))) for l in lam]
    np.testing.assert_allclose(NUMPY_KERNELS["heat_sums"](v, w, lam), expect, rtol=1e-13)
    closed = [np.sum(w[pos] * v[pos] * (np.exp(-1 / (l * v[pos])) - np.exp(-1 / v[pos]))) for l in lam]
    np.testing.assert_allclose(NUMPY_KERNELS["heat_closed"](v, w, lam), closed, rtol=1e-12)


@needs_numba
@pytest.mark.parametrize("name,xs", [("power_sums", np.linspace(1.01, 4, 17)),
                                     ("heat_sums", np.geomspace(1e-2, 1e12, 17)),
                                     ("heat_closed", np.geomspace(1e-2, 1e12, 17))])
def test_numba_matches_numpy(name, xs):
    v, w = _data()
    np.testing.assert_allclose(NUMBA_KERNELS[name](v, w, xs), NUMPY_KERNELS[name](v, w, xs), rtol=1e-12)


@needs_numba
def test_gather_matches():
    rng = np.random.default_rng(1)
    n = 24
    F = rng.standard_normal((2 * n - 1, 2 * n)) + 1j * rng.standard_normal((2 * n - 1, 2 * n))
    np.testing.assert_array_equal(NUMBA_KERNELS["weyl_gather"](F, n), NUMPY_KERNELS["weyl_gather"](F, n))
    A = NUMPY_KERNELS["weyl_gather"](F, n)
    assert A[3, 5] == F[8, (3 - 5) % (2 * n)]


def test_empty_inputs():
    for k in (NUMPY_KERNELS, NUMBA_KERNELS):
        if k is None:
            continue
        out = k["power_sums"](np.zeros(0), np.zeros(0), np.array([2.0]))
        assert out.shape == (1,) and out[0] == 0.0


def test_env_flag_selects_numpy():
    env = dict(os.environ, DIXTRACE_DISABLE_NUMBA="1")
    code = "import dixtrace._kernels as k; print(k.USING_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_thread_override(monkeypatch):
    monkeypatch.setenv("DIXTRACE_THREADS", "1")
    _kernels.set_threads_from_env()
    if _kernels.USING_NUMBA:
        import numba
        assert numba.get_num_threads() == 1
