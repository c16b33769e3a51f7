import math

import pytest

import numpy as np
from hypothesis import given, settings, strategies as st

from dixtrace.rearrange import hlp_majorizes, integral_mu, lorentz_norm, mu_from_values
from dixtrace.traces import ScaleGrid, partial_sum_functional
from dixtrace.weight import WeightFunction, concavity_defect

GRID = ScaleGrid.exponent(2.0, 30.0, 24)

weights = st.one_of(
    st.builds(WeightFunction.iterlog, st.integers(1, 3), st.floats(0.25, 3.0)),
    st.builds(WeightFunction.exppow, st.integers(1, 2), st.floats(0.1, 0.9)),
)
magnitudes = st.lists(st.floats(0.0, 1e3, allow_nan=False), min_size=1, max_size=60)
scales = st.floats(1e-3, 1e3)


@settings(max_examples=40, deadline=None)
@given(weights)
def test_weight_concave_increasing(w):
    t = np.geomspace(1e-3, 1e12, 400)
    v = np.asarray(w.eval(t))
    assert np.all(np.diff(v) >= -1e-12 * v[1:])
    assert concavity_defect(w, t) < 1e-6
    assert np.all(np.asarray(w.deriv(t)) > 0)


@settings(max_examples=40, deadline=None)
@given(weights)
def test_elasticity_in_unit_interval(w):
    el = w.elasticity_exp(np.linspace(-5.0, 200.0, 300))
    assert np.all(el >= -1e-12) and np.all(el <= 1 + 1e-9)


@settings(max_examples=60, deadline=None)
@given(magnitudes)
def test_mu_sorted_and_galois(vals):
    p = mu_from_values(vals)
    s = np.linspace(0.0, len(vals) + 2.0, 97)
    m = np.asarray(p.mu(s))
    assert np.all(np.diff(m) <= 0)
    t = np.concatenate([np.asarray(vals, dtype=float), [0.5, 1e4]])
    n = np.asarray(p.distribution(t), dtype=float)
    for ti, ni in zip(t, n):
        assert np.all((ni <= s) == (m <= ti))


@settings(max_examples=60, deadline=None)
@given(magnitudes)
def test_permutation_invariance(vals):
    rng = np.random.default_rng(len(vals))
    a = np.asarray(vals, dtype=float)
    b = rng.permutation(a)
    pa, pb = mu_from_values(a), mu_from_values(b)
    s = np.linspace(0.0, a.size + 1.0, 50)
    np.testing.assert_array_equal(pa.mu(s), pb.mu(s))
    assert integral_mu(pa, a.size) == pytest.approx(math.fsum(a), rel=1e-14, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(magnitudes, scales, weights)
def test_lorentz_homogeneous(vals, c, w):
    p = mu_from_values(vals)
    a = lorentz_norm(p, w)
    assert lorentz_norm(p.scaled(c), w) == pytest.approx(c * a, rel=1e-10, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(magnitudes, magnitudes)
def test_sum_majorization(a, b):
    # mu(S+T) is majorized by mu(S) + mu(T) on matched supports
    n = min(len(a), len(b))
    x, y = np.asarray(a[:n]), np.asarray(b[:n])
    s = mu_from_values(x + y)
    bound = mu_from_values(np.sort(x)[::-1] + np.sort(y)[::-1])
    assert hlp_majorizes(s, bound)


@settings(max_examples=25, deadline=None)
@given(magnitudes, scales)
def test_partial_sum_homogeneous(vals, c):
    p = mu_from_values(vals)
    w = WeightFunction.iterlog(1, 1.0)
    a = partial_sum_functional(p, w, GRID).values
    b = partial_sum_functional(p.scaled(c), w, GRID).values
    np.testing.assert_allclose(b, c * a, rtol=1e-12, atol=1e-300)
