import math
import warnings

import numpy as np
import pytest

from dixtrace.errors import DomainError, NumericError
from dixtrace.traces import ScaleGrid
from dixtrace.weight import WeightFunction
from dixtrace.weyl import (SYMBOLS, SymbolDescriptor, SymbolGrid, WeylOperator, ascending, box_integral,
                           dixmier_compare, eigenvalues, laguerre_spectrum, quantize, symbol_zeta,
                           trace_identity_check)

LOG = WeightFunction.iterlog(1, 1.0)
EXP = ScaleGrid.exponent(2.0, 30.0, 32)


def _sym(f, sid="custom"):
    one = lambda x, xi: 1.0 + 0.0 * np.asarray(x) * np.asarray(xi)
    return SymbolDescriptor(sid, f, one, one, "test symbol", "test symbol")


@pytest.fixture(scope="module")
def harmonic_512():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return quantize("harmonic", 12.0, 512)


@pytest.fixture(scope="module")
def inv_grid():
    return SymbolGrid.sample("inv_harmonic", 12.0, 512)


def test_zero_symbol():
    op = quantize("zero", 6.0, 64)
    assert np.all(op.matrix == 0)
    assert np.all(op.eigenvalues.values == 0)


def test_multiplication_operator_is_diagonal():
    op = quantize(_sym(lambda x, xi: np.exp(-np.asarray(x) ** 2) + 0.0 * xi), 8.0, 128)
    K = np.abs(op.matrix)
    off = K.sum() - np.trace(K)
    assert off < 1e-6 * K.sum()
    x = SymbolGrid.axis(8.0, 128)
    np.testing.assert_allclose(np.diag(op.matrix).real / op.dx, np.exp(-x ** 2) / op.dx * (1.0), rtol=1e-10)


def test_inverse_harmonic_trace_against_box_quadrature(inv_grid):
    op = quantize(inv_grid)
    chk = trace_identity_check(inv_grid, op)
    assert chk["gap"] < 0.01
    # the literal normalization without (2 pi)^-1 misses by the factor 2 pi
    assert chk["gap_without_two_pi"] == pytest.approx(1 - 1 / (2 * math.pi), rel=1e-3)


def test_hermitian_defect(inv_grid):
    op = quantize(inv_grid)
    assert op.defect < 1e-10 * np.max(np.abs(op.K))
    np.testing.assert_array_equal(op.matrix, op.matrix.conj().T)


def test_eigenvalues_of_diagonal():
    s = eigenvalues(WeylOperator.from_matrix(np.diag([0.5, 3.0, 1.0, 2.0])))
    np.testing.assert_allclose(s.values, [3.0, 2.0, 1.0, 0.5], rtol=1e-14)
    assert s.clipped == 0


def test_eigenvalues_clip_negative():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        s = eigenvalues(WeylOperator.from_matrix(np.diag([1.0, -0.5, 1e-12])))
    assert s.clipped == 1 and s.most_negative == pytest.approx(-0.5)
    np.testing.assert_array_equal(s.values, [1.0, 1e-12, 0.0])


def test_rank_one_projector():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(50)
    v /= np.linalg.norm(v)
    s = eigenvalues(WeylOperator.from_matrix(np.outer(v, v)))
    assert s.values[0] == pytest.approx(1.0, rel=1e-12)
    assert np.all(s.values[1:] < 1e-12)


def test_harmonic_oscillator_spectrum(harmonic_512):
    low = ascending(harmonic_512.eigenvalues)[:10]
    np.testing.assert_allclose(low, np.arange(1, 20, 2), rtol=0.01)
    assert not harmonic_512.boundary_ok


def test_harmonic_grid_refinement(harmonic_512):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fine = quantize("harmonic", 12.0, 1024)
    a = ascending(harmonic_512.eigenvalues)[:20]
    b = ascending(fine.eigenvalues)[:20]
    np.testing.assert_allclose(b, a, rtol=1e-3)


def test_laguerre_oracle():
    np.testing.assert_allclose(laguerre_spectrum(lambda u: u, 12), 2 * np.arange(12) + 1, rtol=1e-10)
    # constant symbol 1 is the identity
    np.testing.assert_allclose(laguerre_spectrum(lambda u: 1.0 + 0.0 * u, 8), 1.0, rtol=1e-10)


def test_operator_matches_laguerre(inv_grid):
    op = quantize(inv_grid)
    exact = np.sort(laguerre_spectrum(SYMBOLS["inv_harmonic"].radial, 40))[::-1]
    np.testing.assert_allclose(op.eigenvalues.values[:20], exact[:20], rtol=0.01)


def test_gaussian_trace_and_hilbert_schmidt():
    g = SymbolGrid.sample("gaussian", 8.0, 256)
    chk = trace_identity_check(g)
    assert chk["trace"] == pytest.approx(0.5, rel=0.01)
    assert chk["hs_gap"] < 0.01 and chk["plancherel_gap"] < 0.01
    assert chk["hs"] == pytest.approx(0.25, rel=0.01)


def test_zero_trace_gap():
    assert trace_identity_check(SymbolGrid.sample("zero", 4.0, 32))["gap"] == 0.0


def test_box_integral():
    assert box_integral(SYMBOLS["gaussian"], 8.0, 8.0) == pytest.approx(math.pi, rel=1e-10)


def test_bad_inputs():
    with pytest.raises(NumericError):
        quantize(_sym(lambda x, xi: np.full(np.broadcast(x, xi).shape, np.nan)), 4.0, 16)
    with pytest.raises(DomainError):
        quantize("gaussian", 4.0, 15)
    with pytest.raises(DomainError):
        SymbolGrid(4.0, 15, np.zeros((15, 15)))
    with pytest.warns(RuntimeWarning):
        quantize("harmonic", 4.0, 32)


def test_order_bounds_finite():
    for s in SYMBOLS.values():
        assert math.isfinite(s.order_bound(10.0))


def test_dixmier_inverse_harmonic():
    rep = dixmier_compare("inv_harmonic", LOG, EXP, L=12.0, N=512)
    for v in (rep.operator_side, rep.symbol_side, rep.zeta_side):
        assert v == pytest.approx(0.5, rel=0.10)
    assert rep.gap < 0.10 and rep.zeta_gap < 0.10
    assert rep.lorentz_finite


def test_dixmier_gaussian_is_zero():
    rep = dixmier_compare("gaussian", LOG, EXP, L=12.0, N=256)
    assert abs(rep.operator_side) < 1e-3 and abs(rep.symbol_side) < 1e-3 and abs(rep.zeta_side) < 1e-3


def test_dixmier_log_symbol():
    rep = dixmier_compare("log_inv_harmonic", WeightFunction.iterlog(1, 2.0), EXP, L=12.0, N=512)
    assert rep.gap < 0.15


@pytest.mark.parametrize("sid,w", [("inv_harmonic", LOG), ("log_inv_harmonic", WeightFunction.iterlog(1, 2.0))])
def test_dixmier_agreement_improves_with_n(sid, w):
    gaps = [dixmier_compare(sid, w, EXP, L=12.0, N=n).gap for n in (128, 256, 512)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(gaps, gaps[1:])), gaps


def test_symbol_zeta():
    z = symbol_zeta(SymbolGrid.sample("inv_harmonic", 12.0, 256), LOG, EXP)
    assert z.verdict == "converged" and z.limit == pytest.approx(0.5, rel=0.10)
    g = symbol_zeta(SymbolGrid.sample("gaussian", 12.0, 256), LOG, EXP)
    assert abs(g.limit) < 1e-3
    b = symbol_zeta(SymbolGrid.sample("box", 4.0, 128), LOG, EXP)
    assert abs(b.limit) < 1e-3
    with pytest.raises(DomainError):
        symbol_zeta(SymbolGrid.sample("gaussian", 4.0, 32), LOG, ScaleGrid.direct(1e2, 1e12, 30))
