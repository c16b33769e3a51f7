"""Weyl quantization of one-dimensional symbols and the trace comparisons.

Kernel convention: K(x, y) = (2 pi)^{-1} int e^{i xi (x - y)} f((x+y)/2, xi) dxi,
so Tr OP(f) = (2 pi)^{-1} int f dx dxi.  Every symbol-side quantity is
divided by 2 pi accordingly.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from scipy.special import eval_laguerre

from . import _kernels
from ._quad import panels
from .errors import DomainError, NumericError
from .rearrange import AnalyticProfile, lorentz_norm, mu_from_grid, mu_from_values
from .traces import limit_estimate
from .weight import c_zeta

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SymbolDescriptor:
    """A real phase-space symbol with the metadata of its Hormander class.

    ``radial`` is g with f(x, xi) = g(x^2 + xi^2) when available; it enables
    the Laguerre spectrum oracle and exact tails beyond the box.
    """
    id: str
    f: Callable
    m: Callable
    h_g: Callable
    certificate: str
    description: str
    radial: Optional[Callable] = None
    metric: str = "g = (dx^2 + dxi^2)/(1 + x^2 + xi^2)"
    dual_metric: str = "g^sigma = (1 + x^2 + xi^2)(dx^2 + dxi^2)"
    symplectic: str = "sigma = dxi ^ dx"

    def __call__(self, x, xi):
        return self.f(x, xi)

    def order_bound(self, L, n=257):
        """sup |f|/m over a sample of the box [-L, L]^2."""
        x = np.linspace(-L, L, n)
        X, XI = np.meshgrid(x, x, indexing="ij")
        return float(np.max(np.abs(self.f(X, XI)) / self.m(X, XI)))


def _r2(x, xi):
    return np.asarray(x, dtype=float) ** 2 + np.asarray(xi, dtype=float) ** 2


def _radial(g, sid, m, h, cert, desc):
    return SymbolDescriptor(sid, lambda x, xi: g(_r2(x, xi)), lambda x, xi: m(_r2(x, xi)),
                            lambda x, xi: h(_r2(x, xi)), cert, desc, radial=g)


_SHUBIN = "Shubin metric with h_g = (1+x^2+xi^2)^{-1}; slowly varying and sigma-temperate, accepted on analytic grounds"


def _box_f(x, xi):
    return np.where((np.abs(x) <= 1.0) & (np.abs(xi) <= 1.0), 1.0, 0.0) + 0.0 * _r2(x, xi)


SYMBOLS = {
    "inv_harmonic": _radial(lambda u: 1.0 / (1.0 + u), "inv_harmonic", lambda u: 1.0 / (1.0 + u),
                            lambda u: 1.0 / (1.0 + u), _SHUBIN + "; f in S(m, g) with m = (1+x^2+xi^2)^{-1}",
                            "(1 + x^2 + xi^2)^{-1}, Dixmier value 1/2 for psi = log(1+t)"),
    "harmonic": _radial(lambda u: u, "harmonic", lambda u: 1.0 + u, lambda u: 1.0 / (1.0 + u),
                        _SHUBIN + "; f in S(m, g) with m = 1 + x^2 + xi^2",
                        "x^2 + xi^2, the harmonic oscillator with spectrum 2n+1"),
    "gaussian": _radial(lambda u: np.exp(-u), "gaussian", lambda u: (1.0 + u) ** -4,
                        lambda u: 1.0 / (1.0 + u), _SHUBIN + "; Schwartz, so in S(m, g) for every m = (1+r^2)^{-k}",
                        "exp(-x^2 - xi^2), trace class with trace 1/2"),
    "log_inv_harmonic": _radial(lambda u: np.log(2.0 + u) / (1.0 + u), "log_inv_harmonic",
                                lambda u: np.log(2.0 + u) / (1.0 + u), lambda u: 1.0 / (1.0 + u),
                                _SHUBIN + "; m = log(2+r^2)/(1+r^2) is a g-continuous weight",
                                "log(2 + x^2 + xi^2)/(1 + x^2 + xi^2), Dixmier value 1 for iterlog(1,2)"),
    "box": SymbolDescriptor("box", _box_f, lambda x, xi: 1.0 + 0.0 * _r2(x, xi),
                            lambda x, xi: 1.0 / (1.0 + _r2(x, xi)),
                            "indicator of [-1,1]^2; not smooth, kept as the bounded-support case",
                            "indicator of the unit square, bounded support"),
    "zero": _radial(lambda u: 0.0 * u, "zero", lambda u: 1.0 + 0.0 * u, lambda u: 1.0 / (1.0 + u),
                    "trivially in every class", "the zero symbol"),
}


def symbol(name):
    if isinstance(name, SymbolDescriptor):
        return name
    try:
        return SYMBOLS[name]
    except KeyError:
        from .errors import ConfigError
        raise ConfigError(f"unknown symbol {name!r}") from None


@dataclass(frozen=True)
class SymbolGrid:
    """Samples of a symbol on the square [-L, L]^2, N cell midpoints per axis."""
    L: float
    N: int
    values: np.ndarray = field(repr=False)
    symbol: Optional[SymbolDescriptor] = field(default=None, repr=False)

    def __post_init__(self):
        if self.N % 2 or self.N < 2:
            raise DomainError("N must be even")
        if not self.L > 0:
            raise DomainError("L must be positive")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("symbol values are not finite")

    @classmethod
    def sample(cls, sym, L, N):
        sym = symbol(sym)
        x = cls.axis(L, N)
        X, XI = np.meshgrid(x, x, indexing="ij")
        return cls(float(L), int(N), np.asarray(sym.f(X, XI), dtype=float), sym)

    @staticmethod
    def axis(L, N):
        h = 2.0 * L / N
        return -L + (np.arange(N) + 0.5) * h

    @property
    def h(self):
        return 2.0 * self.L / self.N

    @property
    def cell_area(self):
        return self.h ** 2

    def boundary_level(self):
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))


@dataclass(frozen=True)
class WeylOperator:
    matrix: np.ndarray = field(repr=False)     # K(x_i, x_j) dx, Hermitian
    defect: float
    dx: float
    boundary_ok: bool = True
    _eig: list = field(default_factory=list, repr=False, compare=False)

    @property
    def K(self):
        return self.matrix / self.dx

    @classmethod
    def from_matrix(cls, a, dx=1.0):
        a = np.asarray(a)
        d = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        return cls(0.5 * (a + a.conj().T), d, float(dx))

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    @property
    def eigenvalues(self):
        if not self._eig:
            self._eig.append(eigenvalues(self))
        return self._eig[0]


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray = field(repr=False)    # descending, clipped at 0
    clipped: int
    most_negative: float
    floor: float

    def __len__(self):
        return self.values.size

    @property
    def resolved(self):
        """Number of eigenvalues above the discretization floor."""
        return int(np.count_nonzero(self.values > self.floor))


def _midpoint_fft(sym, L, N):
    dx = 2.0 * L / N
    M = 2 * N
    dxi = math.pi / (N * dx)
    xi = (np.arange(M) - N + 0.5) * dxi
    mids = -L + (np.arange(2 * N - 1) / 2.0 + 0.5) * dx
    vals = np.asarray(sym.f(mids[:, None], xi[None, :]), dtype=float)
    if np.any(np.isnan(vals)):
        raise NumericError(f"symbol {sym.id} produced NaN on the quantization grid")
    # sum_k e^{i xi_k d dx} f_k = e^{i pi d (1/2 - N)/N} sum_k e^{2 pi i k d / M} f_k
    F = np.fft.ifft(vals, axis=1) * M
    d = np.arange(M)
    d = np.where(d < N, d, d - M)
    F *= np.exp(1j * math.pi * d * (0.5 - N) / N)[None, :]
    F *= dxi / TWO_PI
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    edge = max(np.max(np.abs(vals[0])), np.max(np.abs(vals[-1])),
               np.max(np.abs(vals[:, 0])), np.max(np.abs(vals[:, -1])))
    return F, dx, (scale == 0.0 or edge <= 1e-8 * scale)


def quantize(s, L=None, N=None):
    """Weyl operator of a symbol on N cell midpoints of [-L, L].

    ``s`` is a SymbolGrid (its L, N and symbol are used) or a descriptor with
    explicit ``L`` and ``N``.
    """
    if isinstance(s, SymbolGrid):
        sym, L, N = s.symbol, s.L, s.N
        if sym is None:
            raise DomainError("grid carries no symbol to quantize")
    else:
        sym = symbol(s)
        if L is None or N is None:
            raise DomainError("L and N are required")
        if N % 2:
            raise DomainError("N must be even")
    F, dx, ok = _midpoint_fft(sym, float(L), int(N))
    if not ok:
        warnings.warn(f"symbol {sym.id} does not decay below 1e-8 at the box boundary", RuntimeWarning)
    K = _kernels.weyl_gather(F, int(N))
    a = K * dx
    defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    return WeylOperator(0.5 * (a + a.conj().T), defect, dx, ok)


def eigenvalues(op, tol_neg=1e-8):
    a = op.matrix if isinstance(op, WeylOperator) else np.asarray(op)
    if a.size == 0:
        return Spectrum(np.zeros(0), 0, 0.0, 0.0)
    try:
        ev = scipy.linalg.eigh(a, eigvals_only=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    ev = ev[::-1].copy()
    top = max(float(np.max(np.abs(ev))), 0.0)
    cut = -tol_neg * top
    bad = ev < cut
    neg = float(ev.min())
    if np.any(bad):
        warnings.warn(f"{int(bad.sum())} eigenvalues below {cut:.3g} clipped", RuntimeWarning)
    ev = np.maximum(ev, 0.0)
    floor = 10.0 * top * np.finfo(float).eps * a.shape[0]
    return Spectrum(ev, int(np.count_nonzero(bad)), neg, floor)


def abs_spectrum(a):
    """Profile of |A| for a Hermitian matrix: sorted absolute eigenvalues."""
    a = np.asarray(a)
    if a.size == 0:
        return mu_from_values([])
    try:
        ev = scipy.linalg.eigh(0.5 * (a + a.conj().T), eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    return mu_from_values(np.abs(ev))


def ascending(sp):
    return sp.values[::-1].copy()


# ---------------------------------------------------------------------------
# oracles


def laguerre_spectrum(g, count):
    """Exact Weyl eigenvalues of a radial symbol g(x^2 + xi^2).

    lambda_n = (-1)^n int_0^inf g(u) e^{-u} L_n(2u) du, eigenvector the n-th
    Hermite function.
    """
    out = np.empty(count)
    for n in range(count):
        top = 4.0 * n + 80.0
        u, wu = panels(0.0, top, 0.25)
        with np.errstate(over="ignore"):
            h = g(u) * np.exp(-u) * eval_laguerre(n, 2.0 * u)
        out[n] = (-1) ** n * float(np.sum(wu * h))
    return out


def box_integral(sym, L, xi_max, power=1.0, width=0.5):
    """int over [-L, L] x [-xi_max, xi_max] of |f|^power by tensor Gauss-Legendre."""
    x, wx = panels(-L, L, width)
    xi, wxi = panels(-xi_max, xi_max, width)
    total = 0.0
    for lo in range(0, x.size, 256):
        X = x[lo:lo + 256, None]
        vals = np.abs(sym.f(X, xi[None, :])) ** power
        total += float(wx[lo:lo + 256] @ vals @ wxi)
    return total


def trace_identity_check(s, op=None):
    """Matrix trace against (2 pi)^{-1} int f over the quantization box.

    Both normalizations are reported; ``gap`` uses the kernel-consistent one.
    """
    sym = s.symbol
    op = quantize(s) if op is None else op
    xi_max = math.pi / op.dx
    I = box_integral(sym, s.L, xi_max)
    tr = op.trace
    hs = float(np.sum(np.abs(op.matrix) ** 2))
    I2 = box_integral(sym, s.L, xi_max, power=2.0)

    def gap(a, b):
        if a == b:
            return 0.0
        return abs(a - b) / max(abs(b), 1e-300)

    return {
        "trace": tr, "integral": I,
        "gap": gap(tr, I / TWO_PI), "gap_without_two_pi": gap(tr, I),
        "hs": hs, "hs_integral": I2, "hs_gap": gap(hs, I2 / TWO_PI),
        "plancherel_gap": gap(TWO_PI * hs, I2),
    }


# ---------------------------------------------------------------------------
# Dixmier comparison


def _slope(t, cum, w):
    """Least-squares slope of the cumulative sum against psi(t)."""
    x = np.asarray(w.eval(t), dtype=float)
    if np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, cum, 1)[0])


def symbol_profile(s):
    """mu(f, 2 pi t): the symbol rearrangement on the eigenvalue-count scale."""
    sym = s.symbol
    if sym is not None and sym.radial is not None:
        g = sym.radial
        # |{f > s}| = pi u for radial decreasing g, so mu_f(tau) = g(tau/pi)
        return AnalyticProfile(lambda t: g(2.0 * np.asarray(t, dtype=float)),
                               mu0=float(g(0.0)), name=f"{sym.id}_rearranged")
    return mu_from_grid(np.abs(s.values), s.cell_area / TWO_PI)


@dataclass(frozen=True)
class DixmierReport:
    symbol: str
    L: float
    N: int
    n_eff: int
    window: tuple
    operator_side: float
    symbol_side: float
    zeta_side: float
    zeta: object = field(repr=False)
    gap: float = 0.0
    zeta_gap: float = 0.0
    lorentz_operator: float = 0.0
    lorentz_symbol: float = 0.0
    spectrum: Spectrum = field(default=None, repr=False)
    trace_check: dict = field(default_factory=dict, repr=False)

    @property
    def lorentz_finite(self):
        return math.isfinite(self.lorentz_operator) and math.isfinite(self.lorentz_symbol)

    def comparison(self):
        return {"operator_side": self.operator_side, "symbol_side": self.symbol_side,
                "zeta_side": self.zeta_side, "gap": self.gap, "zeta_gap": self.zeta_gap}

    def to_dict(self):
        d = self.comparison()
        d.update(symbol=self.symbol, L=self.L, N=self.N, n_eff=self.n_eff, window=list(self.window),
                 lorentz_operator=self.lorentz_operator, lorentz_symbol=self.lorentz_symbol,
                 lorentz_finite=self.lorentz_finite, zeta_verdict=self.zeta.verdict,
                 clipped=self.spectrum.clipped if self.spectrum is not None else 0)
        return d


def _gap(a, b, floor=1e-3):
    """Relative gap; absolute once both values sit below ``floor`` (the trace-class case)."""
    d = abs(a - b)
    ref = max(abs(a), abs(b))
    return d / ref if ref >= floor else d


def resolved_count(s, sp):
    """N_eff: eigenvalues above the floor, capped by (2 pi)^{-1} |{f > f on the boundary}|.

    A symbol vanishing on the boundary gives no cap; a spectrum that drops
    under the floor almost at once (trace class) gives none either.
    """
    level = s.boundary_level()
    area = float(np.count_nonzero(np.abs(s.values) > level)) * s.cell_area
    by_symbol = int(area / TWO_PI)
    by_floor = sp.resolved
    n = by_symbol if by_symbol >= 20 else by_floor
    if by_floor >= 20:
        n = min(n, by_floor)
    return n, by_symbol, by_floor


def dixmier_compare(sym, w, g, L=12.0, N=512, samples=16):
    """Operator spectrum against the symbol rearrangement and the symbol zeta formula.

    Both Dixmier sides are local slopes d(sum_{k<=t} mu_k)/d psi(t) over the
    window [N_eff/10, N_eff/2], where the truncated spectrum still tracks the
    true one.  Eigenvalues below the floor count as zero.
    """
    s = SymbolGrid.sample(sym, L, N)
    op = quantize(s)
    sp = op.eigenvalues
    n_eff, _, _ = resolved_count(s, sp)
    lo, hi = max(1.0, n_eff / 10.0), max(2.0, n_eff / 2.0)
    t = np.unique(np.round(np.geomspace(lo, hi, samples)))
    ev = np.where(sp.values > sp.floor, sp.values, 0.0)
    cum_op = np.concatenate([[0.0], np.cumsum(ev)])
    op_side = _slope(t, cum_op[t.astype(int)], w)
    prof = symbol_profile(s)
    sym_side = _slope(t, np.asarray(prof.cumulative(t), dtype=float), w)
    zeta = symbol_zeta(s, w, g)
    z = zeta.value
    gap = _gap(op_side, sym_side)
    zgap = max(_gap(z, op_side), _gap(z, sym_side)) if math.isfinite(z) else float("nan")
    lor_op = lorentz_norm(mu_from_values(sp.values), w)
    lor_sym = lorentz_norm(prof, w)
    return DixmierReport(s.symbol.id, float(L), int(N), int(n_eff), (float(lo), float(hi)), op_side, sym_side,
                         float(z), zeta, float(gap), float(zgap), float(lor_op), float(lor_sym), sp)


def symbol_zeta(s, w, g):
    """C_zeta psi(e^rho)^{-1} (2 pi)^{-1} int |f|^{1 + 1/rho} over the exponent grid.

    The grid sum covers the disk of radius L; radial symbols add the exact
    tail pi int_{L^2}^inf g(u)^q du, integrated in log u.
    """
    if g.kind != "exponent":
        raise DomainError("symbol_zeta needs an exponent grid")
    rho = np.asarray(g.values, dtype=float)
    q = 1.0 + 1.0 / rho
    x = SymbolGrid.axis(s.L, s.N)
    X, XI = np.meshgrid(x, x, indexing="ij")
    sym = s.symbol
    radial = sym is not None and sym.radial is not None
    mask = (X ** 2 + XI ** 2 <= s.L ** 2) if radial else np.ones_like(X, dtype=bool)
    v = np.abs(s.values[mask])
    v = v[v > 0]
    lv = np.log(v) if v.size else np.zeros(0)
    grid_part = np.array([float(np.sum(np.exp(qq * lv))) for qq in q]) * s.cell_area
    if radial:
        vv, wv = panels(math.log(s.L ** 2), 700.0, 0.25)
        gu = np.abs(sym.radial(np.exp(vv)))
        with np.errstate(divide="ignore"):
            lg = np.log(gu)
        tail = np.array([math.pi * float(np.sum(wv * np.exp(qq * lg + vv))) for qq in q])
        grid_part = grid_part + tail
    cz = c_zeta(w)
    with np.errstate(over="ignore"):
        vals = cz * grid_part / (TWO_PI * np.exp(w.log_psi_exp(rho)))
    return limit_estimate((rho, vals), rho, {"c_zeta": cz})
