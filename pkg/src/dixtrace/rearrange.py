"""Decreasing rearrangements, distribution functions and Lorentz norms.

Three concrete profile types share one evaluation contract:

* ``FiniteProfile``: a step function with arbitrary cell widths (sorted
  spectra, sampled functions on a grid).
* ``SequenceProfile``: mu(t) = a_{floor(t)+1} for an infinite decreasing
  sequence given by a formula; partial sums at t ~ e^30 use Euler-Maclaurin.
* ``AnalyticProfile``: a continuous mu with optional closed forms.

All of them expose ``mu``, ``cumulative``, ``distribution`` and
``trace_many(g, params)`` = tau(g(T, p)) for a batch of parameters, where
g(0, p) must vanish.
"""
import csv
import math

import numpy as np

from . import _kernels
from ._quad import LogCumulative, gl_interval, panels
from .errors import DomainError

_U_LO = -40.0      # log t below which a bounded mu contributes mu(0) e^u
_U_HI = 700.0      # largest log t represented as a float
_PANEL = 0.25
_CHUNK = 64


def _as_array(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


def _out(arr, like):
    return float(arr[0]) if np.ndim(like) == 0 else arr


class SingularValueProfile:
    kind = "abstract"

    def scaled(self, c):
        raise NotImplementedError

    def mu(self, t):
        raise NotImplementedError

    def cumulative(self, t):
        raise NotImplementedError

    def distribution(self, s):
        raise NotImplementedError

    def trace_many(self, g, params):
        raise NotImplementedError

    def trace_of(self, g):
        """tau(g(T)) for a vectorized g with g(0) = 0."""
        return float(self.trace_many(lambda v, p: g(v), np.zeros(1))[0])

    def power_trace(self, q):
        """tau(T^q) for an array of exponents."""
        q = _as_array(q)
        with np.errstate(divide="ignore"):
            return self.trace_many(lambda v, p: np.where(v > 0, np.exp(p * np.log(np.where(v > 0, v, 1.0))), 0.0), q)

    def heat_trace(self, lam):
        """tau(exp(-1/(lam T))), the inner trace of the heat functional."""
        lam = _as_array(lam)
        return self.trace_many(_heat_g, lam)

    def heat_closed(self, lam):
        """tau(T e^{-1/(lam T)}) - tau(T e^{-1/T})."""
        lam = _as_array(lam)
        return self.trace_many(_heat_closed_g, lam)

    def heat_membership_trace(self, lam):
        """tau(T e^{-1/(lam T)})."""
        lam = _as_array(lam)
        return self.trace_many(_heat_full_g, lam)

    def cutoff_trace(self, t):
        """tau(T chi_{(1/t, inf)}(T)) = integral of mu over {mu > 1/t}."""
        t = _as_array(t)
        return self.cumulative(self.distribution(1.0 / t))


def _heat_g(v, lam):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(v > 0, np.exp(-1.0 / (lam * np.where(v > 0, v, 1.0))), 0.0)


def _heat_full_g(v, lam):
    return v * _heat_g(v, lam)


def _heat_closed_g(v, lam):
    return v * (_heat_g(v, lam) - _heat_g(v, 1.0))


# ---------------------------------------------------------------------------
# finite profiles


class FiniteProfile(SingularValueProfile):
    """mu = values[i] on [edges[i], edges[i+1]), zero beyond the last edge."""

    kind = "finite"

    def __init__(self, edges, values):
        e = np.asarray(edges, dtype=float)
        v = np.asarray(values, dtype=float)
        if e.ndim != 1 or v.ndim != 1 or e.size != v.size + 1:
            raise DomainError("need len(edges) == len(values) + 1")
        if v.size and (e[0] != 0 or np.any(np.diff(e) <= 0)):
            raise DomainError("edges must start at 0 and increase strictly")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise DomainError("values must be nonnegative and nonincreasing")
        keep = int(np.count_nonzero(v > 0))
        self.values = v[:keep].copy()
        self.edges = e[:keep + 1].copy() if keep else np.zeros(1)
        self.widths = np.diff(self.edges)
        self._cum = np.concatenate([[0.0], np.cumsum(self.values * self.widths)])

    def __repr__(self):
        return f"FiniteProfile(cells={self.values.size}, support={self.support:g})"

    @property
    def support(self):
        return float(self.edges[-1])

    @property
    def total(self):
        return float(self._cum[-1])

    @property
    def mu0(self):
        return float(self.values[0]) if self.values.size else 0.0

    def scaled(self, c):
        if not c > 0:
            raise DomainError("scale must be positive")
        return FiniteProfile(self.edges, c * self.values)

    def mu(self, t):
        ta = _as_array(t)
        if not self.values.size:
            return _out(np.zeros_like(ta), t)
        idx = np.searchsorted(self.edges, ta, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)
        return _out(out, t)

    def cumulative(self, t):
        ta = _as_array(t)
        if not self.values.size:
            return _out(np.zeros_like(ta), t)
        tc = np.clip(ta, 0.0, self.edges[-1])
        idx = np.clip(np.searchsorted(self.edges, tc, side="right") - 1, 0, self.values.size - 1)
        out = self._cum[idx] + self.values[idx] * (tc - self.edges[idx])
        return _out(out, t)

    def distribution(self, s):
        sa = _as_array(s)
        # values are sorted descending: count those strictly above s
        count = self.values.size - np.searchsorted(self.values[::-1], sa, side="right")
        return _out(self.edges[count], s)

    def trace_many(self, g, params):
        params = _as_array(params)
        if not self.values.size:
            return np.zeros_like(params)
        vals = g(self.values[None, :], params[:, None])
        return vals @ self.widths

    def power_trace(self, q, b=None):
        w = self.widths if b is None else self.widths * _check_twist(b, self.values.size)
        return _kernels.power_sums(self.values, w, _as_array(q))

    def heat_trace(self, lam, b=None):
        w = self.widths if b is None else self.widths * _check_twist(b, self.values.size)
        return _kernels.heat_sums(self.values, w, _as_array(lam))

    def heat_closed(self, lam):
        return _kernels.heat_closed(self.values, self.widths, _as_array(lam))

    def knots(self):
        return self.edges.copy()

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["knot", "value"])
            for e, v in zip(self.edges[:-1], self.values):
                wr.writerow([repr(float(e)), repr(float(v))])
            wr.writerow([repr(float(self.edges[-1])), "0.0"])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            return cls([0.0], [])
        knots = [float(r["knot"]) for r in rows]
        vals = [float(r["value"]) for r in rows]
        if vals[-1] != 0.0:
            raise DomainError("last csv row must close the support with value 0")
        return cls(knots, vals[:-1])


def _check_twist(b, n):
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise DomainError(f"twist weights have length {b.size}, spectrum has {n}")
    if np.any(b < 0):
        raise DomainError("twist weights must be nonnegative")
    return b


def mu_from_values(magnitudes):
    """Counting-measure rearrangement of a finite list of magnitudes."""
    m = np.asarray(magnitudes, dtype=float).ravel()
    if np.any(m < 0) or np.any(np.isnan(m)):
        raise DomainError("magnitudes must be nonnegative")
    v = -np.sort(-m, kind="stable")
    return FiniteProfile(np.arange(v.size + 1, dtype=float), v)


def mu_from_grid(values, cell_measure):
    """Rearrangement of a sampled nonnegative function, each sample owning ``cell_measure``."""
    if not cell_measure > 0:
        raise DomainError("cell measure must be positive")
    m = np.asarray(values, dtype=float).ravel()
    if np.any(m < 0) or np.any(np.isnan(m)):
        raise DomainError("grid values must be nonnegative")
    v = -np.sort(-m, kind="stable")
    return FiniteProfile(cell_measure * np.arange(v.size + 1, dtype=float), v)


def zero_profile():
    return FiniteProfile([0.0], [])


# ---------------------------------------------------------------------------
# infinite sequences


def _bisect_decreasing(f, target, lo, hi, iters=80):
    """Largest u in [lo, hi] with f(u) > target, per target (f decreasing)."""
    lo = np.full(target.shape, lo, dtype=float)
    hi = np.full(target.shape, hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = f(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return lo


class SequenceProfile(SingularValueProfile):
    """mu(t) = a(floor(t) + 1) for a smooth decreasing a on [1, inf)."""

    kind = "analytic"
    head = 1000
    direct = 100000

    def __init__(self, a, scale=1.0, name="sequence"):
        self._a = a
        self.scale = float(scale)
        self.name = name
        self._direct_cum = None
        self._integral = None

    def __repr__(self):
        return f"SequenceProfile({self.name}, scale={self.scale:g})"

    def a(self, k):
        return self.scale * self._a(np.asarray(k, dtype=float))

    @property
    def mu0(self):
        return float(self.a(1.0))

    @property
    def total(self):
        return float(self.trace_of(lambda v: v))

    def scaled(self, c):
        if not c > 0:
            raise DomainError("scale must be positive")
        obj = type(self).__new__(type(self))
        obj.__dict__.update(self.__dict__)
        obj.scale = self.scale * c
        obj._direct_cum = None
        obj._integral = None
        return obj

    def mu(self, t):
        ta = _as_array(t)
        if np.any(ta < 0):
            raise DomainError("t must be nonnegative")
        return _out(self.a(np.floor(ta) + 1.0), t)

    # partial sums S(n) = a_1 + ... + a_n

    def _sum_direct(self):
        if self._direct_cum is None:
            k = np.arange(1, self.direct + 1, dtype=float)
            self._direct_cum = np.concatenate([[0.0], np.cumsum(self.a(k))])
        return self._direct_cum

    def _deriv1(self, k, h):
        return (self.a(k + h) - self.a(k - h)) / (2 * h)

    def _deriv3(self, k, h):
        return (self.a(k + 2 * h) - 2 * self.a(k + h) + 2 * self.a(k - h) - self.a(k - 2 * h)) / (2 * h ** 3)

    def _integral_to(self, u):
        umax = float(np.max(u))
        if self._integral is None or self._integral.edges[-1] < umax:
            top = max(umax, math.log(self.head) + 8.0) + 1.0
            self._integral = LogCumulative(lambda s: self.a(np.exp(s)) * np.exp(s), math.log(self.head), top)
        return self._integral(u)

    def partial_sums(self, n):
        n = np.floor(_as_array(n))
        out = np.empty_like(n)
        table = self._sum_direct()
        small = n <= self.direct
        out[small] = table[n[small].astype(np.int64)]
        big = ~small
        if np.any(big):
            K = float(self.head)
            nb = n[big]
            h_n = np.maximum(1.0, 1e-3 * nb)
            em = (self._integral_to(np.log(nb))
                  + 0.5 * (self.a(K) + self.a(nb))
                  + (self._deriv1(nb, h_n) - self._deriv1(K, 1.0)) / 12.0
                  - (self._deriv3(nb, 10 * h_n) - self._deriv3(K, 1.0)) / 720.0)
            out[big] = table[self.head - 1] + em
        return out

    def cumulative(self, t):
        ta = _as_array(t)
        n = np.floor(ta)
        out = self.partial_sums(n) + (ta - n) * self.a(n + 1.0)
        return _out(out, t)

    def distribution(self, s):
        sa = _as_array(s)
        out = np.zeros_like(sa)
        live = self.a(1.0) > sa
        if np.any(live):
            u = _bisect_decreasing(lambda u: self.a(np.exp(u)), sa[live], 0.0, _U_HI)
            c = np.ceil(np.exp(u)) - 1.0
            c = np.where(self.a(c + 1.0) > sa[live], c + 1.0, c)
            c = np.where((c >= 1) & (self.a(np.maximum(c, 1.0)) <= sa[live]), c - 1.0, c)
            out[live] = c
        return _out(out, s)

    def trace_many(self, g, params):
        """sum_k g(a_k, p): explicit head plus an Euler-Maclaurin tail."""
        params = _as_array(params)
        K = float(self.head)
        kh = np.arange(1, self.head, dtype=float)
        out = np.empty_like(params)
        for lo in range(0, params.size, _CHUNK):
            p = params[lo:lo + _CHUNK][:, None]

            def f(k):
                return g(self.a(k), p)

            head = np.sum(f(kh[None, :]), axis=1)
            tail, infinite = _log_tail_integral(lambda u: f(np.exp(u)) * np.exp(u), math.log(K), p.shape[0])
            corr = 0.5 * f(K)[:, 0] - (f(K + 1.0) - f(K - 1.0))[:, 0] / 24.0 \
                + ((f(K + 2.0) - 2 * f(K + 1.0) + 2 * f(K - 1.0) - f(K - 2.0)) / 2.0)[:, 0] / 720.0
            res = head + tail + corr
            res[infinite] = np.inf
            out[lo:lo + _CHUNK] = res
        return out


def _log_tail_integral(h, u0, nparams, u_hi=_U_HI):
    """int_{u0}^inf h(u) du per parameter row, with a power-law tail past u_hi.

    Returns (values, infinite_mask).
    """
    probe = np.arange(u0, u_hi + 1e-9, 1.0)
    if probe[-1] < u_hi:
        probe = np.append(probe, u_hi)
    with np.errstate(all="ignore"):
        hp = np.abs(h(probe[None, :]))
    hp = np.nan_to_num(hp, nan=0.0, posinf=np.inf)
    scale = np.max(hp, axis=1, keepdims=True)
    significant = hp > 1e-18 * np.where(scale > 0, scale, 1.0)
    if np.any(significant):
        last = np.max(np.where(significant, np.arange(probe.size)[None, :], 0))
    else:
        last = 0
    u_end = float(min(u_hi, probe[min(last + 2, probe.size - 1)]))
    nodes, wts = panels(u0, u_end, _PANEL)
    with np.errstate(all="ignore"):
        vals = h(nodes[None, :])
    vals = np.nan_to_num(vals, nan=0.0)
    total = vals @ wts
    infinite = np.zeros(nparams, dtype=bool)
    if u_end >= u_hi:
        with np.errstate(all="ignore"):
            end = h(np.array([u_hi - 1.0, u_hi]))
        h1, h2 = end[..., 0].ravel(), end[..., 1].ravel()
        h1 = np.broadcast_to(h1, (nparams,))
        h2 = np.broadcast_to(h2, (nparams,))
        live = np.abs(h2) > 1e-16 * np.maximum(np.abs(total), 1e-300)
        with np.errstate(all="ignore"):
            rate = np.log(np.abs(h2)) - np.log(np.abs(h1))
        infinite = live & ~(rate < -1e-12)
        extra = np.where(live & ~infinite, h2 / np.where(rate < 0, -rate, 1.0), 0.0)
        total = total + extra
    return np.asarray(total).ravel(), infinite


class HarmonicProfile(SequenceProfile):
    """a_k = C / k, with closed forms for every trace the functionals need."""

    def __init__(self, scale=1.0):
        super().__init__(lambda k: 1.0 / k, scale, "harmonic")

    def partial_sums(self, n):
        from scipy.special import digamma
        n = np.floor(_as_array(n))
        return self.scale * (digamma(n + 1.0) + np.euler_gamma)

    def distribution(self, s):
        sa = _as_array(s)
        r = self.scale / sa
        return _out(np.where(r > 1.0, np.ceil(r) - 1.0, 0.0), s)

    def power_trace(self, q):
        from scipy.special import zeta
        q = _as_array(q)
        with np.errstate(over="ignore"):
            return np.where(q > 1, self.scale ** q * zeta(np.where(q > 1, q, 2.0)), np.inf)

    def heat_trace(self, lam):
        lam = _as_array(lam)
        return 1.0 / np.expm1(1.0 / (self.scale * lam))

    def heat_membership_trace(self, lam):
        lam = _as_array(lam)
        return -self.scale * np.log(-np.expm1(-1.0 / (self.scale * lam)))

    def heat_closed(self, lam):
        return self.heat_membership_trace(lam) - self.heat_membership_trace(np.ones(1))


# ---------------------------------------------------------------------------
# continuous profiles


class AnalyticProfile(SingularValueProfile):
    """A continuous decreasing mu with optional closed forms.

    ``cumulative`` and ``distribution`` fall back to quadrature in log t and
    bisection when not supplied.
    """

    kind = "analytic"

    def __init__(self, mu, cumulative=None, distribution=None, mu0=None, name="analytic",
                 scale=1.0):
        self._mu = mu
        self._cumulative = cumulative
        self._distribution = distribution
        self.name = name
        self.scale = float(scale)
        self._mu0 = float(mu(np.array([0.0]))[0]) if mu0 is None else float(mu0)
        self._cum_table = None

    def __repr__(self):
        return f"AnalyticProfile({self.name}, scale={self.scale:g})"

    @property
    def mu0(self):
        return self.scale * self._mu0

    @property
    def total(self):
        return float(self.trace_of(lambda v: v))

    def scaled(self, c):
        if not c > 0:
            raise DomainError("scale must be positive")
        return AnalyticProfile(self._mu, self._cumulative, self._distribution, self._mu0,
                               self.name, self.scale * c)

    def mu(self, t):
        ta = _as_array(t)
        if np.any(ta < 0):
            raise DomainError("t must be nonnegative")
        return _out(self.scale * self._mu(ta), t)

    def cumulative(self, t):
        ta = _as_array(t)
        if self._cumulative is not None:
            return _out(self.scale * self._cumulative(ta), t)
        u = np.log(np.maximum(ta, 1e-300))
        umax = float(np.max(u))
        if self._cum_table is None or self._cum_table.edges[-1] < umax:
            self._cum_table = LogCumulative(lambda s: self._mu(np.exp(s)) * np.exp(s), _U_LO,
                                            max(umax, 10.0) + 1.0)
        head = self._mu0 * math.exp(_U_LO)
        inner = np.where(u > _U_LO, self._cum_table(np.maximum(u, _U_LO)) + head, self._mu0 * ta)
        return _out(self.scale * inner, t)

    def distribution(self, s):
        sa = _as_array(s)
        if self._distribution is not None:
            return _out(self._distribution(sa / self.scale), s)
        out = np.zeros_like(sa)
        live = self.mu0 > sa
        if np.any(live):
            u = _bisect_decreasing(lambda u: self.scale * self._mu(np.exp(u)), sa[live], -60.0, _U_HI)
            out[live] = np.where(u >= _U_HI - 1e-9, np.inf, np.exp(u))
        return _out(out, s)

    def trace_many(self, g, params):
        params = _as_array(params)
        out = np.empty_like(params)
        for lo in range(0, params.size, _CHUNK):
            p = params[lo:lo + _CHUNK][:, None]

            def h(u):
                return g(self.scale * self._mu(np.exp(u)), p) * np.exp(u)

            tail, infinite = _log_tail_integral(h, _U_LO, p.shape[0])
            head = g(np.array([[self.mu0]]), p)[:, 0] * math.exp(_U_LO)
            res = tail + head
            res[infinite] = np.inf
            out[lo:lo + _CHUNK] = res
        return out


# ---------------------------------------------------------------------------
# comparisons and norms


def integral_mu(p, t):
    if np.any(np.asarray(t) < 0):
        raise DomainError("t must be nonnegative")
    return p.cumulative(t)


def hlp_majorizes(s, t, probe=None):
    """True when s is submajorized by t: cumulative(s) <= cumulative(t) on the probes."""
    pts = [] if probe is None else [np.asarray(probe, dtype=float).ravel()]
    for prof in (s, t):
        if isinstance(prof, FiniteProfile):
            pts.append(prof.edges)
    if not pts:
        raise DomainError("need a probe grid for analytic profiles")
    grid = np.unique(np.concatenate(pts))
    cs, ct = s.cumulative(grid), t.cumulative(grid)
    return bool(np.all(cs <= ct + 1e-12 * np.maximum(np.abs(ct), 1.0)))


def lorentz_norm(p, w):
    """sup_t cumulative(t) / psi(t); +inf when the ratio keeps growing."""
    return lorentz_norm_detail(p, w)[0]


def lorentz_norm_detail(p, w):
    if isinstance(p, FiniteProfile):
        return _lorentz_finite(p, w)
    return _lorentz_analytic(p, w)


def _lorentz_finite(p, w):
    if not p.values.size:
        return 0.0, 0.0
    e = p.edges
    cum = p._cum
    # knots (excluding 0) and the t -> 0 limit mu(0)/psi'(0)
    ratios = cum[1:] / w.eval(e[1:])
    best = float(np.max(ratios))
    arg = float(e[1:][np.argmax(ratios)])
    lim0 = p.mu0 / w.dpsi0()
    if lim0 > best:
        best, arg = lim0, 0.0
    # interior refinement only where it could beat the knot maximum
    left_psi = np.concatenate([[0.0], w.eval(e[1:-1])]) if e.size > 2 else np.zeros(1)
    with np.errstate(divide="ignore"):
        bound = np.where(left_psi > 0, cum[1:] / np.where(left_psi > 0, left_psi, 1.0), np.inf)
    cand = np.nonzero(bound > best)[0]
    cand = cand[cand > 0]
    if cand.size:
        a, b = e[cand], e[cand + 1]
        c0, v = cum[cand], p.values[cand]

        def ratio(t):
            return (c0 + v * (t - a)) / w.eval(t)

        inner = _golden_max_simple(ratio, a, b)
        j = int(np.argmax(inner))
        if inner[j] > best:
            best, arg = float(inner[j]), float(0.5 * (a[j] + b[j]))
    return best, arg


def _golden_max_simple(f, a, b, iters=40):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    lo, hi = a.copy(), b.copy()
    for _ in range(iters):
        c = hi - g * (hi - lo)
        d = lo + g * (hi - lo)
        left = f(c) > f(d)
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    return np.maximum(np.maximum(f(0.5 * (lo + hi)), f(a)), f(b))


def _lorentz_analytic(p, w, x_lo=-20.0, x_hi=60.0, points=321):
    x = np.linspace(x_lo, x_hi, points)
    t = np.exp(x)
    r = p.cumulative(t) / w.eval(t)
    far = np.exp(np.array([100.0, 150.0, 200.0]))
    rf = p.cumulative(far) / w.eval(far)
    if not np.all(np.isfinite(rf)) or (rf[2] > rf[1] * (1 + 1e-3) and rf[1] > rf[0] * (1 + 1e-3)
                                       and rf[2] > np.max(r)):
        return float("inf"), float("inf")
    j = int(np.argmax(r))
    lo, hi = x[max(j - 1, 0)], x[min(j + 1, x.size - 1)]

    def f(xx):
        tt = np.exp(xx)
        return p.cumulative(tt) / w.eval(tt)

    refined = float(_golden_max_simple(f, np.array([lo]), np.array([hi]))[0])
    best = max(refined, float(np.max(r)), float(np.max(rf)))
    lim0 = p.mu0 / w.dpsi0()
    if lim0 > best:
        return lim0, 0.0
    return best, float(t[j])
