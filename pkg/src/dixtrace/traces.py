"""Dixmier-trace functionals sampled on a scale grid, and their tail classification.

An extended limit cannot be constructed, so each functional is sampled along
a geometric grid and its tail is classified by ``limit_estimate``:
oscillating (non-monotone part of the tail is large), diverging (a
persistent drift in log t) or converged.  Converged tails also carry an
extrapolated limit from a quadratic fit in z = 1/log t, which is the natural
variable for every functional here: they all approach their limit like
c/log t or c/psi(t).
"""
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DomainError, NumericError, UnsupportedWeightError
from .rearrange import FiniteProfile, _as_array
from .weight import c_zeta

_OSC_REL = 0.005
_OSC_ABS = 1e-9
_SLOPE = 0.1


@dataclass(frozen=True)
class ScaleGrid:
    kind: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.kind not in ("direct", "exponent"):
            raise DomainError("grid kind is 'direct' or 'exponent'")
        if v.ndim != 1 or v.size < 24:
            raise DomainError("a scale grid needs at least 24 points")
        if np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise DomainError("scale values must be positive and strictly increasing")
        if self.kind == "direct" and v[-1] / v[0] < 1e8 * (1 - 1e-12):
            raise DomainError("a direct grid must span at least 8 decades")
        if self.kind == "exponent" and (v[0] > 2 + 1e-12 or v[-1] < 30 - 1e-12):
            raise DomainError("an exponent grid must cover r in [2, 30]")

    @classmethod
    def direct(cls, lo, hi, points=32):
        return cls("direct", np.geomspace(lo, hi, points))

    @classmethod
    def exponent(cls, lo=2.0, hi=30.0, points=32):
        return cls("exponent", np.geomspace(lo, hi, points))

    @property
    def log_t(self):
        return np.log(self.values) if self.kind == "direct" else self.values

    @property
    def t(self):
        if self.kind == "exponent" and self.values[-1] > 700:
            raise DomainError("e^r overflows past r = 700")
        return self.values if self.kind == "direct" else np.exp(self.values)

    def to_dict(self):
        return {"kind": self.kind, "min": float(self.values[0]), "max": float(self.values[-1]),
                "points": int(self.values.size)}


@dataclass(frozen=True)
class LimitEstimate:
    scales: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    tail_mean: float
    tail_min: float
    tail_max: float
    tail_oscillation: float
    slope: float
    last: float
    limit: float
    verdict: str
    notes: dict = field(default_factory=dict)

    @property
    def samples(self):
        return dict(zip(self.scales.tolist(), self.values.tolist()))

    @property
    def value(self):
        """The limit when converged, otherwise nan (use the band instead)."""
        return self.limit if self.verdict == "converged" else float("nan")

    @property
    def band(self):
        return (self.tail_min, self.tail_max)

    def to_dict(self):
        return {"verdict": self.verdict, "limit": _num(self.limit), "last": _num(self.last),
                "tail_mean": _num(self.tail_mean), "band": [_num(self.tail_min), _num(self.tail_max)],
                "tail_oscillation": _num(self.tail_oscillation), "slope": _num(self.slope),
                "notes": self.notes}


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def limit_estimate(samples, log_t=None, notes=None):
    """Classify the last third of a sampled functional.

    ``samples`` is a mapping scale -> value or a pair (scales, values);
    ``log_t`` gives log t at each scale when the scale is not t itself.
    """
    if isinstance(samples, dict):
        scales = np.array(list(samples.keys()), dtype=float)
        vals = np.array(list(samples.values()), dtype=float)
    else:
        scales, vals = (np.asarray(a, dtype=float) for a in samples)
    if scales.size < 24:
        raise DomainError("limit estimation needs at least 24 samples")
    order = np.argsort(scales)
    scales, vals = scales[order], vals[order]
    lt = np.log(scales) if log_t is None else np.asarray(log_t, dtype=float)[order]
    n = scales.size
    tail = slice(n - max(n // 3, 4), n)
    tv, tl = vals[tail], lt[tail]
    nan = float("nan")
    if not np.all(np.isfinite(tv)):
        verdict = "diverging" if np.any(np.isinf(tv)) else "oscillating"
        return LimitEstimate(scales, vals, nan, nan, nan, nan, nan, float(vals[-1]), nan, verdict,
                             dict(notes or {}))
    mean = float(np.mean(tv))
    d = np.diff(tv)
    osc = float(np.sum(np.abs(d)) - abs(tv[-1] - tv[0]))
    # drift per unit of log log t: every functional here approaches its limit like 1/log t
    slope = float(np.polyfit(np.log(tl), tv, 1)[0]) if np.all(tl > 0) else float("nan")
    ref = abs(mean)
    fit = _extrapolate(tl, tv)
    to_zero = ref > 0 and abs(fit) < 0.1 * ref and np.all(tv * np.sign(mean) > 0) and slope * mean < 0
    if osc >= (_OSC_REL * ref if ref > _OSC_ABS else _OSC_ABS):
        verdict = "oscillating"
    elif not math.isfinite(slope) or (abs(slope) > max(_SLOPE * ref, _OSC_ABS) and not to_zero):
        verdict = "diverging"
    else:
        verdict = "converged"
    limit = fit if verdict == "converged" else nan
    return LimitEstimate(scales, vals, mean, float(np.min(tv)), float(np.max(tv)), osc, slope,
                         float(vals[-1]), limit, verdict, dict(notes or {}))


def _extrapolate(log_t, v):
    """Quadratic fit in z = 1/log t evaluated at z = 0, guarded against wild jumps."""
    z = 1.0 / np.asarray(log_t)
    if v.size < 4 or np.any(~np.isfinite(z)):
        return float(v[-1])
    A = np.vstack([np.ones_like(z), z, z * z]).T
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    lim = float(coef[0])
    spread = float(np.max(v) - np.min(v))
    if abs(lim - v[-1]) > 5.0 * spread + 1e-12 * max(abs(v[-1]), 1.0):
        return float(v[-1])
    return lim


# ---------------------------------------------------------------------------
# the functionals


def _psi_on(w, grid):
    return np.exp(w.log_psi_exp(grid.log_t))


def partial_sum_functional(p, w, g):
    """psi(t)^{-1} int_0^t mu on the grid."""
    vals = p.cumulative(g.t) / _psi_on(w, g)
    return limit_estimate((g.values, vals), g.log_t)


def cutoff_condition(w, g):
    """psi(t) <= C t^eps on the grid for eps in {0.5, 0.1}: the ratio must stop growing."""
    lt = g.log_t
    lp = w.log_psi_exp(lt)
    ok = {}
    for eps in (0.5, 0.1):
        r = lp - eps * lt
        ok[eps] = bool(r[-1] <= np.max(r) and np.all(np.diff(r[-max(len(r) // 3, 4):]) <= 1e-12))
    return ok


def cutoff_functional(p, w, g):
    """tau(T chi_{(1/t, inf)}(T)) / psi(t) on the grid."""
    ok = cutoff_condition(w, g)
    vals = p.cutoff_trace(g.t) / _psi_on(w, g)
    return limit_estimate((g.values, vals), g.log_t,
                          {"precondition": {str(k): v for k, v in ok.items()},
                           "precondition_ok": all(ok.values())})


def zeta_functional(p, w, g, b=None):
    """C_zeta tau(B T^{1+1/r}) / psi(e^r) over an exponent grid."""
    if g.kind != "exponent":
        raise DomainError("the zeta functional runs on an exponent grid")
    cz = c_zeta(w)
    r = g.values
    q = 1.0 + 1.0 / r
    if b is not None:
        if not isinstance(p, FiniteProfile):
            raise DomainError("twist weights need a finite spectrum")
        tr = p.power_trace(q, b=b)
    else:
        tr = p.power_trace(q)
    vals = cz * tr / np.exp(w.log_psi_exp(r))
    return limit_estimate((r, vals), r, {"c_zeta": cz})


def _outer_nodes(log_lams, per_decade=64):
    """Simpson nodes in u = log t from 0 through every requested log lambda."""
    h_target = math.log(10.0) / per_decade
    bounds = np.concatenate([[0.0], log_lams])
    nodes, ends = [np.zeros(1)], []
    offset = 0
    for a, b in zip(bounds[:-1], bounds[1:]):
        m = max(2, 2 * int(math.ceil((b - a) / h_target / 2.0)))
        u = np.linspace(a, b, m + 1)
        h = (b - a) / m
        sw = np.full(m + 1, 2.0)
        sw[1::2] = 4.0
        sw[0] = sw[-1] = 1.0
        nodes.append(u[1:])
        ends.append((offset, offset + m, sw * h / 3.0))
        offset += m
    return np.concatenate(nodes), ends


def heat_functional(p, w, g, b=None, per_decade=64):
    """psi(lam)^{-1} int_1^lam tau(B e^{-1/(t T)}) dt / t^2, outer integral in u = log t."""
    lam_log = g.log_t
    if np.any(lam_log < 0):
        raise DomainError("heat scales must be >= 1")
    u, segments = _outer_nodes(lam_log, per_decade)
    tnodes = np.exp(u)
    if b is not None:
        if not isinstance(p, FiniteProfile):
            raise DomainError("twist weights need a finite spectrum")
        inner = p.heat_trace(tnodes, b=b)
    else:
        inner = p.heat_trace(tnodes)
    integrand = inner * np.exp(-u)
    seg_int = np.array([np.dot(wt, integrand[lo:hi + 1]) for lo, hi, wt in segments])
    num = np.cumsum(seg_int)
    vals = num / np.exp(w.log_psi_exp(lam_log))
    notes = {}
    if b is None:
        closed = p.heat_closed(np.exp(lam_log))
        denom = np.maximum(np.abs(closed), 1e-300)
        gap = float(np.max(np.abs(num - closed) / denom)) if np.any(closed != 0) else float(np.max(np.abs(num)))
        notes["closed_form_gap"] = gap
        notes["closed_form_ok"] = bool(gap <= 1e-4)
        if not gap <= 1e-4 and np.max(np.abs(closed)) > 1e-12:
            notes["flag"] = "outer quadrature disagrees with the closed form"
    if not np.all(np.isfinite(vals)):
        raise NumericError("heat functional produced non-finite samples")
    return limit_estimate((g.values, vals), lam_log, notes)


def heat_membership(p, w, log_grid=None):
    """sup_lam tau(T e^{-1/(lam T)}) / psi(lam); returns (sup, finite)."""
    x = np.linspace(-5.0, 690.0, 240) if log_grid is None else np.asarray(log_grid, dtype=float)
    num = p.heat_membership_trace(np.exp(x))
    ratio = num / np.exp(w.log_psi_exp(x))
    if not np.any(ratio > 0):
        return 0.0, True
    est = limit_estimate((np.exp(x), ratio), x)
    if est.verdict == "diverging" and est.slope > 0:
        return float("inf"), False
    return float(np.max(ratio)), True


def twisted_cesaro(f, w, g):
    """lam -> psi(lam)^{-1} int_0^lam f(u) psi'(u) du, trapezoid in the psi variable."""
    t = g.t
    fv = np.asarray(f(t) if callable(f) else f, dtype=float)
    if fv.shape != t.shape:
        raise DomainError("samples must align with the grid")
    ps = _psi_on(w, g)
    inc = 0.5 * (fv[1:] + fv[:-1]) * np.diff(ps)
    num = np.concatenate([[fv[0] * ps[0]], fv[0] * ps[0] + np.cumsum(inc)])
    return num / ps


# ---------------------------------------------------------------------------
# Karamata


@dataclass(frozen=True)
class KaramataCase:
    beta: object
    phi: object
    k: float
    laplace: object = None
    name: str = "case"


_LAG = None


def _laguerre():
    global _LAG
    if _LAG is None:
        _LAG = np.polynomial.laguerre.laggauss(128)
    return _LAG


def laplace_stieltjes(beta, r):
    """int_0^inf e^{-t/r} d beta(t) = int_0^inf e^{-s} beta(r s) ds for beta(0) = 0."""
    s, wts = _laguerre()
    r = _as_array(r)
    return np.array([np.dot(wts, beta(ri * s)) for ri in r])


def karamata_check(case, g, tol=0.02):
    r = g.values
    phi = case.phi(r)
    for n in (2, 3, 5):
        ratio = case.phi(r[-1] / n) / phi[-1]
        if abs(ratio / n ** (-case.k) - 1.0) > 0.01:
            raise DomainError(f"phi(r/{n})/phi(r) does not approach {n}^-k")
    lhs = limit_estimate((r, case.beta(r) / phi), np.log(r))
    rhs_vals = laplace_stieltjes(case.beta, r) / (math.gamma(1.0 + case.k) * phi)
    rhs = limit_estimate((r, rhs_vals), np.log(r))
    agree = (lhs.verdict == rhs.verdict == "converged"
             and abs(lhs.limit - rhs.limit) <= tol * max(abs(rhs.limit), 1e-300))
    return lhs, rhs, bool(agree)


# ---------------------------------------------------------------------------
# all four at once


def _rel_gap(a, b):
    m = max(abs(a), abs(b))
    if m < 1e-6:
        return 0.0
    return abs(a - b) / m


def compare_all(p, w, g, b=None, tol=0.05):
    """Run the four functionals on one exponent grid (t = lam = e^r)."""
    if g.kind != "exponent":
        raise DomainError("compare_all runs on an exponent grid")
    res = {
        "partial_sum": partial_sum_functional(p, w, g),
        "cutoff": cutoff_functional(p, w, g),
    }
    skipped = {}
    try:
        res["zeta"] = zeta_functional(p, w, g, b=b)
    except UnsupportedWeightError as exc:
        skipped["zeta"] = str(exc)
    res["heat"] = heat_functional(p, w, g, b=b)
    gaps, last_gaps = {}, {}
    for a, c in combinations(res, 2):
        gaps[f"{a}/{c}"] = _rel_gap(res[a].limit, res[c].limit)
        last_gaps[f"{a}/{c}"] = _rel_gap(res[a].last, res[c].last)
    converged = all(e.verdict == "converged" for e in res.values())
    measurable = converged and all(v < tol for v in gaps.values())
    value = float(np.mean([e.limit for e in res.values()])) if converged else float("nan")
    return {
        "functionals": res,
        "gaps": gaps,
        "last_gaps": last_gaps,
        "measurable": bool(measurable),
        "value": value,
        "verdicts": {k: e.verdict for k, e in res.items()},
        "skipped": skipped,
    }
