"""L^p norms, the extrapolation norms and the equality criteria.

The lower norm divides ||T||_p by psi(e^{1/(p-1)}), the upper one by
||psi'||_p.  Integrals of psi' are done in log t (and log log t for the
far tail), so exponents p very close to 1, whose integrands decay like
t^{-(p-1)}, converge without a truncation error.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import log_integral, panels
from .errors import DomainError
from .rearrange import lorentz_norm

_LOG_T_FLOOR = -50.0
_V_TOP = math.log(1e300)


def default_p_grid(points=48):
    """p - 1 log-spaced over [1e-3, 10]."""
    return 1.0 + np.geomspace(1e-3, 10.0, points)


def lp_norm(p, q):
    """(tau |T|^q)^{1/q}; +inf when the trace diverges."""
    if q == np.inf:
        return float(p.mu0)
    if not q > 1:
        raise DomainError("q must exceed 1")
    tr = float(p.power_trace(np.array([float(q)]))[0])
    return tr ** (1.0 / q) if math.isfinite(tr) else float("inf")


def lp_norms(p, qs):
    qs = np.asarray(qs, dtype=float)
    if np.any(qs <= 1):
        raise DomainError("exponents must exceed 1")
    tr = p.power_trace(qs)
    with np.errstate(over="ignore"):
        return np.where(np.isfinite(tr), np.abs(tr) ** (1.0 / qs), np.inf)


class _DpsiNodes:
    """log psi'(t) at quadrature nodes covering t in (0, e^{1e300}), reused for every exponent."""

    def __init__(self, w, u_start=None):
        self.w = w
        lo = _LOG_T_FLOOR if u_start is None else u_start
        parts = []
        if lo < 1.0:
            u, wu = panels(lo, 1.0, 0.25)
            parts.append((u, wu, np.zeros_like(u)))
        v0 = 0.0 if lo < 1.0 else math.log(lo)
        v, wv = panels(v0, _V_TOP, 0.25)
        parts.append((np.exp(v), wv, v))
        self.u = np.concatenate([p[0] for p in parts])
        self.wts = np.concatenate([p[1] for p in parts])
        self.jac = np.concatenate([p[2] for p in parts])     # log du/dv on the far part
        with np.errstate(divide="ignore"):
            self.ldp = w.log_dpsi_exp(self.u)
        self.head = lo < 1.0
        self.lo = lo

    def log_power_integral(self, q):
        """log int psi'(t)^q dt over the node range; +inf when the tail does not decay."""
        logf = q * self.ldp + self.u + self.jac
        val = log_integral(logf, self.u, self.wts)
        if self.head:
            head = q * math.log(self.w.dpsi0()) + self.lo
            val = np.logaddexp(val, head)
        if logf[-1] > val - 40.0 or logf[-1] > logf[-17]:
            return float("inf")
        return float(val)


def dpsi_lp(w, q):
    """||psi'||_q."""
    if not q > 1:
        raise DomainError("q must exceed 1")
    li = _DpsiNodes(w).log_power_integral(q)
    return _exp(li / q)


def _exp(x):
    return math.exp(x) if x < 709.0 else float("inf")


def dpsi_lp_many(w, qs):
    nodes = _DpsiNodes(w)
    out = []
    for q in np.asarray(qs, dtype=float):
        li = nodes.log_power_integral(q)
        out.append(li / q if math.isfinite(li) else np.inf)
    return np.array(out)      # log ||psi'||_q


@dataclass(frozen=True)
class ExtrapolationReport:
    p_grid: np.ndarray = field(repr=False)
    eta_samples: np.ndarray = field(repr=False)
    lower_ratios: np.ndarray = field(repr=False)
    upper_ratios: np.ndarray = field(repr=False)
    frak_lower: float
    frak_lower_argmax: float
    frak_upper: float
    frak_upper_argmax: float
    lorentz: float
    sandwich_constant: float
    sandwich_ok: bool
    embedding_ok: bool
    fundamental: dict = field(default_factory=dict, repr=False)

    def rows(self):
        return [(float(p), float(e), float(lo), float(up))
                for p, e, lo, up in zip(self.p_grid, self.eta_samples, self.lower_ratios, self.upper_ratios)]

    def to_dict(self):
        return {
            "frak_lower": self.frak_lower, "frak_lower_argmax": _fmt_p(self.frak_lower_argmax),
            "frak_upper": self.frak_upper, "frak_upper_argmax": _fmt_p(self.frak_upper_argmax),
            "lorentz": self.lorentz, "sandwich_constant": self.sandwich_constant,
            "sandwich_ok": self.sandwich_ok, "embedding_ok": self.embedding_ok,
        }


def _fmt_p(p):
    return p if math.isfinite(p) else "inf"


def sandwich_constant(w):
    return max(math.e, w.eval(1.0) / w.deriv(1.0))


def frak_norms(p, w, p_grid=None, rel_tol=1e-9, with_fundamental=False):
    ps = default_p_grid() if p_grid is None else np.asarray(p_grid, dtype=float)
    if np.any(ps <= 1):
        raise DomainError("p grid must lie in (1, inf)")
    eta = lp_norms(p, ps)
    with np.errstate(over="ignore", invalid="ignore"):
        lower = eta / np.exp(w.log_psi_exp(1.0 / (ps - 1.0)))
        upper = eta / np.exp(dpsi_lp_many(w, ps))
    # p -> inf endpoints: ||T||_inf = mu(0), psi(e^0) = psi(1), ||psi'||_inf = psi'(0)
    low_inf = p.mu0 / w.eval(1.0)
    up_inf = p.mu0 / w.dpsi0()
    lower_all = np.append(lower, low_inf)
    upper_all = np.append(upper, up_inf)
    p_all = np.append(ps, np.inf)
    il, iu = int(np.nanargmax(lower_all)), int(np.nanargmax(upper_all))
    fl, fu = float(lower_all[il]), float(upper_all[iu])
    lor = lorentz_norm(p, w)
    K = sandwich_constant(w)
    ok = fu <= lor * (1 + rel_tol) + 1e-300
    if math.isfinite(fl):
        ok = ok and lor <= K * fl * (1 + rel_tol)
    emb = fu <= math.e * fl * (1 + rel_tol) if math.isfinite(fl) else True
    fund = fundamental_functions(w) if with_fundamental else {}
    return ExtrapolationReport(ps, eta, lower, upper, fl, float(p_all[il]), fu, float(p_all[iu]),
                               float(lor), K, bool(ok), bool(emb), fund)


def fundamental_functions(w, t_grid=None, p_grid=None):
    """Sampled lower/upper fundamental functions and psi(t) sup_p t^{1/p-1}/||psi'||_p."""
    t = np.geomspace(1e-2, 1e10, 25) if t_grid is None else np.asarray(t_grid, dtype=float)
    ps = default_p_grid(96) if p_grid is None else np.asarray(p_grid, dtype=float)
    lpsi = w.log_psi_exp(1.0 / (ps - 1.0))
    ldp = dpsi_lp_many(w, ps)
    lt = np.log(t)[:, None]
    low = np.max(lt / ps[None, :] - lpsi[None, :], axis=1)
    up = np.max(lt / ps[None, :] - ldp[None, :], axis=1)
    low = np.maximum(low, -math.log(w.eval(1.0)))
    up = np.maximum(up, -math.log(w.dpsi0()))
    phi_low, phi_up = np.exp(low), np.exp(up)
    ratio = np.asarray(w.eval(t)) / t * phi_up
    return {"t": t, "phi_lower": phi_low, "phi_upper": phi_up, "eqconds_ratio": ratio}


# ---------------------------------------------------------------------------
# equality criteria


def _conds2(w, ps):
    lr = dpsi_lp_many(w, ps) - w.log_psi_exp(1.0 / (ps - 1.0))
    sup = _exp(float(np.max(lr))) if np.all(np.isfinite(lr)) else float("inf")
    # growth as p -> 1: slope of log ratio against log 1/(p-1) on the smallest exponents
    k = 8
    x = np.log(1.0 / (ps[:k] - 1.0))
    slope = float(np.polyfit(x, lr[:k], 1)[0]) if np.all(np.isfinite(lr[:k])) else float("inf")
    verdict = "holds" if math.isfinite(sup) and slope < 0.05 else "fails"
    return {"verdict": verdict, "sup": sup, "growth_slope": slope}


def trivial_ratios(w, eps=(1.0, 0.5, 0.2, 0.1, 0.05)):
    """int_{e^{1/eps}}^inf psi'^{1+eps} dt / psi(e^{1/eps}) for each eps."""
    out = {}
    for e in eps:
        nodes = _DpsiNodes(w, u_start=1.0 / e)
        li = nodes.log_power_integral(1.0 + e)
        out[e] = _exp(li - float(w.log_psi_exp(np.array([1.0 / e]))[0]))
    return out


def _trivial(w):
    r = trivial_ratios(w)
    big = max(r[1.0], r[0.5], r[0.2])
    small = max(r[0.1], r[0.05])
    growth = r[0.05] / r[0.2]
    verdict = "holds" if small <= 2.0 * big else "fails"
    return {"verdict": verdict, "ratios": {str(k): v for k, v in r.items()}, "growth_0.2_to_0.05": growth}


def _concave_on(h_vals, s):
    sl = np.diff(h_vals) / np.diff(s)
    d = np.diff(sl)
    return bool(np.all(d <= 1e-9 * np.maximum(np.abs(sl[:-1]), 1e-300)))


def _propeq(w):
    found = None
    for rho in (1.0, 0.5, 0.25, 0.125):
        s = np.geomspace(1e-4, 600.0 ** (1.0 / rho), 800)
        h = np.exp(w.log_psi_exp(s ** rho))
        if np.all(np.isfinite(h)) and _concave_on(h, s):
            found = rho
            break
    # t^{-delta} psi(t) decreasing from some point on: elasticity <= delta eventually
    x = w.default_log_grid(200)
    el = w.elasticity_exp(x)
    onset = {}
    for delta in (0.1, 0.01):
        bad = np.nonzero(el > delta)[0]
        if bad.size == 0:
            onset[str(delta)] = float(x[0])
        elif bad[-1] < x.size - 5:
            onset[str(delta)] = float(x[bad[-1] + 1])
        else:
            onset[str(delta)] = None
    delta_ok = all(v is not None for v in onset.values())
    verdict = "holds" if found is not None and delta_ok else "fails"
    return {"verdict": verdict, "rho": found, "decreasing_from_log_t": onset}


def equality_criteria(w, p_grid=None):
    ps = default_p_grid() if p_grid is None else np.asarray(p_grid, dtype=float)
    return {
        "conds2_iii": _conds2(w, ps),
        "trivial_test": _trivial(w),
        "propeq_hypotheses": _propeq(w),
    }
