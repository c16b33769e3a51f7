"""Concave weights psi and the limit conditions attached to them.

Everything is evaluated in logarithmic coordinates: ``log_psi_exp(x)`` is
log psi(e^x) and ``elasticity_exp(x)`` is t psi'(t) / psi(t) at t = e^x.
The limits in the conditions converge like 1/log log t for iterated logs, so
they are sampled on a grid that is geometric in log t and reaches
log t = 1e300, far past anything representable as t itself.
"""
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, UnsupportedWeightError

_SMALL = -30.0


def _scalar_out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _iterlog_logs(y, n):
    """log L_1, ..., log L_n evaluated at s = e^y (L_1 = log(1+s), L_k = log(1+L_{k-1}))."""
    logs = []
    cur = np.where(y < _SMALL, y, np.log(np.logaddexp(0.0, np.maximum(y, _SMALL))))
    logs.append(cur)
    for _ in range(n - 1):
        nxt = np.where(cur < _SMALL, cur, np.log(np.log1p(np.exp(np.maximum(cur, _SMALL)))))
        logs.append(nxt)
        cur = nxt
    return logs


@dataclass(frozen=True)
class WeightFunction:
    family: str
    n: int = 1
    beta: float = 1.0
    knots: tuple = ()
    values: tuple = ()
    log_C: float = field(default=float("nan"), compare=False)

    # construction

    @classmethod
    def iterlog(cls, n=1, beta=1.0):
        if int(n) != n or n < 1:
            raise DomainError("iterlog needs a positive integer n")
        if not beta > 0:
            raise DomainError("iterlog needs beta > 0")
        return cls("iterlog", int(n), float(beta))

    @classmethod
    def exppow(cls, n=1, beta=0.5):
        if int(n) != n or n < 1:
            raise DomainError("exppow needs a positive integer n")
        if not 0 < beta < 1:
            raise DomainError("exppow needs beta in (0, 1)")
        # join point C = exp^n(1), where the right piece equals e
        log_c = 1.0
        for _ in range(int(n) - 1):
            log_c = math.exp(log_c)
        w = cls("exppow", int(n), float(beta), log_C=log_c)
        # the linear left piece must not be flatter than the right piece at C
        while w.log_C < 700:
            right = w._exppow_right_log_elasticity(np.array([w.log_C]))[0]
            if right <= 0.0:
                break
            object.__setattr__(w, "log_C", w.log_C + math.log(1.5))
        return w

    @classmethod
    def tabulated(cls, knots, values):
        k = np.asarray(knots, dtype=float)
        v = np.asarray(values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise DomainError("knots and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(k) <= 0) or k[0] < 0:
            raise DomainError("knots must be nonnegative and strictly increasing")
        if k[0] == 0 and v[0] != 0:
            raise DomainError("a weight vanishes at 0")
        if k[0] > 0:
            k = np.concatenate([[0.0], k])
            v = np.concatenate([[0.0], v])
        slopes = np.diff(v) / np.diff(k)
        if np.any(slopes < 0):
            raise DomainError("tabulated weight must be nondecreasing")
        if np.any(np.diff(slopes) > 1e-9 * np.maximum(np.abs(slopes[:-1]), 1e-300)):
            raise DomainError("tabulated weight must be concave")
        return cls("tabulated", 0, 0.0, tuple(k.tolist()), tuple(v.tolist()))

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, str):
            d = json.loads(d)
        if isinstance(d, WeightFunction):
            return d
        fam = d.get("family")
        if fam == "iterlog":
            return cls.iterlog(d.get("n", 1), d.get("beta", 1.0))
        if fam == "exppow":
            return cls.exppow(d.get("n", 1), d.get("beta", 0.5))
        if fam == "tabulated":
            return cls.tabulated(d["knots"], d["values"])
        raise DomainError(f"unknown weight family {fam!r}")

    def to_dict(self):
        if self.family == "tabulated":
            return {"family": "tabulated", "knots": list(self.knots), "values": list(self.values)}
        return {"family": self.family, "n": self.n, "beta": self.beta}

    def label(self):
        if self.family == "tabulated":
            return f"tabulated[{len(self.knots)}]"
        return f"{self.family}(n={self.n},beta={self.beta:g})"

    # log-space core

    def log_psi_exp(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "iterlog":
            return self.beta * _iterlog_logs(x / self.beta, self.n)[-1]
        if self.family == "exppow":
            return self._exppow_log_psi(x)
        return self._tab_log_psi(x)

    def elasticity_exp(self, x):
        """t psi'(t) / psi(t) at t = e^x, always in [0, 1] for a concave weight."""
        x = np.asarray(x, dtype=float)
        if self.family == "iterlog":
            y = x / self.beta
            logs = _iterlog_logs(y, self.n)
            le = -np.logaddexp(0.0, -y) - logs[-1]
            for lj in logs[:-1]:
                le = le - np.log1p(np.exp(np.minimum(lj, 700.0)))
            return np.minimum(np.exp(le), 1.0)
        if self.family == "exppow":
            right = x >= self.log_C
            out = np.ones_like(x)
            if np.any(right):
                out[right] = np.exp(self._exppow_right_log_elasticity(x[right]))
            return out
        return self._tab_elasticity(x)

    def log_psi_shift(self, x, delta):
        """log psi(e^(x+delta)) - log psi(e^x), accurate even when delta << x.

        For small relative shifts the difference is the integral of the
        elasticity over [x, x + delta], which avoids cancellation.
        """
        x = np.asarray(x, dtype=float)
        delta = np.broadcast_to(np.asarray(delta, dtype=float), x.shape)
        small = np.abs(delta) < 1e-3 * np.maximum(np.abs(x), 1.0)
        out = self.log_psi_exp(x + delta) - self.log_psi_exp(x)
        if np.any(small):
            from ._quad import gl_interval
            xs, ds = x[small], delta[small]
            s, wts = gl_interval(np.zeros_like(xs), np.ones_like(xs))
            nodes = xs[:, None] + ds[:, None] * s
            el = self.elasticity_exp(nodes.ravel()).reshape(nodes.shape)
            out[small] = ds * np.sum(wts * el, axis=1)
        return out

    def log_dpsi_exp(self, x):
        """log psi'(e^x)."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return self.log_psi_exp(x) + np.log(self.elasticity_exp(x)) - x

    def _exppow_log_psi(self, x):
        right = x >= self.log_C
        out = np.empty_like(x)
        left_log_slope = math.exp(self._exppow_right_log(np.array([self.log_C]))[0]) - self.log_C
        out[~right] = left_log_slope + x[~right]
        if np.any(right):
            out[right] = np.exp(self._exppow_right_log(x[right]))
        return out

    def _exppow_right_log(self, x):
        # log of (log^n t)^beta, i.e. beta * log ell_n
        ell = x
        for _ in range(self.n - 1):
            ell = np.log(ell)
        return self.beta * np.log(ell)

    def _exppow_right_log_elasticity(self, x):
        # beta ell_n^(beta-1) / (ell_1 ... ell_{n-1}) with ell_1 = log t, ell_k = log ell_{k-1}
        ell = np.asarray(x, dtype=float)
        acc = np.zeros_like(ell)
        for _ in range(self.n - 1):
            acc = acc - np.log(ell)
            ell = np.log(ell)
        return math.log(self.beta) + (self.beta - 1.0) * np.log(ell) + acc

    def _tab_arrays(self):
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        return k, v, np.diff(v) / np.diff(k)

    def _tab_eval(self, t):
        k, v, s = self._tab_arrays()
        out = np.interp(t, k, v)
        beyond = t > k[-1]
        out = np.where(beyond, v[-1] + s[-1] * (t - k[-1]), out)
        return out

    def _tab_log_psi(self, x):
        k, v, s = self._tab_arrays()
        t = np.exp(np.clip(x, -700.0, 700.0))
        with np.errstate(divide="ignore"):
            out = np.log(self._tab_eval(t))
            out = np.where(x < -700.0, math.log(s[0]) + x if s[0] > 0 else -np.inf, out)
            if s[-1] > 0:
                out = np.where(x > 700.0, x + math.log(s[-1]), out)
        return out

    def _tab_deriv(self, t):
        k, v, s = self._tab_arrays()
        idx = np.clip(np.searchsorted(k, t, side="right") - 1, 0, len(k) - 2)
        h = np.diff(k)[idx]
        left = np.maximum(t - h, 0.0)
        return (self._tab_eval(t + h) - self._tab_eval(left)) / (t + h - left)

    def _tab_elasticity(self, x):
        t = np.exp(np.clip(x, -700.0, 700.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            e = t * self._tab_deriv(t) / self._tab_eval(t)
        return np.clip(np.nan_to_num(e, nan=1.0), 0.0, 1.0)

    # plain evaluation

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        ta = np.asarray(t, dtype=float)
        if np.any(ta < 0) or np.any(np.isnan(ta)):
            raise DomainError("psi is defined on [0, inf)")
        out = np.zeros_like(ta, dtype=float)
        pos = ta > 0
        if self.family == "tabulated":
            out = np.where(pos, self._tab_eval(ta), 0.0)
        elif np.any(pos):
            with np.errstate(divide="ignore"):
                out[pos] = np.exp(self.log_psi_exp(np.log(ta[pos])))
        return _scalar_out(out, t)

    def deriv(self, t):
        ta = np.asarray(t, dtype=float)
        if np.any(~(ta > 0)):
            raise DomainError("psi' is evaluated on (0, inf)")
        if self.family == "tabulated":
            out = self._tab_deriv(ta)
        else:
            out = np.exp(self.log_dpsi_exp(np.log(ta)))
        return _scalar_out(out, t)

    def dpsi0(self):
        """psi'(0+), finite for every weight in the bounded class."""
        if self.family == "iterlog":
            return 1.0
        if self.family == "exppow":
            return math.exp(math.exp(self._exppow_right_log(np.array([self.log_C]))[0]) - self.log_C)
        _, _, s = self._tab_arrays()
        return float(s[0])

    def in_bounded_class(self):
        return math.isfinite(self.dpsi0())

    def default_log_grid(self, points=64, lo=math.log(1e2), hi=1e300):
        """Geometric grid in x = log t used by all limit estimates."""
        if self.family == "tabulated":
            k = np.asarray(self.knots)
            hi = math.log(k[-1])
            lo = min(lo, 0.5 * hi) if hi > 0 else hi - 1.0
            if lo <= 0:
                return np.linspace(max(math.log(k[1]), hi - 10.0), hi, points)
        return np.geomspace(lo, hi, points)



# ---------------------------------------------------------------------------
# limit estimates along the log grid

@dataclass(frozen=True)
class TailEstimate:
    value: float
    low: float
    high: float
    slope: float
    verdict: str

    def to_dict(self):
        return {"value": self.value, "low": self.low, "high": self.high,
                "slope": self.slope, "verdict": self.verdict}


def tail_estimate(x, log_values, window=5, rel=0.005, max_slope=0.01):
    """Classify the tail of log-valued samples taken at log t = x.

    Converged when the last ``window`` samples spread by less than ``rel``
    and the slope of log(value) against log(log t) is below ``max_slope``.
    """
    x = np.asarray(x, dtype=float)
    lv = np.asarray(log_values, dtype=float)
    tail = lv[-window:]
    lx = np.log(x[-window:])
    if np.any(np.isnan(tail)):
        return TailEstimate(float("nan"), float("nan"), float("nan"), float("nan"), "inconclusive")
    if np.any(np.isinf(tail)) or tail[-1] > 700:
        return TailEstimate(float("inf"), float("inf"), float("inf"), float("inf"), "diverging")
    slope = float(np.polyfit(lx, tail, 1)[0])
    spread = float(np.max(tail) - np.min(tail))
    val, low, high = math.exp(tail[-1]), math.exp(np.min(tail)), math.exp(np.max(tail))
    d = np.diff(tail)
    monotone = bool(np.all(d >= 0) or np.all(d <= 0))
    if spread < math.log1p(rel) and abs(slope) < max_slope:
        verdict = "converged"
    elif abs(slope) >= max_slope and monotone:
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return TailEstimate(val, low, high, slope, verdict)


def _log_ratio_A(w, alpha, x):
    return w.log_psi_exp(alpha * x) - w.log_psi_exp(x)


def estimate_A(w, alpha, grid=None):
    """Tail estimate of psi(t^alpha) / psi(t); ``grid`` holds log t values."""
    if not alpha > 1:
        raise DomainError("alpha must exceed 1")
    x = w.default_log_grid() if grid is None else np.asarray(grid, dtype=float)
    if w.family == "tabulated":
        x = x[alpha * x <= math.log(w.knots[-1])]
    if x.size < 5:
        nan = float("nan")
        return TailEstimate(nan, nan, nan, nan, "inconclusive")
    return tail_estimate(x, _log_ratio_A(w, alpha, x))


def _ssz_log_ratio(w, x):
    # log(t psi(t)) = x + log psi(e^x)
    return w.log_psi_shift(x, w.log_psi_exp(x))


def dilation_norm(w, a, lo=1e-10, hi=1e12, points=2000):
    """sup_t psi(a t) / (a psi(t)), including the limits t -> 0 and t -> inf."""
    if not a > 0:
        raise DomainError("a must be positive")
    if a == 1:
        return 1.0
    la = math.log(a)
    x = np.linspace(math.log(lo), math.log(hi), points)
    inner = w.log_psi_shift(x, la) - la
    # endpoint limits from the elasticity: psi(at)/psi(t) ~ a^eps
    if w.family == "tabulated":
        x_end = np.array([-700.0, 700.0])
    else:
        x_end = np.array([-700.0, 1e300])
    eps = w.elasticity_exp(x_end)
    ends = (eps - 1.0) * la
    return float(math.exp(max(np.max(inner), np.max(ends))))


def boyd_diagnostic(w, a_grid=(0.01, 0.1, 0.5, 2.0, 10.0, 100.0)):
    out = {}
    for a in a_grid:
        ln = math.log(dilation_norm(w, a))
        # a norm of exactly 1 shows up as 1 + O(eps) after the log-space round trip
        out[a] = float("inf") if abs(ln) < 1e-12 else math.log(1.0 / a) / ln
    return out


def c_zeta_from_k(k):
    return 1.0 / math.gamma(1.0 + k)


@dataclass(frozen=True)
class ConditionReport:
    weight: dict
    k_psi: float
    k_interval: tuple
    A_of_e: float
    c_zeta: float
    cond_exp_index: str
    power_law: dict
    cond_ssz: str
    ssz_limit: float
    cond_easy: str
    easy_ratio_limit: float
    easy_elasticity_limit: float
    dilation_norms: dict
    boyd_diagnostic: dict

    def to_dict(self):
        d = dict(self.__dict__)
        d["k_interval"] = list(self.k_interval)
        d["dilation_norms"] = {str(k): v for k, v in self.dilation_norms.items()}
        d["boyd_diagnostic"] = {str(k): v for k, v in self.boyd_diagnostic.items()}
        d["power_law"] = {str(k): v for k, v in self.power_law.items()}
        return d

    def table(self):
        rows = [
            ("weight", json.dumps(self.weight)),
            ("exp-index condition", self.cond_exp_index),
            ("A_psi(e)", f"{self.A_of_e:.6g}"),
            ("k_psi", f"{self.k_psi:.6g}  [{self.k_interval[0]:.6g}, {self.k_interval[1]:.6g}]"),
            ("C_zeta", f"{self.c_zeta:.6g}"),
            ("ssz condition", f"{self.cond_ssz}  (limit {self.ssz_limit:.6g})"),
            ("easy condition", f"{self.cond_easy}  (psi(2t)/psi(t) -> {self.easy_ratio_limit:.6g}, "
                               f"t psi'/psi -> {self.easy_elasticity_limit:.3g})"),
        ]
        for a, v in self.dilation_norms.items():
            rows.append((f"||D_{a:g}||", f"{v:.8g}"))
        for a, v in self.boyd_diagnostic.items():
            rows.append((f"boyd({a:g})", f"{v:.6g}"))
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


@lru_cache(maxsize=256)
def check_conditions(w):
    x = w.default_log_grid()
    A_e = estimate_A(w, math.e, x)
    power = {}
    if A_e.verdict == "converged":
        exp_index = "holds"
        k = math.log(A_e.value)
        k_int = (math.log(A_e.low), math.log(A_e.high))
        for alpha in (2.0, math.e, 4.0):
            est = estimate_A(w, alpha, x)
            pred = alpha ** k
            ok = est.verdict == "converged" and abs(est.value / pred - 1.0) < 0.02
            power[round(alpha, 6)] = {"estimate": est.value, "predicted": pred, "ok": ok}
        cz = c_zeta_from_k(k)
    else:
        exp_index = "fails_diverges" if A_e.verdict == "diverging" else "inconclusive"
        k, k_int, cz = float("nan"), (float("nan"), float("nan")), float("nan")

    x_ssz = x
    if w.family == "tabulated":
        # stay inside the tabulated range; the linear extension says nothing about limits
        x_ssz = x[x + w.log_psi_exp(x) <= math.log(w.knots[-1])]
    if x_ssz.size >= 5:
        ssz = tail_estimate(x_ssz, _ssz_log_ratio(w, x_ssz))
    else:
        ssz = TailEstimate(float("nan"), float("nan"), float("nan"), float("nan"), "inconclusive")
    if ssz.verdict == "converged":
        cond_ssz = "holds" if abs(ssz.value - 1.0) < 1e-3 else "fails"
    elif ssz.verdict == "diverging":
        cond_ssz = "fails"
    else:
        cond_ssz = "inconclusive"

    two = tail_estimate(x, w.log_psi_shift(x, math.log(2.0)))
    el = w.elasticity_exp(x)
    el_tail = el[-5:]
    el_falls = bool(np.all(np.diff(el_tail) <= 1e-15))
    if two.verdict == "converged" and abs(two.value - 1.0) < 1e-3 and el_tail[-1] < 1e-3 and el_falls:
        cond_easy = "holds"
    elif two.verdict == "converged" and abs(two.value - 1.0) >= 1e-3:
        cond_easy = "fails"
    else:
        cond_easy = "inconclusive"

    norms = {a: dilation_norm(w, a) for a in (0.5, 2.0)}
    return ConditionReport(
        weight=w.to_dict(), k_psi=k, k_interval=k_int, A_of_e=A_e.value, c_zeta=cz,
        cond_exp_index=exp_index, power_law=power, cond_ssz=cond_ssz, ssz_limit=ssz.value,
        cond_easy=cond_easy, easy_ratio_limit=two.value, easy_elasticity_limit=float(el_tail[-1]),
        dilation_norms=norms, boyd_diagnostic=boyd_diagnostic(w))


def c_zeta(w):
    """1 / Gamma(1 + k_psi); needs the exponentiation index."""
    rep = check_conditions(w)
    if rep.cond_exp_index != "holds":
        raise UnsupportedWeightError(f"{w.label()} has no exponentiation index")
    return rep.c_zeta


def k_psi(w):
    rep = check_conditions(w)
    if rep.cond_exp_index != "holds":
        raise UnsupportedWeightError(f"{w.label()} has no exponentiation index")
    return rep.k_psi


def concavity_defect(w, t):
    """Largest positive second divided difference of psi on the grid, relative to psi'."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(w.eval(t))
    s = np.diff(v) / np.diff(t)
    d2 = np.diff(s)
    scale = np.maximum(np.abs(s[:-1]), 1e-300)
    return float(max(0.0, np.max(d2 / scale)))
