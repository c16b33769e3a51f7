"""Named weights, spectral profiles and Karamata cases."""
import math

import numpy as np

from .errors import ConfigError
from .rearrange import AnalyticProfile, FiniteProfile, HarmonicProfile, SequenceProfile, zero_profile
from .traces import KaramataCase
from .weight import WeightFunction

WEIGHTS = {
    "log": ("iterlog(1,1) = log(1+t)", lambda: WeightFunction.iterlog(1, 1.0)),
    "log_squared": ("iterlog(1,2) = log(1+sqrt t)^2, k_psi = 2", lambda: WeightFunction.iterlog(1, 2.0)),
    "loglog": ("iterlog(2,1) = log(1+log(1+t)), k_psi = 0", lambda: WeightFunction.iterlog(2, 1.0)),
    "exppow_1_quarter": ("exppow(1,1/4): ssz holds, no exponentiation index",
                         lambda: WeightFunction.exppow(1, 0.25)),
    "exppow_1_half": ("exppow(1,1/2): ssz ratio tends to sqrt(e)", lambda: WeightFunction.exppow(1, 0.5)),
    "exppow_1_three_quarters": ("exppow(1,3/4): ssz fails", lambda: WeightFunction.exppow(1, 0.75)),
    "exppow_2_half": ("exppow(2,1/2): nested log inside the power", lambda: WeightFunction.exppow(2, 0.5)),
}


def _log_harmonic(k):
    return np.log(k + 2.0) / k


def _oscillating_mu(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = (2.0 + np.sin(np.log(np.log(np.maximum(t, math.e))))) / np.maximum(t, math.e)
    return np.where(t < math.e, 2.0 / math.e, big)


def _oscillating_cumulative(t):
    # int_e^t (2 + sin(log log s)) / s ds = int_1^x (2 + sin(log v)) dv with x = log t
    t = np.asarray(t, dtype=float)
    x = np.log(np.maximum(t, math.e))
    lx = np.log(x)
    tail = 2.0 * (x - 1.0) + 0.5 * x * (np.sin(lx) - np.cos(lx)) + 0.5
    return np.where(t < math.e, 2.0 / math.e * t, 2.0 + tail)


def _psi_prime_profile(w):
    return AnalyticProfile(lambda s: w.deriv(np.maximum(s, 1e-300)),
                           cumulative=lambda t: w.eval(t), mu0=w.dpsi0(), name="psi_prime")


PROFILES = {
    "harmonic": ("mu_k = C/k (scale C, default 1)", lambda scale=1.0, **_: HarmonicProfile(scale)),
    "harmonic_continuous": ("mu(s) = min(1, 1/s)", lambda scale=1.0, **_: AnalyticProfile(
        lambda s: np.minimum(1.0, 1.0 / np.maximum(s, 1e-300)),
        cumulative=lambda t: np.where(t <= 1.0, t, 1.0 + np.log(np.maximum(t, 1.0))),
        distribution=lambda s: np.where(s < 1.0, 1.0 / s, 0.0),
        mu0=1.0, name="harmonic_continuous", scale=scale)),
    "log_harmonic": ("mu_k = log(k+2)/k, in M_psi for psi = iterlog(1,2)",
                     lambda scale=1.0, **_: SequenceProfile(_log_harmonic, scale, "log_harmonic")),
    "psi_prime": ("mu = psi' of the chosen weight (the normalised element)",
                  lambda weight=None, scale=1.0, **_: _psi_prime_profile(
                      weight or WeightFunction.iterlog()).scaled(scale)),
    "loglog_oscillating": ("mu(t) = (2 + sin(log log t))/t: partial sums never settle",
                           lambda scale=1.0, **_: AnalyticProfile(
                               _oscillating_mu, cumulative=_oscillating_cumulative, mu0=2.0 / math.e,
                               name="loglog_oscillating", scale=scale)),
    "finite_rank": ("c on [0, 1), a rank-one projection scaled by c",
                    lambda scale=1.0, **_: FiniteProfile([0.0, 1.0], [scale])),
    "zero": ("the zero operator", lambda **_: zero_profile()),
}

KARAMATA = {
    "linear": ("beta = t, phi = r, k = 1", lambda: KaramataCase(
        lambda t: np.asarray(t, dtype=float), lambda r: np.asarray(r, dtype=float), 1.0,
        laplace=lambda r: np.asarray(r, dtype=float), name="linear")),
    "quadratic": ("beta = t^2, phi = r^2, k = 2", lambda: KaramataCase(
        lambda t: np.asarray(t, dtype=float) ** 2, lambda r: np.asarray(r, dtype=float) ** 2, 2.0,
        laplace=lambda r: 2.0 * np.asarray(r, dtype=float) ** 2, name="quadratic")),
    "cubic": ("beta = t^3, phi = r^3, k = 3", lambda: KaramataCase(
        lambda t: np.asarray(t, dtype=float) ** 3, lambda r: np.asarray(r, dtype=float) ** 3, 3.0,
        laplace=lambda r: 6.0 * np.asarray(r, dtype=float) ** 3, name="cubic")),
    "perturbed": ("beta = t + sin(t)/2 (increasing, oscillating), phi = r, k = 1",
                  lambda: KaramataCase(
                      lambda t: np.asarray(t, dtype=float) + 0.5 * np.sin(t),
                      lambda r: np.asarray(r, dtype=float), 1.0,
                      laplace=lambda r: np.asarray(r, dtype=float) + 0.5 * r / (1.0 + np.asarray(r) ** 2),
                      name="perturbed")),
}


def weight(name_or_desc):
    if isinstance(name_or_desc, WeightFunction):
        return name_or_desc
    if isinstance(name_or_desc, str) and name_or_desc in WEIGHTS:
        return WEIGHTS[name_or_desc][1]()
    try:
        return WeightFunction.from_dict(name_or_desc)
    except Exception as exc:
        raise ConfigError(f"bad weight {name_or_desc!r}: {exc}") from exc


def profile(name, **kw):
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r}")
    return PROFILES[name][1](**kw)


def karamata_case(name):
    if name not in KARAMATA:
        raise ConfigError(f"unknown Karamata case {name!r}")
    return KARAMATA[name][1]()


def random_profiles(count, seed, length=200):
    """v_k = u_k / k with u_k uniform on [0.5, 1.5], sorted into a profile."""
    from .rearrange import mu_from_values
    rng = np.random.default_rng(seed)
    k = np.arange(1, length + 1, dtype=float)
    return [mu_from_values(rng.uniform(0.5, 1.5, length) / k) for _ in range(count)]


def catalog():
    from .weyl import SYMBOLS
    return {
        "weights": {k: v[0] for k, v in WEIGHTS.items()},
        "weight_families": {
            "iterlog": "psi(t) = L_n(t^(1/beta))^beta with L_1 = log(1+.), L_k = log(1+L_{k-1})",
            "exppow": "psi(t) = exp((log^n t)^beta) beyond C = exp^n(1), linear with psi(C) = e below",
            "tabulated": "piecewise-linear concave interpolation of samples",
        },
        "profiles": {k: v[0] for k, v in PROFILES.items()},
        "symbols": {k: v.description for k, v in SYMBOLS.items()},
        "karamata": {k: v[0] for k, v in KARAMATA.items()},
    }
