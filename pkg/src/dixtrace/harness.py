"""Experiment configs, dispatch and flat-file persistence."""
import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__, catalog as cat
from .errors import ConfigError, DomainError
from .extrapolate import equality_criteria, frak_norms
from .rearrange import FiniteProfile, lorentz_norm
from .traces import ScaleGrid, compare_all, karamata_check
from .weight import check_conditions

KINDS = ("psi_report", "lorentz_report", "trace_compare", "karamata", "weyl_compare", "random_suite")

_GRID_DEFAULTS = {
    "trace_compare": {"kind": "exponent", "min": 2.0, "max": 30.0, "points": 32},
    "weyl_compare": {"kind": "exponent", "min": 2.0, "max": 30.0, "points": 32},
    "karamata": {"kind": "direct", "min": 1e-2, "max": 1e6, "points": 48},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    weight: object = "log"
    target: Optional[str] = None          # profile id, CSV path, symbol id or Karamata case
    scale: float = 1.0
    grid: dict = field(default_factory=dict)
    csv: Optional[str] = None
    json: Optional[str] = None
    seed: int = 0
    count: int = 50
    L: float = 12.0
    N: int = 512

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in d:
            raise ConfigError("config needs a 'kind'")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self):
        return asdict(self)

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        cat.weight(self.weight)
        if self.kind in ("lorentz_report", "trace_compare"):
            self.profile()
        if self.kind == "weyl_compare":
            from .weyl import symbol
            symbol(self.target or "inv_harmonic")
            if self.N % 2 or self.N < 8:
                raise ConfigError("N must be even and at least 8")
        if self.kind == "karamata":
            cat.karamata_case(self.target or "linear")
        if self.kind in _GRID_DEFAULTS:
            self.scale_grid()
        return self

    def weight_function(self):
        return cat.weight(self.weight)

    def profile(self):
        t = self.target or "harmonic"
        if t in cat.PROFILES:
            kw = {"scale": self.scale}
            if t == "psi_prime":
                kw["weight"] = self.weight_function()
            return cat.profile(t, **kw)
        if t.endswith(".csv"):
            try:
                return FiniteProfile.from_csv(t).scaled(self.scale)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot load profile {t}: {exc}") from exc
        raise ConfigError(f"unknown profile {t!r}")

    def scale_grid(self):
        gd = dict(_GRID_DEFAULTS.get(self.kind, _GRID_DEFAULTS["trace_compare"]))
        gd.update(self.grid)
        try:
            if gd["kind"] == "exponent":
                return ScaleGrid.exponent(float(gd["min"]), float(gd["max"]), int(gd["points"]))
            if gd["kind"] == "direct":
                return ScaleGrid.direct(float(gd["min"]), float(gd["max"]), int(gd["points"]))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"unknown grid kind {gd['kind']!r}")


@dataclass
class RunReport:
    config: dict
    results: dict
    gaps: dict
    verdicts: dict
    wall_time: float
    version: str = __version__
    rows: list = field(default_factory=list, repr=False)
    header: tuple = field(default_factory=tuple, repr=False)

    def to_dict(self):
        return {"config": self.config, "results": self.results, "gaps": self.gaps,
                "verdicts": self.verdicts, "wall_time": self.wall_time, "version": self.version}


def _clean(x):
    """JSON-safe copy: numpy scalars to float, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def write_csv(path, header, rows):
    """Deterministic CSV: floats written with repr, fixed line terminator."""
    d = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(d, exist_ok=True)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for r in rows:
                wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def write_json(path, obj):
    try:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(_clean(obj), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# experiments


def _psi_report(cfg):
    w = cfg.weight_function()
    rep = check_conditions(w)
    eq = equality_criteria(w)
    d = rep.to_dict()
    rows = [(k, json.dumps(_clean(v), sort_keys=True)) for k, v in sorted(d.items())]
    verdicts = {"cond_exp_index": rep.cond_exp_index, "cond_ssz": rep.cond_ssz, "cond_easy": rep.cond_easy}
    verdicts.update({k: v["verdict"] for k, v in eq.items()})
    return {"conditions": d, "equality_criteria": eq, "table": rep.table()}, {}, verdicts, ("quantity", "value"), rows


def _lorentz_report(cfg):
    w = cfg.weight_function()
    rep = frak_norms(cfg.profile(), w)
    rows = rep.rows()
    gaps = {"upper/lorentz": rep.frak_upper / rep.lorentz if rep.lorentz else 0.0,
            "lorentz/lower": rep.lorentz / rep.frak_lower if rep.frak_lower else 0.0}
    verdicts = {"sandwich": "holds" if rep.sandwich_ok else "violated",
                "embedding": "holds" if rep.embedding_ok else "violated"}
    return rep.to_dict(), gaps, verdicts, ("p", "lp_norm", "lower_ratio", "upper_ratio"), rows


def _trace_compare(cfg):
    w = cfg.weight_function()
    g = cfg.scale_grid()
    res = compare_all(cfg.profile(), w, g)
    f = res["functionals"]
    names = ("partial_sum", "cutoff", "zeta", "heat")
    nan = float("nan")
    rows = [(float(r),) + tuple(float(f[k].values[i]) if k in f else nan for k in names)
            for i, r in enumerate(g.values)]
    out = {"measurable": res["measurable"], "value": res["value"], "gaps": res["gaps"],
           "last_gaps": res["last_gaps"], "skipped": res["skipped"],
           "functionals": {k: e.to_dict() for k, e in f.items()}}
    verdicts = dict(res["verdicts"])
    verdicts["measurable"] = res["measurable"]
    return out, res["gaps"], verdicts, ("scale",) + names, rows


def _karamata(cfg):
    case = cat.karamata_case(cfg.target or "linear")
    g = cfg.scale_grid()
    lhs, rhs, ok = karamata_check(case, g)
    rows = [(float(r), float(a), float(b)) for r, a, b in zip(g.values, lhs.values, rhs.values)]
    gap = abs(lhs.limit - rhs.limit) / abs(rhs.limit) if math.isfinite(rhs.limit) and rhs.limit else float("nan")
    out = {"case": case.name, "k": case.k, "lhs": lhs.to_dict(), "rhs": rhs.to_dict(), "agree": ok}
    return out, {"lhs/rhs": gap}, {"agree": ok, "lhs": lhs.verdict, "rhs": rhs.verdict}, ("r", "lhs", "rhs"), rows


def _weyl_compare(cfg):
    from .weyl import dixmier_compare
    w = cfg.weight_function()
    rep = dixmier_compare(cfg.target or "inv_harmonic", w, cfg.scale_grid(), L=cfg.L, N=cfg.N)
    rows = [(i, float(v)) for i, v in enumerate(rep.spectrum.values)]
    out = rep.to_dict()
    out["zeta"] = rep.zeta.to_dict()
    gaps = {"operator/symbol": rep.gap, "zeta/dixmier": rep.zeta_gap}
    verdicts = {"zeta": rep.zeta.verdict, "lorentz_finite": rep.lorentz_finite}
    return out, gaps, verdicts, ("index", "eigenvalue"), rows


def _random_suite(cfg):
    w = cfg.weight_function()
    rows, bad = [], 0
    for i, prof in enumerate(cat.random_profiles(cfg.count, cfg.seed)):
        rep = frak_norms(prof, w)
        bad += not rep.sandwich_ok
        rows.append((i, rep.frak_upper, rep.lorentz, rep.frak_lower, int(rep.sandwich_ok)))
    out = {"profiles": cfg.count, "violations": bad}
    return (out, {}, {"sandwich": "holds" if bad == 0 else "violated"},
            ("index", "frak_upper", "lorentz", "frak_lower", "sandwich_ok"), rows)


_DISPATCH = {
    "psi_report": _psi_report,
    "lorentz_report": _lorentz_report,
    "trace_compare": _trace_compare,
    "karamata": _karamata,
    "weyl_compare": _weyl_compare,
    "random_suite": _random_suite,
}


def run(config):
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    cfg.validate()
    t0 = time.perf_counter()
    results, gaps, verdicts, header, rows = _DISPATCH[cfg.kind](cfg)
    rep = RunReport(_clean(cfg.to_dict()), _clean(results), _clean(gaps), _clean(verdicts),
                    time.perf_counter() - t0, rows=rows, header=header)
    if cfg.csv:
        write_csv(cfg.csv, header, rows)
    if cfg.json:
        write_json(cfg.json, rep.to_dict())
    return rep


def suite_configs(out_dir, seed=0):
    """The standard battery written by ``suite all``."""
    j = lambda name: os.path.join(out_dir, name)
    cfgs = []
    for wname in cat.WEIGHTS:
        cfgs.append({"kind": "psi_report", "weight": wname, "csv": j(f"psi_{wname}.csv"),
                     "json": j(f"psi_{wname}.json")})
    for prof in ("harmonic", "log_harmonic", "finite_rank", "loglog_oscillating"):
        wname = "log_squared" if prof == "log_harmonic" else "log"
        cfgs.append({"kind": "trace_compare", "weight": wname, "target": prof,
                     "csv": j(f"trace_{prof}.csv"), "json": j(f"trace_{prof}.json")})
    for case in cat.KARAMATA:
        cfgs.append({"kind": "karamata", "target": case, "csv": j(f"karamata_{case}.csv"),
                     "json": j(f"karamata_{case}.json")})
    for wname in ("log", "log_squared", "loglog"):
        cfgs.append({"kind": "lorentz_report", "weight": wname, "target": "harmonic_continuous",
                     "csv": j(f"lorentz_{wname}.csv"), "json": j(f"lorentz_{wname}.json")})
        cfgs.append({"kind": "random_suite", "weight": wname, "seed": seed, "count": 50,
                     "csv": j(f"random_{wname}.csv"), "json": j(f"random_{wname}.json")})
    cfgs.append({"kind": "weyl_compare", "weight": "log", "target": "inv_harmonic",
                 "csv": j("weyl_inv_harmonic.csv"), "json": j("weyl_inv_harmonic.json")})
    return cfgs


def run_suite(out_dir, seed=0):
    summary = {}
    for c in suite_configs(out_dir, seed):
        rep = run(c)
        summary[os.path.basename(c["json"])[:-5]] = {"verdicts": rep.verdicts, "gaps": rep.gaps,
                                                     "wall_time": rep.wall_time}
    write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary


def catalog():
    return cat.catalog()
