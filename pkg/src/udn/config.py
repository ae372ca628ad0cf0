"""JSON experiment configuration with unit-suffixed keys.

Validation is aggregated: every problem found is reported as a
:class:`Diagnostic` anchored to the line of the offending key (or of the
enclosing object when the key is missing), and :class:`ConfigError` carries
the full list.

Minimal document::

    {
      "scenario": {
        "propagation": {"los_loss_1km_db": 103.8, "los_exponent": 2.09,
                        "nlos_loss_1km_db": 145.4, "nlos_exponent": 3.75},
        "los_model": {"type": "exp_square", "scale_km": 0.0825}
      },
      "densities": {"min_per_km2": 1, "max_per_km2": 10000, "points": 30}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .load import FrequencyReuse, FullyLoaded, LoadModel, PartiallyLoaded
from .power import PowerSearchConfig
from .propagation import (
    Constant,
    Exp,
    ExpSquare,
    FadingModel,
    LosProbabilityModel,
    PathLossParams,
    ThreeGpp,
)

__all__ = [
    "Diagnostic",
    "ConfigError",
    "EnergyConfig",
    "MonteCarloConfig",
    "OutputConfig",
    "FitConfig",
    "ExperimentConfig",
    "validate_config",
    "load_config",
]


@dataclass(frozen=True)
class Diagnostic:
    line: int
    path: str
    message: str

    def __str__(self):
        return f"line {self.line}: {self.path}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class EnergyConfig:
    p0_watts: float = 10.0
    k_rf: float = 10.0
    rho: float = 0.1
    area_km2: float = 1.0
    bandwidth_hz: float = 10e6
    p_tx_watts: float | None = None     # fixed power instead of the search


@dataclass(frozen=True)
class MonteCarloConfig:
    enabled: bool = False
    drops: int = 10_000
    seed: int = 0
    radius_km: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    csv: str = "sweep.csv"
    fit_report: str = "fits.txt"
    optimum_report: str = "optimum.txt"


DEFAULT_ASE_INTERVALS = ((1.0, 50.0), (50.0, 500.0), (500.0, 1e4))
DEFAULT_POWER_INTERVALS = ((1.0, 60.0), (60.0, 300.0), (300.0, 1e4))


@dataclass(frozen=True)
class FitConfig:
    ase_intervals_per_km2: tuple = DEFAULT_ASE_INTERVALS
    power_intervals_per_km2: tuple = DEFAULT_POWER_INTERVALS


@dataclass(frozen=True)
class ExperimentConfig:
    propagation: PathLossParams
    los_model: LosProbabilityModel
    densities: tuple
    fading: FadingModel = field(default_factory=FadingModel)
    load: LoadModel = field(default_factory=FullyLoaded)
    threshold_db: float = -8.0
    noise_tx_power_dbm: float | None = None    # None -> interference limited
    power: PowerSearchConfig | None = None
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    fits: FitConfig = field(default_factory=FitConfig)
    monte_carlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def gamma_th(self) -> float:
        return 10.0 ** (self.threshold_db / 10.0)


# -- locating keys in the raw text -------------------------------------------

class _Locator:
    """Maps a key path to a 1-based line by scanning the raw JSON text."""

    def __init__(self, text: str):
        self.text = text

    def line(self, path) -> int:
        pos = 0
        found = 0
        for key in path:
            if isinstance(key, int):
                continue
            i = self.text.find(json.dumps(key), pos)
            if i < 0:
                break
            pos = i + 1
            found = i
        return self.text.count("\n", 0, found) + 1


class _Checker:
    def __init__(self, text):
        self.loc = _Locator(text)
        self.diags: list[Diagnostic] = []

    def error(self, path, message):
        self.diags.append(Diagnostic(self.loc.line(path), ".".join(map(str, path)) or "<root>",
                                     message))

    def obj(self, raw, path, allowed):
        if not isinstance(raw, dict):
            self.error(path, "expected an object")
            return {}
        for k in raw:
            if k not in allowed:
                self.error(path + [k], f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return raw

    def number(self, raw, path, key, *, default=None, required=False, lo=None, hi=None,
               lo_open=False, hi_open=False, integer=False):
        if key not in raw:
            if required:
                self.error(path, f"missing required field '{key}'")
            return default
        v = raw[key]
        p = path + [key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.error(p, "expected a number")
            return default
        if integer and int(v) != v:
            self.error(p, "expected an integer")
            return default
        if not math.isfinite(v):
            self.error(p, "must be finite")
            return default
        if lo is not None and (v <= lo if lo_open else v < lo):
            self.error(p, f"value {v} out of range: must be {'>' if lo_open else '>='} {lo}")
            return default
        if hi is not None and (v >= hi if hi_open else v > hi):
            self.error(p, f"value {v} out of range: must be {'<' if hi_open else '<='} {hi}")
            return default
        return int(v) if integer else float(v)


_TOP = {"scenario", "densities", "load", "outage", "noise", "power_search", "energy",
        "fits", "monte_carlo", "output"}


def _propagation(ck, raw, path):
    raw = ck.obj(raw, path, {"los_loss_1km_db", "los_exponent", "nlos_loss_1km_db",
                             "nlos_exponent"})
    a_l = ck.number(raw, path, "los_loss_1km_db", required=True)
    b_l = ck.number(raw, path, "los_exponent", required=True, lo=0, lo_open=True)
    a_n = ck.number(raw, path, "nlos_loss_1km_db", required=True)
    b_n = ck.number(raw, path, "nlos_exponent", required=True, lo=0, lo_open=True)
    if None in (a_l, b_l, a_n, b_n):
        return None
    if b_n < b_l:
        ck.error(path + ["nlos_exponent"], "must be >= los_exponent")
        return None
    return PathLossParams.from_db(a_l, b_l, a_n, b_n)


def _los_model(ck, raw, path):
    if not isinstance(raw, dict):
        ck.error(path, "expected an object")
        return None
    kind = raw.get("type")
    if kind == "exp_square" or kind == "exp":
        ck.obj(raw, path, {"type", "scale_km"})
        L = ck.number(raw, path, "scale_km", required=True, lo=0, lo_open=True)
        return None if L is None else (ExpSquare(L) if kind == "exp_square" else Exp(L))
    if kind == "three_gpp":
        ck.obj(raw, path, {"type", "d0_km", "d1_km"})
        d0 = ck.number(raw, path, "d0_km", required=True, lo=0, lo_open=True)
        d1 = ck.number(raw, path, "d1_km", required=True, lo=0, lo_open=True)
        return None if None in (d0, d1) else ThreeGpp(d0, d1)
    if kind == "constant":
        ck.obj(raw, path, {"type", "probability"})
        p = ck.number(raw, path, "probability", required=True, lo=0, hi=1)
        return None if p is None else Constant(p)
    ck.error(path + ["type"] if "type" in raw else path,
             f"unknown LOS model type {kind!r} (expected exp_square, exp, three_gpp, constant)")
    return None


def _densities(ck, raw, path):
    raw = ck.obj(raw, path, {"values_per_km2", "min_per_km2", "max_per_km2", "points",
                             "extra_per_km2"})
    vals = []
    if "values_per_km2" in raw:
        v = raw["values_per_km2"]
        if not isinstance(v, list) or not v:
            ck.error(path + ["values_per_km2"], "expected a non-empty list of densities")
            return None
        for i, x in enumerate(v):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0:
                ck.error(path + ["values_per_km2", i], f"density {x!r} must be a positive number")
                return None
        vals = [float(x) for x in v]
    else:
        lo = ck.number(raw, path, "min_per_km2", required=True, lo=0, lo_open=True)
        hi = ck.number(raw, path, "max_per_km2", required=True, lo=0, lo_open=True)
        n = ck.number(raw, path, "points", required=True, lo=1, integer=True)
        if None in (lo, hi, n):
            return None
        if hi < lo:
            ck.error(path + ["max_per_km2"], "must be >= min_per_km2")
            return None
        vals = np.logspace(math.log10(lo), math.log10(hi), n).tolist() if n > 1 else [lo]
    extra = raw.get("extra_per_km2", [])
    if not isinstance(extra, list) or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0 for x in extra):
        ck.error(path + ["extra_per_km2"], "expected a list of positive densities")
        return None
    return tuple(sorted(set(vals) | {float(x) for x in extra}))


def _load(ck, raw, path):
    raw = ck.obj(raw, path, {"type", "user_density_per_km2", "reuse_n"})
    kind = raw.get("type", "full")
    reuse = ck.number(raw, path, "reuse_n", default=1, lo=1, integer=True)
    if kind == "full":
        return FrequencyReuse(reuse) if reuse and reuse > 1 else FullyLoaded()
    if kind == "partial":
        lam_u = ck.number(raw, path, "user_density_per_km2", required=True, lo=0, lo_open=True)
        if reuse is not None and reuse > 1:
            ck.error(path + ["reuse_n"],
                     "partial load cannot be combined with frequency reuse > 1")
            return None
        return None if lam_u is None else PartiallyLoaded(lam_u)
    if kind == "reuse":
        if "reuse_n" not in raw:
            ck.error(path, "missing required field 'reuse_n'")
            return None
        return None if reuse is None else FrequencyReuse(reuse)
    ck.error(path + ["type"], f"unknown load type {kind!r} (expected full, partial, reuse)")
    return None


def _power(ck, raw, path, gamma_th):
    raw = ck.obj(raw, path, {"enabled", "delta_theta", "steps_db", "bandwidth_hz",
                             "noise_figure_db", "noise_psd_dbm_per_hz", "max_steps_per_level"})
    if not raw.get("enabled", True):
        return None
    kw = {}
    dt = ck.number(raw, path, "delta_theta", default=1e-3, lo=0, hi=1, lo_open=True, hi_open=True)
    bw = ck.number(raw, path, "bandwidth_hz", default=10e6, lo=0, lo_open=True)
    nf = ck.number(raw, path, "noise_figure_db", default=9.0)
    psd = ck.number(raw, path, "noise_psd_dbm_per_hz", default=-174.0)
    cap = ck.number(raw, path, "max_steps_per_level", default=10_000, lo=1, integer=True)
    steps = raw.get("steps_db", [5.0, 1.0, 0.2, 0.05])
    if (not isinstance(steps, list) or not steps
            or any(isinstance(s, bool) or not isinstance(s, (int, float)) or s <= 0 for s in steps)
            or any(b >= a for a, b in zip(steps, steps[1:]))):
        ck.error(path + ["steps_db"], "expected a strictly decreasing list of positive steps")
        return None
    if None in (dt, bw, nf, psd, cap) or gamma_th is None:
        return None
    kw.update(delta_theta=dt, steps_db=tuple(float(s) for s in steps), bandwidth_hz=bw,
              noise_figure_db=nf, noise_psd_dbm_hz=psd, max_steps_per_level=cap)
    return PowerSearchConfig(gamma_th=gamma_th, **kw)


def _energy(ck, raw, path):
    raw = ck.obj(raw, path, {"p0_watts", "k_rf", "rho", "area_km2", "bandwidth_hz",
                             "p_tx_watts"})
    vals = dict(
        p0_watts=ck.number(raw, path, "p0_watts", default=10.0, lo=0, lo_open=True),
        k_rf=ck.number(raw, path, "k_rf", default=10.0, lo=1),
        rho=ck.number(raw, path, "rho", default=0.1, lo=0, hi=1, lo_open=True, hi_open=True),
        area_km2=ck.number(raw, path, "area_km2", default=1.0, lo=0, lo_open=True),
        bandwidth_hz=ck.number(raw, path, "bandwidth_hz", default=10e6, lo=0, lo_open=True),
    )
    p_tx = ck.number(raw, path, "p_tx_watts", default=None, lo=0)
    if any(v is None for v in vals.values()):
        return None
    return EnergyConfig(p_tx_watts=p_tx, **vals)


def _intervals(ck, raw, path, key, default):
    if key not in raw:
        return default
    v = raw[key]
    ok = isinstance(v, list) and v and all(
        isinstance(iv, list) and len(iv) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in iv)
        and iv[0] < iv[1] for iv in v)
    if not ok:
        ck.error(path + [key], "expected a list of [low, high] pairs with 0 < low < high")
        return None
    return tuple((float(a), float(b)) for a, b in v)


def validate_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON document; raises :class:`ConfigError`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([Diagnostic(exc.lineno, "<root>", f"invalid JSON: {exc.msg}")]) from None
    ck = _Checker(text)
    raw = ck.obj(raw, [], _TOP)

    prop = los = dens = None
    fading = FadingModel()
    if "scenario" not in raw:
        ck.error([], "missing required field 'scenario'")
    else:
        scn = ck.obj(raw["scenario"], ["scenario"], {"propagation", "los_model", "fading_mu"})
        if "propagation" in scn:
            prop = _propagation(ck, scn["propagation"], ["scenario", "propagation"])
        else:
            ck.error(["scenario"], "missing required field 'propagation'")
        if "los_model" in scn:
            los = _los_model(ck, scn["los_model"], ["scenario", "los_model"])
        else:
            ck.error(["scenario"], "missing required field 'los_model'")
        mu = ck.number(scn, ["scenario"], "fading_mu", default=1.0, lo=0, lo_open=True)
        if mu is not None:
            fading = FadingModel(mu)
    if "densities" not in raw:
        ck.error([], "missing required field 'densities'")
    else:
        dens = _densities(ck, raw["densities"], ["densities"])

    load = _load(ck, raw.get("load", {}), ["load"])
    out_raw = ck.obj(raw.get("outage", {}), ["outage"], {"threshold_db"})
    th_db = ck.number(out_raw, ["outage"], "threshold_db", default=-8.0)
    noise_raw = ck.obj(raw.get("noise", {}), ["noise"], {"tx_power_dbm"})
    noise_dbm = ck.number(noise_raw, ["noise"], "tx_power_dbm", default=None)

    gamma = None if th_db is None else 10.0 ** (th_db / 10.0)
    power = _power(ck, raw.get("power_search", {"enabled": False}), ["power_search"], gamma)
    energy = _energy(ck, raw.get("energy", {}), ["energy"])

    fits_raw = ck.obj(raw.get("fits", {}), ["fits"],
                      {"ase_intervals_per_km2", "power_intervals_per_km2"})
    ase_iv = _intervals(ck, fits_raw, ["fits"], "ase_intervals_per_km2", DEFAULT_ASE_INTERVALS)
    pw_iv = _intervals(ck, fits_raw, ["fits"], "power_intervals_per_km2", DEFAULT_POWER_INTERVALS)

    mc_raw = ck.obj(raw.get("monte_carlo", {}), ["monte_carlo"],
                    {"enabled", "drops", "seed", "radius_km"})
    enabled = mc_raw.get("enabled", False)
    if not isinstance(enabled, bool):
        ck.error(["monte_carlo", "enabled"], "expected true or false")
        enabled = False
    mc = MonteCarloConfig(
        enabled=enabled,
        drops=ck.number(mc_raw, ["monte_carlo"], "drops", default=10_000, lo=1, integer=True) or 1,
        seed=ck.number(mc_raw, ["monte_carlo"], "seed", default=0, lo=0, hi=2**64 - 1,
                       integer=True) or 0,
        radius_km=ck.number(mc_raw, ["monte_carlo"], "radius_km", default=None, lo=0,
                            lo_open=True),
    )

    o_raw = ck.obj(raw.get("output", {}), ["output"], {"csv", "fit_report", "optimum_report"})
    for k in o_raw:
        if not isinstance(o_raw[k], str) or not o_raw[k]:
            ck.error(["output", k], "expected a non-empty file name")
    output = OutputConfig(**{k: v for k, v in o_raw.items() if isinstance(v, str) and v})

    if ck.diags:
        raise ConfigError(ck.diags)
    return ExperimentConfig(
        propagation=prop, los_model=los, densities=dens, fading=fading, load=load,
        threshold_db=th_db, noise_tx_power_dbm=noise_dbm, power=power, energy=energy,
        fits=FitConfig(ase_iv, pw_iv), monte_carlo=mc, output=output,
    )


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return validate_config(fh.read())


def config_to_dict(cfg: ExperimentConfig) -> dict[str, Any]:
    """Short human-readable summary used in report headers."""
    return {
        "propagation": repr(cfg.propagation),
        "los_model": repr(cfg.los_model),
        "load": repr(cfg.load),
        "threshold_db": cfg.threshold_db,
        "densities": len(cfg.densities),
    }
