"""Density sweeps, CSV persistence and the fit / optimum reports.

A sweep evaluates every requested quantity per density.  Failures are
recorded per row (the column is left empty and a reason code is stored in
``null_reasons``) so the remaining densities still produce output.  Reports
are computed from the rows alone, which is what lets the ``fit`` subcommand
rebuild them bit-identically from a CSV file.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import energy as en
from .config import ExperimentConfig
from .load import PartiallyLoaded
from .montecarlo import SimConfig, simulate_sinr
from .power import PowerSearchError, min_tx_power, noise_ratio
from .quadrature import QuadratureError
from .sinr import OutageProfile, Scenario, ase, outage, spectral_efficiency

__all__ = [
    "SCHEMA_VERSION",
    "COLUMNS",
    "SweepOutput",
    "run_sweep",
    "write_csv",
    "read_csv",
    "fit_report",
    "optimum_report",
    "self_consistent_lambda0",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

COLUMNS = (
    "lambda_per_km2",
    "lambda_active_per_km2",
    "lambda_interf_per_km2",
    "outage",
    "rate_bps_per_hz",
    "ase_bps_per_hz_km2",
    "p_tx_dbm",
    "p_tx_watts",
    "p_total_watts",
    "ee_bits_per_joule",
    "mc_outage",
    "mc_outage_half_width",
    "mc_rate_bps_per_hz",
    "mc_rate_half_width",
    "null_reasons",
)

# which column groups each mode computes
MODES = {
    "sweep": {"analytic", "power", "energy", "mc"},
    "mc": {"mc"},
    "power": {"power"},
    "energy": {"analytic", "power", "energy"},
}


@dataclass
class SweepOutput:
    rows: list[dict]
    n_failed: int

    @property
    def partial_failure(self) -> bool:
        return self.n_failed > 0


def _scenario(cfg: ExperimentConfig, lam: float) -> Scenario:
    scn = Scenario(cfg.propagation, cfg.los_model, lam, cfg.load, fading=cfg.fading)
    if cfg.noise_tx_power_dbm is not None:
        reuse = scn.reuse
        bw = cfg.power.bandwidth_hz if cfg.power else cfg.energy.bandwidth_hz
        psd = cfg.power.noise_psd_dbm_hz if cfg.power else -174.0
        nf = cfg.power.noise_figure_db if cfg.power else 9.0
        p_n = psd + 10 * math.log10(bw / reuse) + nf
        scn = scn.replace(noise=noise_ratio(cfg.noise_tx_power_dbm, p_n))
    return scn


def _row(cfg: ExperimentConfig, lam: float, groups: set, mc_drops, seed) -> tuple[dict, bool]:
    row = {c: None for c in COLUMNS}
    reasons = {}
    failed = False
    scn = _scenario(cfg, lam)
    row["lambda_per_km2"] = lam
    row["lambda_active_per_km2"] = scn.active_density
    row["lambda_interf_per_km2"] = scn.interferer_density

    def fail(cols, exc):
        nonlocal failed
        failed = True
        code = f"error:{type(exc).__name__}"
        log.warning("density %g: %s: %s", lam, code, exc)
        for c in cols:
            reasons[c] = code

    def skip(cols, code):
        for c in cols:
            reasons.setdefault(c, code)

    analytic = ("outage", "rate_bps_per_hz", "ase_bps_per_hz_km2")
    if "analytic" in groups:
        try:
            row["outage"] = outage(scn, cfg.gamma_th)
            rate = spectral_efficiency(scn)
            row["rate_bps_per_hz"] = rate.value
            row["ase_bps_per_hz_km2"] = ase(scn, rate.value)
            if rate.cap_hit:
                reasons["rate_bps_per_hz"] = "warn:rate_cap_hit"
        except (QuadratureError, ValueError, FloatingPointError) as exc:
            fail(analytic, exc)
    else:
        skip(analytic, "not_requested")

    power_cols = ("p_tx_dbm", "p_tx_watts")
    if "power" in groups and cfg.power is not None:
        try:
            res = min_tx_power(scn, cfg.power, OutageProfile(scn, cfg.gamma_th))
            row["p_tx_dbm"] = res.p_tx_dbm
            row["p_tx_watts"] = res.p_tx_watts
        except (PowerSearchError, QuadratureError, ValueError) as exc:
            fail(power_cols, exc)
    elif "power" in groups:
        skip(power_cols, "power_search_disabled")
    else:
        skip(power_cols, "not_requested")

    e_cols = ("p_total_watts", "ee_bits_per_joule")
    if "energy" in groups:
        p_tx = row["p_tx_watts"] if row["p_tx_watts"] is not None else cfg.energy.p_tx_watts
        if p_tx is None:
            skip(e_cols, reasons.get("p_tx_watts", "no_tx_power"))
        else:
            e = cfg.energy
            model = en.PowerConsumptionModel(e.p0_watts, e.k_rf, e.rho)
            p_tot = en.total_power(model, e.area_km2, lam, scn.active_density, p_tx)
            row["p_total_watts"] = p_tot
            if row["ase_bps_per_hz_km2"] is None:
                skip(("ee_bits_per_joule",), reasons.get("ase_bps_per_hz_km2", "no_ase"))
            else:
                thr = e.area_km2 * e.bandwidth_hz * row["ase_bps_per_hz_km2"]
                row["ee_bits_per_joule"] = en.energy_efficiency(thr, p_tot)
    else:
        skip(e_cols, "not_requested")

    mc_cols = ("mc_outage", "mc_outage_half_width", "mc_rate_bps_per_hz", "mc_rate_half_width")
    mc = cfg.monte_carlo
    if "mc" in groups and (mc.enabled or mc_drops is not None):
        try:
            base = mc.seed if seed is None else seed
            # derive a distinct stream per density so rows are independent
            sim = SimConfig.from_scenario(
                scn, drops=mc_drops or mc.drops, radius=mc.radius_km,
                seed=(base * 1_000_003 + _density_key(lam)) % 2**64)
            st = simulate_sinr(sim, [cfg.gamma_th])
            row["mc_outage"] = 1.0 - float(st.ccdf[0])
            row["mc_outage_half_width"] = float(st.half_width[0])
            row["mc_rate_bps_per_hz"] = st.mean_rate
            row["mc_rate_half_width"] = st.mean_rate_half_width
        except (QuadratureError, ValueError) as exc:
            fail(mc_cols, exc)
    elif "mc" in groups:
        skip(mc_cols, "mc_disabled")
    else:
        skip(mc_cols, "not_requested")

    row["null_reasons"] = ";".join(f"{k}={v}" for k, v in sorted(reasons.items())
                                   if row[k] is None or v.startswith("warn:"))
    return row, failed


def _density_key(lam: float) -> int:
    return int.from_bytes(np.float64(lam).tobytes(), "little")


def run_sweep(cfg: ExperimentConfig, mode: str = "sweep", threads: int = 1,
              mc_drops: int | None = None, seed: int | None = None) -> SweepOutput:
    """Evaluate every configured density; rows are returned in density order."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if not cfg.densities:
        raise ValueError("empty density list")
    groups = MODES[mode]
    if mode == "mc" and mc_drops is None:
        mc_drops = cfg.monte_carlo.drops

    def work(lam):
        return _row(cfg, float(lam), groups, mc_drops, seed)

    if threads == 1:
        results = [work(lam) for lam in cfg.densities]
    else:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, cfg.densities))
    rows = [r for r, _ in results]
    return SweepOutput(rows, sum(1 for _, f in results if f))


# -- CSV ---------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows, fh=None) -> str:
    """Serialise rows; floats use ``repr`` so re-reading is exact."""
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_csv(text: str) -> list[dict]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schema_version="):
        raise ValueError("missing schema_version header")
    version = int(lines[0].split("=", 1)[1])
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}")
    reader = csv.DictReader(lines[1:])
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError("unexpected CSV columns")
    rows = []
    for rec in reader:
        row = {}
        for c in COLUMNS:
            v = rec[c]
            row[c] = v if c == "null_reasons" else (float(v) if v != "" else None)
        rows.append(row)
    return rows


# -- reports -----------------------------------------------------------------

def _series(rows, col):
    pts = [(r["lambda_per_km2"], r[col]) for r in rows if r[col] is not None and r[col] > 0]
    return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])


def _fits(rows, col, intervals, per_m2):
    lam, val = _series(rows, col)
    scale = en.PER_KM2_TO_PER_M2 if per_m2 else 1.0
    out = []
    for lo, hi in intervals:
        try:
            out.append(((lo, hi), en.fit_power_law(lam * scale, val, (lo * scale, hi * scale))))
        except ValueError as exc:
            out.append(((lo, hi), str(exc)))
    return out


def _ase_fits(rows, cfg):
    return _fits(rows, "ase_bps_per_hz_km2", cfg.fits.ase_intervals_per_km2, False)


def _power_fits(rows, cfg):
    return _fits(rows, "p_tx_watts", cfg.fits.power_intervals_per_km2, True)


def fit_report(rows, cfg: ExperimentConfig) -> str:
    """Power-law fits of ASE (per km^2) and transmit power (W vs BS per m^2)."""
    lines = ["# fit report", f"# schema_version={SCHEMA_VERSION}",
             "quantity,lambda_lo_per_km2,lambda_hi_per_km2,exponent,scale,max_log_residual,points"]
    for name, fits in (("ase", _ase_fits(rows, cfg)), ("p_tx_watts_vs_per_m2", _power_fits(rows, cfg))):
        for (lo, hi), f in fits:
            if isinstance(f, str):
                lines.append(f"{name},{lo!r},{hi!r},,,,0  # {f}")
            else:
                lines.append(f"{name},{lo!r},{hi!r},{f.b!r},{f.a!r},{f.residual!r},{f.n_points}")
    return "\n".join(lines) + "\n"


def _argmax_density(rows, col):
    lam, val = _series(rows, col)
    if lam.size == 0:
        return None
    return float(lam[int(np.argmax(val))])


def optimum_report(rows, cfg: ExperimentConfig) -> str:
    """Regime classification, closed-form optima and the discrete argmax of EE."""
    e = cfg.energy
    lines = ["# optimum report", f"# schema_version={SCHEMA_VERSION}"]
    arg = _argmax_density(rows, "ee_bits_per_joule")
    lines.append(f"ee_argmax_per_km2={arg!r}")
    ase_fits = _ase_fits(rows, cfg)
    if isinstance(cfg.load, PartiallyLoaded):
        lam_u = cfg.load.user_density
        lines.append("ase_interval_per_km2,alpha,lambda_star_per_km2,reliable,inside_interval")
        for (lo, hi), fa in ase_fits:
            if isinstance(fa, str) or not 0 < fa.b < 1:
                lines.append(f"[{lo!r};{hi!r}],{'' if isinstance(fa, str) else repr(fa.b)},,,")
                continue
            opt = en.optimal_density_partial(fa.b, lam_u, e.rho)
            inside = lo <= opt.density <= hi
            lines.append(f"[{lo!r};{hi!r}],{fa.b!r},{opt.density!r},{opt.reliable},{inside}")
        above = _local_maxima(rows, lam_u)
        lines.append(f"ee_local_maxima_above_user_density={above!r}")
        return "\n".join(lines) + "\n"

    lines.append("ase_interval_per_km2,power_interval_per_km2,alpha,delta,regime,"
                 "lambda0_per_km2,self_consistent")
    for (alo, ahi), fa in ase_fits:
        for (plo, phi), fd in _power_fits(rows, cfg):
            if isinstance(fa, str) or isinstance(fd, str):
                continue
            try:
                c = en.classify_regime(fa.b, fd.b, e.p0_watts, e.k_rf, fd.a)
            except ValueError as exc:
                lines.append(f"[{alo!r};{ahi!r}],[{plo!r};{phi!r}],{fa.b!r},{fd.b!r},invalid,,  # {exc}")
                continue
            lam0 = None if c.optimum is None else c.optimum / en.PER_KM2_TO_PER_M2
            ok = lam0 is not None and alo <= lam0 <= ahi and plo <= lam0 <= phi
            lines.append(f"[{alo!r};{ahi!r}],[{plo!r};{phi!r}],{fa.b!r},{fd.b!r},"
                         f"{c.regime.value},{'' if lam0 is None else repr(lam0)},{ok}")
    return "\n".join(lines) + "\n"


def _local_maxima(rows, floor):
    lam, val = _series(rows, "ee_bits_per_joule")
    return [float(lam[k]) for k in range(1, lam.size - 1)
            if lam[k] > floor and val[k] > val[k - 1] and val[k] >= val[k + 1]]


def self_consistent_lambda0(rows, cfg: ExperimentConfig):
    """Closed-form optima whose value falls inside both of its fit intervals."""
    e = cfg.energy
    out = []
    for (alo, ahi), fa in _ase_fits(rows, cfg):
        for (plo, phi), fd in _power_fits(rows, cfg):
            if isinstance(fa, str) or isinstance(fd, str):
                continue
            try:
                c = en.classify_regime(fa.b, fd.b, e.p0_watts, e.k_rf, fd.a)
            except ValueError:
                continue
            if c.optimum is None:
                continue
            lam0 = c.optimum / en.PER_KM2_TO_PER_M2
            if alo <= lam0 <= ahi and plo <= lam0 <= phi:
                out.append(lam0)
    return out
