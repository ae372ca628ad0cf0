"""Coverage, spectral efficiency and ASE of the typical downlink user.

The Laplace transform of the interference beyond the serving distance is
computed in the normalised form

    -log L = 2*pi*lam_I * [ R^2   int_0^inf y e^{(2-bL)x} / (1 + y e^{-bL x}) p_L(R e^x) dx
                          + Req^2 int_0^inf y e^{(2-bN)x} / (1 + y e^{-bN x}) (1 - p_L(Req e^x)) dx ]

obtained from ``v = R e^x`` (LOS) and ``v = Req e^x`` (NLOS), where
``y = s K_L R^-bL / mu`` and ``Req`` is the NLOS radius matching ``R``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .distance_law import DistanceLaw, distance_law
from .load import FullyLoaded, LoadModel, active_density, interferer_density, reuse_factor
from .propagation import FadingModel, LosProbabilityModel, PathLossParams
from .quadrature import QuadratureSpec, gauss_legendre_panels, integrate

__all__ = [
    "Scenario",
    "CcdfCurve",
    "RateResult",
    "OutageProfile",
    "INNER_SPEC",
    "OUTER_SPEC",
    "laplace_exponent",
    "laplace_interference",
    "conditional_ccdf",
    "sinr_ccdf",
    "ccdf_curve",
    "outage",
    "spectral_efficiency",
    "avg_spectral_efficiency",
    "ase",
]

log = logging.getLogger(__name__)

INNER_SPEC = QuadratureSpec(abs_tol=1e-8, rel_tol=1e-8)
OUTER_SPEC = QuadratureSpec(abs_tol=1e-6, rel_tol=1e-8)
DEFAULT_U_MAX = 40.0

_CHUNK = 2048


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate SINR statistics at one BS density.

    ``noise`` is the AWGN power divided by the per-BS transmit power, in the
    same linear units as the path gains; 0 means interference-limited.
    """

    propagation: PathLossParams
    los_model: LosProbabilityModel
    density: float
    load: LoadModel = field(default_factory=FullyLoaded)
    noise: float = 0.0
    fading: FadingModel = field(default_factory=FadingModel)

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")
        if not self.noise >= 0:
            raise ValueError("noise must be non-negative")

    @property
    def law(self) -> DistanceLaw:
        return distance_law(self.density, self.propagation, self.los_model)

    @property
    def interferer_density(self) -> float:
        return interferer_density(self.load, self.density)

    @property
    def active_density(self) -> float:
        return active_density(self.load, self.density)

    @property
    def reuse(self) -> int:
        return reuse_factor(self.load)

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class CcdfCurve:
    thresholds: np.ndarray
    values: np.ndarray
    scenario: Scenario


@dataclass(frozen=True)
class RateResult:
    value: float
    error: float
    u_max: float
    cap_hit: bool


def _branch(y, r, x, beta, p):
    # y e^{(2-beta)x} / (1 + y e^{-beta x}) * r^2 * p, computed in log space
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        logv = (np.log(y) + (2.0 - beta) * x - np.log1p(y * np.exp(-beta * x))
                + 2.0 * np.log(r))
        val = np.exp(np.minimum(logv, 700.0)) * p
    return np.where(p > 0, val, 0.0)


def _exponent_chunk(scn: Scenario, y, R, spec):
    prop = scn.propagation
    model = scn.los_model
    req = prop.k_eq * R ** prop.beta_eq
    yc, Rc, qc = y[:, None], R[:, None], req[:, None]

    def integrand(x):
        with np.errstate(over="ignore"):
            ex = np.exp(x)[None, :]
            p_los = model(Rc * ex)
            p_nlos = 1.0 - model(qc * ex)
        xx = x[None, :]
        return (_branch(yc, Rc, xx, prop.beta_los, p_los)
                + _branch(yc, qc, xx, prop.beta_nlos, p_nlos))

    scale = 2.0 * math.pi * scn.interferer_density
    res = integrate(lambda x: scale * integrand(x), 0.0, math.inf, spec)
    return np.atleast_1d(res.value)


def laplace_exponent(scn: Scenario, y, R, spec: QuadratureSpec = INNER_SPEC):
    """``-log L_I(s)`` at ``s = mu*y*R^bL/K_L``, broadcasting ``y`` against ``R``."""
    y, R = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(R, dtype=float))
    if np.any(y < 0) or np.any(R < 0):
        raise ValueError("y and R must be non-negative")
    shape = y.shape
    y, R = y.ravel(), R.ravel()
    out = np.zeros(y.size)
    if scn.interferer_density == 0 or y.size == 0:
        return out.reshape(shape) if shape else 0.0
    active = (y > 0) & (R > 0)
    idx = np.nonzero(active)[0]
    # keep chunks homogeneous in R so each shares a compact partition
    idx = idx[np.argsort(R[idx], kind="stable")]
    for start in range(0, idx.size, _CHUNK):
        sel = idx[start:start + _CHUNK]
        out[sel] = _exponent_chunk(scn, y[sel], R[sel], spec)
    return out.reshape(shape) if shape else float(out[0])


def laplace_interference(scn: Scenario, s, R, spec: QuadratureSpec = INNER_SPEC):
    """Laplace transform of the interference at the typical user given ``r = R``."""
    s = np.asarray(s, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be non-negative")
    prop = scn.propagation
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(R > 0, s * prop.k_los * R ** (-prop.beta_los) / scn.fading.mu, 0.0)
    out = np.exp(-np.asarray(laplace_exponent(scn, y, R, spec)))
    return float(out) if out.ndim == 0 else out


def _noise_exponent(scn: Scenario, y, R):
    prop = scn.propagation
    return scn.fading.mu * y * R ** prop.beta_los * scn.noise / prop.k_los


def conditional_ccdf(scn: Scenario, y, R, spec: QuadratureSpec = INNER_SPEC):
    """``P[SINR > y | r = R]``."""
    y, R = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(R, dtype=float))
    if np.any(y < 0) or np.any(R < 0):
        raise ValueError("y and R must be non-negative")
    total = _noise_exponent(scn, y, R) + laplace_exponent(scn, y, R, spec)
    out = np.exp(-np.asarray(total))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4096)
def _ccdf_cached(scn: Scenario, ys: tuple, outer: QuadratureSpec, inner: QuadratureSpec):
    y = np.array(ys, dtype=float)
    law = scn.law

    def integrand(R):
        cond = conditional_ccdf(scn, y[:, None], R[None, :], inner)
        return cond * law.pdf(R)[None, :]

    res = integrate(integrand, 0.0, math.inf, outer, scale=law.median())
    return np.clip(np.atleast_1d(res.value), 0.0, 1.0)


def sinr_ccdf(scn: Scenario, y, outer: QuadratureSpec = OUTER_SPEC,
              inner: QuadratureSpec = INNER_SPEC):
    """``P[SINR > y]`` for a scalar or array of linear thresholds."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("SINR thresholds must be positive")
    vals = _ccdf_cached(scn, tuple(arr.ravel().tolist()), outer, inner)
    vals = vals.reshape(arr.shape)
    return float(vals) if arr.ndim == 0 else vals


def ccdf_curve(scn: Scenario, thresholds, **kw) -> CcdfCurve:
    thresholds = np.asarray(thresholds, dtype=float)
    vals = np.atleast_1d(sinr_ccdf(scn, thresholds, **kw))
    # enforce monotonicity against quadrature noise
    order = np.argsort(thresholds)
    vals_sorted = np.minimum.accumulate(vals[order])
    out = np.empty_like(vals_sorted)
    out[order] = vals_sorted
    return CcdfCurve(thresholds, out, scn)


def outage(scn: Scenario, gamma_th, **kw):
    """``P[SINR <= gamma_th]``."""
    c = sinr_ccdf(scn, gamma_th, **kw)
    return 1.0 - c


@lru_cache(maxsize=1024)
def _rate_cached(scn: Scenario, u_max: float, outer: QuadratureSpec,
                 inner: QuadratureSpec) -> RateResult:
    def integrand(u):
        y = np.expm1(u * math.log(2.0))
        # ccdf is 1 at y=0; nodes are interior so y > 0 here
        return _ccdf_cached(scn, tuple(y.tolist()), outer, inner)

    res = integrate(integrand, 0.0, u_max, outer)
    tail = _ccdf_cached(scn, (float(np.expm1(u_max * math.log(2.0))),), outer, inner)[0]
    cap_hit = bool(tail > 1e-9)
    if cap_hit:
        log.warning("rate integral truncated at u_max=%g with P[C > u_max]=%.3g", u_max, tail)
    return RateResult(float(res.value), float(res.error), u_max, cap_hit)


def spectral_efficiency(scn: Scenario, u_max: float = DEFAULT_U_MAX,
                        outer: QuadratureSpec = OUTER_SPEC,
                        inner: QuadratureSpec = INNER_SPEC) -> RateResult:
    """``E[log2(1 + SINR)]`` with the truncation point and whether it mattered."""
    return _rate_cached(scn, float(u_max), outer, inner)


def avg_spectral_efficiency(scn: Scenario, u_max: float = DEFAULT_U_MAX, **kw) -> float:
    return spectral_efficiency(scn, u_max, **kw).value


def ase(scn: Scenario, rate: float | None = None, **kw) -> float:
    """Area spectral efficiency ``lam_A * E[C] / N`` in bit/s/Hz/km^2."""
    if rate is None:
        rate = avg_spectral_efficiency(scn, **kw)
    return scn.active_density * rate / scn.reuse


class OutageProfile:
    """Outage at one threshold as a cheap function of the noise level.

    Distance law and Laplace factor do not depend on the noise, so they are
    tabulated once on a composite Gauss-Legendre grid in ``log R``; each new
    noise level then costs a single weighted sum.
    """

    def __init__(self, scn: Scenario, gamma_th: float, panel_width: float = 0.1,
                 order: int = 8, tail_eps: float = 1e-13,
                 inner: QuadratureSpec = INNER_SPEC):
        if not gamma_th > 0:
            raise ValueError("gamma_th must be positive")
        self.scenario = scn.replace(noise=0.0)
        self.gamma_th = float(gamma_th)
        law = self.scenario.law
        z_lo = math.log(law.quantile(1.0 - tail_eps))
        z_hi = math.log(law.quantile(tail_eps))
        n_panels = max(1, math.ceil((z_hi - z_lo) / panel_width))
        z, w = gauss_legendre_panels(z_lo, z_hi, n_panels, order)
        R = np.exp(z)
        lap = laplace_exponent(self.scenario, np.full_like(R, self.gamma_th), R, inner)
        self._mass = w * R * law.pdf(R) * np.exp(-lap)
        prop = scn.propagation
        self._noise_coef = scn.fading.mu * self.gamma_th * R ** prop.beta_los / prop.k_los
        self.theta_star = self.theta(0.0)

    def coverage(self, noise: float) -> float:
        return float(np.sum(self._mass * np.exp(-self._noise_coef * noise)))

    def theta(self, noise: float) -> float:
        """Outage probability at normalised noise ``noise``."""
        return 1.0 - self.coverage(noise)
