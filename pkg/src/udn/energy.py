"""Network power consumption, energy efficiency and its closed-form optima.

Power-law fits of throughput and transmit power feed the optimum formulas.
The transmit-power scale constants are only meaningful with density in BS
per m^2 and power in watts, so :func:`fit_power_law` callers that go on to
:func:`optimal_density_full` must convert densities with ``PER_KM2_TO_PER_M2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PER_KM2_TO_PER_M2",
    "PowerConsumptionModel",
    "PowerLawFit",
    "Regime",
    "RegimeClassification",
    "PartialLoadOptimum",
    "total_power",
    "energy_efficiency",
    "fit_power_law",
    "classify_regime",
    "optimal_density_full",
    "optimal_density_partial",
    "ee_full_power_law",
    "total_power_partial_approx",
    "ee_partial_approx",
]

PER_KM2_TO_PER_M2 = 1e-6


@dataclass(frozen=True)
class PowerConsumptionModel:
    p0: float = 10.0      # circuitry power of an active BS, W
    k_rf: float = 10.0    # inverse power-amplifier efficiency
    rho: float = 0.1      # stand-by circuitry fraction

    def __post_init__(self):
        if not self.p0 > 0:
            raise ValueError("p0 must be positive")
        if not self.k_rf >= 1:
            raise ValueError("k_rf must be >= 1")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")


def total_power(model: PowerConsumptionModel, area, density, active, p_tx):
    """Active BSs draw ``p0 + k_rf*p_tx``; dormant ones ``rho*p0``."""
    area, density, active, p_tx = (np.asarray(v, dtype=float)
                                   for v in (area, density, active, p_tx))
    if np.any(active > density * (1 + 1e-12)):
        raise ValueError("active density exceeds deployment density")
    if np.any(area < 0) or np.any(active < 0) or np.any(p_tx < 0):
        raise ValueError("inputs must be non-negative")
    out = (area * active * model.p0 + area * active * p_tx * model.k_rf
           + area * (density - active) * model.rho * model.p0)
    return float(out) if out.ndim == 0 else out


def energy_efficiency(throughput, power):
    """Bits delivered per joule."""
    power = np.asarray(power, dtype=float)
    if np.any(power <= 0):
        raise ValueError("total power must be positive")
    out = np.asarray(throughput, dtype=float) / power
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PowerLawFit:
    a: float
    b: float
    domain: tuple[float, float]
    residual: float          # max |log f - log(a z^b)|
    n_points: int

    def __call__(self, z):
        return self.a * np.asarray(z, dtype=float) ** self.b


def fit_power_law(z, f, domain=None) -> PowerLawFit:
    """Least-squares line through ``(log z, log f)``; returns ``f ~ a z^b``.

    ``domain = (lo, hi)`` keeps points with ``lo <= z <= hi`` (small relative
    slack so grid endpoints are not lost to rounding).
    """
    z = np.asarray(z, dtype=float).ravel()
    f = np.asarray(f, dtype=float).ravel()
    if z.shape != f.shape:
        raise ValueError("z and f must have the same length")
    if domain is not None:
        lo, hi = domain
        if not lo < hi:
            raise ValueError("empty fit domain")
        keep = (z >= lo * (1 - 1e-9)) & (z <= hi * (1 + 1e-9))
        z, f = z[keep], f[keep]
    if z.size < 2 or np.unique(z).size < 2:
        raise ValueError("power-law fit needs at least two distinct points")
    if np.any(z <= 0) or np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise ValueError("power-law fit needs positive finite data")
    lz, lf = np.log(z), np.log(f)
    b, c = np.polyfit(lz, lf, 1)
    resid = float(np.max(np.abs(lf - (c + b * lz))))
    dom = (float(z.min()), float(z.max())) if domain is None else (float(domain[0]), float(domain[1]))
    return PowerLawFit(float(math.exp(c)), float(b), dom, resid, int(z.size))


class Regime(enum.Enum):
    MONOTONE_INCREASING = "monotone_increasing"
    MONOTONE_DECREASING = "monotone_decreasing"
    INTERIOR_MAXIMUM = "interior_maximum"
    DEGENERATE_BOUNDARY = "degenerate_boundary"


@dataclass(frozen=True)
class RegimeClassification:
    regime: Regime
    optimum: float | None = None   # lambda_0 when an interior maximum exists


def classify_regime(alpha: float, delta: float, p0: float | None = None,
                    k_rf: float | None = None, p_t: float | None = None,
                    rtol: float = 1e-12) -> RegimeClassification:
    """Shape of ``T0 l^(alpha-1) / (p0 + k_rf p_t l^delta)`` for ``alpha > 0 > delta``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not delta < 0:
        raise ValueError("delta must be negative")
    if alpha >= 1:
        return RegimeClassification(Regime.MONOTONE_INCREASING)
    if math.isclose(alpha, 1 + delta, rel_tol=rtol, abs_tol=rtol):
        return RegimeClassification(Regime.DEGENERATE_BOUNDARY)
    if alpha < 1 + delta:
        return RegimeClassification(Regime.MONOTONE_DECREASING)
    opt = None
    if None not in (p0, k_rf, p_t):
        opt = optimal_density_full(alpha, delta, p0, k_rf, p_t)
    return RegimeClassification(Regime.INTERIOR_MAXIMUM, opt)


def optimal_density_full(alpha: float, delta: float, p0: float, k_rf: float,
                         p_t: float) -> float:
    """Stationary point of the fully-loaded power-law efficiency.

    Units follow ``p_t``: with ``p_tx = p_t * lam^delta`` in W and ``lam`` in
    m^-2, the result is in m^-2.
    """
    if not (1 + delta < alpha < 1):
        raise ValueError("interior optimum requires 1 + delta < alpha < 1")
    if not (p0 > 0 and k_rf > 0 and p_t > 0):
        raise ValueError("p0, k_rf and p_t must be positive")
    return (p0 * (1 - alpha) / (k_rf * p_t * (alpha - delta - 1))) ** (1.0 / delta)


@dataclass(frozen=True)
class PartialLoadOptimum:
    density: float
    reliable: bool   # density well above the user density


def optimal_density_partial(alpha: float, user_density: float, rho: float,
                            reliability_factor: float = 3.0) -> PartialLoadOptimum:
    """Stationary point of the partially-loaded efficiency approximation.

    Only meaningful well above the user density; ``reliable`` marks
    ``density > reliability_factor * user_density``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if not user_density > 0:
        raise ValueError("user_density must be positive")
    lam = alpha * user_density * (1 - rho) / (rho * (1 - alpha))
    return PartialLoadOptimum(lam, lam > reliability_factor * user_density)


def ee_full_power_law(lam, t0, alpha, p0, k_rf, p_t, delta):
    """Fully-loaded efficiency with power-law throughput and transmit power."""
    lam = np.asarray(lam, dtype=float)
    return t0 * lam ** (alpha - 1) / (p0 + k_rf * p_t * lam**delta)


def total_power_partial_approx(lam, user_density, p0, rho, k_rf=0.0, p_t=0.0, delta=0.0):
    """Per-area total power with ``p_A ~ lam_U/lam``; drop the RF term by default."""
    lam = np.asarray(lam, dtype=float)
    return (user_density * p0 * (1 - rho) + lam * rho * p0
            + user_density * k_rf * p_t * lam**delta)


def ee_partial_approx(lam, t0, alpha, user_density, p0, rho):
    """Partially-loaded efficiency with the transmit power neglected."""
    lam = np.asarray(lam, dtype=float)
    return t0 * lam**alpha / total_power_partial_approx(lam, user_density, p0, rho)
