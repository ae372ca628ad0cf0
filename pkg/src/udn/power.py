"""Minimum per-BS transmit power that makes the network interference-limited.

The search starts at the receiver noise power and climbs in coarse-to-fine
dB steps until the outage is within ``delta_theta`` of its noise-free value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .sinr import OutageProfile, Scenario

__all__ = [
    "PowerSearchConfig",
    "PowerResult",
    "PowerSearchError",
    "noise_power_dbm",
    "noise_ratio",
    "min_tx_power",
    "dbm_to_watts",
    "watts_to_dbm",
]


class PowerSearchError(RuntimeError):
    """The step loop hit its iteration cap; carries the last (power, outage)."""

    def __init__(self, message, p_dbm, theta):
        super().__init__(message)
        self.p_dbm = p_dbm
        self.theta = theta


@dataclass(frozen=True)
class PowerSearchConfig:
    gamma_th: float                       # linear SINR threshold
    delta_theta: float = 1e-3             # absolute outage tolerance
    steps_db: tuple[float, ...] = (5.0, 1.0, 0.2, 0.05)
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 9.0
    noise_psd_dbm_hz: float = -174.0
    max_steps_per_level: int = 10_000

    def __post_init__(self):
        steps = tuple(float(s) for s in self.steps_db)
        object.__setattr__(self, "steps_db", steps)
        if not steps or any(s <= 0 for s in steps):
            raise ValueError("power steps must be positive")
        if any(b >= a for a, b in zip(steps, steps[1:])):
            raise ValueError("power steps must be strictly decreasing")
        if not 0.0 < self.delta_theta < 1.0:
            raise ValueError("delta_theta must lie in (0, 1)")
        if not self.gamma_th > 0:
            raise ValueError("gamma_th must be positive")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")
        if self.max_steps_per_level < 1:
            raise ValueError("max_steps_per_level must be >= 1")


@dataclass(frozen=True)
class PowerResult:
    p_tx_dbm: float
    theta_star: float
    theta_achieved: float
    iterations: int
    trajectory: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    @property
    def p_tx_watts(self) -> float:
        return dbm_to_watts(self.p_tx_dbm)


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w) + 30.0


def noise_power_dbm(config: PowerSearchConfig, reuse: int = 1) -> float:
    """Thermal noise over the per-channel bandwidth ``BW/N``, plus noise figure."""
    if reuse < 1:
        raise ValueError("reuse factor must be >= 1")
    return (config.noise_psd_dbm_hz + 10.0 * math.log10(config.bandwidth_hz / reuse)
            + config.noise_figure_db)


def noise_ratio(p_tx_dbm: float, p_noise_dbm: float) -> float:
    """Noise-to-transmit power ratio, the ``noise`` field of :class:`Scenario`."""
    return 10.0 ** ((p_noise_dbm - p_tx_dbm) / 10.0)


def min_tx_power(scenario: Scenario, config: PowerSearchConfig,
                 profile: OutageProfile | None = None) -> PowerResult:
    """Smallest transmit power (dBm, on the finest step grid) meeting the outage criterion.

    Step order: after each granularity level the last
    increment is removed before refining, even if no increment was made.
    """
    if profile is None:
        profile = OutageProfile(scenario, config.gamma_th)
    p_noise = noise_power_dbm(config, scenario.reuse)
    theta_star = profile.theta_star

    def theta(p_dbm):
        return profile.theta(noise_ratio(p_dbm, p_noise))

    p_curr = p_noise
    p_fin = p_curr
    theta_fin = theta(p_curr)
    iterations = 1
    trajectory = [(p_curr, theta_fin)]
    for step in config.steps_db:
        th = theta(p_curr)
        iterations += 1
        n = 0
        while abs(theta_star - th) > config.delta_theta:
            if n >= config.max_steps_per_level:
                raise PowerSearchError(
                    f"no convergence after {n} steps of {step} dB", p_curr, th)
            p_curr += step
            th = theta(p_curr)
            iterations += 1
            n += 1
            trajectory.append((p_curr, th))
            p_fin, theta_fin = p_curr, th
        p_curr -= step
    return PowerResult(p_fin, theta_star, theta_fin, iterations, tuple(trajectory))
