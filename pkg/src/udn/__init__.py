"""Analytical and Monte Carlo performance model of dense LOS/NLOS cellular networks.

Distances are in km and densities in BS per km^2 throughout; path gains are
linear.  The main entry points are :class:`~udn.sinr.Scenario` with
:func:`~udn.sinr.sinr_ccdf`, :func:`~udn.sinr.ase`,
:func:`~udn.power.min_tx_power` and :func:`~udn.montecarlo.simulate_sinr`.
"""

from .distance_law import DistanceLaw, distance_law
from .load import FrequencyReuse, FullyLoaded, PartiallyLoaded, prob_active
from .power import PowerResult, PowerSearchConfig, min_tx_power
from .propagation import (
    REFERENCE_LOS_NLOS,
    REFERENCE_SINGLE_SLOPE,
    Constant,
    Exp,
    ExpSquare,
    FadingModel,
    PathLossParams,
    ThreeGpp,
)
from .sinr import Scenario, ase, avg_spectral_efficiency, outage, sinr_ccdf

__all__ = [
    "DistanceLaw", "distance_law",
    "FrequencyReuse", "FullyLoaded", "PartiallyLoaded", "prob_active",
    "PowerResult", "PowerSearchConfig", "min_tx_power",
    "REFERENCE_LOS_NLOS", "REFERENCE_SINGLE_SLOPE", "Constant", "Exp", "ExpSquare",
    "FadingModel", "PathLossParams", "ThreeGpp",
    "Scenario", "ase", "avg_spectral_efficiency", "outage", "sinr_ccdf",
]

__version__ = "0.1.0"
