"""Network load: which base stations transmit and which interfere."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "FullyLoaded",
    "PartiallyLoaded",
    "FrequencyReuse",
    "LoadModel",
    "prob_active",
    "interferer_density",
    "active_density",
    "reuse_factor",
]

# shape constant of the gamma approximation to PPP Voronoi cell areas
_VORONOI_SHAPE = 3.5


@dataclass(frozen=True)
class FullyLoaded:
    pass


@dataclass(frozen=True)
class PartiallyLoaded:
    user_density: float  # users per km^2

    def __post_init__(self):
        if not self.user_density > 0:
            raise ValueError("user_density must be positive")


@dataclass(frozen=True)
class FrequencyReuse:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("reuse factor must be a positive integer")


LoadModel = Union[FullyLoaded, PartiallyLoaded, FrequencyReuse]


def prob_active(density, user_density):
    """Probability that a BS has at least one user in its cell."""
    density = np.asarray(density, dtype=float)
    user_density = np.asarray(user_density, dtype=float)
    if np.any(density <= 0):
        raise ValueError("density must be positive")
    if np.any(user_density < 0):
        raise ValueError("user_density must be non-negative")
    ratio = user_density / (_VORONOI_SHAPE * density)
    # 1 - (1+x)^-c without cancellation for small x
    p = -np.expm1(-_VORONOI_SHAPE * np.log1p(ratio))
    return float(p) if p.ndim == 0 else p


def reuse_factor(model: LoadModel) -> int:
    return int(model.n) if isinstance(model, FrequencyReuse) else 1


def active_density(model: LoadModel, density: float) -> float:
    """Density of transmitting BSs; reuse keeps every BS on."""
    if not density > 0:
        raise ValueError("density must be positive")
    if isinstance(model, PartiallyLoaded):
        return density * prob_active(density, model.user_density)
    return float(density)


def interferer_density(model: LoadModel, density: float) -> float:
    """Density of BSs sharing the typical user's channel."""
    if not density > 0:
        raise ValueError("density must be positive")
    if isinstance(model, FrequencyReuse):
        return density / model.n
    return active_density(model, density)
