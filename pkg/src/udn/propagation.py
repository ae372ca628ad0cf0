"""Path loss, LOS probability and the NLOS-to-LOS equivalent-distance map.

Distances are in kilometres.  Gains are linear and dimensionless: a link at
distance ``d`` has mean received-to-transmitted power ratio ``k * d**-beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "PathLossParams",
    "FadingModel",
    "ThreeGpp",
    "ExpSquare",
    "Exp",
    "Constant",
    "LosProbabilityModel",
    "los_probability",
    "path_gain",
    "equivalent_distance",
    "equivalent_distance_inverse",
    "calibrate_exp_square_scale",
    "REFERENCE_LOS_NLOS",
    "REFERENCE_SINGLE_SLOPE",
    "REFERENCE_D0_KM",
    "REFERENCE_D1_KM",
    "REFERENCE_L_KM",
]


def _as_distance(d):
    arr = np.asarray(d, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("distance must be non-negative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class PathLossParams:
    """Dual-slope LOS/NLOS path-loss constants (linear gains at 1 km)."""

    k_los: float
    beta_los: float
    k_nlos: float
    beta_nlos: float

    def __post_init__(self):
        if not (self.k_los > 0 and self.k_nlos > 0):
            raise ValueError("k_los and k_nlos must be positive")
        if not self.beta_los > 0:
            raise ValueError("beta_los must be positive")
        if self.beta_nlos < self.beta_los:
            raise ValueError("beta_nlos must be >= beta_los")

    @classmethod
    def from_db(cls, los_loss_db: float, beta_los: float,
                nlos_loss_db: float, beta_nlos: float) -> "PathLossParams":
        """Build from path losses in dB at 1 km, ``PL = A + 10*beta*log10(d_km)``."""
        return cls(10.0 ** (-los_loss_db / 10.0), beta_los,
                   10.0 ** (-nlos_loss_db / 10.0), beta_nlos)

    @classmethod
    def single_slope(cls, loss_db: float, beta: float) -> "PathLossParams":
        return cls.from_db(loss_db, beta, loss_db, beta)

    @property
    def k_eq(self) -> float:
        return (self.k_nlos / self.k_los) ** (1.0 / self.beta_nlos)

    @property
    def beta_eq(self) -> float:
        return self.beta_los / self.beta_nlos

    @property
    def is_single_slope(self) -> bool:
        return self.k_los == self.k_nlos and self.beta_los == self.beta_nlos


@dataclass(frozen=True)
class FadingModel:
    """Rayleigh fading; the received power factor is exponential with rate ``mu``."""

    mu: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class ThreeGpp:
    """3GPP pico-cell LOS probability with parameters ``d0``, ``d1`` (km)."""

    d0: float
    d1: float

    def __post_init__(self):
        if not (self.d0 > 0 and self.d1 > 0):
            raise ValueError("d0 and d1 must be positive")

    def __call__(self, d):
        d = _as_distance(d)
        with np.errstate(divide="ignore", over="ignore"):
            near = np.where(d > 0, 5.0 * np.exp(-self.d0 / np.where(d > 0, d, 1.0)), 0.0)
            far = 5.0 * np.exp(-d / self.d1)
        p = 0.5 - np.minimum(0.5, near) + np.minimum(0.5, far)
        return _out(p)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        # kinks of the two min() terms
        return tuple(sorted((self.d0 / math.log(10.0), self.d1 * math.log(10.0))))


@dataclass(frozen=True)
class ExpSquare:
    """``p_L(d) = exp(-(d/L)^2)``."""

    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")

    def __call__(self, d):
        d = _as_distance(d)
        return _out(np.exp(-(d / self.L) ** 2))

    breakpoints = ()


@dataclass(frozen=True)
class Exp:
    """``p_L(d) = exp(-d/L)``."""

    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")

    def __call__(self, d):
        d = _as_distance(d)
        return _out(np.exp(-d / self.L))

    breakpoints = ()


@dataclass(frozen=True)
class Constant:
    """Distance-independent LOS probability (``p=1`` gives single-slope)."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    def __call__(self, d):
        d = _as_distance(d)
        return _out(np.full(np.shape(d), self.p, dtype=float))

    breakpoints = ()


LosProbabilityModel = Union[ThreeGpp, ExpSquare, Exp, Constant]


def los_probability(model: LosProbabilityModel, d):
    """Probability that a link of length ``d`` km is line-of-sight."""
    return model(d)


def path_gain(params: PathLossParams, d, los):
    """Mean linear gain ``k * d**-beta`` of the LOS or NLOS branch."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0) or np.any(np.isnan(d)):
        raise ValueError("path gain is singular at d <= 0")
    los = np.asarray(los, dtype=bool)
    g = np.where(los, params.k_los * d ** (-params.beta_los),
                 params.k_nlos * d ** (-params.beta_nlos))
    return _out(g)


def equivalent_distance(params: PathLossParams, d):
    """LOS distance giving the same mean power as an NLOS link of length ``d``."""
    d = _as_distance(d)
    out = (params.k_los / params.k_nlos) ** (1.0 / params.beta_los) \
        * d ** (params.beta_nlos / params.beta_los)
    return _out(out)


def equivalent_distance_inverse(params: PathLossParams, R):
    """NLOS distance giving the same mean power as a LOS link of length ``R``."""
    R = _as_distance(R)
    return _out(params.k_eq * R ** params.beta_eq)


def calibrate_exp_square_scale(d0: float, d1: float, tol: float = 1e-9) -> float:
    """Scale ``L`` of :class:`ExpSquare` crossing 0.5 where :class:`ThreeGpp` does.

    The 3GPP curve can sit exactly at 0.5 over a short plateau between its
    two kinks; the crossing abscissa is taken as the plateau midpoint.
    """
    model = ThreeGpp(d0, d1)
    hi = d0 + d1
    for _ in range(200):
        if model(hi) < 0.5:
            break
        hi *= 2.0
    else:
        raise ValueError("LOS probability never drops below 0.5")
    if model(tol) <= 0.5:
        raise ValueError("LOS probability never exceeds 0.5")

    def bisect(pred):
        lo_, hi_ = 0.0, hi
        while hi_ - lo_ > tol:
            mid = 0.5 * (lo_ + hi_)
            if pred(mid):
                lo_ = mid
            else:
                hi_ = mid
        return 0.5 * (lo_ + hi_)

    left = bisect(lambda d: model(d) > 0.5)
    right = bisect(lambda d: model(d) >= 0.5)
    d_star = 0.5 * (left + right)
    return d_star / math.sqrt(math.log(2.0))


# Parameter set used for the reported results; distances in km.
REFERENCE_LOS_NLOS = PathLossParams.from_db(103.8, 2.09, 145.4, 3.75)
REFERENCE_SINGLE_SLOPE = PathLossParams.single_slope(140.7, 3.67)
REFERENCE_D0_KM = 0.156
REFERENCE_D1_KM = 0.03
REFERENCE_L_KM = 0.0825
