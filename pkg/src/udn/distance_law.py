"""Law of the LOS-equivalent distance from the typical user to its serving BS.

The tail is written as ``P[r > R] = prod_m exp(f_m(R))`` and the density as
``f_r(R) = -P[r > R] * sum_m f_m'(R)``.  Closed-form term lists are used for
the two exponential LOS models and for constant LOS probability; any other
model goes through quadrature of the LOS ball integral, differentiated with
the Leibniz rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammainc

from .propagation import (
    Constant,
    Exp,
    ExpSquare,
    LosProbabilityModel,
    PathLossParams,
)
from .quadrature import QuadratureSpec, integrate

__all__ = ["LawTerm", "DistanceLaw", "distance_law"]

_BALL_SPEC = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-11)


class LawTerm(NamedTuple):
    """One factor ``exp(f(R))`` of the tail, with its derivative."""

    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]


def _exp_square_terms(lam, L, k, b):
    pi = math.pi

    def req(R):
        return k * R ** b

    def req_dreq(R):
        # R_eq * dR_eq/dR = k^2 b R^(2b-1)
        with np.errstate(divide="ignore"):
            return np.where(R > 0, k * k * b * R ** (2 * b - 1), 0.0 if b > 0.5 else np.inf)

    return [
        LawTerm(lambda R: pi * lam * L**2 * np.exp(-(R / L) ** 2),
                lambda R: -2 * pi * lam * R * np.exp(-(R / L) ** 2)),
        LawTerm(lambda R: -pi * lam * L**2 * np.exp(-(req(R) / L) ** 2),
                lambda R: 2 * pi * lam * req_dreq(R) * np.exp(-(req(R) / L) ** 2)),
        LawTerm(lambda R: -pi * lam * req(R) ** 2,
                lambda R: -2 * pi * lam * req_dreq(R)),
    ]


def _exp_terms(lam, L, k, b):
    pi = math.pi

    def req(R):
        return k * R ** b

    def dreq(R):
        with np.errstate(divide="ignore"):
            return np.where(R > 0, k * b * R ** (b - 1), 0.0 if b > 1 else np.inf)

    def req_dreq(R):
        with np.errstate(divide="ignore"):
            return np.where(R > 0, k * k * b * R ** (2 * b - 1), 0.0 if b > 0.5 else np.inf)

    return [
        LawTerm(lambda R: 2 * pi * lam * L**2 * np.exp(-R / L),
                lambda R: -2 * pi * lam * L * np.exp(-R / L)),
        LawTerm(lambda R: 2 * pi * lam * L * R * np.exp(-R / L),
                lambda R: 2 * pi * lam * (L - R) * np.exp(-R / L)),
        LawTerm(lambda R: -pi * lam * req(R) ** 2,
                lambda R: -2 * pi * lam * req_dreq(R)),
        LawTerm(lambda R: -2 * pi * lam * L**2 * np.exp(-req(R) / L),
                lambda R: 2 * pi * lam * L * dreq(R) * np.exp(-req(R) / L)),
        LawTerm(lambda R: -2 * pi * lam * L * req(R) * np.exp(-req(R) / L),
                lambda R: 2 * pi * lam * _safe_mul(dreq(R), req(R) - L) * np.exp(-req(R) / L)),
    ]


def _safe_mul(a, b):
    with np.errstate(invalid="ignore"):
        out = a * b
    return np.where(np.isnan(out), np.inf, out)


def _constant_terms(lam, p, k, b):
    pi = math.pi

    def req_dreq(R):
        with np.errstate(divide="ignore"):
            return np.where(R > 0, k * k * b * R ** (2 * b - 1), 0.0 if b > 0.5 else np.inf)

    terms = [LawTerm(lambda R: -pi * lam * p * R**2, lambda R: -2 * pi * lam * p * R)]
    if p < 1.0:
        terms.append(LawTerm(lambda R: -pi * lam * (1 - p) * (k * R**b) ** 2,
                             lambda R: -2 * pi * lam * (1 - p) * req_dreq(R)))
    return terms


@dataclass(frozen=True)
class DistanceLaw:
    """Serving-distance law for BS density ``density`` (per km^2)."""

    density: float
    propagation: PathLossParams
    los_model: LosProbabilityModel

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")

    @property
    def has_closed_form(self) -> bool:
        return isinstance(self.los_model, (ExpSquare, Exp, Constant))

    def terms(self) -> list[LawTerm]:
        """Exponent terms ``f_m`` and derivatives for the closed-form models."""
        lam = self.density
        k, b = self.propagation.k_eq, self.propagation.beta_eq
        m = self.los_model
        if isinstance(m, ExpSquare):
            return _exp_square_terms(lam, m.L, k, b)
        if isinstance(m, Exp):
            return _exp_terms(lam, m.L, k, b)
        if isinstance(m, Constant):
            return _constant_terms(lam, m.p, k, b)
        raise TypeError(f"no closed form for {type(m).__name__}")

    # generic route --------------------------------------------------------

    def los_ball_integral(self, R):
        """``int_0^R p_L(v) 2 pi v dv`` by quadrature, split at model kinks."""
        R = np.atleast_1d(np.asarray(R, dtype=float))
        edges = [0.0, *self.los_model.breakpoints, math.inf]
        total = np.zeros_like(R)
        for lo, hi in zip(edges[:-1], edges[1:]):
            top = np.minimum(R, hi)
            width = np.where(top > lo, top - lo, 0.0)
            if not np.any(width > 0):
                continue

            def integrand(t, lo=lo, width=width):
                v = lo + width[:, None] * t[None, :]
                return self.los_model(v) * 2 * math.pi * v * width[:, None]

            total += integrate(integrand, 0.0, 1.0, _BALL_SPEC).value
        return total

    def _generic_exponent(self, R):
        req = self.propagation.k_eq * R ** self.propagation.beta_eq
        los = self.los_ball_integral(R)
        nlos = math.pi * req**2 - self.los_ball_integral(req)
        return -self.density * (los + nlos)

    def _generic_rate(self, R):
        k, b = self.propagation.k_eq, self.propagation.beta_eq
        req = k * R**b
        with np.errstate(divide="ignore"):
            req_dreq = np.where(R > 0, k * k * b * R ** (2 * b - 1), 0.0 if b > 0.5 else np.inf)
        p_los = self.los_model(R)
        p_nlos = 1.0 - self.los_model(req)
        return 2 * math.pi * self.density * (R * p_los + req_dreq * p_nlos)

    def _grouped_log_tail(self, R):
        # Same value as summing terms(), regrouped so the O(lam L^2) terms
        # that cancel near the origin are combined analytically.
        lam = self.density
        m = self.los_model
        q = self.propagation.k_eq * R ** self.propagation.beta_eq
        if isinstance(m, ExpSquare):
            L = m.L
            return (math.pi * lam * L**2 * (np.expm1(-(R / L) ** 2) - np.expm1(-(q / L) ** 2))
                    - math.pi * lam * q**2)
        if isinstance(m, Exp):
            # 1 - (1 + x) e^{-x} is the regularised lower incomplete gamma P(2, x)
            L = m.L
            return (2 * math.pi * lam * L**2 * (gammainc(2.0, q / L) - gammainc(2.0, R / L))
                    - math.pi * lam * q**2)
        return sum(term.f(R) for term in self.terms())

    # public ---------------------------------------------------------------

    def log_tail(self, R):
        """``log P[r > R]``."""
        R = np.asarray(R, dtype=float)
        if np.any(R < 0):
            raise ValueError("R must be non-negative")
        if self.has_closed_form:
            out = self._grouped_log_tail(R)
            out = np.where(R == 0, 0.0, np.minimum(out, 0.0))
        else:
            shape = R.shape
            out = self._generic_exponent(R.ravel()).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def tail_probability(self, R):
        """``P[r > R]``."""
        return _float_or_array(np.exp(self.log_tail(R)))

    def hazard(self, R):
        """``f_r(R) / P[r > R] = -sum_m f_m'(R)``."""
        R = np.asarray(R, dtype=float)
        if self.has_closed_form:
            with np.errstate(invalid="ignore"):
                out = -sum(term.fprime(R) for term in self.terms())
            # individual terms diverge at the origin; use the summed limit there
            out = np.where(R == 0, self._generic_rate(R), out)
        else:
            out = self._generic_rate(R)
        return _float_or_array(out)

    def pdf(self, R):
        """Density of the LOS-equivalent serving distance, per km."""
        R = np.asarray(R, dtype=float)
        if np.any(R < 0):
            raise ValueError("R must be non-negative")
        tail = np.exp(self.log_tail(R))
        h = np.asarray(self.hazard(R))
        with np.errstate(invalid="ignore"):
            out = np.where(tail > 0, tail * h, 0.0)
        return _float_or_array(out)

    def quantile(self, tail_prob: float) -> float:
        """Radius ``R`` with ``P[r > R] = tail_prob`` (bisection in log R)."""
        if not 0.0 < tail_prob < 1.0:
            raise ValueError("tail_prob must lie in (0, 1)")
        target = math.log(tail_prob)
        lo = hi = 1.0 / math.sqrt(self.density)
        while self.log_tail(lo) < target:
            lo *= 0.5
        while self.log_tail(hi) > target:
            hi *= 2.0
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if self.log_tail(mid) > target:
                lo = mid
            else:
                hi = mid
            if hi / lo - 1.0 < 1e-13:
                break
        return math.sqrt(lo * hi)

    def median(self) -> float:
        return self.quantile(0.5)

    def r_max(self, eps: float = 1e-12) -> float:
        """Smallest power-of-two multiple of ``1/sqrt(density)`` with tail below ``eps``."""
        R = 1.0 / math.sqrt(self.density)
        target = math.log(eps)
        while self.log_tail(R) >= target:
            R *= 2.0
        return R


def _float_or_array(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


@lru_cache(maxsize=512)
def distance_law(density: float, propagation: PathLossParams,
                 los_model: LosProbabilityModel) -> DistanceLaw:
    """Cached constructor."""
    return DistanceLaw(float(density), propagation, los_model)
