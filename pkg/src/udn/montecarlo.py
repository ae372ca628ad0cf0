"""Brute-force simulation of the typical downlink user.

Each drop places a Poisson number of BSs uniformly on a disk centred on the
user, draws a LOS/NLOS state per link, serves the user from the BS with the
strongest mean received power and applies unit-mean exponential fading.
Drops are processed in fixed-size batches, each with its own random stream
spawned from the master seed, so results do not depend on how many worker
threads execute the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .distance_law import distance_law
from .load import FrequencyReuse, FullyLoaded, LoadModel, PartiallyLoaded
from .quadrature import QuadratureSpec, integrate
from .propagation import FadingModel, LosProbabilityModel, PathLossParams, equivalent_distance

__all__ = [
    "SimConfig",
    "EmpiricalStats",
    "Drop",
    "drop_network",
    "default_radius",
    "serving_distance_tail",
    "simulate_sinr",
    "simulate_active_fraction",
    "binomial_half_width",
]

BATCH_DROPS = 1000
_Z95 = 1.959963984540054


def binomial_half_width(p, n):
    """Normal-approximation 95% half-width of a proportion from ``n`` trials."""
    p = np.asarray(p, dtype=float)
    return _Z95 * np.sqrt(p * (1.0 - p) / n)


def serving_distance_tail(density, propagation, los_model, D):
    """Upper bound on ``P[physical distance to the serving BS > D]``.

    An NLOS server beyond ``D`` has equivalent distance beyond ``d_eq(D)``; a
    LOS server beyond ``D`` contributes the LOS part of the serving density.
    """
    law = distance_law(float(density), propagation, los_model)
    nlos = law.tail_probability(float(equivalent_distance(propagation, D)))

    def integrand(v):
        return 2 * math.pi * density * v * los_model(v) * law.tail_probability(v)

    los = integrate(integrand, D, math.inf, QuadratureSpec(abs_tol=1e-12, rel_tol=1e-8),
                    scale=max(D, 1e-3)).value
    return float(nlos + los)


def default_radius(density, propagation, los_model, tail=1e-6, min_cells=20.0):
    """Disk radius (km) beyond which the serving BS lies with probability < ``tail``.

    ``min_cells`` keeps at least that many mean cell radii around the user so
    truncated interference stays below Monte Carlo resolution.
    """
    D = max(min_cells, 1.0) / math.sqrt(math.pi * density)
    while serving_distance_tail(density, propagation, los_model, D) >= tail:
        D *= 1.25
    return D


@dataclass(frozen=True)
class SimConfig:
    propagation: PathLossParams
    los_model: LosProbabilityModel
    density: float                      # BS per km^2
    drops: int = 10_000
    seed: int = 0
    radius: float | None = None         # km; None -> default_radius
    load: LoadModel = field(default_factory=FullyLoaded)
    noise: float = 0.0                  # normalised noise, as in Scenario
    fading: FadingModel = field(default_factory=FadingModel)
    keep_samples: bool = False

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")
        if self.drops < 1:
            raise ValueError("drops must be >= 1")
        if not self.noise >= 0:
            raise ValueError("noise must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def resolved_radius(self) -> float:
        auto = default_radius(self.density, self.propagation, self.los_model, min_cells=0.0)
        if self.radius is None:
            return default_radius(self.density, self.propagation, self.los_model)
        # auto-enlarge a user radius that would truncate the serving law
        return max(float(self.radius), auto)

    @classmethod
    def from_scenario(cls, scenario, **kw) -> "SimConfig":
        return cls(scenario.propagation, scenario.los_model, scenario.density,
                   load=scenario.load, noise=scenario.noise, fading=scenario.fading, **kw)


@dataclass(frozen=True)
class EmpiricalStats:
    thresholds: np.ndarray
    ccdf: np.ndarray
    half_width: np.ndarray
    mean_rate: float                    # mean log2(1 + SINR)
    mean_rate_half_width: float
    drops: int
    radius: float
    resampled_drops: int
    active_fraction: float | None = None
    samples: np.ndarray | None = field(default=None, repr=False)


@dataclass
class Drop:
    """Flattened batch of drops; ``owner`` maps each BS to its drop."""

    n: np.ndarray          # BSs per drop
    owner: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dist: np.ndarray
    los: np.ndarray
    gain: np.ndarray       # mean received power
    req: np.ndarray        # LOS-equivalent distance
    resampled: int


def _poisson_nonempty(rng, mean, size):
    n = rng.poisson(mean, size)
    resampled = 0
    while True:
        empty = n == 0
        k = int(empty.sum())
        if k == 0:
            return n, resampled
        resampled += k
        n[empty] = rng.poisson(mean, k)


def _uniform_disk(rng, radius, count):
    r = radius * np.sqrt(rng.random(count))
    phi = rng.random(count) * (2 * math.pi)
    return r * np.cos(phi), r * np.sin(phi)


def drop_network(rng, n_drops, density, radius, propagation, los_model) -> Drop:
    """Sample ``n_drops`` independent BS layouts around a user at the origin."""
    n, resampled = _poisson_nonempty(rng, density * math.pi * radius**2, n_drops)
    total = int(n.sum())
    owner = np.repeat(np.arange(n_drops), n)
    x, y = _uniform_disk(rng, radius, total)
    dist = np.hypot(x, y)
    dist = np.maximum(dist, np.finfo(float).tiny)
    los = rng.random(total) < los_model(dist)
    p = propagation
    gain = np.where(los, p.k_los * dist ** (-p.beta_los), p.k_nlos * dist ** (-p.beta_nlos))
    req = np.where(los, dist, equivalent_distance(p, dist))
    return Drop(n, owner, x, y, dist, los, gain, req, resampled)


def _segment_argmax(values, owner, n):
    """Index of the largest value within each drop's segment."""
    order = np.lexsort((-values, owner))
    starts = np.concatenate(([0], np.cumsum(n)[:-1]))
    return order[starts]


def _nearest_active(rng, net: Drop, user_density, radius, n_drops):
    """BSs with at least one nearest-associated user (Euclidean association).

    Drops are laid side by side on a grid so a single tree serves the batch.
    """
    pitch = 4.0 * radius
    cols = int(math.ceil(math.sqrt(n_drops)))
    off_x = (np.arange(n_drops) % cols) * pitch
    off_y = (np.arange(n_drops) // cols) * pitch
    tree = cKDTree(np.column_stack((net.x + off_x[net.owner], net.y + off_y[net.owner])))
    n_users = rng.poisson(user_density * math.pi * radius**2, n_drops)
    u_owner = np.repeat(np.arange(n_drops), n_users)
    ux, uy = _uniform_disk(rng, radius, int(n_users.sum()))
    active = np.zeros(net.owner.size, dtype=bool)
    if ux.size:
        _, idx = tree.query(np.column_stack((ux + off_x[u_owner], uy + off_y[u_owner])))
        active[idx] = True
    return active


def _run_batch(cfg: SimConfig, radius, thresholds, seed_seq, n_drops):
    rng = np.random.default_rng(seed_seq)
    net = drop_network(rng, n_drops, cfg.density, radius, cfg.propagation, cfg.los_model)
    serving = _segment_argmax(net.gain, net.owner, net.n)
    fading = rng.exponential(1.0 / cfg.fading.mu, net.owner.size)
    power = net.gain * fading

    transmit = np.ones(net.owner.size, dtype=bool)
    active_stats = None
    if isinstance(cfg.load, FrequencyReuse) and cfg.load.n > 1:
        channel = rng.integers(cfg.load.n, size=net.owner.size)
        transmit = channel == channel[serving][net.owner]
    elif isinstance(cfg.load, PartiallyLoaded):
        transmit = _nearest_active(rng, net, cfg.load.user_density, radius, n_drops)
        # count only BSs well inside the disk to avoid edge-cell bias
        inner = net.dist <= 0.5 * radius
        active_stats = (int(transmit[inner].sum()), int(inner.sum()))
    transmit[serving] = True

    interference = np.bincount(net.owner, weights=np.where(transmit, power, 0.0),
                               minlength=n_drops) - power[serving]
    interference = np.maximum(interference, 0.0)
    with np.errstate(divide="ignore"):
        sinr = power[serving] / (cfg.noise + interference)
    exceed = (sinr[:, None] > thresholds[None, :]).sum(axis=0)
    rate = np.log2(1.0 + sinr)
    return sinr, exceed, rate, net.resampled, active_stats


def simulate_sinr(cfg: SimConfig, thresholds, threads: int = 1) -> EmpiricalStats:
    """Empirical SINR CCDF at linear ``thresholds`` and mean spectral efficiency."""
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))
    if threads < 1:
        raise ValueError("threads must be >= 1")
    radius = cfg.resolved_radius()
    sizes = [BATCH_DROPS] * (cfg.drops // BATCH_DROPS)
    if cfg.drops % BATCH_DROPS:
        sizes.append(cfg.drops % BATCH_DROPS)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    jobs = list(zip(seeds, sizes))

    def work(job):
        return _run_batch(cfg, radius, thresholds, *job)

    if threads == 1:
        results = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, jobs))

    exceed = sum(r[1] for r in results)
    rates = np.concatenate([r[2] for r in results])
    ccdf = exceed / cfg.drops
    active = [r[4] for r in results if r[4] is not None]
    frac = None
    if active:
        num = sum(a for a, _ in active)
        den = sum(b for _, b in active)
        frac = num / den if den else float("nan")
    with np.errstate(invalid="ignore"):
        rate_hw = float(_Z95 * np.std(rates) / math.sqrt(cfg.drops)) if np.all(np.isfinite(rates)) else float("nan")
    return EmpiricalStats(
        thresholds=thresholds,
        ccdf=ccdf,
        half_width=binomial_half_width(ccdf, cfg.drops),
        mean_rate=float(np.mean(rates)),
        mean_rate_half_width=rate_hw,
        drops=cfg.drops,
        radius=radius,
        resampled_drops=sum(r[3] for r in results),
        active_fraction=frac,
        samples=np.concatenate([r[0] for r in results]) if cfg.keep_samples else None,
    )


def simulate_active_fraction(density, user_density, radius=None, drops=1000, seed=0):
    """Fraction of BSs holding at least one nearest-associated user.

    Returns ``(fraction, half_width)``.  Only BSs within half the disk radius
    are counted, so truncated cells at the rim do not bias the estimate.
    """
    if not density > 0:
        raise ValueError("density must be positive")
    if user_density < 0:
        raise ValueError("user_density must be non-negative")
    if drops < 1:
        raise ValueError("drops must be >= 1")
    if radius is None:
        radius = 12.0 / math.sqrt(math.pi * density)
    if user_density == 0:
        return 0.0, 0.0
    seeds = np.random.SeedSequence(seed).spawn(math.ceil(drops / BATCH_DROPS))
    num = den = 0
    left = drops
    for s in seeds:
        k = min(BATCH_DROPS, left)
        left -= k
        rng = np.random.default_rng(s)
        n, _ = _poisson_nonempty(rng, density * math.pi * radius**2, k)
        owner = np.repeat(np.arange(k), n)
        x, y = _uniform_disk(rng, radius, int(n.sum()))
        net = Drop(n, owner, x, y, np.hypot(x, y), None, None, None, 0)
        active = _nearest_active(rng, net, user_density, radius, k)
        inner = net.dist <= 0.5 * radius
        num += int(active[inner].sum())
        den += int(inner.sum())
    frac = num / den
    return frac, float(binomial_half_width(frac, den))
