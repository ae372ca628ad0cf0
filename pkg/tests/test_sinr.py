import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import hyp2f1

from udn.distance_law import distance_law
from udn.load import FrequencyReuse, PartiallyLoaded
from udn.propagation import (
    REFERENCE_LOS_NLOS,
    REFERENCE_SINGLE_SLOPE,
    Constant,
    ExpSquare,
    PathLossParams,
    equivalent_distance_inverse,
    path_gain,
)
from udn.sinr import (
    OutageProfile,
    Scenario,
    ase,
    avg_spectral_efficiency,
    ccdf_curve,
    conditional_ccdf,
    laplace_exponent,
    laplace_interference,
    outage,
    sinr_ccdf,
    spectral_efficiency,
)

P = REFERENCE_LOS_NLOS
SS = REFERENCE_SINGLE_SLOPE
ALL_LOS = Constant(1.0)


def rho(y, beta):
    """Interference factor of the single-slope, Rayleigh, interference-limited case."""
    return 2 * y / (beta - 2) * hyp2f1(1, 1 - 2 / beta, 2 - 2 / beta, -y)


def test_laplace_at_zero_is_one():
    scn = Scenario(P, ExpSquare(0.0825), 100.0)
    assert laplace_interference(scn, 0.0, 0.05) == 1.0
    assert laplace_exponent(scn, 0.0, 0.05) == 0.0


def test_single_slope_closed_form_coverage():
    scn = Scenario(SS, ALL_LOS, 100.0)
    assert sinr_ccdf(scn, 1.0) == pytest.approx(1 / (1 + rho(1.0, SS.beta_los)), abs=1e-6)
    # beta = 4: rho(1) = pi/2 - arctan(1) = pi/4
    quartic = Scenario(PathLossParams.single_slope(140.7, 4.0), ALL_LOS, 100.0)
    assert sinr_ccdf(quartic, 1.0) == pytest.approx(1 / (1 + math.pi / 4), abs=1e-6)
    assert sinr_ccdf(quartic, 1.0) == pytest.approx(0.5601, abs=1e-4)


def test_single_slope_conditional_laplace_closed_form():
    # with every link LOS the exponent is pi*lam*R^2*rho(y, beta)
    lam, R, y = 100.0, 0.04, 0.7
    scn = Scenario(SS, ALL_LOS, lam)
    assert laplace_exponent(scn, y, R) == pytest.approx(
        math.pi * lam * R**2 * rho(y, SS.beta_los), rel=1e-8)


def test_constant_los_probability_hypergeometric():
    # a constant LOS fraction p thins LOS and NLOS into independent PPPs; the
    # NLOS part is integrated directly over physical distance
    p, lam, R, y = 0.3, 200.0, 0.03, 2.0
    scn = Scenario(P, Constant(p), lam)
    los_part = p * math.pi * lam * R**2 * rho(y, P.beta_los)
    serving = path_gain(P, R, True)

    def nlos(d):
        z = y * path_gain(P, d, False) / serving
        return (1 - p) * 2 * math.pi * lam * d * z / (1 + z)

    d0 = equivalent_distance_inverse(P, R)
    nlos_part = sum(quad(nlos, a, b, epsabs=1e-13, epsrel=1e-11, limit=400)[0]
                    for a, b in ((d0, 10 * d0), (10 * d0, 1e3 * d0), (1e3 * d0, np.inf)))
    assert laplace_exponent(scn, y, R) == pytest.approx(los_part + nlos_part, rel=1e-7)


def test_density_invariance_single_slope():
    vals = [sinr_ccdf(Scenario(SS, ALL_LOS, lam), 0.5) for lam in (1.0, 100.0, 1e4)]
    assert max(vals) - min(vals) < 1e-8


def test_conditional_ccdf_decreases_with_noise():
    base = Scenario(P, ExpSquare(0.0825), 100.0)
    vals = [conditional_ccdf(base.replace(noise=n), 1.0, 0.05) for n in (0.0, 1e-13, 1e-11, 1e-9)]
    assert np.all(np.diff(vals) < 0)


@pytest.mark.parametrize("lam", [10.0, 300.0, 5000.0])
def test_ccdf_monotone_in_threshold(lam):
    curve = ccdf_curve(Scenario(P, ExpSquare(0.0825), lam), np.logspace(-2, 3, 12))
    assert np.all(np.diff(curve.values) <= 0)
    assert np.all((curve.values >= 0) & (curve.values <= 1))


def test_outage_complements_ccdf():
    scn = Scenario(P, ExpSquare(0.0825), 100.0)
    assert outage(scn, 0.3) + sinr_ccdf(scn, 0.3) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        sinr_ccdf(scn, 0.0)


def test_rate_single_slope_matches_direct_integration():
    scn = Scenario(SS, ALL_LOS, 100.0)
    res = spectral_efficiency(scn)
    direct, _ = quad(lambda u: 1 / (1 + rho(2**u - 1, SS.beta_los)), 0, 60, limit=200)
    assert res.value == pytest.approx(direct, abs=1e-5)
    # the polynomial SINR tail leaves ~3e-7 mass above 40 bit/s/Hz, which is flagged
    assert res.cap_hit and res.u_max == 40.0


def test_ase_formula_and_reuse():
    scn = Scenario(P, ExpSquare(0.0825), 100.0)
    c = avg_spectral_efficiency(scn)
    assert ase(scn) == pytest.approx(100.0 * c)
    r2 = scn.replace(load=FrequencyReuse(2))
    assert ase(r2, rate=c) == pytest.approx(50.0 * c)


def test_reuse_improves_coverage():
    scn = Scenario(P, ExpSquare(0.0825), 100.0)
    assert sinr_ccdf(scn.replace(load=FrequencyReuse(2)), 1.0) > sinr_ccdf(scn, 1.0)


@pytest.mark.parametrize("ratio", [5.0, 20.0])
def test_partial_load_reduces_outage(ratio):
    lam_u = 100.0
    full = Scenario(P, ExpSquare(0.0825), ratio * lam_u)
    part = full.replace(load=PartiallyLoaded(lam_u))
    g = 10 ** -0.8
    assert outage(part, g) < outage(full, g)


def test_outage_profile_matches_adaptive_route():
    g = 10 ** -0.8
    base = Scenario(P, ExpSquare(0.0825), 100.0)
    prof = OutageProfile(base, g)
    assert prof.theta_star == pytest.approx(outage(base, g), abs=1e-7)
    for n in (1e-13, 1e-11, 1e-10):
        assert prof.theta(n) == pytest.approx(outage(base.replace(noise=n), g), abs=1e-7)


def _simulated_laplace(lam, R, s, model, n=20000, seed=1):
    """Direct estimate of E[exp(-s I) | serving LOS-equivalent distance R]."""
    rng = np.random.default_rng(seed)
    radius = 3.0
    serving_gain = P.k_los * R ** -P.beta_los
    counts = rng.poisson(lam * math.pi * radius**2, n)
    owner = np.repeat(np.arange(n), counts)
    d = radius * np.sqrt(rng.random(owner.size))
    los = rng.random(owner.size) < model(d)
    g = path_gain(P, d, los)
    keep = g < serving_gain  # interferers are weaker on average than the server
    h = rng.exponential(1.0, owner.size)
    interference = np.bincount(owner, weights=np.where(keep, g * h, 0.0), minlength=n)
    est = np.exp(-s * interference)
    return est.mean(), est.std() / math.sqrt(n)


@pytest.mark.parametrize("R", [0.02, 0.06])
def test_laplace_against_simulation(R):
    lam = 100.0
    model = ExpSquare(0.0825)
    scn = Scenario(P, model, lam)
    s = 1.0 / (P.k_los * R ** -P.beta_los)  # unit threshold, unit-mean fading
    exact = laplace_interference(scn, s, R)
    est, se = _simulated_laplace(lam, R, s, model)
    assert est == pytest.approx(exact, rel=0.01)
    assert abs(est - exact) < 4 * se + 1e-3


def test_distance_law_used_by_scenario_is_cached():
    scn = Scenario(P, ExpSquare(0.0825), 100.0)
    assert scn.law is distance_law(100.0, P, ExpSquare(0.0825))
