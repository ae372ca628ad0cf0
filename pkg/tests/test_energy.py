import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udn.energy import (
    PER_KM2_TO_PER_M2,
    PowerConsumptionModel,
    Regime,
    classify_regime,
    ee_full_power_law,
    ee_partial_approx,
    energy_efficiency,
    fit_power_law,
    optimal_density_full,
    optimal_density_partial,
    total_power,
)

M = PowerConsumptionModel()


def test_total_power_examples():
    assert total_power(M, 1.0, 100.0, 100.0, 0.1) == pytest.approx(1100.0)
    assert total_power(M, 2.0, 50.0, 0.0, 0.0) == pytest.approx(2.0 * 50.0 * 0.1 * 10.0)
    half = PowerConsumptionModel(rho=0.5)
    busy = total_power(half, 3.0, 40.0, 40.0, 0.0)
    assert total_power(half, 3.0, 80.0, 40.0, 0.0) - busy == pytest.approx(40.0 * 0.5 * 10.0 * 3.0)


def test_total_power_rejects_excess_active():
    with pytest.raises(ValueError):
        total_power(M, 1.0, 10.0, 11.0, 0.1)


@pytest.mark.parametrize("kw", [dict(p0=0.0), dict(k_rf=0.5), dict(rho=1.0), dict(rho=0.0)])
def test_model_validation(kw):
    with pytest.raises(ValueError):
        PowerConsumptionModel(**kw)


def test_energy_efficiency():
    assert energy_efficiency(1e9, 1e3) == pytest.approx(1e6)
    assert energy_efficiency(1e9, 2e3) == pytest.approx(0.5e6)
    with pytest.raises(ValueError):
        energy_efficiency(1.0, 0.0)


def test_fit_exact_power_law():
    z = np.geomspace(1, 100, 9)
    fit = fit_power_law(z, 3 * z**2)
    assert fit.a == pytest.approx(3.0, rel=1e-12)
    assert fit.b == pytest.approx(2.0, abs=1e-12)
    assert fit.residual <= 1e-12
    assert fit(10.0) == pytest.approx(300.0)


def test_fit_domain_filter_and_errors():
    z = np.array([1.0, 10.0, 100.0, 1000.0])
    f = np.array([1.0, 10.0, 1e4, 1e6])
    assert fit_power_law(z, f, domain=(1.0, 10.0)).b == pytest.approx(1.0)
    assert fit_power_law(z, f, domain=(100.0, 1000.0)).b == pytest.approx(2.0)
    with pytest.raises(ValueError):
        fit_power_law([2.0], [3.0])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(ValueError):
        fit_power_law(z, f, domain=(2.0, 5.0))


@settings(max_examples=50, deadline=None)
@given(c=st.floats(1e-6, 1e6), b=st.floats(-4, 4),
       noise=st.lists(st.floats(-0.2, 0.2), min_size=6, max_size=6))
def test_fit_scale_equivariance(c, b, noise):
    z = np.geomspace(1, 1e3, 6)
    f = z**b * np.exp(noise)
    base = fit_power_law(z, f)
    scaled = fit_power_law(z, c * f)
    assert scaled.b == pytest.approx(base.b, abs=1e-9)
    assert scaled.a == pytest.approx(c * base.a, rel=1e-9)


def test_regime_examples():
    assert classify_regime(1.2, -1.0).regime is Regime.MONOTONE_INCREASING
    assert classify_regime(0.3, -0.5).regime is Regime.MONOTONE_DECREASING
    assert classify_regime(0.5, -0.5).regime is Regime.DEGENERATE_BOUNDARY
    r = classify_regime(0.48, -3.9, 10.0, 10.0, 4.4e-17)
    assert r.regime is Regime.INTERIOR_MAXIMUM
    assert r.optimum == pytest.approx(1.03e-4, rel=5e-3)
    assert r.optimum / PER_KM2_TO_PER_M2 == pytest.approx(103, abs=1)


@pytest.mark.parametrize("alpha,delta", [(0.0, -1.0), (0.5, 0.1)])
def test_regime_preconditions(alpha, delta):
    with pytest.raises(ValueError):
        classify_regime(alpha, delta)


@settings(max_examples=50, deadline=None)
@given(k=st.floats(1e-3, 1e3))
def test_optimum_invariant_to_common_power_scale(k):
    ref = optimal_density_full(0.48, -3.9, 10.0, 10.0, 4.4e-17)
    assert optimal_density_full(0.48, -3.9, 10.0 * k, 10.0, 4.4e-17 * k) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("alpha,delta,p_t", [(0.48, -3.9, 4.4e-17), (0.8, -1.9, 9.3e-9)])
def test_full_optimum_is_argmax(alpha, delta, p_t):
    lam0 = optimal_density_full(alpha, delta, 10.0, 10.0, p_t)
    lam = np.geomspace(lam0 / 10, lam0 * 10, 2001)
    ee = ee_full_power_law(lam, 1.0, alpha, 10.0, 10.0, p_t, delta)
    step = lam[1] / lam[0]
    assert abs(np.log(lam[np.argmax(ee)] / lam0)) <= np.log(step)


def test_partial_optimum_example_and_limits():
    opt = optimal_density_partial(0.46, 1000.0, 0.1)
    assert opt.density == pytest.approx(7666.67, abs=0.01)
    assert opt.reliable
    assert optimal_density_partial(0.46, 1000.0, 1 - 1e-9).density < 1e-5
    assert optimal_density_partial(1 - 1e-9, 1000.0, 0.1).density > 1e10
    assert not optimal_density_partial(0.2, 1000.0, 0.1).reliable
    with pytest.raises(ValueError):
        optimal_density_partial(1.0, 1000.0, 0.1)


def test_partial_optimum_is_argmax_of_approximation():
    lam_star = optimal_density_partial(0.46, 1000.0, 0.1).density
    lam = np.geomspace(1e3, 1e5, 4001)
    ee = ee_partial_approx(lam, 1.0, 0.46, 1000.0, 10.0, 0.1)
    assert lam[np.argmax(ee)] == pytest.approx(lam_star, rel=0.15)
    assert lam[np.argmax(ee)] == pytest.approx(lam_star, rel=2e-3)
