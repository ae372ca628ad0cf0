import math

import numpy as np
import pytest

from udn.load import FrequencyReuse
from udn.power import (
    PowerSearchConfig,
    PowerSearchError,
    dbm_to_watts,
    min_tx_power,
    noise_power_dbm,
    noise_ratio,
    watts_to_dbm,
)
from udn.propagation import REFERENCE_LOS_NLOS, REFERENCE_SINGLE_SLOPE, Constant, ExpSquare
from udn.sinr import OutageProfile, Scenario

G = 10 ** -0.8
CFG = PowerSearchConfig(gamma_th=G)


def test_noise_power_levels():
    assert noise_power_dbm(CFG) == pytest.approx(-95.0, abs=1e-12)
    assert noise_power_dbm(CFG, reuse=2) == pytest.approx(-95.0 - 10 * math.log10(2), abs=1e-12)
    assert noise_power_dbm(CFG, reuse=2) == pytest.approx(-98.01, abs=5e-3)
    one_hz = PowerSearchConfig(gamma_th=G, bandwidth_hz=1.0, noise_figure_db=0.0)
    assert noise_power_dbm(one_hz) == -174.0


def test_unit_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert watts_to_dbm(1e-3) == pytest.approx(0.0)
    assert noise_ratio(-95.0, -95.0) == 1.0
    assert noise_ratio(5.0, -5.0) == pytest.approx(0.1)


@pytest.mark.parametrize("kw", [dict(delta_theta=0.0), dict(steps_db=(1.0, 5.0)),
                                dict(steps_db=()), dict(max_steps_per_level=0),
                                dict(bandwidth_hz=0.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        PowerSearchConfig(gamma_th=G, **kw)


@pytest.fixture(scope="module")
def scn100():
    return Scenario(REFERENCE_LOS_NLOS, ExpSquare(0.0825), 100.0)


@pytest.fixture(scope="module")
def profile100(scn100):
    return OutageProfile(scn100, G)


def test_loose_tolerance_returns_noise_power(scn100, profile100):
    cfg = PowerSearchConfig(gamma_th=G, delta_theta=0.999)
    res = min_tx_power(scn100, cfg, profile100)
    assert res.p_tx_dbm == pytest.approx(noise_power_dbm(cfg))


def test_search_meets_criterion(scn100, profile100):
    res = min_tx_power(scn100, CFG, profile100)
    assert abs(res.theta_achieved - res.theta_star) <= CFG.delta_theta
    # the result sits on the finest step grid relative to the noise floor
    k = (res.p_tx_dbm - noise_power_dbm(CFG)) / CFG.steps_db[-1]
    assert k == pytest.approx(round(k), abs=1e-9)
    # recomputing the outage at the result confirms the report
    assert profile100.theta(noise_ratio(res.p_tx_dbm, noise_power_dbm(CFG))) == \
        pytest.approx(res.theta_achieved, abs=1e-15)


def test_trajectory_outage_non_increasing_within_levels(scn100, profile100):
    res = min_tx_power(scn100, CFG, profile100)
    p = np.array([t[0] for t in res.trajectory])
    th = np.array([t[1] for t in res.trajectory])
    # outage falls as power rises
    order = np.argsort(p)
    assert np.all(np.diff(th[order]) <= 1e-12)


def test_tighter_tolerance_needs_more_power(scn100, profile100):
    powers = [min_tx_power(scn100, PowerSearchConfig(gamma_th=G, delta_theta=d),
                           profile100).p_tx_dbm for d in (3e-2, 1e-2, 1e-3)]
    assert powers == sorted(powers)


def test_reuse_lowers_noise_floor():
    scn = Scenario(REFERENCE_LOS_NLOS, ExpSquare(0.0825), 100.0, load=FrequencyReuse(2))
    res = min_tx_power(scn, CFG)
    assert res.trajectory[0][0] == pytest.approx(noise_power_dbm(CFG, 2))


def test_single_slope_power_scales_with_path_loss_exponent():
    # single slope: P_T ~ lam^(-beta/2); the fitted log-slope stays near -beta/2
    lams = np.array([10.0, 100.0, 1000.0])
    p = [min_tx_power(Scenario(REFERENCE_SINGLE_SLOPE, Constant(1.0), lam), CFG).p_tx_dbm
         for lam in lams]
    slope = np.polyfit(np.log10(lams), np.array(p) / 10.0, 1)[0]
    assert slope == pytest.approx(-REFERENCE_SINGLE_SLOPE.beta_los / 2, abs=0.05)


def test_iteration_cap(scn100, profile100):
    cfg = PowerSearchConfig(gamma_th=G, max_steps_per_level=1)
    with pytest.raises(PowerSearchError) as info:
        min_tx_power(scn100, cfg, profile100)
    assert info.value.p_dbm is not None
    assert 0.0 <= info.value.theta <= 1.0
