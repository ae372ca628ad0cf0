import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udn.load import (
    FrequencyReuse,
    FullyLoaded,
    PartiallyLoaded,
    active_density,
    interferer_density,
    prob_active,
    reuse_factor,
)


def test_prob_active_equal_densities():
    assert prob_active(1000.0, 1000.0) == pytest.approx(1 - (1 + 1 / 3.5) ** -3.5, rel=1e-14)
    # the commonly quoted rounded value 0.58507 agrees to 2e-5
    assert prob_active(1000.0, 1000.0) == pytest.approx(0.58507, abs=3e-5)


def test_prob_active_limits():
    assert prob_active(10.0, 0.0) == 0.0
    assert prob_active(1.0, 1e9) == pytest.approx(1.0, abs=1e-12)
    # sparse users: p_A ~ lam_U / lam
    assert prob_active(1e6, 10.0) == pytest.approx(1e-5, rel=1e-4)


def test_prob_active_vectorised():
    lam = np.array([10.0, 100.0, 1000.0])
    out = prob_active(lam, 1000.0)
    assert out.shape == (3,)
    assert np.all(np.diff(out) < 0)


@settings(max_examples=100, deadline=None)
@given(lam=st.floats(1e-2, 1e6), lam_u=st.floats(0.0, 1e6, allow_subnormal=False))
def test_active_density_bounded(lam, lam_u):
    p = prob_active(lam, lam_u)
    assert 0.0 <= p <= 1.0
    if lam_u > 0:
        assert lam * p <= min(lam, lam_u) * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(1.0, 1e5), lam_u=st.floats(1.0, 1e5), k=st.floats(1.01, 10.0))
def test_active_density_increases_with_density(lam, lam_u, k):
    assert lam * k * prob_active(lam * k, lam_u) >= lam * prob_active(lam, lam_u) * (1 - 1e-12)


def test_interferer_densities():
    assert interferer_density(FullyLoaded(), 100.0) == 100.0
    assert interferer_density(FrequencyReuse(2), 100.0) == 50.0
    assert active_density(FrequencyReuse(2), 100.0) == 100.0
    pl = PartiallyLoaded(1000.0)
    assert interferer_density(pl, 1000.0) == pytest.approx(1000 * (1 - (1 + 1 / 3.5) ** -3.5), rel=1e-14)
    assert reuse_factor(FrequencyReuse(3)) == 3
    assert reuse_factor(pl) == 1


@pytest.mark.parametrize("make", [lambda: PartiallyLoaded(0.0), lambda: FrequencyReuse(0),
                                  lambda: FrequencyReuse(1.5)])
def test_validation(make):
    with pytest.raises(ValueError):
        make()


def test_negative_inputs():
    with pytest.raises(ValueError):
        prob_active(0.0, 1.0)
    with pytest.raises(ValueError):
        prob_active(1.0, -1.0)
    with pytest.raises(ValueError):
        active_density(FullyLoaded(), 0.0)
