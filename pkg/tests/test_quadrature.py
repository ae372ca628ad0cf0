import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udn.quadrature import (
    QuadratureError,
    QuadratureSpec,
    gauss_legendre_panels,
    integrate,
)


def test_linear_on_unit_interval():
    res = integrate(lambda x: x, 0.0, 1.0)
    assert res.value == pytest.approx(0.5, abs=1e-12)


def test_semi_infinite_exponential():
    res = integrate(lambda x: np.exp(-x), 0.0, math.inf)
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_rayleigh_density_normalises():
    lam = 100.0
    res = integrate(lambda v: 2 * math.pi * lam * v * np.exp(-math.pi * lam * v**2),
                    0.0, math.inf, scale=1 / math.sqrt(lam))
    assert res.value == pytest.approx(1.0, abs=1e-8)


# (integrand, a, b, exact) -- ten analytically integrable cases
CASES = [
    (lambda x: x**2, 0.0, 1.0, 1 / 3),
    (np.sin, 0.0, math.pi, 2.0),
    (np.exp, -1.0, 2.0, math.e**2 - math.exp(-1)),
    (lambda x: 1 / (1 + x**2), 0.0, math.inf, math.pi / 2),
    (lambda x: np.sqrt(x), 0.0, 1.0, 2 / 3),
    (lambda x: np.log(x), 0.0, 1.0, -1.0),
    (lambda x: np.exp(-x**2), 0.0, math.inf, math.sqrt(math.pi) / 2),
    (lambda x: x * np.exp(-x), 0.0, math.inf, 1.0),
    (lambda x: 1 / (1 + x) ** 3, 0.0, math.inf, 0.5),
    (lambda x: np.cos(10 * x), 0.0, 1.0, math.sin(10) / 10),
]


@pytest.mark.parametrize("f,a,b,exact", CASES)
def test_error_estimate_bounds_true_error(f, a, b, exact):
    spec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)
    res = integrate(f, a, b, spec)
    true_err = abs(res.value - exact)
    assert true_err <= max(res.error, 1e-14)
    assert true_err <= 1e-9


def test_vector_valued_components_share_partition():
    res = integrate(lambda x: np.stack([x, x**2, np.ones_like(x)]), 0.0, 2.0)
    assert np.allclose(res.value, [2.0, 8 / 3, 2.0], atol=1e-12)


def test_reversed_and_empty_interval():
    assert integrate(lambda x: x, 1.0, 0.0).value == pytest.approx(-0.5)
    assert integrate(lambda x: x, 3.0, 3.0).value == 0.0


def test_nan_reports_abscissa():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)
    assert info.value.abscissa is not None
    assert info.value.abscissa > 0.5


def test_non_convergence_carries_best_estimate():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_intervals=2, initial_intervals=1)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(50 * x) ** 2 / np.sqrt(x), 0.0, 1.0, spec)
    assert info.value.value is not None
    assert info.value.error is not None


@pytest.mark.parametrize("kw", [dict(abs_tol=0.0), dict(rel_tol=-1.0), dict(max_intervals=0)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        QuadratureSpec(**kw)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3),
       lo=st.floats(0.0, 1.0), width=st.floats(0.1, 3.0))
def test_linearity(a, b, lo, width):
    hi = lo + width
    f = np.cos
    g = lambda x: x**3  # noqa: E731
    spec = QuadratureSpec(abs_tol=1e-11, rel_tol=1e-11)
    lhs = integrate(lambda x: a * f(x) + b * g(x), lo, hi, spec).value
    rhs = a * integrate(f, lo, hi, spec).value + b * integrate(g, lo, hi, spec).value
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(a) + abs(b)) * (1 + hi**4))


def test_gauss_legendre_panels_exact_for_polynomials():
    x, w = gauss_legendre_panels(0.0, 2.0, 3, order=4)
    assert x.shape == w.shape == (12,)
    assert np.sum(w * x**7) == pytest.approx(2**8 / 8, rel=1e-13)
