import math

import numpy as np
import pytest

from phasenoise import quadrature
from phasenoise.errors import QuadratureError


def test_polynomial_exact():
    value, err = quadrature.integrate(lambda x: 3 * x**2, 0.0, 2.0)
    assert value == pytest.approx(8.0, rel=1e-15)
    assert err < 1e-12


def test_oscillatory_closed_form():
    f = lambda x: np.cos(37.0 * x) * np.exp(-x)
    ref = ((1 - np.exp((37j - 1) * 20)) / (1 - 37j)).real
    value, _ = quadrature.integrate(f, 0.0, 20.0, panels=240)
    assert value == pytest.approx(ref, rel=1e-10)


def test_endpoint_peak_refines():
    value, _ = quadrature.integrate(lambda x: np.sqrt(x), 0.0, 1.0, rtol=1e-9)
    assert value == pytest.approx(2 / 3, rel=1e-9)


def test_budget_exhaustion_reports_achieved_error():
    with pytest.raises(QuadratureError) as info:
        quadrature.integrate(lambda x: np.sign(np.sin(1e4 * x)), 0.0, 1.0, rtol=1e-15, atol=1e-300, max_panels=50)
    assert info.value.achieved > 0


def test_empty_interval_and_bad_order():
    assert quadrature.integrate(np.sin, 1.0, 1.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        quadrature.integrate(np.sin, 1.0, 0.0)


def test_gauss_legendre_small_interval():
    assert quadrature.gauss_legendre(lambda x: x**5, 0.0, 1e-3) == pytest.approx(1e-18 / 6, rel=1e-14)
