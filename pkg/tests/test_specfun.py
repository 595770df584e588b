"""
Tests for the Bessel and Hankel functions of order zero
"""
import math

import numpy as np
import pytest
from scipy import special

from orbitphase.bem.specfun import hankel_h0, bessel_j0, bessel_y0, y0_regular_part, SEAM, EULER_GAMMA
from orbitphase.utils.errors import SpecfunError

ARGS = np.concatenate([np.geomspace(1e-6, 1, 20), np.linspace(1.01, 30, 120), np.geomspace(30, 2e4, 30)])


def test_against_scipy():
    assert np.allclose(bessel_j0(ARGS), special.j0(ARGS), rtol=1e-12, atol=2e-13)
    assert np.allclose(bessel_y0(ARGS), special.y0(ARGS), rtol=1e-12, atol=2e-13)
    assert np.allclose(hankel_h0(ARGS), special.hankel1(0, ARGS), rtol=1e-12, atol=2e-13)


def test_scalars():
    assert isinstance(hankel_h0(1.0), complex)
    assert isinstance(bessel_j0(1.0), float)
    assert bessel_j0(0.0) == 1.0
    assert hankel_h0(np.array([[1.0, 2.0]])).shape == (1, 2)


def test_seam_is_continuous():
    below, above = np.nextafter(SEAM, 0), np.nextafter(SEAM, 20)
    assert abs(hankel_h0(below) - hankel_h0(above)) < 1e-13


def test_wronskian():
    x = np.linspace(0.5, 50, 200)
    h = 1e-5
    j_prime = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
    y_prime = (bessel_y0(x + h) - bessel_y0(x - h)) / (2 * h)
    # J0 Y0' - J0' Y0 = 2 / (pi x)
    assert np.allclose(bessel_j0(x) * y_prime - j_prime * bessel_y0(x), 2 / (math.pi * x), rtol=1e-8)


def test_regular_part():
    assert y0_regular_part(0.0) == pytest.approx(2 * EULER_GAMMA / math.pi, rel=1e-15)
    x = np.array([1e-3, 0.5, 3.0, 9.0, 40.0])
    expected = special.y0(x) - 2 / math.pi * np.log(x / 2) * special.j0(x)
    assert np.allclose(y0_regular_part(x), expected, rtol=1e-11, atol=1e-12)


@pytest.mark.parametrize("arg", [0.0, -1.0, float("nan"), np.array([1.0, -2.0])])
def test_domain(arg):
    with pytest.raises(SpecfunError):
        hankel_h0(arg)


def test_j0_domain():
    with pytest.raises(SpecfunError):
        bessel_j0(-1.0)
