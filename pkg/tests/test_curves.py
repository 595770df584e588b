"""
Tests for the boundary curves and their jets
"""
import math

import numpy as np
import pytest

from orbitphase.geometry.curves import Circle, Ellipse, RadialFourier, CurveRegistry, CurveError, rotation_matrix, \
    tau_difference, wrap_tau
from orbitphase.utils.errors import ConfigError

CURVES = [
    Circle(0.5),
    Circle(0.7, (1.0, -2.0), -1, 0.1),
    Ellipse(2.0, 1.0),
    Ellipse(0.6, 0.9, (0.3, 0.2), 0.7),
    RadialFourier(1.0, [0.1, 0.02], [0.0, 0.05], (0.5, 0.5)),
]


def test_circle_point():
    circle = Circle(0.5)
    assert np.allclose(circle.point(0.0), [0.0, 0.5], atol=1e-15)
    assert np.allclose(circle.point(1.0), [0.0, 0.5], atol=1e-15)
    assert np.allclose(Circle(0.5, orientation=-1).point(0.0), [0.0, -0.5], atol=1e-15)


def test_ellipse_point_is_on_curve():
    x, y = Ellipse(2.0, 1.0).point(0.25)
    assert abs(x ** 2 / 4 + y ** 2 - 1) <= 1e-14


@pytest.mark.parametrize("curve", CURVES)
def test_periodicity(curve):
    taus = np.linspace(0, 1, 17)
    assert np.allclose(curve.point(taus), curve.point(taus + 1), atol=1e-13)


def test_circle_jet():
    jet = Circle(0.5).jet(0.0, 2)
    assert np.allclose(jet.x, [0, math.pi, 0], atol=1e-15)
    assert np.allclose(jet.y, [0.5, 0, -math.pi ** 2], atol=1e-14)


@pytest.mark.parametrize("curve", CURVES)
def test_zeroth_jet_is_point(curve):
    jet = curve.jet(0.3, 0)
    assert np.allclose(jet.point, curve.point(0.3), atol=1e-14)


@pytest.mark.parametrize("curve", CURVES)
def test_jet_matches_derivatives(curve):
    tau = 0.137
    jet = curve.jet(tau, 8)
    for p in range(9):
        deriv = curve.derivative(tau, p) if p > 0 else curve.point(tau)
        scale = max(1.0, float(np.max(np.abs(deriv))))
        assert np.allclose([jet.x[p] * math.factorial(p), jet.y[p] * math.factorial(p)], deriv,
                           atol=1e-10 * scale), p


@pytest.mark.parametrize("curve", CURVES)
def test_jet_matches_finite_differences(curve):
    tau, h = 0.61, 1e-3
    jet = curve.jet(tau, 2)
    # sixth order central differences
    weights = np.array([-1, 9, -45, 0, 45, -9, 1]) / (60 * h)
    points = curve.point(tau + h * np.arange(-3, 4))
    first = weights @ points
    assert np.allclose([jet.x[1], jet.y[1]], first, rtol=1e-6, atol=1e-6)
    weights2 = np.array([2, -27, 270, -490, 270, -27, 2]) / (180 * h ** 2)
    second = weights2 @ points / 2
    assert np.allclose([jet.x[2], jet.y[2]], second, rtol=1e-5, atol=1e-5)


def test_jet_truncation_consistency():
    curve = CURVES[-1]
    long, short = curve.jet(0.2, 12), curve.jet(0.2, 5)
    assert np.allclose(long.truncate(5).x, short.x, atol=1e-14)
    assert np.allclose(long.truncate(5).y, short.y, atol=1e-14)


def test_radial_fourier_without_amplitudes_is_circle():
    circle, radial = Circle(0.5), RadialFourier(0.5)
    for tau in (0.0, 0.1, 0.77):
        assert np.allclose(circle.jet(tau, 10).x, radial.jet(tau, 10).x, atol=1e-13)
        assert np.allclose(circle.jet(tau, 10).y, radial.jet(tau, 10).y, atol=1e-13)


def test_jet_order_cap():
    with pytest.raises(CurveError):
        Circle(1.0).jet(0.0, 33)
    with pytest.raises(CurveError):
        Circle(1.0).jet(0.0, -1)


def test_radial_fourier_needs_positive_radius():
    with pytest.raises(CurveError):
        RadialFourier(0.5, [0.6])


def test_invalid_parameters():
    with pytest.raises(CurveError):
        Circle(-1.0)
    with pytest.raises(CurveError):
        Circle(1.0, orientation=2)
    with pytest.raises(CurveError):
        Ellipse(1.0, 0.0)


@pytest.mark.parametrize("curve", [CURVES[0], CURVES[3], CURVES[4]])
def test_rotation(curve):
    theta = 0.4
    rotated = curve.rotated(theta)
    taus = np.linspace(0, 1, 9)
    shift = theta / (2 * math.pi) if isinstance(curve, RadialFourier) else 0.0
    assert np.allclose(rotated.point(taus - shift), curve.point(taus) @ rotation_matrix(theta).T, atol=1e-13)


def test_registry():
    circle = CurveRegistry.create({"kind": "circle", "radius": 1, "center": [1, 2]})
    assert isinstance(circle, Circle)
    assert circle.orientation == 1
    assert "ellipse" in CurveRegistry.names()
    for curve in CURVES:
        copy = CurveRegistry.create(curve.descriptor())
        assert np.allclose(copy.point(np.linspace(0, 1, 7)), curve.point(np.linspace(0, 1, 7)))


@pytest.mark.parametrize("descriptor", [
    {"kind": "square", "side": 1},
    {"kind": "circle"},
    {"kind": "circle", "radius": -1},
    {"kind": "circle", "radius": 1, "colour": "red"},
    {"radius": 1},
])
def test_registry_rejects(descriptor):
    with pytest.raises(ConfigError):
        CurveRegistry.create(descriptor)


def test_tau_helpers():
    assert wrap_tau(1.0) == 0.0
    assert tau_difference(0.95, 0.05) == pytest.approx(-0.1)
    assert np.allclose(tau_difference(np.array([0.5, 0.0]), 0.0), [0.5, 0.0])
