"""
Tests for the two disk reference computations
"""
import math

import numpy as np
import pytest

from orbitphase.geometry.orbit import find_orbit
from orbitphase.series.phase_solver import compute_phase_series, eval_phase
from orbitphase.twodisk.oracles import TwoDiskConfig, TwoDiskError, solve_chi, phi_geometric_sum, \
    phi_via_chi_integral, zeta_xi, fit_taylor, closed_form_coeffs
from orbitphase.utils.errors import ConfigError


@pytest.fixture(scope="module")
def config():
    return TwoDiskConfig()


@pytest.fixture(scope="module")
def chi(config):
    return solve_chi(config)


@pytest.fixture(scope="module")
def series(config):
    scene = config.scene()
    return compute_phase_series(scene, find_orbit(scene), 8)[0]


def test_config(config):
    assert config.distance(0.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert abs(config.distance_d1(0.0, 0.0)) < 1e-15
    with pytest.raises(ConfigError):
        TwoDiskConfig(-0.5)
    with pytest.raises(ConfigError):
        TwoDiskConfig(0.5, 0.0)


def test_solve_chi(chi):
    assert np.max(np.abs(chi.residual)) <= 1e-12
    assert chi.extent == (-0.2, 0.2)
    assert chi(0.0) == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(chi.values, -chi.values[::-1], atol=1e-13)
    assert chi.derivative_at_zero() == pytest.approx(3 - 2 * math.sqrt(2), rel=1e-7)


def test_chi_matches_series(chi):
    a = closed_form_coeffs().a
    assert float(chi(0.02)) == pytest.approx(float(np.polynomial.polynomial.polyval(0.02, a)), rel=1e-7)


def test_solve_chi_failures(config):
    with pytest.raises(TwoDiskError) as info:
        solve_chi(config, max_sweeps=0)
    assert info.value.stage == "twodisk"
    odd_grid = solve_chi(config, np.linspace(-0.1, 0.1, 400))
    with pytest.raises(TwoDiskError):
        odd_grid.derivative_at_zero()


def test_geometric_sum_matches_series(config, chi, series):
    for tau in (0.0, 0.005, -0.02, 0.02):
        assert phi_geometric_sum(config, tau, chi=chi) == \
               pytest.approx(eval_phase(series, 0, tau).value, abs=1e-9)


def test_geometric_sum_converges(config, chi):
    short = phi_geometric_sum(config, 0.05, max_reflections=3, chi=chi)
    long = phi_geometric_sum(config, 0.05, chi=chi)
    assert abs(short - long) < 1e-6
    with pytest.raises(ValueError):
        phi_geometric_sum(config, 0.05, max_reflections=0, chi=chi)
    with pytest.raises(TwoDiskError):
        phi_geometric_sum(config, 0.3, chi=chi)


def test_chi_integral(config, chi, series):
    assert phi_via_chi_integral(config, 0.0, chi) == 1.0
    assert phi_via_chi_integral(config, 0.01, chi) == pytest.approx(eval_phase(series, 0, 0.01).value, abs=1e-9)
    assert phi_via_chi_integral(config, -0.01, chi) == pytest.approx(phi_via_chi_integral(config, 0.01, chi),
                                                                     abs=1e-12)
    with pytest.raises(TwoDiskError):
        phi_via_chi_integral(config, 0.1, chi)


def test_zeta_xi(config):
    zeta, xi = zeta_xi(config, 0.25)
    assert zeta == pytest.approx(math.sqrt(10) / 2, rel=1e-14)
    assert xi == pytest.approx(math.sqrt(17) / 2 - 0.5, rel=1e-14)
    assert zeta_xi(config, 0.0) == pytest.approx((1.0, 1.0), abs=1e-15)


def test_fit_taylor(config, chi):
    closed = closed_form_coeffs().c
    fitted = fit_taylor(config, chi=chi)
    assert fitted[0] == pytest.approx(1.0, abs=1e-12)
    assert fitted[2] == pytest.approx(closed[2], rel=1e-6)
    assert fitted[4] == pytest.approx(closed[4], rel=1e-6)
    assert np.all(fitted[1::2] == 0)
    wide = fit_taylor(config, extent=0.03, chi=chi)
    assert wide[6] == pytest.approx(closed[6], rel=1e-5)


def test_truncation_error_slope(config, chi):
    scene = config.scene()
    series = compute_phase_series(scene, find_orbit(scene), 12)[0]
    taus = np.geomspace(0.03, 0.1, 8)
    exact = np.array([phi_geometric_sum(config, tau, chi=chi) for tau in taus])
    for order in (2, 4, 6, 8):
        errors = np.abs(exact - [eval_phase(series, 0, tau, order).value for tau in taus])
        slope = np.polyfit(np.log(taus), np.log(errors), 1)[0]
        # the odd coefficients vanish for two disks
        assert abs(slope - (order + 2)) <= 0.5
