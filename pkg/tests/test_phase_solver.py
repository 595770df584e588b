"""
Tests for the Taylor coefficients of the limiting phase and of the chi maps
"""
import math

import numpy as np
import pytest

from orbitphase.geometry.curves import Circle
from orbitphase.geometry.orbit import find_orbit
from orbitphase.geometry.scene import Scene
from orbitphase.report.config import SceneConfig
from orbitphase.series.dist_series import distance_series
from orbitphase.series.phase_solver import compute_phase_series, eval_phase, eval_chi, solve_order2, \
    BranchRejectedError, PhaseSolverError
from orbitphase.twodisk.oracles import TwoDiskConfig, closed_form_coeffs, fit_taylor
from orbitphase.utils.errors import ConfigError


@pytest.fixture(scope="module")
def two_disks():
    scene = Scene.two_disks()
    orbit = find_orbit(scene)
    series, chi = compute_phase_series(scene, orbit, 8)
    return scene, orbit, series, chi


def test_two_disk_closed_form(two_disks):
    _, _, series, chi = two_disks
    closed = closed_form_coeffs()
    for j in range(2):
        assert np.allclose(series.c[j], closed.c, rtol=1e-9, atol=1e-9)
        assert np.allclose(chi.a[j, 1:], closed.a[1:], rtol=1e-9, atol=1e-9)


def test_two_disk_symmetry(two_disks):
    _, _, series, chi = two_disks
    assert np.allclose(series.c[0], series.c[1], atol=1e-10)
    assert np.all(np.abs(series.c[:, 1::2]) <= 1e-10 * np.max(np.abs(series.c)))
    assert np.all(np.abs(chi.a[:, 2::2]) <= 1e-10 * np.max(np.abs(chi.a)))
    assert series.c[0, 2] == pytest.approx(math.sqrt(2) * math.pi ** 2, rel=1e-12)
    assert chi.a[0, 1] == pytest.approx(3 - 2 * math.sqrt(2), rel=1e-12)


def test_two_disk_residuals(two_disks):
    _, _, series, _ = two_disks
    assert series.max_residual() <= 1e-10
    assert series.diagnostics["max_residual"] == series.max_residual()
    assert series.order == 8


@pytest.mark.parametrize("name", ["ellipse_pair", "three_obstacles"])
def test_general_scene_residuals(name):
    scene = SceneConfig.bundled(name).build_scene()
    orbit = find_orbit(scene)
    series, chi = compute_phase_series(scene, orbit, 6)
    assert series.max_residual() <= 1e-11
    assert np.all(series.c[:, 2] > 0)
    assert np.all(np.abs(chi.a[:, 1]) < 1)
    assert np.allclose(series.c[:, 0], orbit.leg_distances)
    assert np.allclose(chi.a[:, 0], orbit.taus)


def test_rotation_invariance():
    scene = SceneConfig.bundled("three_obstacles").build_scene()
    series, _ = compute_phase_series(scene, find_orbit(scene), 5)
    rotated = scene.rotated(1.1)
    rotated_series, _ = compute_phase_series(rotated, find_orbit(rotated), 5)
    assert np.allclose(rotated_series.c, series.c, rtol=1e-7, atol=1e-7)


def test_lower_order_is_a_prefix(two_disks):
    scene, orbit, series, chi = two_disks
    low, low_chi = compute_phase_series(scene, orbit, 4)
    assert np.allclose(low.c, series.c[:, :5], atol=1e-12)
    assert np.allclose(low_chi.a, chi.a[:, :4], atol=1e-12)


def test_rejected_branch(two_disks):
    scene, orbit, _, _ = two_disks
    tables = [series.f for series in distance_series(scene, orbit, 4)]
    a1 = 3 + 2 * math.sqrt(2)
    c2 = math.pi ** 2 / (2 * a1) - 1.5 * math.pi ** 2
    with pytest.raises(BranchRejectedError) as info:
        solve_order2(tables, [([c2, c2], [a1, a1])])
    assert len(info.value.rejected_roots) == 1
    assert info.value.rejected_roots[0].violations


def test_wrong_branch_guess_is_rejected(two_disks):
    scene, orbit, series, _ = two_disks
    a1 = 3 + 2 * math.sqrt(2)
    c2 = math.pi ** 2 / (2 * a1) - 1.5 * math.pi ** 2
    other, _ = compute_phase_series(scene, orbit, 8, initial_guess=([c2, c2], [a1, a1]))
    assert np.allclose(other.c, series.c, atol=1e-10)
    assert len(other.diagnostics["rejected_roots"]) == 1


def test_not_an_orbit(two_disks):
    scene, orbit, _, _ = two_disks
    shifted = orbit._replace(taus=np.array([0.05, 0.0]))
    with pytest.raises(PhaseSolverError) as info:
        compute_phase_series(scene, shifted, 4)
    assert info.value.stage == "phase_solver"
    assert info.value.partial is not None


def test_order_too_small(two_disks):
    scene, orbit, _, _ = two_disks
    with pytest.raises(ConfigError):
        compute_phase_series(scene, orbit, 1)


def test_eval_phase(two_disks):
    _, _, series, _ = two_disks
    assert eval_phase(series, 0, 0.0).value == pytest.approx(1.0)
    res = eval_phase(series, 1, 0.01)
    assert res.trusted
    assert res.value == pytest.approx(float(np.polynomial.polynomial.polyval(0.01, closed_form_coeffs().c)), rel=1e-12)
    assert eval_phase(series, 1, 0.99).value == pytest.approx(res.value, rel=1e-12)
    assert eval_phase(series, 0, 0.01, order=2).value == pytest.approx(1 + math.sqrt(2) * math.pi ** 2 * 1e-4)
    assert not eval_phase(series, 0, 0.3).trusted


def test_eval_chi(two_disks):
    _, orbit, _, chi = two_disks
    assert eval_chi(chi, 0, orbit.taus[1], orbit.taus[1]) == pytest.approx(float(orbit.taus[0]) % 1.0, abs=1e-12)
    value = eval_chi(chi, 0, 0.01, 0.0)
    assert value == pytest.approx((3 - 2 * math.sqrt(2)) * 0.01, rel=1e-3)
    assert eval_chi(chi, 0, -0.01, 0.0) == pytest.approx(1 - value, abs=1e-12)


def test_reversed_obstacle_order():
    scene = SceneConfig.bundled("ellipse_pair").build_scene()
    series, chi = compute_phase_series(scene, find_orbit(scene), 6)
    reversed_scene = Scene(list(reversed(scene.obstacles)), k=scene.k)
    rev_series, rev_chi = compute_phase_series(reversed_scene, find_orbit(reversed_scene), 6)
    scale = np.max(np.abs(series.c))
    assert np.allclose(rev_series.c[0], series.c[1], rtol=1e-9, atol=1e-10 * scale)
    assert np.allclose(rev_series.c[1], series.c[0], rtol=1e-9, atol=1e-10 * scale)
    assert np.allclose(rev_chi.a[0], chi.a[1], rtol=1e-9, atol=1e-10 * np.max(np.abs(chi.a)))


def test_scaled_two_disks():
    size = 2.5
    scene = Scene.two_disks(r=size / 2, d=size)
    series, chi = compute_phase_series(scene, find_orbit(scene), 6)
    assert series.c[0, 0] == pytest.approx(size, rel=1e-12)
    assert series.c[0, 2] == pytest.approx(size * math.sqrt(2) * math.pi ** 2, rel=1e-12)
    assert chi.a[0, 1] == pytest.approx(3 - 2 * math.sqrt(2), rel=1e-12)
    assert series.c[0, 2] == pytest.approx(fit_taylor(TwoDiskConfig(size / 2, size))[2], rel=1e-6)


def test_symmetric_three_disks():
    radius = 3.0 / math.sqrt(3)
    scene = Scene([Circle(1.0, (radius * math.cos(a), radius * math.sin(a)))
                   for a in (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)])
    series, chi = compute_phase_series(scene, find_orbit(scene), 5)
    scale = np.max(np.abs(series.c))
    for j in range(1, 3):
        assert np.allclose(series.c[j], series.c[0], rtol=0, atol=1e-9 * scale)
        assert np.allclose(chi.a[j, 1:], chi.a[0, 1:], rtol=0, atol=1e-9 * np.max(np.abs(chi.a[:, 1:])))
    assert abs(series.c[0, 1] - series.c[1, 1]) <= 1e-9 * scale
