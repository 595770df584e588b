"""
Tests for scenes and the periodic orbit search
"""
import math

import numpy as np
import pytest

from orbitphase.geometry.curves import Circle, Ellipse, tau_difference
from orbitphase.geometry.orbit import find_orbit, path_length, initial_taus, OrbitError
from orbitphase.geometry.scene import Scene
from orbitphase.report.config import SceneConfig
from orbitphase.utils.errors import ConfigError
from orbitphase.utils.settings import Settings


def three_disks(distance: float = 3.0, r: float = 1.0) -> Scene:
    radius = distance / math.sqrt(3)
    centers = [(radius * math.cos(a), radius * math.sin(a)) for a in (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)]
    return Scene([Circle(r, c) for c in centers])


def test_path_length_two_disks():
    scene = Scene.two_disks()
    assert path_length(scene, [0.0, 0.0]).value == pytest.approx(2.0, abs=1e-15)
    assert path_length(scene, [0.5, 0.5]).value == pytest.approx(4.0, abs=1e-14)
    res = path_length(scene, [0.0, 0.0])
    assert np.allclose(res.leg_distances, [1.0, 1.0])
    assert np.allclose(res.gradient, 0.0, atol=1e-15)


def test_path_length_derivatives():
    scene = SceneConfig.bundled("three_obstacles").build_scene()
    taus = np.array([0.45, 0.2, 0.8])
    h = 1e-6
    res = path_length(scene, taus)
    for j in range(3):
        step = np.zeros(3)
        step[j] = h
        plus, minus = path_length(scene, taus + step), path_length(scene, taus - step)
        fd_gradient = (plus.value - minus.value) / (2 * h)
        assert fd_gradient == pytest.approx(res.gradient[j], rel=1e-6, abs=1e-8)
        fd_hessian = (plus.gradient - minus.gradient) / (2 * h)
        assert np.allclose(fd_hessian, res.hessian[j], rtol=1e-6, atol=1e-6)


def test_find_orbit_two_disks():
    orbit = find_orbit(Scene.two_disks())
    assert np.allclose(tau_difference(orbit.taus, 0.0), 0.0, atol=1e-12)
    assert orbit.total_length == pytest.approx(2.0, abs=1e-12)
    assert orbit.total_length == pytest.approx(float(np.sum(orbit.leg_distances)), rel=1e-14)
    assert np.all(orbit.hessian_eigenvalues > 0)


def test_find_orbit_rotated_scene():
    scene = Scene.two_disks()
    rotated = scene.rotated(0.9)
    orbit, rotated_orbit = find_orbit(scene), find_orbit(rotated)
    assert rotated_orbit.total_length == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(tau_difference(rotated_orbit.taus, orbit.taus), 0.0, atol=1e-10)
    for j in range(2):
        rotated_point = rotated.obstacles[j].point(rotated_orbit.taus[j])
        assert np.allclose(rotated_point, scene.obstacles[j].point(orbit.taus[j]) @ np.array(
            [[math.cos(0.9), math.sin(0.9)], [-math.sin(0.9), math.cos(0.9)]]), atol=1e-10)


def test_find_orbit_three_disks():
    orbit = find_orbit(three_disks(3.0, 1.0))
    assert orbit.total_length == pytest.approx(3 * (3.0 - math.sqrt(3)), abs=1e-12)
    assert np.allclose(orbit.leg_distances, orbit.leg_distances[0], atol=1e-12)


@pytest.mark.parametrize("name", ["three_obstacles", "ellipse_pair"])
def test_orbit_is_stationary(name):
    scene = SceneConfig.bundled(name).build_scene()
    orbit = find_orbit(scene)
    res = path_length(scene, orbit.taus)
    assert np.max(np.abs(res.gradient)) <= 1e-11
    again = find_orbit(scene, orbit.taus)
    assert np.allclose(tau_difference(again.taus, orbit.taus), 0.0, atol=1e-13)
    assert again.total_length == pytest.approx(orbit.total_length, rel=1e-14)


def test_find_orbit_is_deterministic():
    scene = SceneConfig.bundled("three_obstacles").build_scene()
    assert np.array_equal(find_orbit(scene).taus, find_orbit(scene).taus)
    assert np.array_equal(initial_taus(scene), initial_taus(scene))


def test_orbit_to_dict():
    data = find_orbit(Scene.two_disks()).to_dict()
    assert set(data) == {"taus", "leg_distances", "total_length", "hessian_eigenvalues", "iterations"}
    assert isinstance(data["taus"][0], float)


def test_orbit_no_convergence():
    scene = Scene([Circle(0.5), Ellipse(0.4, 0.7, (0.4, 2.0), 0.3)])
    Settings()["orbit/max_iterations"] = 1
    try:
        with pytest.raises(OrbitError) as info:
            find_orbit(scene)
        assert info.value.stage == "orbit"
        assert "gradient_norm" in info.value.diagnostics
    finally:
        Settings().reset()


def test_scene_validation():
    with pytest.raises(ConfigError):
        Scene([Circle(1.0)])
    with pytest.raises(ConfigError):
        Scene([Circle(1.0), Circle(1.0, (1.0, 0.0))])
    with pytest.raises(ConfigError):
        Scene([Circle(1.0), Circle(0.2, (0.1, 0.0))])
    with pytest.raises(ConfigError):
        Scene([Circle(0.5), Circle(0.5, (0.0, 1.01))], k=64, separation_check=True)
    Scene([Circle(0.5), Circle(0.5, (0.0, 1.01))], k=64)
    with pytest.raises(ConfigError):
        Scene.two_disks(k=0)


def test_scene_helpers():
    scene = three_disks()
    assert scene.size == 3
    assert [scene.next_index(j) for j in range(3)] == [1, 2, 0]
    assert scene.with_k(128).k == 128
    assert scene.min_distance == pytest.approx(1.0, abs=1e-3)


def test_degenerate_hessian(monkeypatch):
    monkeypatch.setattr(np.linalg, "eigvalsh", lambda matrix: np.array([0.0, 1.0]))
    with pytest.raises(OrbitError) as info:
        find_orbit(Scene.two_disks())
    assert info.value.diagnostics["hessian_eigenvalues"] == [0.0, 1.0]
