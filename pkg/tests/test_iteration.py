"""
Tests for the successive reflections between two disks
"""
import numpy as np
import pytest

from orbitphase.bem.assembly import PlaneWave, PointSource, assemble_system
from orbitphase.bem.cycle import compute_mode
from orbitphase.bem.iteration import iterate_scattering
from orbitphase.geometry.curves import tau_difference
from orbitphase.geometry.orbit import find_orbit
from orbitphase.geometry.scene import Scene
from orbitphase.series.phase_solver import compute_phase_series
from orbitphase.utils.errors import ConfigError


@pytest.fixture(scope="module")
def setup():
    scene = Scene.two_disks(k=64.0)
    orbit = find_orbit(scene)
    system = assemble_system(scene)
    series, _ = compute_phase_series(scene, orbit, 8)
    iteration = iterate_scattering(system, PlaneWave((1.0, 0.0)), 8, orbit, series)
    return scene, orbit, system, iteration


def test_direct_illumination(setup):
    _, _, system, iteration = setup
    assert len(iteration.reflections) == 9
    assert all(r.n == 0 for r in iteration.reflections[0])
    cell = system.grid[0].spacing
    for j in range(2):
        assert abs(tau_difference(iteration.reflections[0][j].peak_tau, -0.25)) <= cell + 1e-12


def test_peaks_move_to_the_orbit(setup):
    _, _, system, iteration = setup
    cell = system.grid[0].spacing
    for j in range(2):
        for peak in iteration.peaks(j)[3:]:
            assert abs(tau_difference(peak, 0.0)) <= cell + 1e-12


def test_cycle_ratios(setup):
    scene, orbit, system, iteration = setup
    assert len(iteration.cycle_ratios) == 7
    ratios = np.array([row[1] for row in iteration.cycle_ratios[3:7]])
    assert np.max(ratios) <= 1.1 * np.min(ratios)
    eigenvalue = compute_mode(scene, orbit, system=system).mode.eigenvalue
    assert np.all(np.abs(ratios - abs(eigenvalue)) <= 0.15 * abs(eigenvalue))


def test_phase_settles(setup):
    _, _, _, iteration = setup
    settling = np.array(iteration.phase_settling)
    assert settling.shape == (9, 2)
    assert settling[-1, 0] <= 5e-3
    assert settling[0, 0] > 10 * settling[-1, 0]


def test_without_series(setup):
    _, _, system, _ = setup
    iteration = iterate_scattering(system, PlaneWave((1.0, 0.0)), 2)
    assert iteration.phase_settling is None
    assert len(iteration.cycle_ratios) == 1
    with pytest.raises(ConfigError):
        iterate_scattering(system, PlaneWave(), 0)


def test_point_source(setup):
    _, _, system, _ = setup
    iteration = iterate_scattering(system, PointSource((2.0, 1.0)), 8)
    cell = system.grid[0].spacing
    for j in range(2):
        assert abs(tau_difference(iteration.peaks(j)[-1], 0.0)) <= cell + 1e-12
