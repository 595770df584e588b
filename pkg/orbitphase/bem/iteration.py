"""
Multiple scattering by successive reflections: every obstacle is first lit by the incident
field alone, afterwards each obstacle is only lit by the field of the previous obstacle on the
orbit. The densities settle into the mode of the reflection cycle.
"""

import logging
import math
import typing as t

import numpy as np

from orbitphase.bem.assembly import BemError, BlockSystem, IncidentField
from orbitphase.bem.cycle import extract_phase_samples
from orbitphase.geometry.orbit import PeriodicOrbit
from orbitphase.series.phase_solver import PhaseSeries, eval_phase
from orbitphase.utils.errors import ConfigError


class Reflection(t.NamedTuple):
    """ Density after ``n`` reflections on one obstacle """

    n: int
    obstacle: int
    density: np.ndarray
    peak_tau: float
    peak_amplitude: float


class ScatteringIteration(t.NamedTuple):
    reflections: t.List[t.List[Reflection]]
    """ ``reflections[n][j]`` """
    cycle_ratios: t.List[t.List[float]]
    """ ``cycle_ratios[n][j]``: peak amplitude after ``n + J`` reflections divided by the one after n """
    phase_settling: t.Optional[t.List[t.List[float]]]
    """ ``phase_settling[n][j]``: largest deviation of the extracted phase from the Taylor phase """

    def peaks(self, j: int) -> t.List[float]:
        return [row[j].peak_tau for row in self.reflections]


def _reflection(system: BlockSystem, n: int, j: int, density: np.ndarray) -> Reflection:
    amplitude = np.abs(density)
    peak = int(np.argmax(amplitude))
    return Reflection(n, j, density, float(system.grid[j].nodes[peak]), float(amplitude[peak]))


def phase_deviation(system: BlockSystem, orbit: PeriodicOrbit, series: PhaseSeries, j: int,
                    density: np.ndarray, window: float) -> float:
    """
    Largest difference between the extracted phase of the density and the Taylor phase on the window,
    both measured relative to their value at the orbit point.
    """
    tau_star = float(orbit.taus[j])
    try:
        samples = extract_phase_samples(system.grid[j].nodes, density, system.scene.k, tau_star, 0.0, window)
    except BemError as err:
        logging.warning("No phase for obstacle {}: {}".format(j, err.message))
        return math.nan
    taylor = np.array([eval_phase(series, j, tau).value for tau in samples.taus]) - series.c[j, 0]
    return float(np.max(np.abs(samples.phase - taylor)))


def iterate_scattering(system: BlockSystem, incident: IncidentField, n_reflections: int,
                       orbit: PeriodicOrbit = None, series: PhaseSeries = None,
                       window: float = 0.05) -> ScatteringIteration:
    """
    Computes the densities of the reflections 0 to ``n_reflections``.

    :param system: assembled system of the scene
    :param incident: incident field
    :param n_reflections: number of reflections after the direct illumination, >= 1
    :param orbit: periodic orbit, needed for the phase settling
    :param series: limiting phase, if passed (with the orbit) the phase deviation of every density is computed
    :param window: half width of the window for the phase deviation
    """
    if n_reflections < 1:
        raise ConfigError("At least one reflection is needed, got {}".format(n_reflections))
    scene = system.scene
    size = scene.size
    rows = [[_reflection(system, 0, j, -system.solve(j, incident(scene.k, system.grid[j].points)))
             for j in range(size)]]
    for n in range(1, n_reflections + 1):
        previous = rows[-1]
        row = [None] * size
        for j in range(size):
            row[scene.next_index(j)] = _reflection(system, n, scene.next_index(j),
                                                   system.reflect(j, previous[j].density))
        rows.append(row)
        logging.debug("reflection {}: peaks {}".format(n, [r.peak_tau for r in row]))
    ratios = [[rows[n + size][j].peak_amplitude / rows[n][j].peak_amplitude for j in range(size)]
              for n in range(len(rows) - size)]
    settling = None
    if series is not None and orbit is not None:
        settling = [[phase_deviation(system, orbit, series, j, r.density, window) for j, r in enumerate(row)]
                    for row in rows]
    logging.info("Computed {} reflections".format(n_reflections))
    return ScatteringIteration(rows, ratios, settling)
