"""
The reflection cycle: one application maps a density on the first obstacle through all
obstacles of the orbit back onto the first one. Its dominant eigenpair gives the mode, whose
densities on the obstacles carry the numerical phases.
"""

import logging
import math
import typing as t

import numpy as np
import scipy.sparse.linalg

from orbitphase.bem.assembly import BemError, BemGrid, BlockSystem, assemble_system
from orbitphase.geometry.curves import tau_difference
from orbitphase.geometry.orbit import PeriodicOrbit
from orbitphase.geometry.scene import Scene
from orbitphase.utils.settings import Settings


class CycleOperator:
    """
    Applies one full reflection cycle to densities on obstacle 0 without forming the matrix:
    ``v -> -A_00^-1 A_0,J-1 ... (-A_11^-1 A_10 v)``.
    Every reflection carries a minus sign, so the dominant eigenvalue is close to
    ``(-1)**J exp(i k L)`` times its modulus, see :func:`cycle_sign`.
    """

    def __init__(self, system: BlockSystem):
        self.system = system  # type: BlockSystem
        self.size = system.grid[0].size  # type: int
        """ Dimension of the operator (collocation points on obstacle 0) """
        self.applications = 0  # type: int

    def __call__(self, vector: np.ndarray) -> np.ndarray:
        self.applications += 1
        ret = np.asarray(vector, dtype=complex)
        for j in range(self.system.scene.size):
            ret = self.system.reflect(j, ret)
        return ret

    def as_linear_operator(self) -> scipy.sparse.linalg.LinearOperator:
        return scipy.sparse.linalg.LinearOperator((self.size, self.size), matvec=self, dtype=complex)


def cycle_operator(system: BlockSystem) -> CycleOperator:
    return CycleOperator(system)


def cycle_sign(size: int) -> int:
    """ Sign ``(-1)**J`` that the reflections of a cycle over ``size`` obstacles add to the eigenvalue """
    return -1 if size % 2 else 1


class Eigenpair(t.NamedTuple):
    value: complex
    vector: np.ndarray
    """ Normalized eigenvector """
    iterations: int


def dominant_eigenpair(applier: t.Callable[[np.ndarray], np.ndarray], size: int, tol: float = None,
                       max_iter: int = None) -> Eigenpair:
    """
    Power iteration from the all ones vector.

    Each iterate is normalized and rotated so that its inner product with the previous one is
    real and positive; the iteration stops when two iterates differ by at most ``tol`` in norm.

    :param applier: linear map
    :param size: dimension
    :param tol: convergence tolerance, default from the settings
    :param max_iter: maximum number of iterations, default from the settings
    :raises: BemError if the iteration does not converge (nearly degenerate leading eigenvalues)
    """
    tol = Settings().default(tol, "bem/power_tol")
    max_iter = Settings().default(max_iter, "bem/power_max_iterations")
    vector = np.ones(size, dtype=complex) / math.sqrt(size)
    difference = math.inf
    for iteration in range(1, max_iter + 1):
        image = applier(vector)
        norm = float(np.linalg.norm(image))
        if norm == 0:
            raise BemError("The power iteration reached the zero vector", {"iteration": iteration})
        image = image / norm
        overlap = np.vdot(vector, image)
        if overlap != 0:
            image = image * np.exp(-1j * np.angle(overlap))
        difference = float(np.linalg.norm(image - vector))
        vector = image
        logging.debug("power iteration {}: difference {:.3g}".format(iteration, difference))
        if difference <= tol:
            value = complex(np.vdot(vector, applier(vector)))
            logging.info("Dominant eigenvalue {:.12g} (|.| = {:.12g}) after {} iterations"
                         .format(value, abs(value), iteration))
            return Eigenpair(value, vector, iteration)
    raise BemError("The power iteration did not converge after {} iterations".format(max_iter),
                   {"difference": difference, "tol": tol})


def leading_eigenvalues(operator: CycleOperator, count: int = 4) -> np.ndarray:
    """
    The ``count`` eigenvalues of largest modulus (ARPACK on the matrix free operator),
    sorted by decreasing modulus.
    """
    if not 0 < count < operator.size - 1:
        raise ValueError("Can't compute {} eigenvalues of an operator of size {}".format(count, operator.size))
    values = scipy.sparse.linalg.eigs(operator.as_linear_operator(), k=count, which="LM",
                                      v0=np.ones(operator.size, dtype=complex), return_eigenvectors=False)
    return values[np.argsort(-np.abs(values), kind="stable")]


class PhaseSamples(t.NamedTuple):
    """ Numerical phase of a density around the orbit point """

    taus: np.ndarray
    phase: np.ndarray
    window: t.Tuple[float, float]
    """ Offsets ``(low, high)`` from the orbit point that were actually covered """
    shrunk: bool
    """ The requested window was shrunk because of a small amplitude """

    def offsets(self, tau_star: float) -> np.ndarray:
        return tau_difference(self.taus, tau_star)


def extract_phase_samples(grid_nodes: np.ndarray, values: np.ndarray, k: float, tau_star: float,
                          anchor: float, window: float = None, amplitude_floor: float = None) -> PhaseSamples:
    """
    Numerical phase of the piecewise linear function with the passed nodal values.

    The function is sampled on the grid spacing starting at ``tau_star``. Walking outward in both
    directions the phase grows by the argument increments divided by k, with jumps of 2 pi removed.
    The phase at ``tau_star`` is ``anchor``.

    :param window: half width of the window around ``tau_star``
    :param amplitude_floor: the walk stops before samples with ``|value| <= floor * max |value|``
    """
    window = Settings().default(window, "bem/window")
    amplitude_floor = Settings().default(amplitude_floor, "bem/amplitude_floor")
    spacing = 1.0 / len(grid_nodes)
    steps = int(math.floor(window / spacing + 1e-9))
    offsets = np.arange(-steps, steps + 1) * spacing
    samples = np.interp(np.mod(tau_star + offsets, 1.0), grid_nodes, values, period=1.0)
    amplitude = np.abs(samples)
    floor = amplitude_floor * float(np.max(np.abs(values)))
    phase = np.full(len(offsets), np.nan)
    phase[steps] = anchor
    low, high = steps, steps
    if amplitude[steps] <= floor:
        raise BemError("The density vanishes at the orbit point", {"tau_star": tau_star})
    for direction in (1, -1):
        index = steps
        while 0 <= index + direction < len(offsets) and amplitude[index + direction] > floor:
            increment = np.angle(samples[index + direction]) - np.angle(samples[index])
            increment -= 2 * math.pi * math.floor(increment / (2 * math.pi) + 0.5)
            phase[index + direction] = phase[index] + increment / k
            index += direction
        if direction == 1:
            high = index
        else:
            low = index
    shrunk = low > 0 or high < len(offsets) - 1
    if shrunk:
        logging.warning("Phase extraction window shrunk to [{:.4g}, {:.4g}] because of a small amplitude"
                        .format(offsets[low], offsets[high]))
    return PhaseSamples(tau_star + offsets[low:high + 1], phase[low:high + 1],
                        (float(offsets[low]), float(offsets[high])), shrunk)


class CycleMode:
    """
    The mode of the reflection cycle: the dominant eigenvector on obstacle 0 and its images on
    the following obstacles.
    """

    def __init__(self, system: BlockSystem, eigenpair: Eigenpair):
        self.system = system  # type: BlockSystem
        self.eigenvalue = eigenpair.value  # type: complex
        self.iterations = eigenpair.iterations  # type: int
        self.vectors = [eigenpair.vector]  # type: t.List[np.ndarray]
        """ Coefficients of the densities on every obstacle """
        for j in range(system.scene.size - 1):
            self.vectors.append(system.reflect(j, self.vectors[-1]))
        closed = system.reflect(system.scene.size - 1, self.vectors[-1])
        self.closing_residual = float(np.linalg.norm(closed - self.eigenvalue * self.vectors[0])
                                      / np.linalg.norm(self.vectors[0]))  # type: float
        """ Relative residual of the eigen relation after propagating once around the cycle """

    @property
    def grid(self) -> BemGrid:
        return self.system.grid

    def evaluate(self, j: int, tau: t.Union[float, np.ndarray]) -> np.ndarray:
        """ The density on obstacle j at the parameter(s) tau """
        return self.grid[j].hat_values(self.vectors[j], tau)

    def extract_phase(self, j: int, tau_star: float, anchor: float, window: float = None) -> PhaseSamples:
        """
        Numerical phase on obstacle j with the value ``anchor`` (usually the leg distance d_j)
        at the orbit point.
        """
        return extract_phase_samples(self.grid[j].nodes, self.vectors[j], self.system.scene.k, tau_star,
                                     anchor, window)


def reconstruct_mode(system: BlockSystem, eigenpair: Eigenpair) -> CycleMode:
    mode = CycleMode(system, eigenpair)
    logging.debug("Mode closing residual {:.3g}".format(mode.closing_residual))
    return mode


def extract_phase(mode: CycleMode, j: int, orbit: PeriodicOrbit, window: float = None) -> PhaseSamples:
    """ Phase of the mode on obstacle j, anchored to the leg distance at the orbit point """
    return mode.extract_phase(j, float(orbit.taus[j]), float(orbit.leg_distances[j]), window)


class ModeResult(t.NamedTuple):
    system: BlockSystem
    mode: CycleMode
    phases: t.List[PhaseSamples]
    leading: t.Optional[np.ndarray]
    """ Further eigenvalues of the cycle operator, if requested """


def compute_mode(scene: Scene, orbit: PeriodicOrbit, grid: BemGrid = None, tol: float = None,
                 window: float = None, eigenvalues: int = 0, system: BlockSystem = None) -> ModeResult:
    """
    Assembles the system, computes the dominant eigenpair of the cycle operator, reconstructs
    the mode and extracts the phases on all obstacles.

    :param eigenvalues: number of leading eigenvalues to compute additionally (0: none)
    :param system: already assembled system of the scene (the grid is ignored then)
    """
    system = system or assemble_system(scene, grid)
    operator = cycle_operator(system)
    pair = dominant_eigenpair(operator, operator.size, tol)
    mode = reconstruct_mode(system, pair)
    phases = [extract_phase(mode, j, orbit, window) for j in range(scene.size)]
    leading = leading_eigenvalues(operator, eigenvalues) if eigenvalues else None
    return ModeResult(system, mode, phases, leading)
