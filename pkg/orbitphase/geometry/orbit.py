"""
Search for the periodic orbit: the parameters on each obstacle that minimize the length of the
closed polygon through the obstacles in scene order.
"""

import logging
import math
import typing as t

import numpy as np

from orbitphase.geometry.curves import wrap_tau
from orbitphase.geometry.scene import Scene
from orbitphase.utils.errors import NumericalError
from orbitphase.utils.settings import Settings


class OrbitError(NumericalError):
    """ The orbit search failed or ended in a degenerate configuration """
    stage = "orbit"


class PathLength(t.NamedTuple):
    """ Total length of the closed polygon with its exact derivatives """

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    leg_distances: np.ndarray


class PeriodicOrbit(t.NamedTuple):
    """
    A periodic orbit: ``taus[j]`` is the critical parameter on obstacle j, ``leg_distances[j]``
    the distance from obstacle j to obstacle j + 1 (cyclic).
    """

    taus: np.ndarray
    leg_distances: np.ndarray
    total_length: float
    hessian_eigenvalues: np.ndarray
    iterations: int

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            "taus": [float(x) for x in self.taus],
            "leg_distances": [float(x) for x in self.leg_distances],
            "total_length": float(self.total_length),
            "hessian_eigenvalues": [float(x) for x in self.hessian_eigenvalues],
            "iterations": self.iterations
        }


def path_length(scene: Scene, taus: t.Sequence[float]) -> PathLength:
    """
    Length of the closed polygon through ``scene.obstacles[j].point(taus[j])`` with gradient and Hessian.

    :raises: OrbitError if two consecutive points (nearly) coincide
    """
    taus = np.asarray(taus, dtype=float)
    size = scene.size
    if taus.shape != (size,):
        raise ValueError("Expected {} parameters, got {}".format(size, taus.shape))
    points = [scene.obstacles[j].derivative(taus[j], 0) for j in range(size)]
    firsts = [scene.obstacles[j].derivative(taus[j], 1) for j in range(size)]
    seconds = [scene.obstacles[j].derivative(taus[j], 2) for j in range(size)]
    gradient = np.zeros(size)
    hessian = np.zeros((size, size))
    legs = np.zeros(size)
    for a in range(size):
        b = scene.next_index(a)
        diff = points[a] - points[b]
        rho = float(np.linalg.norm(diff))
        if rho < 1e-14:
            raise OrbitError("Consecutive points on obstacles {} and {} coincide".format(a, b),
                             {"taus": taus.tolist(), "distance": rho})
        legs[a] = rho
        da = diff @ firsts[a]
        db = diff @ firsts[b]
        gradient[a] += da / rho
        gradient[b] -= db / rho
        hessian[a, a] += (firsts[a] @ firsts[a] + diff @ seconds[a]) / rho - da ** 2 / rho ** 3
        hessian[b, b] += (firsts[b] @ firsts[b] - diff @ seconds[b]) / rho - db ** 2 / rho ** 3
        mixed = -(firsts[a] @ firsts[b]) / rho + da * db / rho ** 3
        hessian[a, b] += mixed
        hessian[b, a] += mixed
    return PathLength(float(np.sum(legs)), gradient, hessian, legs)


def initial_taus(scene: Scene, samples: int = None) -> np.ndarray:
    """
    Picks on each obstacle the sample closest to the centroid of all sampled points.
    Ties go to the smaller parameter.
    """
    samples = samples or Settings()["orbit/samples"]
    grid = np.arange(samples) / samples
    points = [curve.point(grid) for curve in scene.obstacles]
    centroid = np.mean(np.concatenate(points), axis=0)
    return np.array([grid[int(np.argmin(np.linalg.norm(p - centroid, axis=1)))] for p in points])


def find_orbit(scene: Scene, init: t.Sequence[float] = None) -> PeriodicOrbit:
    """
    Minimizes the path length by Newton's method with an eigenvalue shifted Hessian and
    backtracking line search.

    :param scene: scene
    :param init: start parameters, default: :func:`initial_taus`
    :raises: OrbitError on non convergence or a degenerate Hessian at the minimum
    """
    max_iterations = Settings()["orbit/max_iterations"]
    tol = Settings()["orbit/gradient_tol"]
    min_eigenvalue = Settings()["orbit/min_eigenvalue"]
    taus = np.array(init if init is not None else initial_taus(scene), dtype=float)
    current = path_length(scene, taus)
    converged = False
    iteration = 0
    for iteration in range(max_iterations + 1):
        grad_norm = float(np.linalg.norm(current.gradient))
        logging.debug("orbit step {}: length {:.16g}, |gradient| {:.3g}".format(iteration, current.value, grad_norm))
        if grad_norm <= tol * max(1.0, current.value):
            converged = True
            break
        if iteration == max_iterations:
            break
        eigenvalues = np.linalg.eigvalsh(current.hessian)
        shift = max(0.0, min_eigenvalue - float(eigenvalues[0]))
        step = -np.linalg.solve(current.hessian + shift * np.eye(scene.size), current.gradient)
        slope = float(current.gradient @ step)
        alpha = 1.0
        accepted = None
        for _ in range(60):
            candidate = path_length(scene, taus + alpha * step)
            if candidate.value <= current.value + 1e-4 * alpha * slope:
                accepted = candidate
                break
            alpha /= 2
        if accepted is None:
            # no decrease possible anymore, the gradient is at the roundoff level
            if grad_norm <= 1e3 * tol * max(1.0, current.value):
                converged = True
                break
            raise OrbitError("Line search failed", {"iteration": iteration, "gradient_norm": grad_norm,
                                                    "taus": taus.tolist()})
        taus = taus + alpha * step
        current = accepted
    if not converged:
        raise OrbitError("No convergence after {} iterations".format(max_iterations),
                         {"gradient_norm": float(np.linalg.norm(current.gradient)), "taus": taus.tolist()})
    eigenvalues = np.linalg.eigvalsh(current.hessian)
    if eigenvalues[0] <= 1e-10 * max(abs(eigenvalues[-1]), 1e-300):
        raise OrbitError("Degenerate Hessian at the orbit, the orbit is not isolated",
                         {"hessian_eigenvalues": eigenvalues.tolist(), "taus": taus.tolist()})
    taus = np.asarray(wrap_tau(taus))
    logging.info("Found periodic orbit of length {:.16g} after {} steps".format(current.value, iteration))
    return PeriodicOrbit(taus, current.leg_distances, current.value, eigenvalues, iteration)
