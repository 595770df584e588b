"""
Collocation discretization of the single layer operators between the obstacles.

Each obstacle gets ``N`` collocation points uniform in its parameter and the periodic hat
basis over them. The matrix entry ``A_ji[p, q]`` is the single layer potential of the q-th
basis function of obstacle i, evaluated at the p-th collocation point of obstacle j, with
the kernel ``(i/4) H0(k rho)``.

Entries are integrated panel by panel with Gauss-Legendre rules. On the two sub panels next
to a collocation point of a diagonal block the logarithmic part of the kernel is integrated
with weights that are exact for ``ln(u) * polynomial``, the remainder with the Gauss rule.
"""

import functools
import logging
import math
import typing as t

import numpy as np
import scipy.linalg

from orbitphase.bem.specfun import bessel_j0, hankel_h0, y0_regular_part
from orbitphase.geometry.curves import Curve, Point
from orbitphase.geometry.scene import Scene
from orbitphase.utils.errors import ConfigError, NumericalError
from orbitphase.utils.registry import AbstractRegistry, register
from orbitphase.utils.settings import Settings
from orbitphase.utils.typecheck import *


class BemError(NumericalError):
    """ Assembly, solve or eigenvalue computation of the boundary element system failed """
    stage = "bem"


class ResonanceError(BemError):
    """ A diagonal block is (nearly) singular, k is close to an interior resonance of the obstacle """

    def __init__(self, block: int, condition: float, k: float):
        super().__init__("Diagonal block {} is near singular at k = {} (condition {:.3g})".format(block, k, condition),
                         {"block": block, "condition": condition, "k": k})
        self.block = block  # type: int
        """ Index of the resonant obstacle """


@functools.lru_cache(maxsize=None)
def gauss_rule(nodes: int) -> t.Tuple[np.ndarray, np.ndarray]:
    """ Gauss-Legendre nodes and weights on [0, 1] """
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1) / 2, w / 2


@functools.lru_cache(maxsize=None)
def log_weights(nodes: int) -> np.ndarray:
    """
    Weights ``w`` at the Gauss-Legendre nodes ``u`` on [0, 1] with
    ``sum(w * f(u)) = integral_0^1 ln(u) f(u) du`` for polynomials f of degree < nodes.
    """
    u, _ = gauss_rule(nodes)
    n = np.arange(nodes)
    moments = np.where(n == 0, -1.0, (-1.0) ** (n + 1) / np.maximum(n * (n + 1), 1))
    vander = np.polynomial.legendre.legvander(2 * u - 1, nodes - 1)
    return np.linalg.solve(vander.T, moments)


class PanelQuadrature(t.NamedTuple):
    """
    Quadrature nodes of all panels of an obstacle grid.
    Panel q covers ``[q / N, (q + 1) / N]``, ``xi`` is the local coordinate in [0, 1].
    """

    xi: np.ndarray
    """ Local node coordinates, shape ``(m G,)`` """
    weights: np.ndarray
    """ Weights including the factor ``1 / (m N)``, shape ``(m G,)`` """
    points: np.ndarray
    """ Curve points, shape ``(N, m G, 2)`` """
    jacobian: np.ndarray
    """ ``|d curve / d tau|`` at the nodes, shape ``(N, m G)`` """


class ObstacleGrid:
    """
    Collocation grid of one obstacle.
    """

    def __init__(self, curve: Curve, size: int):
        self.curve = curve  # type: Curve
        self.size = size  # type: int
        """ Number of collocation points N """
        self.nodes = np.arange(size) / size  # type: np.ndarray
        """ Collocation parameters, also the centers of the hat functions """
        self.points = curve.point(self.nodes)  # type: np.ndarray
        self.spacing = 1.0 / size  # type: float

    def panel_quadrature(self, sub_panels: int = 1, gauss_nodes: int = None) -> PanelQuadrature:
        """
        :param sub_panels: number m of sub panels per panel, each with its own Gauss rule
        :param gauss_nodes: nodes G per sub panel, default from the settings
        """
        gauss_nodes = gauss_nodes or Settings()["bem/gauss_nodes"]
        u, w = gauss_rule(gauss_nodes)
        xi = ((np.arange(sub_panels)[:, None] + u[None, :]) / sub_panels).ravel()
        weights = np.tile(w, sub_panels) / (sub_panels * self.size)
        sigma = (np.arange(self.size)[:, None] + xi[None, :]) / self.size
        return PanelQuadrature(xi, weights, self.curve.derivative(sigma, 0), self.curve.speed(sigma))

    def hat_values(self, coefficients: np.ndarray, tau: t.Union[float, np.ndarray]) -> np.ndarray:
        """ Evaluates the piecewise linear function with the passed nodal coefficients """
        return np.interp(np.mod(tau, 1.0), self.nodes, coefficients, period=1.0)


class BemGrid:
    """
    Collocation grids of all obstacles of a scene.
    """

    def __init__(self, scene: Scene, points_per_wavelength: float = None, min_points: int = None,
                 points: int = None):
        """
        :param scene: scene with the wavenumber
        :param points_per_wavelength: collocation points per wavelength of arc length
        :param min_points: lower bound for the number of points per obstacle
        :param points: explicit number of points for every obstacle (overrides the rule)
        """
        ppw = Settings().default(points_per_wavelength, "bem/points_per_wavelength")
        min_points = Settings().default(min_points, "bem/min_points")
        if points is not None and points < 8:
            raise ConfigError("At least 8 collocation points per obstacle are needed, got {}".format(points))
        self.scene = scene  # type: Scene
        self.obstacles = []  # type: t.List[ObstacleGrid]
        for curve in scene.obstacles:
            size = points or self.points_for(curve, scene.k, ppw, min_points)
            self.obstacles.append(ObstacleGrid(curve, size))
        logging.info("Collocation grid with {} points".format(self.sizes))

    @staticmethod
    def points_for(curve: Curve, k: float, points_per_wavelength: float, min_points: int) -> int:
        """ ``max(ceil(ppw k |curve| / 2 pi), min_points)`` """
        return max(int(math.ceil(points_per_wavelength * k * curve.length() / (2 * math.pi))), min_points)

    @property
    def sizes(self) -> t.List[int]:
        return [grid.size for grid in self.obstacles]

    def __getitem__(self, j: int) -> ObstacleGrid:
        return self.obstacles[j]


def green(k: float, rho: np.ndarray) -> np.ndarray:
    """ Outgoing free space Green's function ``(i/4) H0(k rho)`` """
    return 0.25j * hankel_h0(k * rho)


def _singular_panels(k: float, grid: ObstacleGrid, rows: np.ndarray, sub_panels: int,
                     gauss_nodes: int) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Integrals of the kernel times the basis over the sub panels next to the collocation points.

    :return: (weights of the basis function centered at the collocation point,
              weights of the neighbouring basis functions on the right and on the left, shape (2, c))
    """
    u, w = gauss_rule(gauss_nodes)
    w_log = log_weights(gauss_nodes)
    scale = sub_panels * grid.size
    center = np.zeros(len(rows), dtype=complex)
    neighbours = np.zeros((2, len(rows)), dtype=complex)
    for side, sign in enumerate((1, -1)):
        sigma = grid.nodes[rows][:, None] + sign * u[None, :] / scale
        rho = np.linalg.norm(grid.curve.derivative(sigma, 0) - grid.points[rows][:, None, :], axis=-1)
        jac = grid.curve.speed(sigma)
        j0 = bessel_j0(k * rho)
        remainder = (0.25j * j0 - j0 / (2 * math.pi) * np.log(k * rho * scale / (2 * u[None, :]))
                     - y0_regular_part(k * rho) / 4)
        values = (w_log[None, :] * (-j0 / (2 * math.pi))
                  + w[None, :] * (j0 * math.log(scale) / (2 * math.pi) + remainder)) * jac / scale
        center += values @ (1 - u / sub_panels)
        neighbours[side] = values @ (u / sub_panels)
    return center, neighbours


def assemble_block(scene: Scene, grid: BemGrid, j: int, i: int, sub_panels: int = 1,
                   rows: t.Sequence[int] = None) -> np.ndarray:
    """
    The block ``A_ji`` (collocation points on obstacle j, basis functions on obstacle i).

    :param sub_panels: Gauss rules per panel
    :param rows: only assemble these rows
    :return: complex array of shape ``(len(rows), N_i)``
    """
    k = scene.k
    target, source = grid[j], grid[i]
    gauss_nodes = Settings()["bem/gauss_nodes"]
    chunk_size = Settings()["bem/chunk_size"]
    rows = np.arange(target.size) if rows is None else np.asarray(rows, dtype=int)
    quad = source.panel_quadrature(sub_panels, gauss_nodes)
    ret = np.empty((len(rows), source.size), dtype=complex)
    for start in range(0, len(rows), chunk_size):
        chunk = rows[start:start + chunk_size]
        index = np.arange(len(chunk))
        rho = np.linalg.norm(target.points[chunk][:, None, None, :] - quad.points[None], axis=-1)
        kernel = green(k, rho) * (quad.jacobian * quad.weights)[None]
        if i == j:
            kernel[index, chunk, :gauss_nodes] = 0
            kernel[index, (chunk - 1) % source.size, -gauss_nodes:] = 0
        block = kernel @ (1 - quad.xi) + np.roll(kernel @ quad.xi, 1, axis=1)
        if i == j:
            center, neighbours = _singular_panels(k, source, chunk, sub_panels, gauss_nodes)
            block[index, chunk] += center
            block[index, (chunk + 1) % source.size] += neighbours[0]
            block[index, (chunk - 1) % source.size] += neighbours[1]
        ret[start:start + len(chunk)] = block
    return ret


def check_block_quadrature(scene: Scene, grid: BemGrid, j: int, i: int, block: np.ndarray) -> float:
    """
    Recomputes a few rows of the block with two sub panels per panel.

    :return: largest difference relative to the largest sampled entry
    :raises: BemError if it exceeds the quadrature tolerance
    """
    rows = np.unique(np.linspace(0, grid[j].size - 1, 4).astype(int))
    refined = assemble_block(scene, grid, j, i, sub_panels=2, rows=rows)
    difference = float(np.max(np.abs(refined - block[rows])) / np.max(np.abs(block[rows])))
    logging.debug("Quadrature check of block ({}, {}): {:.3g}".format(j, i, difference))
    if difference > Settings()["bem/quadrature_tol"]:
        raise BemError("Panel quadrature of block ({}, {}) not converged".format(j, i),
                       {"block": [j, i], "difference": difference})
    return difference


class BlockSystem:
    """
    The blocks of the boundary element matrix that the reflection cycle uses: all diagonal
    blocks (LU factorized) and the couplings from each obstacle to the next one on the orbit.
    """

    def __init__(self, scene: Scene, grid: BemGrid, blocks: t.Dict[t.Tuple[int, int], np.ndarray]):
        """
        :raises: ResonanceError if a diagonal block is too badly conditioned
        """
        self.scene = scene  # type: Scene
        self.grid = grid  # type: BemGrid
        self.blocks = blocks  # type: t.Dict[t.Tuple[int, int], np.ndarray]
        self.conditions = {}  # type: t.Dict[int, float]
        """ 2-norm condition numbers of the diagonal blocks """
        self.factors = {}  # type: t.Dict[int, t.Tuple[np.ndarray, np.ndarray]]
        max_condition = Settings()["bem/max_condition"]
        for j in range(scene.size):
            condition = float(np.linalg.cond(blocks[(j, j)]))
            self.conditions[j] = condition
            if not condition <= max_condition:
                raise ResonanceError(j, condition, scene.k)
            self.factors[j] = scipy.linalg.lu_factor(blocks[(j, j)])

    def solve(self, j: int, rhs: np.ndarray) -> np.ndarray:
        """ Solves ``A_jj x = rhs`` """
        return scipy.linalg.lu_solve(self.factors[j], rhs)

    def reflect(self, j: int, density: np.ndarray) -> np.ndarray:
        """
        The density that the field of the passed density on obstacle j induces on the next
        obstacle: ``-A_{j+1,j+1}^-1 A_{j+1,j} density``.
        """
        nxt = self.scene.next_index(j)
        return -self.solve(nxt, self.blocks[(nxt, j)] @ density)


def assemble_system(scene: Scene, grid: BemGrid = None, check_quadrature: bool = None) -> BlockSystem:
    """
    Assembles and factorizes the blocks needed for the reflection cycle.

    :param grid: collocation grid, default: built with the settings rule
    :param check_quadrature: run :func:`check_block_quadrature` on every block
    """
    grid = grid or BemGrid(scene)
    check_quadrature = Settings().default(check_quadrature, "bem/check_quadrature")
    blocks = {}
    pairs = [(j, j) for j in range(scene.size)] + [(scene.next_index(j), j) for j in range(scene.size)]
    for j, i in pairs:
        if (j, i) in blocks:
            continue
        logging.info("Assembling block ({}, {}) of size {}x{}".format(j, i, grid[j].size, grid[i].size))
        blocks[(j, i)] = assemble_block(scene, grid, j, i)
        if not np.all(np.isfinite(blocks[(j, i)])):
            raise BemError("Block ({}, {}) has non finite entries".format(j, i), {"block": [j, i]})
        if check_quadrature:
            check_block_quadrature(scene, grid, j, i, blocks[(j, i)])
    return BlockSystem(scene, grid, blocks)


class IncidentRegistry(AbstractRegistry):
    """
    Registry of the incident field kinds.
    """

    registry = {}
    param_types = {}
    plugin_synonym = ("incident field kind", "incident field kinds")


class IncidentField:
    """ Base class of the incident fields, called with the wavenumber and an array of points """

    kind = None  # type: str

    def __call__(self, k: float, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError()

    def descriptor(self) -> t.Dict[str, t.Any]:
        raise NotImplementedError()


@register(IncidentRegistry, "plane_wave", Dict({
    "direction": Point() // Default([1.0, 0.0]) // Description("Propagation direction (normalized)")
}))
class PlaneWave(IncidentField):
    """
    Plane wave ``exp(i k direction . x)``.
    """

    def __init__(self, direction: t.Sequence[float] = (1.0, 0.0)):
        norm = float(np.linalg.norm(direction))
        if not norm > 0:
            raise ConfigError("The direction of a plane wave can't be zero")
        self.direction = np.asarray(direction, dtype=float) / norm  # type: np.ndarray

    def __call__(self, k: float, points: np.ndarray) -> np.ndarray:
        return np.exp(1j * k * (points @ self.direction))

    def descriptor(self) -> t.Dict[str, t.Any]:
        return {"kind": "plane_wave", "direction": [float(x) for x in self.direction]}


@register(IncidentRegistry, "point_source", Dict({
    "location": Point() // Description("Position of the source, outside of all obstacles")
}))
class PointSource(IncidentField):
    """
    Field of a point source ``(i/4) H0(k |x - location|)``.
    """

    def __init__(self, location: t.Sequence[float]):
        self.location = np.asarray(location, dtype=float)  # type: np.ndarray

    def __call__(self, k: float, points: np.ndarray) -> np.ndarray:
        rho = np.linalg.norm(points - self.location, axis=-1)
        if np.any(rho == 0):
            raise ConfigError("The point source lies on a collocation point")
        return green(k, rho)

    def descriptor(self) -> t.Dict[str, t.Any]:
        return {"kind": "point_source", "location": [float(x) for x in self.location]}
