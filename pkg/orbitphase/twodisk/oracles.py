"""
Independent reference computations for two equal disks facing each other.

Disk 1 is centered at the origin, disk 2 at ``(0, d + 2r)`` with the mirrored parameterization,
so the periodic orbit is ``tau = 0`` on both disks and the configuration is symmetric under
``tau -> -tau`` and under swapping the disks. The stationary point map chi is the same on both
disks and the phases differ by the constant d.
"""

import decimal
import logging
import math
import typing as t

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

from orbitphase.geometry.curves import Circle
from orbitphase.geometry.scene import Scene
from orbitphase.utils.errors import NumericalError, ConfigError
from orbitphase.utils.settings import Settings


class TwoDiskError(NumericalError):
    """ A two disk oracle failed (no convergence, parameter out of range) """
    stage = "twodisk"


class TwoDiskConfig:
    """
    Radius r and gap d (distance of the closest points) of the two disks.
    """

    def __init__(self, r: float = 0.5, d: float = 1.0):
        if not (r > 0 and d > 0 and math.isfinite(r) and math.isfinite(d)):
            raise ConfigError("Radius and gap of the two disks have to be positive, got r={!r}, d={!r}".format(r, d))
        self.r = float(r)  # type: float
        self.d = float(d)  # type: float
        self.disks = (Circle(self.r, (0.0, 0.0), 1), Circle(self.r, (0.0, self.d + 2 * self.r), -1))

    def scene(self, k: float = 64.0) -> Scene:
        return Scene(list(self.disks), k)

    def distance(self, a: t.Union[float, np.ndarray], b: t.Union[float, np.ndarray]) -> np.ndarray:
        """ Distance between the point a on disk 1 and the point b on disk 2 """
        return np.linalg.norm(self.disks[0].derivative(a) - self.disks[1].derivative(b), axis=-1)

    def distance_d1(self, a: t.Union[float, np.ndarray], b: t.Union[float, np.ndarray]) -> np.ndarray:
        """ Derivative of :meth:`distance` with respect to a """
        diff = self.disks[0].derivative(a) - self.disks[1].derivative(b)
        return np.sum(diff * self.disks[0].derivative(a, 1), axis=-1) / np.linalg.norm(diff, axis=-1)

    def __repr__(self) -> str:
        return "TwoDiskConfig(r={!r}, d={!r})".format(self.r, self.d)


class ClosedFormCoefficients(t.NamedTuple):
    """
    Exact coefficients for ``r = 1/2, d = 1``: ``c[i]`` of the phase (i = 0..8) and ``a[i]`` of chi
    (i = 0..7, ``a[0]`` is the orbit parameter 0).
    """

    c: np.ndarray
    a: np.ndarray


_PI = "3.14159265358979323846264338327950288419716939937510"


def closed_form_coeffs() -> ClosedFormCoefficients:
    """
    The exact phase and chi coefficients of the standard two disk scene (r = 1/2, d = 1),
    evaluated with 40 significant digits, so that the cancellation inside the brackets of the
    chi coefficients costs no accuracy.
    """
    with decimal.localcontext() as ctx:
        ctx.prec = 40
        pi = decimal.Decimal(_PI)
        sqrt2 = decimal.Decimal(2).sqrt()
        c = [decimal.Decimal(0)] * 9
        a = [decimal.Decimal(0)] * 8
        c[0] = decimal.Decimal(1)
        c[2] = sqrt2 * pi ** 2
        c[4] = -decimal.Decimal(11) / 12 * sqrt2 * pi ** 4
        c[6] = 2783 * sqrt2 * pi ** 6 / 2520
        c[8] = -358021 * sqrt2 * pi ** 8 / 205632
        a[1] = 3 - 2 * sqrt2
        a[3] = -7 * pi ** 2 * (17 * sqrt2 - 24)
        a[5] = -(pi ** 4 / 84) * (1205811 * sqrt2 - 1705312)
        a[7] = -(pi ** 6 / 128520) * (289615597399 * sqrt2 - 409578202752)
        return ClosedFormCoefficients(np.array([float(x) for x in c]), np.array([float(x) for x in a]))


class ChiSolution(t.NamedTuple):
    """ The stationary point map on a grid with its cubic interpolant """

    grid: np.ndarray
    values: np.ndarray
    residual: np.ndarray
    sweeps: int
    spline: CubicSpline

    @property
    def extent(self) -> t.Tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def __call__(self, tau: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
        return self.spline(tau)

    def derivative_at_zero(self, stride: int = 2) -> float:
        """ Five point central difference of chi at 0 (0 has to be a grid point) """
        center = int(np.argmin(np.abs(self.grid)))
        if center - 2 * stride < 0 or center + 2 * stride >= len(self.grid) or self.grid[center] != 0:
            raise TwoDiskError("0 is not an inner grid point", {"extent": self.extent})
        h = self.grid[center + stride] - self.grid[center]
        v = self.values
        return float((-v[center + 2 * stride] + 8 * v[center + stride] - 8 * v[center - stride]
                      + v[center - 2 * stride]) / (12 * h))


def _angle_terms(config: TwoDiskConfig, x: np.ndarray, sigma: np.ndarray):
    """ atan2(N, D) of the ray from disk 1 at x to disk 2 at sigma and its partial derivatives """
    r = config.r
    w = 2 * math.pi
    num = r * np.sin(w * x) - r * np.sin(w * sigma)
    den = config.d + 2 * r - r * np.cos(w * x) - r * np.cos(w * sigma)
    norm = num ** 2 + den ** 2
    d_x = (den * w * r * np.cos(w * x) - num * w * r * np.sin(w * x)) / norm
    d_sigma = (-den * w * r * np.cos(w * sigma) - num * w * r * np.sin(w * sigma)) / norm
    return np.arctan2(num, den), d_x, d_sigma


def chi_residual(config: TwoDiskConfig, tau: np.ndarray, x: np.ndarray, chi: t.Callable) -> np.ndarray:
    """
    Residual of the equal angle condition at the reflection point x = chi(tau) on disk 1, the ray
    arriving from ``chi(x)`` on disk 2 and leaving towards tau on disk 2.
    """
    incoming, _, _ = _angle_terms(config, x, chi(x))
    outgoing, _, _ = _angle_terms(config, x, tau)
    return 4 * math.pi * x + incoming + outgoing


def solve_chi(config: TwoDiskConfig, grid: np.ndarray = None, tol: float = None,
              max_sweeps: int = None) -> ChiSolution:
    """
    Solves the equal angle equation for chi on a grid by damped Newton sweeps. Within a sweep
    chi(chi(tau)) is evaluated with the cubic interpolant of the previous sweep.

    :param config: disks
    :param grid: increasing parameters, default: the twodisk/grid_extent and grid_points settings
    :param tol: residual tolerance
    :param max_sweeps: maximum number of sweeps
    :raises: TwoDiskError if the residual doesn't fall below the tolerance
    """
    if grid is None:
        extent = Settings()["twodisk/grid_extent"]
        grid = np.linspace(-extent, extent, Settings()["twodisk/grid_points"])
    grid = np.asarray(grid, dtype=float)
    tol = Settings().default(tol, "twodisk/tol")
    max_sweeps = Settings().default(max_sweeps, "twodisk/max_sweeps")
    values = (3 - 2 * math.sqrt(2)) * grid
    for sweep in range(max_sweeps + 1):
        spline = CubicSpline(grid, values)
        residual = chi_residual(config, grid, values, spline)
        worst = float(np.max(np.abs(residual)))
        logging.debug("chi sweep {}: max residual {:.3g}".format(sweep, worst))
        if worst <= tol:
            return ChiSolution(grid, values, residual, sweep, spline)
        if sweep == max_sweeps:
            break
        _, dx_in, dsigma_in = _angle_terms(config, values, spline(values))
        _, dx_out, _ = _angle_terms(config, values, grid)
        slope = 4 * math.pi + dx_in + dsigma_in * spline(values, 1) + dx_out
        step = residual / slope
        candidate = values - step
        # step halving where the residual doesn't decrease
        for _ in range(30):
            worse = np.abs(chi_residual(config, grid, candidate, spline)) > np.abs(residual)
            if not np.any(worse):
                break
            step = np.where(worse, step / 2, step)
            candidate = values - step
        values = candidate
    raise TwoDiskError("Equal angle equation not solved after {} sweeps".format(max_sweeps),
                       {"max_residual": worst, "tol": tol})


def phi_geometric_sum(config: TwoDiskConfig, tau: float, max_reflections: int = None,
                      chi: ChiSolution = None) -> float:
    """
    The limiting phase at tau by following the reflected rays back towards the orbit and
    summing their lengths, minus one orbit length per full cycle.

    :param max_reflections: number of full cycles (two reflections each)
    :param chi: solved stationary point map, computed if not passed
    :raises: TwoDiskError if tau is outside the grid of chi or the iteration doesn't contract
    """
    max_reflections = Settings().default(max_reflections, "twodisk/max_reflections")
    if max_reflections < 1:
        raise ValueError("At least one reflection is needed")
    chi = chi or solve_chi(config)
    low, high = chi.extent
    if not low <= tau <= high:
        raise TwoDiskError("tau = {} is outside of the solved range [{}, {}]".format(tau, low, high))
    points = [float(tau)]
    ret = config.d
    for cycle in range(max_reflections):
        for _ in range(2):
            nxt = float(chi(points[-1]))
            if points[-1] != 0 and not abs(nxt) < abs(points[-1]):
                raise TwoDiskError("The stationary point iteration doesn't contract at tau = {}".format(tau),
                                   {"iterates": points + [nxt]})
            points.append(nxt)
        term = float(config.distance(points[-3], points[-2]) + config.distance(points[-2], points[-1]) - 2 * config.d)
        ret += term
        if abs(term) < 1e-16:
            break
    return ret


def phi_via_chi_integral(config: TwoDiskConfig, tau: float, chi: ChiSolution = None) -> float:
    """
    The limiting phase at tau from the stationarity condition: the phase derivative at chi(t) is
    minus the derivative of the distance, integrated along the map chi. The parameter t with
    ``chi(t) = tau`` is found by bisection.

    :raises: TwoDiskError if tau is not in the image of chi
    """
    chi = chi or solve_chi(config)
    low, high = chi.extent
    image = (float(chi(low)), float(chi(high)))
    if not image[0] <= tau <= image[1]:
        raise TwoDiskError("tau = {} is outside of the image [{}, {}] of chi".format(tau, *image))
    if tau == 0:
        return config.d
    upper = bisect(lambda x: float(chi(x)) - tau, low, high, xtol=1e-15, maxiter=200)

    def integrand(x: float) -> float:
        return float(config.distance_d1(float(chi(x)), x) * chi.spline(x, 1))

    value, _ = quad(integrand, 0.0, upper, epsabs=1e-14, epsrel=1e-13, limit=200)
    return config.d - value


def zeta_xi(config: TwoDiskConfig, tau: float) -> t.Tuple[float, float]:
    """
    Two simple distances from the point tau on disk 1: zeta to the orbit point of disk 2 and
    xi to the closest point of disk 2.
    """
    point = config.disks[0].point(tau)
    zeta = float(np.linalg.norm(point - config.disks[1].point(0.0)))
    xi = float(np.linalg.norm(point - config.disks[1].center)) - config.r
    return zeta, xi


def fit_taylor(config: TwoDiskConfig, degree: int = 12, extent: float = 0.02, samples: int = 201,
               chi: ChiSolution = None) -> np.ndarray:
    """
    Least squares fit of the even Taylor coefficients of the geometric sum phase on [-extent, extent].

    :param degree: highest (even) power
    :return: coefficients ``c[0..degree]``, odd entries are zero
    """
    chi = chi or solve_chi(config)
    taus = np.linspace(-extent, extent, samples)
    values = np.array([phi_geometric_sum(config, tau, chi=chi) for tau in taus])
    powers = np.arange(0, degree + 1, 2)
    # scaled variable for conditioning
    basis = (taus[:, None] / extent) ** powers[None, :]
    fitted, *_ = np.linalg.lstsq(basis, values, rcond=None)
    ret = np.zeros(degree + 1)
    ret[powers] = fitted / extent ** powers
    return ret
