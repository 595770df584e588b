"""
Bivariate Taylor expansion of the distance between two obstacles about the orbit points.

All tables are dense square arrays indexed by powers: ``table[p, q]`` is the coefficient of
``s**p * t**q`` with ``s = tau_j - tau_j*`` and ``t = tau_{j+1} - tau_{j+1}*``.

The squared distance is a polynomial in the curve jets (the ``lambda`` tables); dividing by its
constant term gives ``1 + z`` where ``z`` has no constant term, and the distance follows from
the binomial series ``sqrt(1 + z) = sum_m binom(1/2, m) z**m``.
"""

import math
import typing as t
from fractions import Fraction

import numpy as np
from scipy.signal import convolve2d

from orbitphase.geometry.curves import Jet
from orbitphase.geometry.orbit import PeriodicOrbit
from orbitphase.geometry.scene import Scene
from orbitphase.utils.errors import NumericalError


class SeriesError(NumericalError):
    """ The distance expansion is undefined (coincident points) """
    stage = "dist_series"


class LambdaTables(t.NamedTuple):
    """ Coefficients of the squared component differences ``(x_j(s) - x_{j+1}(t))**2`` and the y analogue """

    x: np.ndarray
    y: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.x + self.y


class DistanceSeries(t.NamedTuple):
    """
    Expansion of the distance from obstacle ``j`` to obstacle ``j + 1``.
    ``f[0, 0]`` is the leg distance. The intermediate tables are kept for inspection.
    """

    j: int
    order: int
    f: np.ndarray
    lambdas: LambdaTables
    z: t.List[np.ndarray]
    """ ``z[m]`` is the truncated m-th power of the normalized squared distance minus one, ``z[0]`` unused """

    def evaluate(self, s: float, t_: float) -> float:
        """ Value of the truncated expansion at the offsets ``(s, t_)`` """
        return float(np.polynomial.polynomial.polyval2d(s, t_, self.f))

    def total_degree_truncated(self) -> np.ndarray:
        """ The coefficient table with all entries of total degree above ``order`` zeroed """
        p, q = np.indices(self.f.shape)
        return np.where(p + q <= self.order, self.f, 0.0)


def binomial_half(m: int) -> Fraction:
    """
    The exact binomial coefficient ``binom(1/2, m)``.

    >>> [str(binomial_half(m)) for m in range(4)]
    ['1', '1/2', '-1/8', '1/16']
    """
    ret = Fraction(1)
    for i in range(m):
        ret *= (Fraction(1, 2) - i) / (i + 1)
    return ret


def _self_product(a: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a, a)[:order + 1]


def lambda_table(jet_a: Jet, jet_b: Jet, order: int) -> LambdaTables:
    """
    Tables of ``(A(s) - B(t))**2 = A(s)**2 - 2 A(s) B(t) + B(t)**2`` for both components.

    :param jet_a: jet of obstacle j about its orbit point (variable s)
    :param jet_b: jet of obstacle j + 1 about its orbit point (variable t)
    :param order: highest power per variable, both jets need at least this order
    """
    if jet_a.order < order or jet_b.order < order:
        raise ValueError("Jets of order {} and {} are too short for order {}".format(jet_a.order, jet_b.order, order))
    tables = []
    for a, b in ((jet_a.x, jet_b.x), (jet_a.y, jet_b.y)):
        a, b = a[:order + 1], b[:order + 1]
        table = -2 * np.outer(a, b)
        table[:, 0] += _self_product(a, order)
        table[0, :] += _self_product(b, order)
        tables.append(table)
    return LambdaTables(*tables)


def z_table(lambdas: LambdaTables, order: int, max_power: int = None) -> t.List[np.ndarray]:
    """
    The normalized table ``z[1] = lambda / lambda[0, 0]`` (without constant term) and its truncated
    powers ``z[m] = z[m - 1] * z[1]``.

    :param max_power: highest power m, default ``2 * order`` (enough for all coefficients of the square table)
    :raises: SeriesError if the constant term vanishes
    """
    total = lambdas.total
    if not total[0, 0] > 0:
        raise SeriesError("The squared distance at the orbit points is {}".format(total[0, 0]),
                          {"lambda_00": float(total[0, 0])})
    max_power = 2 * order if max_power is None else max_power
    z1 = total / total[0, 0]
    z1[0, 0] = 0.0
    ret = [np.zeros_like(z1), z1]
    for _ in range(2, max_power + 1):
        ret.append(convolve2d(ret[-1], z1)[:order + 1, :order + 1])
    return ret


def f_table_from_jets(jet_a: Jet, jet_b: Jet, order: int, j: int = 0) -> DistanceSeries:
    """
    Distance expansion from the two jets.
    """
    lambdas = lambda_table(jet_a, jet_b, order)
    z = z_table(lambdas, order)
    f = np.zeros((order + 1, order + 1))
    f[0, 0] = 1.0
    for m in range(1, len(z)):
        f += float(binomial_half(m)) * z[m]
    f *= math.sqrt(lambdas.total[0, 0])
    return DistanceSeries(j, order, f, lambdas, z)


def f_table(scene: Scene, orbit: PeriodicOrbit, j: int, order: int) -> DistanceSeries:
    """
    Distance expansion of leg j (obstacle j to obstacle j + 1) about the orbit points.
    """
    nxt = scene.next_index(j)
    return f_table_from_jets(scene.obstacles[j].jet(orbit.taus[j], order),
                             scene.obstacles[nxt].jet(orbit.taus[nxt], order), order, j)


def distance_series(scene: Scene, orbit: PeriodicOrbit, order: int) -> t.List[DistanceSeries]:
    """ Expansions of all legs of the orbit """
    return [f_table(scene, orbit, j, order) for j in range(scene.size)]
