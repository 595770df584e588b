import logging
import math
import typing as t

import numpy as np

from orbitphase.geometry.curves import Curve, Circle
from orbitphase.utils.errors import ConfigError
from orbitphase.utils.settings import Settings


def _inside(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """
    Even-odd test of the points (shape (n, 2)) against the closed polygon (shape (m, 2)).
    """
    x, y = points[:, 0:1], points[:, 1:2]
    x1, y1 = polygon[:, 0], polygon[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    crosses = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    return np.sum(crosses & (x < x_cross), axis=1) % 2 == 1


class Scene:
    """
    An ordered list of obstacles (the obstacle cycle of the periodic orbit) and a wavenumber.
    """

    def __init__(self, obstacles: t.List[Curve], k: float = 64.0, separation_check: bool = False):
        """
        :param obstacles: obstacles in the order of the orbit, at least two
        :param k: wavenumber, > 0
        :param separation_check: require obstacle distances of at least 1 / k
        :raises: ConfigError if the obstacles intersect or are not separated enough
        """
        if len(obstacles) < 2:
            raise ConfigError("A scene needs at least two obstacles, got {}".format(len(obstacles)))
        if not (k > 0 and math.isfinite(k)):
            raise ConfigError("The wavenumber has to be positive, got {!r}".format(k))
        self.obstacles = list(obstacles)  # type: t.List[Curve]
        self.k = float(k)  # type: float
        self.separation_check = separation_check  # type: bool
        self.min_distance = self._check_separation()  # type: float
        """ Smallest distance between two obstacles on the separation grid """

    @property
    def size(self) -> int:
        """ Number of obstacles J """
        return len(self.obstacles)

    def next_index(self, j: int) -> int:
        """ Index of the obstacle that follows obstacle j on the orbit """
        return (j + 1) % self.size

    def _check_separation(self) -> float:
        grid_size = Settings()["scene/separation_grid"]
        grid = np.arange(grid_size) / grid_size
        samples = [curve.point(grid) for curve in self.obstacles]
        min_distance = math.inf
        for i in range(self.size):
            for j in range(i + 1, self.size):
                dist = float(np.min(np.linalg.norm(samples[i][:, None, :] - samples[j][None, :, :], axis=-1)))
                if not dist > 0 or np.any(_inside(samples[i], samples[j])) or np.any(_inside(samples[j], samples[i])):
                    raise ConfigError("Obstacles {} and {} intersect".format(i, j))
                if self.separation_check and dist < 1 / self.k:
                    raise ConfigError("Obstacles {} and {} are {:.3g} apart, less than 1/k = {:.3g}"
                                      .format(i, j, dist, 1 / self.k))
                min_distance = min(min_distance, dist)
        logging.debug("Smallest obstacle distance: {:.6g}".format(min_distance))
        return min_distance

    def rotated(self, theta: float) -> 'Scene':
        """ The scene rotated counterclockwise by ``theta`` about the origin """
        return Scene([curve.rotated(theta) for curve in self.obstacles], self.k, self.separation_check)

    def with_k(self, k: float) -> 'Scene':
        """ The same obstacles with another wavenumber """
        return Scene(self.obstacles, k, self.separation_check)

    @classmethod
    def two_disks(cls, r: float = 0.5, d: float = 1.0, k: float = 64.0) -> 'Scene':
        """
        Two disks of radius r whose closest points are d apart. The first disk is centered at
        the origin, the second one above it with the mirrored parameterization, so that the
        periodic orbit lies at tau = 0 on both.
        """
        return cls([Circle(r, (0.0, 0.0), 1), Circle(r, (0.0, d + 2 * r), -1)], k)
