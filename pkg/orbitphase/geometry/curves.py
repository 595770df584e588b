"""
Smooth closed boundary curves over the parameter domain [0, 1).

Curves are created from flat descriptors (``{"kind": "circle", "radius": 0.5, ...}``) through
the :class:`CurveRegistry`. All curve kinds provide vectorized derivatives of any order and
exact Taylor jets about a parameter value.
"""

import math
import typing as t

import numpy as np

from orbitphase.geometry import jets
from orbitphase.utils.errors import ConfigError
from orbitphase.utils.registry import AbstractRegistry, register
from orbitphase.utils.settings import Settings
from orbitphase.utils.typecheck import *


class CurveError(ConfigError):
    """ Invalid curve parameters or jet request """
    pass


def wrap_tau(tau: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
    """
    Reduces parameters modulo 1 into [0, 1).

    >>> float(wrap_tau(-0.25))
    0.75
    """
    ret = np.mod(tau, 1.0)
    # np.mod(-1e-17, 1.0) == 1.0
    return np.where(ret >= 1.0, 0.0, ret) if isinstance(ret, np.ndarray) else (0.0 if ret >= 1.0 else ret)


def tau_difference(tau: t.Union[float, np.ndarray], other: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
    """
    The representative of ``tau - other`` in (-1/2, 1/2].

    >>> float(tau_difference(0.125, 0.875))
    0.25
    """
    diff = np.mod(np.asarray(tau, dtype=float) - other, 1.0)
    diff = np.where(diff > 0.5, diff - 1.0, diff)
    return diff if diff.ndim else float(diff)


def rotation_matrix(theta: float) -> np.ndarray:
    """ Counterclockwise rotation by ``theta`` """
    return np.array([[math.cos(theta), -math.sin(theta)],
                     [math.sin(theta), math.cos(theta)]])


class Jet(t.NamedTuple):
    """
    Taylor coefficients of both components of a curve about a parameter value.
    ``x[p]`` is the coefficient of ``(tau - tau_star)**p``.
    """

    tau_star: float
    x: np.ndarray
    y: np.ndarray

    @property
    def order(self) -> int:
        return len(self.x) - 1

    @property
    def point(self) -> np.ndarray:
        return np.array([self.x[0], self.y[0]])

    def truncate(self, order: int) -> 'Jet':
        """ The jet restricted to the passed (lower) order """
        return Jet(self.tau_star, self.x[:order + 1].copy(), self.y[:order + 1].copy())


def _sin_derivative(omega: float, arg: np.ndarray, n: int) -> np.ndarray:
    """ n-th derivative of ``sin(omega * tau + ...)`` given the argument values """
    return omega ** n * np.sin(arg + n * math.pi / 2)


def _cos_derivative(omega: float, arg: np.ndarray, n: int) -> np.ndarray:
    return omega ** n * np.cos(arg + n * math.pi / 2)


class Curve:
    """
    Base class of all boundary curves. A curve is immutable after construction.
    """

    kind = None  # type: str
    """ Name under which the curve class is registered """

    def __init__(self, center: t.Sequence[float]):
        self.center = np.array(center, dtype=float)  # type: np.ndarray
        """ Reference point of the curve """

    def derivative(self, tau: t.Union[float, np.ndarray], n: int = 0) -> np.ndarray:
        """
        The n-th derivative of the curve with respect to tau (the point itself for n = 0).

        :param tau: parameter value(s)
        :param n: derivative order >= 0
        :return: array of shape ``np.shape(tau) + (2,)``
        """
        tau = np.asarray(tau, dtype=float)
        x, y = self._component_derivatives(tau, n)
        if n == 0:
            x = x + self.center[0]
            y = y + self.center[1]
        return np.stack([x, y], axis=-1)

    def _component_derivatives(self, tau: np.ndarray, n: int) -> t.Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError()

    def point(self, tau: t.Union[float, np.ndarray]) -> np.ndarray:
        """
        The point(s) on the curve at the parameter value(s) ``tau mod 1``.
        """
        return self.derivative(wrap_tau(tau), 0)

    def speed(self, tau: t.Union[float, np.ndarray]) -> np.ndarray:
        """ The Jacobian ``|d curve / d tau|`` """
        return np.linalg.norm(self.derivative(tau, 1), axis=-1)

    def length(self, samples: int = 2048) -> float:
        """ Arc length (periodic trapezoidal rule, which converges geometrically for smooth curves) """
        return float(np.mean(self.speed(np.arange(samples) / samples)))

    def jet(self, tau_star: float, order: int) -> Jet:
        """
        Exact Taylor coefficients of both components about ``tau_star``.

        :param tau_star: expansion point
        :param order: highest power
        :raises: CurveError if the order is negative or exceeds the curves/max_jet_order setting
        """
        max_order = Settings()["curves/max_jet_order"]
        if not (0 <= order <= max_order):
            raise CurveError("Jet order {} is not in the allowed range 0..{}".format(order, max_order))
        x, y = self._component_jets(float(wrap_tau(tau_star)), order)
        x[0] += self.center[0]
        y[0] += self.center[1]
        return Jet(float(tau_star), x, y)

    def _component_jets(self, tau_star: float, order: int) -> t.Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError()

    def rotated(self, theta: float) -> 'Curve':
        """ The curve rotated counterclockwise by ``theta`` about the origin """
        raise NotImplementedError()

    def descriptor(self) -> t.Dict[str, t.Any]:
        """ Flat descriptor that recreates this curve via ``CurveRegistry.create`` """
        raise NotImplementedError()

    def __repr__(self) -> str:
        return "{}({})".format(type(self).__name__, ", ".join("{}={!r}".format(k, v)
                                                             for k, v in self.descriptor().items() if k != "kind"))


class CurveRegistry(AbstractRegistry):
    """
    Registry of the available curve kinds.
    """

    registry = {}
    param_types = {}
    plugin_synonym = ("curve kind", "curve kinds")

    @classmethod
    def create(cls, descriptor: t.Dict[str, t.Any], value_name: str = None) -> Curve:
        return super().create(descriptor, value_name or "obstacle")


def Point() -> Type:
    """ A two dimensional point ``[x, y]`` """
    return Tuple(FiniteNumber(), FiniteNumber())


@register(CurveRegistry, "circle", Dict({
    "center": Point() // Default([0.0, 0.0]) // Description("Center of the circle"),
    "radius": PositiveNumber() // Description("Radius of the circle"),
    "orientation": ExactEither(1, -1) // Default(1)
                   // Description("1: the parameter runs clockwise starting at the top, -1: mirrored vertically"),
    "phase_offset": FiniteNumber() // Default(0.0) // Description("Shift of the parameter"),
}))
class Circle(Curve):
    """
    Circle ``center + r * [sin 2 pi (tau + offset), orientation * cos 2 pi (tau + offset)]``.
    """

    def __init__(self, radius: float, center: t.Sequence[float] = (0.0, 0.0), orientation: int = 1,
                 phase_offset: float = 0.0):
        super().__init__(center)
        if not (radius > 0 and math.isfinite(radius)):
            raise CurveError("Radius of a circle has to be positive, got {!r}".format(radius))
        if orientation not in (1, -1):
            raise CurveError("Orientation of a circle has to be 1 or -1, got {!r}".format(orientation))
        self.radius = float(radius)  # type: float
        self.orientation = int(orientation)  # type: int
        self.phase_offset = float(phase_offset)  # type: float

    def _component_derivatives(self, tau: np.ndarray, n: int):
        arg = 2 * math.pi * (tau + self.phase_offset)
        return (self.radius * _sin_derivative(2 * math.pi, arg, n),
                self.orientation * self.radius * _cos_derivative(2 * math.pi, arg, n))

    def _component_jets(self, tau_star: float, order: int):
        phase = 2 * math.pi * (tau_star + self.phase_offset)
        return (self.radius * jets.sin_jet(2 * math.pi, phase, order),
                self.orientation * self.radius * jets.cos_jet(2 * math.pi, phase, order))

    def rotated(self, theta: float) -> 'Circle':
        return Circle(self.radius, rotation_matrix(theta) @ self.center, self.orientation,
                      self.phase_offset - self.orientation * theta / (2 * math.pi))

    def descriptor(self) -> t.Dict[str, t.Any]:
        return {"kind": "circle", "center": [float(x) for x in self.center], "radius": self.radius,
                "orientation": self.orientation, "phase_offset": self.phase_offset}


@register(CurveRegistry, "ellipse", Dict({
    "center": Point() // Default([0.0, 0.0]) // Description("Center of the ellipse"),
    "a": PositiveNumber() // Description("Semi axis along the (unrotated) x axis"),
    "b": PositiveNumber() // Description("Semi axis along the (unrotated) y axis"),
    "rotation": FiniteNumber() // Default(0.0) // Description("Counterclockwise rotation angle in radians"),
}))
class Ellipse(Curve):
    """
    Ellipse ``center + Rot(rotation) [a sin 2 pi tau, b cos 2 pi tau]``.
    """

    def __init__(self, a: float, b: float, center: t.Sequence[float] = (0.0, 0.0), rotation: float = 0.0):
        super().__init__(center)
        if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
            raise CurveError("Semi axes of an ellipse have to be positive, got {!r} and {!r}".format(a, b))
        self.a = float(a)  # type: float
        self.b = float(b)  # type: float
        self.rotation = float(rotation)  # type: float
        self._rot = rotation_matrix(self.rotation)

    def _rotate(self, u, v):
        return (self._rot[0, 0] * u + self._rot[0, 1] * v,
                self._rot[1, 0] * u + self._rot[1, 1] * v)

    def _component_derivatives(self, tau: np.ndarray, n: int):
        arg = 2 * math.pi * tau
        return self._rotate(self.a * _sin_derivative(2 * math.pi, arg, n),
                            self.b * _cos_derivative(2 * math.pi, arg, n))

    def _component_jets(self, tau_star: float, order: int):
        phase = 2 * math.pi * tau_star
        return self._rotate(self.a * jets.sin_jet(2 * math.pi, phase, order),
                            self.b * jets.cos_jet(2 * math.pi, phase, order))

    def rotated(self, theta: float) -> 'Ellipse':
        return Ellipse(self.a, self.b, rotation_matrix(theta) @ self.center, self.rotation + theta)

    def descriptor(self) -> t.Dict[str, t.Any]:
        return {"kind": "ellipse", "center": [float(x) for x in self.center], "a": self.a, "b": self.b,
                "rotation": self.rotation}


@register(CurveRegistry, "radial_fourier", Dict({
    "center": Point() // Default([0.0, 0.0]) // Description("Center of the curve"),
    "r0": PositiveNumber() // Description("Base radius"),
    "cos": List(FiniteNumber()) // Default([]) // Description("Amplitudes of cos(2 pi n tau), n = 1, 2, ..."),
    "sin": List(FiniteNumber()) // Default([]) // Description("Amplitudes of sin(2 pi n tau), n = 1, 2, ..."),
}))
class RadialFourier(Curve):
    """
    Star shaped curve ``center + rho(tau) [sin 2 pi tau, cos 2 pi tau]`` with the radius
    ``rho(tau) = r0 + sum_n cos[n] cos(2 pi n tau) + sin[n] sin(2 pi n tau)``.
    Used for near convex and non convex obstacles.
    """

    def __init__(self, r0: float, cos: t.Sequence[float] = (), sin: t.Sequence[float] = (),
                 center: t.Sequence[float] = (0.0, 0.0)):
        super().__init__(center)
        self.r0 = float(r0)  # type: float
        size = max(len(cos), len(sin))
        self.cos = np.zeros(size)  # type: np.ndarray
        self.cos[:len(cos)] = cos
        self.sin = np.zeros(size)  # type: np.ndarray
        self.sin[:len(sin)] = sin
        grid = np.arange(Settings()["curves/positivity_grid"]) / Settings()["curves/positivity_grid"]
        min_radius = float(np.min(self.radius(grid)))
        if not min_radius > 0:
            raise CurveError("Radius of the radial fourier curve has to be positive, minimum is {}"
                             .format(min_radius))

    def radius(self, tau: t.Union[float, np.ndarray], n: int = 0) -> np.ndarray:
        """ The n-th derivative of the radius function """
        tau = np.asarray(tau, dtype=float)
        ret = np.full(tau.shape, self.r0 if n == 0 else 0.0)
        for m, (a, b) in enumerate(zip(self.cos, self.sin), start=1):
            arg = 2 * math.pi * m * tau
            ret = ret + a * _cos_derivative(2 * math.pi * m, arg, n) + b * _sin_derivative(2 * math.pi * m, arg, n)
        return ret

    def _component_derivatives(self, tau: np.ndarray, n: int):
        arg = 2 * math.pi * tau
        x = np.zeros(tau.shape)
        y = np.zeros(tau.shape)
        # Leibniz rule
        for k in range(n + 1):
            rho = math.comb(n, k) * self.radius(tau, k)
            x = x + rho * _sin_derivative(2 * math.pi, arg, n - k)
            y = y + rho * _cos_derivative(2 * math.pi, arg, n - k)
        return x, y

    def radius_jet(self, tau_star: float, order: int) -> np.ndarray:
        """ Taylor coefficients of the radius about ``tau_star`` """
        ret = jets.constant(self.r0, order)
        for m, (a, b) in enumerate(zip(self.cos, self.sin), start=1):
            phase = 2 * math.pi * m * tau_star
            ret += a * jets.cos_jet(2 * math.pi * m, phase, order) + b * jets.sin_jet(2 * math.pi * m, phase, order)
        return ret

    def _component_jets(self, tau_star: float, order: int):
        rho = self.radius_jet(tau_star, order)
        phase = 2 * math.pi * tau_star
        return (jets.mul(rho, jets.sin_jet(2 * math.pi, phase, order)),
                jets.mul(rho, jets.cos_jet(2 * math.pi, phase, order)))

    def rotated(self, theta: float) -> 'RadialFourier':
        n = np.arange(1, len(self.cos) + 1)
        cos_n, sin_n = np.cos(n * theta), np.sin(n * theta)
        return RadialFourier(self.r0,
                             list(self.cos * cos_n + self.sin * sin_n),
                             list(self.sin * cos_n - self.cos * sin_n),
                             rotation_matrix(theta) @ self.center)

    def descriptor(self) -> t.Dict[str, t.Any]:
        return {"kind": "radial_fourier", "center": [float(x) for x in self.center], "r0": self.r0,
                "cos": [float(x) for x in self.cos], "sin": [float(x) for x in self.sin]}
