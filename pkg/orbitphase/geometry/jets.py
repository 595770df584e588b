"""
Truncated Taylor series ("jets") in one variable.

A jet of order ``n`` is a numpy array ``c`` of length ``n + 1`` where ``c[p]`` is the
coefficient of ``s**p``. Products are truncated Cauchy products, so the jet of a
composed expression is obtained coefficient-wise from the jets of its parts.
"""

import math

import numpy as np


def constant(value: float, order: int) -> np.ndarray:
    """ Jet of a constant """
    ret = np.zeros(order + 1)
    ret[0] = value
    return ret


def sin_jet(omega: float, phase: float, order: int) -> np.ndarray:
    """
    Jet of ``sin(omega * s + phase)`` about ``s = 0``.

    >>> [round(float(x), 12) for x in sin_jet(1.0, 0.0, 3)]
    [0.0, 1.0, 0.0, -0.166666666667]
    """
    n = np.arange(order + 1)
    return omega ** n * np.sin(phase + n * math.pi / 2) / _factorials(order)


def cos_jet(omega: float, phase: float, order: int) -> np.ndarray:
    """ Jet of ``cos(omega * s + phase)`` about ``s = 0`` """
    n = np.arange(order + 1)
    return omega ** n * np.cos(phase + n * math.pi / 2) / _factorials(order)


def mul(a: np.ndarray, b: np.ndarray, order: int = None) -> np.ndarray:
    """
    Truncated Cauchy product of two jets.

    :param order: order of the result, default: the smaller order of both
    """
    if order is None:
        order = min(len(a), len(b)) - 1
    return np.convolve(a, b)[:order + 1]


def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(n) for n in range(order + 1)], dtype=float)
