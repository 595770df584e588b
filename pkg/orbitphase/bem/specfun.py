"""
Bessel functions of order zero and the Hankel function ``H0 = J0 + i Y0`` for real positive
arguments, vectorized over numpy arrays.

Arguments up to 8 use the ascending series, larger ones the rational approximations of the
modulus and phase functions from the Cephes library.
"""

import math
import typing as t

import numpy as np

from orbitphase.utils.errors import SpecfunError

SEAM = 8.0  # type: float
""" Arguments above use the asymptotic form """
TERMS = 40  # type: int
""" Terms of the ascending series """
EULER_GAMMA = 0.57721566490153286060651209008240243  # type: float

_factorial_squares = np.array([float(math.factorial(i)) ** 2 for i in range(TERMS)])
_harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, TERMS))])
_J0_SERIES = 1.0 / _factorial_squares
""" Coefficients of J0 in powers of -x^2/4 """
_S_SERIES = -_harmonic / _factorial_squares
""" Coefficients of the harmonic sum part of Y0 in powers of -x^2/4 """

_PP = [7.96936729297347051624E-4, 8.28352392107440799803E-2, 1.23953371646414299388E0,
       5.44725003058768775090E0, 8.74716500199817011941E0, 5.30324038235394892183E0,
       9.99999999999999997821E-1]
_PQ = [9.24408810558863637013E-4, 8.56288474354474431428E-2, 1.25352743901058953537E0,
       5.47097740330417105182E0, 8.76190883237069594232E0, 5.30605288235394617618E0,
       1.00000000000000000218E0]
_QP = [-1.13663838898469149931E-2, -1.28252718670509318512E0, -1.95539544257735972385E1,
       -9.32060152123768231369E1, -1.77681167980488050595E2, -1.47077505154951170175E2,
       -5.14105326766599330220E1, -6.05014350600728481186E0]
_QQ = [6.43178256118178023184E1, 8.56430025976980587198E2, 3.88240183605401609683E3,
       7.24046774195652478189E3, 5.93072701187316984827E3, 2.06209331660327847417E3,
       2.42005740240291393179E2]
_SQ2OPI = 7.9788456080286535587989E-1
_PIO4 = 7.85398163397448309616E-1


def _polevl(x: np.ndarray, coeffs: t.List[float]) -> np.ndarray:
    ret = np.zeros_like(x) + coeffs[0]
    for coeff in coeffs[1:]:
        ret = ret * x + coeff
    return ret


def _p1evl(x: np.ndarray, coeffs: t.List[float]) -> np.ndarray:
    """ Like _polevl with an implicit leading coefficient 1 """
    return _polevl(x, [1.0] + list(coeffs))


def _check(x, allow_zero: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    bad = ~np.isfinite(x) | ((x < 0) if allow_zero else (x <= 0))
    if np.any(bad):
        raise SpecfunError("Argument out of the domain: {}".format(x[bad].ravel()[0]),
                           {"argument": float(x[bad].ravel()[0])})
    return x


def _ascending(x: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ J0, the harmonic sum S and Y0 = (2/pi) ((ln(x/2) + gamma) J0 + S) by the ascending series """
    u = -x * x / 4
    j0 = np.polynomial.polynomial.polyval(u, _J0_SERIES)
    s = np.polynomial.polynomial.polyval(u, _S_SERIES)
    with np.errstate(divide="ignore"):
        y0 = 2 / math.pi * ((np.log(x / 2) + EULER_GAMMA) * j0 + s)
    return j0, s, y0


def _asymptotic(x: np.ndarray) -> np.ndarray:
    """ H0 by the modulus and phase approximation """
    w = 5.0 / x
    z = 25.0 / (x * x)
    p = _polevl(z, _PP) / _polevl(z, _PQ)
    q = _polevl(z, _QP) / _p1evl(z, _QQ)
    return _SQ2OPI / np.sqrt(x) * (p + 1j * w * q) * np.exp(1j * (x - _PIO4))


def _split(x: np.ndarray, small: t.Callable, large: t.Callable, dtype) -> np.ndarray:
    ret = np.empty(x.shape, dtype=dtype)
    mask = x <= SEAM
    if np.any(mask):
        ret[mask] = small(x[mask])
    if np.any(~mask):
        ret[~mask] = large(x[~mask])
    return ret


def hankel_h0(x: t.Union[float, np.ndarray]) -> t.Union[complex, np.ndarray]:
    """
    The Hankel function of the first kind and order zero.

    :raises: SpecfunError for arguments <= 0
    """
    x = _check(x)

    def small(v):
        j0, _, y0 = _ascending(v)
        return j0 + 1j * y0

    ret = _split(x, small, _asymptotic, complex)
    return ret if ret.ndim else complex(ret)


def bessel_j0(x: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
    """ J0 for arguments >= 0 """
    x = _check(x, allow_zero=True)
    ret = _split(x, lambda v: _ascending(v)[0], lambda v: _asymptotic(v).real, float)
    return ret if ret.ndim else float(ret)


def bessel_y0(x: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
    """ Y0 for arguments > 0 """
    x = _check(x)
    ret = _split(x, lambda v: _ascending(v)[2], lambda v: _asymptotic(v).imag, float)
    return ret if ret.ndim else float(ret)


def y0_regular_part(x: t.Union[float, np.ndarray]) -> t.Union[float, np.ndarray]:
    """
    The smooth remainder ``Y0(x) - (2/pi) ln(x/2) J0(x)``, finite at 0 (value ``2 gamma / pi``).
    """
    x = _check(x, allow_zero=True)

    def small(v):
        j0, s, _ = _ascending(v)
        return 2 / math.pi * (EULER_GAMMA * j0 + s)

    def large(v):
        h0 = _asymptotic(v)
        return h0.imag - 2 / math.pi * np.log(v / 2) * h0.real

    ret = _split(x, small, large, float)
    return ret if ret.ndim else float(ret)
