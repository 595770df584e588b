"""
Staged solution for the Taylor coefficients of the limiting phases and of the stationary point maps.

For every leg j (obstacle j to obstacle j + 1) the phase on obstacle j + 1 is the phase on
obstacle j plus the distance, evaluated at the stationary source point ``chi_j(t)``::

    omega_j(t) = phi_j(chi_j(t)) + dist_j(chi_j(t), t) - phi_{j+1}(t) = 0
    psi_j(t)   = d/ds [phi_j(s) + dist_j(s, t)] at s = chi_j(t)     = 0

Expanding both in ``t`` gives equations order by order. The first order is explicit, the second
order is a small quadratic system solved by Newton's method, every higher order is a linear
system of size 2J. The constant term of omega is exempt: the phases are pinned by
``c[j, 0] = d_j``.
"""

import logging
import math
import typing as t

import numpy as np

from orbitphase.geometry.curves import tau_difference, wrap_tau
from orbitphase.geometry.orbit import PeriodicOrbit
from orbitphase.geometry.scene import Scene
from orbitphase.series.dist_series import DistanceSeries, distance_series
from orbitphase.utils.errors import NumericalError, ConfigError
from orbitphase.utils.settings import Settings


class PhaseSeries(t.NamedTuple):
    """
    ``c[j, i]`` is the coefficient of ``(tau - taus[j])**i`` of the phase on obstacle j.
    ``omega[j]`` and ``psi[j]`` are the residual series of leg j after the solve.
    """

    taus: np.ndarray
    c: np.ndarray
    omega: np.ndarray
    psi: np.ndarray
    diagnostics: t.Dict[str, t.Any]

    @property
    def order(self) -> int:
        return self.c.shape[1] - 1

    def max_residual(self) -> float:
        """ Largest residual coefficient, the exempt constant term of omega excluded """
        return float(max(np.max(np.abs(self.omega[:, 1:])), np.max(np.abs(self.psi))))


class ChiSeries(t.NamedTuple):
    """
    ``a[j, i]`` is the coefficient of ``(tau_{j+1} - taus[j+1])**i`` of the stationary point map
    ``chi_j`` from obstacle j + 1 back to obstacle j, ``a[j, 0]`` is ``taus[j]``.
    """

    a: np.ndarray

    def power_table(self, j: int, count: int = None) -> np.ndarray:
        """
        Row ``m`` holds the truncated series of ``(chi_j(t) - taus[j])**m``.
        ``table[m, m] == a[j, 1]**m``.
        """
        order = self.a.shape[1]
        x = np.zeros(order)
        x[1:] = self.a[j, 1:]
        return _powers(x, order - 1 if count is None else count, order - 1)


class PhaseEvaluation(t.NamedTuple):
    value: float
    trusted: bool
    """ Is the parameter within the trust radius around the orbit point? """


class Order2Root(t.NamedTuple):
    c2: np.ndarray
    a1: np.ndarray
    iterations: int
    violations: t.List[str]


class PhaseSolverError(NumericalError):
    """
    A stage of the coefficient solve failed. Carries the coefficients computed so far.
    """
    stage = "phase_solver"

    def __init__(self, message: str, diagnostics: t.Dict[str, t.Any] = None,
                 partial: t.Tuple[np.ndarray, np.ndarray] = None):
        super().__init__(message, diagnostics)
        self.partial = partial
        """ Phase and chi coefficients solved before the failure """


class BranchRejectedError(PhaseSolverError):
    """ Every second order root violates the branch conditions """

    def __init__(self, message: str, rejected_roots: t.List[Order2Root], diagnostics: t.Dict[str, t.Any] = None,
                 partial: t.Tuple[np.ndarray, np.ndarray] = None):
        super().__init__(message, diagnostics, partial)
        self.rejected_roots = rejected_roots  # type: t.List[Order2Root]


def _shift(a: np.ndarray, count: int) -> np.ndarray:
    ret = np.zeros_like(a)
    if count < len(a):
        ret[count:] = a[:len(a) - count]
    return ret


def _powers(x: np.ndarray, count: int, order: int) -> np.ndarray:
    ret = np.zeros((count + 1, order + 1))
    ret[0, 0] = 1.0
    for m in range(1, count + 1):
        ret[m] = np.convolve(ret[m - 1], x[:order + 1])[:order + 1]
    return ret


def residual_series(f: np.ndarray, c_j: np.ndarray, c_next: np.ndarray, a_j: np.ndarray,
                    order: int) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    The series omega_j and psi_j (in powers of t up to ``order``) for the passed coefficients.
    Missing coefficients count as zero.

    :param f: distance expansion of the leg
    :param c_j: phase coefficients on obstacle j
    :param c_next: phase coefficients on obstacle j + 1
    :param a_j: coefficients of chi_j, the constant term is ignored
    """
    x = np.zeros(order + 1)
    size = min(len(a_j), order + 1)
    x[1:size] = a_j[1:size]
    powers = _powers(x, order, order)
    c_j = _pad(c_j, order)
    c_next = _pad(c_next, order)
    f = f[:order + 1, :order + 1]
    omega = c_j @ powers - c_next
    psi = (np.arange(1, order + 1) * c_j[1:]) @ powers[:-1]
    weights = np.arange(f.shape[0])[:, None] * f
    for q in range(f.shape[1]):
        omega += _shift(f[:, q] @ powers[:f.shape[0]], q)
        psi += _shift(weights[1:, q] @ powers[:f.shape[0] - 1], q)
    return omega, psi


def _pad(a: np.ndarray, order: int) -> np.ndarray:
    ret = np.zeros(order + 1)
    size = min(len(a), order + 1)
    ret[:size] = a[:size]
    return ret


def solve_order1(fs: t.List[np.ndarray], tol: float = None) -> np.ndarray:
    """
    First order phase coefficients ``c[j, 1] = -f_j[1, 0]``, cross checked against
    ``c[j + 1, 1] = f_j[0, 1]``.

    :raises: PhaseSolverError if both disagree, which means the parameters are not on an orbit
    """
    tol = Settings().default(tol, "series/consistency_tol")
    size = len(fs)
    c1 = np.array([-f[1, 0] for f in fs])
    for j, f in enumerate(fs):
        nxt = (j + 1) % size
        if abs(c1[nxt] - f[0, 1]) > tol * max(abs(f[0, 1]), f[0, 0]):
            raise PhaseSolverError("First order phase coefficients of obstacle {} disagree".format(nxt),
                                   {"from_leg_{}".format(nxt): float(c1[nxt]),
                                    "from_leg_{}".format(j): float(f[0, 1])})
    return c1


def branch_violations(fs: t.List[np.ndarray], c2: np.ndarray, a1: np.ndarray) -> t.List[str]:
    """
    The branch conditions a second order root violates: the phases have to be convex at the
    orbit points and the stationary point maps have to contract.
    """
    ret = []
    for j, f in enumerate(fs):
        if not c2[j] > 0:
            ret.append("c[{}, 2] = {:.6g} is not positive".format(j, c2[j]))
        if abs(f[1, 0]) > 1e-12 * f[0, 0]:
            bound = abs(f[0, 1] / f[1, 0])
        else:
            bound = 1.0
        if not abs(a1[j]) < bound:
            ret.append("|a[{}, 1]| = {:.6g} is not below {:.6g}".format(j, abs(a1[j]), bound))
    return ret


def _order2_system(fs: t.List[np.ndarray], c2: np.ndarray, a1: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray]:
    """ Residuals (psi_j1 for all j, then omega_j2 for all j) and the Jacobian w.r.t. (c2, a1) """
    size = len(fs)
    res = np.zeros(2 * size)
    jac = np.zeros((2 * size, 2 * size))
    for j, f in enumerate(fs):
        nxt = (j + 1) % size
        curv = c2[j] + f[2, 0]
        res[j] = 2 * curv * a1[j] + f[1, 1]
        jac[j, j] = 2 * a1[j]
        jac[j, size + j] = 2 * curv
        res[size + j] = curv * a1[j] ** 2 + f[1, 1] * a1[j] + f[0, 2] - c2[nxt]
        jac[size + j, j] = a1[j] ** 2
        jac[size + j, size + j] = 2 * curv * a1[j] + f[1, 1]
        jac[size + j, nxt] -= 1
    return res, jac


def _newton_order2(fs: t.List[np.ndarray], guess: t.Tuple[np.ndarray, np.ndarray],
                   max_iterations: int, tol: float) -> t.Optional[t.Tuple[np.ndarray, np.ndarray, int]]:
    size = len(fs)
    x = np.concatenate([np.asarray(guess[0], dtype=float), np.asarray(guess[1], dtype=float)])
    for iteration in range(max_iterations + 1):
        res, jac = _order2_system(fs, x[:size], x[size:])
        if np.max(np.abs(res)) <= tol:
            return x[:size], x[size:], iteration
        try:
            x = x - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(x)):
            return None
    return None


def default_order2_guesses(fs: t.List[np.ndarray]) -> t.List[t.Tuple[np.ndarray, np.ndarray]]:
    """
    Start values for the second order Newton iteration: ``c[j + 1, 2] = f_j[0, 2]`` with a vanishing
    first order chi coefficient, followed by variants with a small positive or negative one.
    """
    size = len(fs)
    c2 = np.array([fs[(j - 1) % size][0, 2] for j in range(size)])
    return [(c2, np.full(size, a)) for a in (0.0, 0.25, -0.25)]


def solve_order2(fs: t.List[np.ndarray], guesses: t.List[t.Tuple[t.Sequence[float], t.Sequence[float]]] = None,
                 max_iterations: int = None) -> t.Tuple[Order2Root, t.List[Order2Root]]:
    """
    Solves the 2J quadratic equations for ``c[j, 2]`` and ``a[j, 1]``.

    Newton's method runs from every guess. Roots that violate the branch conditions are collected
    and never returned. Of the admissible roots the one closest to the first guess wins.

    :param fs: distance expansions of the legs
    :param guesses: (c2, a1) start values, default: :func:`default_order2_guesses`
    :return: the chosen root and the rejected roots
    :raises: PhaseSolverError if Newton never converges, BranchRejectedError if all roots are rejected
    """
    max_iterations = Settings().default(max_iterations, "series/newton_max_iterations")
    guesses = guesses or default_order2_guesses(fs)
    scale = max(float(np.max(np.abs(np.where(np.add.outer(np.arange(f.shape[0]), np.arange(f.shape[1])) <= 3,
                                                 f, 0.0)))) for f in fs)
    tol = 1e-12 * scale
    accepted = []  # type: t.List[Order2Root]
    rejected = []  # type: t.List[Order2Root]
    for guess in guesses:
        ret = _newton_order2(fs, guess, max_iterations, tol)
        if ret is None:
            logging.debug("Second order Newton iteration from {} did not converge".format(guess))
            continue
        c2, a1, iterations = ret
        root = Order2Root(c2, a1, iterations, branch_violations(fs, c2, a1))
        known = accepted + rejected
        if any(np.allclose(root.c2, other.c2, rtol=1e-8) and np.allclose(root.a1, other.a1, atol=1e-10)
               for other in known):
            continue
        if root.violations:
            logging.info("Rejected second order root c2 = {}, a1 = {}: {}"
                         .format(root.c2.tolist(), root.a1.tolist(), "; ".join(root.violations)))
            rejected.append(root)
        else:
            accepted.append(root)
    if not accepted:
        if not rejected:
            raise PhaseSolverError("Second order Newton iteration did not converge",
                                   {"max_iterations": max_iterations, "guesses": len(guesses)})
        raise BranchRejectedError("All second order roots violate the branch conditions", rejected,
                                  {"rejected": [(r.c2.tolist(), r.a1.tolist(), r.violations) for r in rejected]})
    first = np.concatenate([np.asarray(guesses[0][0], dtype=float), np.asarray(guesses[0][1], dtype=float)])
    best = min(accepted, key=lambda r: float(np.linalg.norm(np.concatenate([r.c2, r.a1]) - first)))
    return best, rejected


def solve_order_n(fs: t.List[np.ndarray], c: np.ndarray, a: np.ndarray, i: int,
                  max_condition: float = None) -> t.Tuple[np.ndarray, np.ndarray, float]:
    """
    Solves the linear 2J x 2J system for ``c[:, i]`` and ``a[:, i - 1]`` (i >= 3) given all lower
    orders. The passed arrays are not modified.

    :return: new c and a columns and the condition number of the system
    :raises: PhaseSolverError if the system is singular or the solution leaves a residual
    """
    max_condition = Settings().default(max_condition, "series/max_condition")
    size = len(fs)
    c = c.copy()
    a = a.copy()
    c[:, i:] = 0.0
    a[:, i - 1:] = 0.0
    matrix = np.zeros((2 * size, 2 * size))
    rhs = np.zeros(2 * size)
    for j, f in enumerate(fs):
        nxt = (j + 1) % size
        omega, psi = residual_series(f, c[j], c[nxt], a[j], i)
        a1, curv = a[j, 1], c[j, 2] + f[2, 0]
        # omega_{j,i}
        matrix[j, j] += a1 ** i
        matrix[j, nxt] -= 1
        matrix[j, size + j] = 2 * a1 * curv + f[1, 1]
        rhs[j] = -omega[i]
        # psi_{j,i-1}
        matrix[size + j, j] = i * a1 ** (i - 1)
        matrix[size + j, size + j] = 2 * curv
        rhs[size + j] = -psi[i - 1]
    condition = float(np.linalg.cond(matrix))
    if not condition <= max_condition:
        raise PhaseSolverError("The linear system of order {} is singular".format(i),
                               {"order": i, "condition": condition})
    x = np.linalg.solve(matrix, rhs)
    c[:, i] = x[:size]
    a[:, i - 1] = x[size:]
    scale = max(1.0, float(np.max(np.abs(rhs))), float(np.max(np.abs(matrix)) * np.max(np.abs(x))))
    for j, f in enumerate(fs):
        omega, psi = residual_series(f, c[j], c[(j + 1) % size], a[j], i)
        worst = max(abs(omega[i]), abs(psi[i - 1]))
        if worst > 1e-11 * scale:
            raise PhaseSolverError("Residual of order {} does not vanish".format(i),
                                   {"order": i, "leg": j, "residual": float(worst), "scale": scale})
    return c[:, i], a[:, i - 1], condition


def compute_phase_series(scene: Scene, orbit: PeriodicOrbit, order: int,
                         fs: t.List[DistanceSeries] = None,
                         initial_guess: t.Tuple[t.Sequence[float], t.Sequence[float]] = None) \
        -> t.Tuple[PhaseSeries, ChiSeries]:
    """
    Runs all stages up to the passed order.

    :param scene: scene
    :param orbit: periodic orbit of the scene
    :param order: highest phase coefficient, >= 2
    :param fs: distance expansions of at least this order, computed if not passed
    :param initial_guess: (c2, a1) start values tried before the default ones
    :raises: PhaseSolverError (with the partial coefficients) if a stage fails
    """
    if order < 2:
        raise ConfigError("The phase series needs an order of at least 2, got {}".format(order))
    if fs is None:
        fs = distance_series(scene, orbit, order)
    tables = [series.f[:order + 1, :order + 1] for series in fs]
    size = scene.size
    c = np.zeros((size, order + 1))
    a = np.zeros((size, order))
    c[:, 0] = [f[0, 0] for f in tables]
    a[:, 0] = orbit.taus
    diagnostics = {"conditions": {}}  # type: t.Dict[str, t.Any]

    def fail(err: PhaseSolverError):
        err.partial = (c.copy(), a.copy())
        err.diagnostics.setdefault("scene_size", size)
        raise err

    try:
        c[:, 1] = solve_order1(tables)
        guesses = default_order2_guesses(tables)
        if initial_guess is not None:
            guesses.insert(0, (np.asarray(initial_guess[0], dtype=float), np.asarray(initial_guess[1], dtype=float)))
        root, rejected = solve_order2(tables, guesses)
        c[:, 2] = root.c2
        a[:, 1] = root.a1
        diagnostics["order2_iterations"] = root.iterations
        diagnostics["rejected_roots"] = [{"c2": r.c2.tolist(), "a1": r.a1.tolist(), "violations": r.violations}
                                         for r in rejected]
        for i in range(3, order + 1):
            c[:, i], a[:, i - 1], condition = solve_order_n(tables, c, a, i)
            diagnostics["conditions"][str(i)] = condition
            logging.debug("Solved phase order {} (condition {:.3g})".format(i, condition))
    except PhaseSolverError as err:
        fail(err)
    omega = np.zeros((size, order + 1))
    psi = np.zeros((size, order))
    for j in range(size):
        w, p = residual_series(tables[j], c[j], c[(j + 1) % size], a[j], order)
        omega[j] = w
        psi[j] = p[:order]
    series = PhaseSeries(np.array(orbit.taus, dtype=float), c, omega, psi, diagnostics)
    diagnostics["max_residual"] = series.max_residual()
    logging.info("Phase series of order {}: max residual {:.3g}".format(order, diagnostics["max_residual"]))
    return series, ChiSeries(a)


def eval_phase(series: PhaseSeries, j: int, tau: float, order: int = None) -> PhaseEvaluation:
    """
    Evaluates the (truncated) phase series of obstacle j at tau.
    Parameters outside the series/trust_radius setting give an untrusted result.
    """
    order = series.order if order is None else min(order, series.order)
    s = tau_difference(tau, series.taus[j])
    value = float(np.polynomial.polynomial.polyval(s, series.c[j, :order + 1]))
    trusted = abs(s) <= Settings()["series/trust_radius"]
    if not trusted:
        logging.warning("Phase of obstacle {} evaluated at {}, outside of the trust radius".format(j, tau))
    return PhaseEvaluation(value, trusted)


def eval_chi(chi: ChiSeries, j: int, tau_next: float, next_tau_star: float) -> float:
    """
    Evaluates the stationary point map chi_j at the parameter ``tau_next`` on obstacle j + 1.

    :param next_tau_star: orbit parameter on obstacle j + 1
    """
    t_ = tau_difference(tau_next, next_tau_star)
    coeffs = chi.a[j].copy()
    coeffs[0] = 0.0
    return float(wrap_tau(chi.a[j, 0] + np.polynomial.polynomial.polyval(t_, coeffs)))
