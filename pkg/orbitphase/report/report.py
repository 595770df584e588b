"""
Reports: CSV tables, a JSON summary and a manifest per run, written into an output directory.

The tables of the ``report`` subcommand:

- ``orbit``: orbit parameters, points and leg distances
- ``fseries_leg<j>``: distance expansion of leg j (``p``, ``q``, coefficient)
- ``phase`` and ``chi``: coefficient rows ``i`` with one column per obstacle
- ``twodisk_coeffs`` and ``twodisk_phi``: two disk oracles (only with a ``twodisk`` config section)
- ``eigen``, ``mode`` and ``mode_phase``: dominant eigenvalue, mode densities and numerical phases.
  The eigenvalues include the sign ``(-1)**J`` of the J reflections (``reflection_sign`` in the summary),
  ``phase_defect`` compares the sign corrected argument with ``k L``
- ``fiter``: densities of the scattering iteration
- ``fphase`` and ``fconv``: phase of obstacle 0 near the orbit point for several Taylor orders and the
  errors against the reference phase (geometric sum for two disks, numerical phase otherwise)

Tables and summaries contain no timestamps, so identical configs give identical files.
"""

import cmath
import fnmatch
import functools
import hashlib
import json
import logging
import math
import os
import typing as t

import numpy as np
import tablib

from orbitphase.bem.assembly import BemGrid, BlockSystem, assemble_system
from orbitphase.bem.cycle import ModeResult, compute_mode, cycle_sign
from orbitphase.bem.iteration import ScatteringIteration, iterate_scattering
from orbitphase.geometry.orbit import PeriodicOrbit, find_orbit
from orbitphase.report.config import SceneConfig
from orbitphase.scripts.version import version
from orbitphase.series.dist_series import DistanceSeries, distance_series
from orbitphase.series.phase_solver import ChiSeries, PhaseSeries, compute_phase_series, eval_phase
from orbitphase.twodisk import oracles
from orbitphase.utils.errors import ConfigError, NumericalError
from orbitphase.utils.settings import Settings
from orbitphase.utils.util import atomic_write

SUBCOMMANDS = ["orbit", "fseries", "phase", "twodisk", "mode", "iterate", "report"]  # type: t.List[str]


class ReportMismatchError(ValueError):
    """ Two reports can't be compared (different configs or missing files) """
    pass


def format_cell(value: t.Any) -> str:
    """
    CSV representation of a cell, floats with 17 significant digits.

    >>> format_cell(0.1), format_cell(3), format_cell(None)
    ('0.10000000000000001', '3', '')
    """
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "{:.17g}".format(float(value))


def _json_default(obj: t.Any) -> t.Any:
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return str(obj)


def dump_json(data: t.Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"


def complex_dict(value: complex) -> t.Dict[str, float]:
    return {"re": float(value.real), "im": float(value.imag), "abs": abs(value), "arg": cmath.phase(value)}


class Report:
    """
    The tables and the summary of one run.
    """

    def __init__(self, config: SceneConfig, subcommand: str):
        self.config = config  # type: SceneConfig
        self.subcommand = subcommand  # type: str
        self.tables = {}  # type: t.Dict[str, tablib.Dataset]
        self.summary = {"name": config["name"], "subcommand": subcommand}  # type: t.Dict[str, t.Any]

    def add_table(self, name: str, headers: t.List[str], rows: t.Iterable[t.Sequence[t.Any]]):
        data = tablib.Dataset(headers=headers)
        for row in rows:
            data.append([format_cell(cell) for cell in row])
        self.tables[name] = data

    def csv(self, name: str) -> str:
        return self.tables[name].export("csv")

    def manifest(self) -> t.Dict[str, t.Any]:
        return {
            "config_sha256": self.config.digest(),
            "version": version,
            "subcommand": self.subcommand,
            "tolerances": Settings().tolerances(),
            "power_tol": Settings().default(self.config["bem"]["tol"], "bem/power_tol"),
            "tables": {name: hashlib.sha256(self.csv(name).encode("utf-8")).hexdigest()
                       for name in sorted(self.tables)}
        }

    def write(self, out_dir: str) -> t.List[str]:
        """
        Writes every table as ``<name>.csv``, the ``summary.json`` and the ``manifest.json``.
        Each file is written atomically.

        :return: names of the written files
        :raises: OSError if the directory isn't writable
        """
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for name in sorted(self.tables):
            atomic_write(os.path.join(out_dir, name + ".csv"), self.csv(name))
            written.append(name + ".csv")
        atomic_write(os.path.join(out_dir, "summary.json"), dump_json(self.summary))
        atomic_write(os.path.join(out_dir, "manifest.json"), dump_json(self.manifest()))
        logging.info("Wrote {} files into {}".format(len(written) + 2, out_dir))
        return written + ["summary.json", "manifest.json"]


def write_failure(out_dir: str, config: SceneConfig, subcommand: str, error: NumericalError):
    """ Writes the summary of a failed run with the diagnostics of the failing stage """
    summary = {"name": config["name"], "subcommand": subcommand,
               "error": {"stage": error.stage, "message": error.message, "diagnostics": error.diagnostics}}
    os.makedirs(out_dir, exist_ok=True)
    atomic_write(os.path.join(out_dir, "summary.json"), dump_json(summary))


class ReportBuilder:
    """
    Runs the stages of a config on demand (each stage at most once) and fills a report.
    """

    def __init__(self, config: SceneConfig, subcommand: str = "report"):
        if subcommand not in SUBCOMMANDS:
            raise ValueError("Unknown subcommand {!r}".format(subcommand))
        self.config = config  # type: SceneConfig
        self.report = Report(config, subcommand)  # type: Report
        self.order = config["order"]  # type: int
        self.scene = config.build_scene()

    @functools.cached_property
    def orbit(self) -> PeriodicOrbit:
        return find_orbit(self.scene)

    @functools.cached_property
    def fseries(self) -> t.List[DistanceSeries]:
        return distance_series(self.scene, self.orbit, self.order)

    @functools.cached_property
    def phase_and_chi(self) -> t.Tuple[PhaseSeries, ChiSeries]:
        return compute_phase_series(self.scene, self.orbit, self.order, self.fseries)

    @property
    def phase(self) -> PhaseSeries:
        return self.phase_and_chi[0]

    @functools.cached_property
    def system(self) -> BlockSystem:
        bem = self.config["bem"]
        grid = BemGrid(self.scene, bem["points_per_wavelength"], bem["min_points"], bem["points"])
        return assemble_system(self.scene, grid)

    @functools.cached_property
    def mode(self) -> ModeResult:
        bem = self.config["bem"]
        return compute_mode(self.scene, self.orbit, tol=bem["tol"], window=bem["window"],
                            eigenvalues=bem["eigenvalues"], system=self.system)

    @functools.cached_property
    def iteration(self) -> ScatteringIteration:
        return iterate_scattering(self.system, self.config.incident(), self.config["bem"]["reflections"],
                                  self.orbit, self.phase)

    @functools.cached_property
    def twodisk(self) -> oracles.TwoDiskConfig:
        ret = self.config.twodisk_config()
        if ret is None:
            raise ConfigError("The config {} has no twodisk section".format(self.config.source))
        return ret

    @functools.cached_property
    def chi_solution(self) -> oracles.ChiSolution:
        return oracles.solve_chi(self.twodisk)

    def add_orbit(self):
        orbit = self.orbit
        obstacles = self.config.orbit_order
        rows = []
        for j, tau in enumerate(orbit.taus):
            point = self.scene.obstacles[j].point(tau)
            rows.append([j, obstacles[j], tau, point[0], point[1], orbit.leg_distances[j],
                         orbit.hessian_eigenvalues[j]])
        self.report.add_table("orbit", ["j", "obstacle", "tau_star", "x", "y", "leg_distance",
                                        "hessian_eigenvalue"], rows)
        self.report.summary["orbit"] = orbit.to_dict()

    def add_fseries(self):
        for series in self.fseries:
            p, q = np.indices(series.f.shape)
            self.report.add_table("fseries_leg{}".format(series.j), ["p", "q", "f"],
                                  zip(p.ravel(), q.ravel(), series.f.ravel()))
        self.report.summary["fseries"] = {"order": self.order,
                                          "leg_distances": [float(s.f[0, 0]) for s in self.fseries]}

    def add_phase(self):
        series, chi = self.phase_and_chi
        size = self.scene.size
        self.report.add_table("phase", ["i"] + ["c_{}".format(j) for j in range(size)],
                              ([i] + list(series.c[:, i]) for i in range(series.order + 1)))
        self.report.add_table("chi", ["i"] + ["a_{}".format(j) for j in range(size)],
                              ([i] + list(chi.a[:, i]) for i in range(chi.a.shape[1])))
        self.report.summary["phase"] = {"order": series.order, "c": series.c, "a": chi.a,
                                        "max_residual": series.max_residual(), "diagnostics": series.diagnostics}

    def add_twodisk(self):
        config = self.twodisk
        chi = self.chi_solution
        scene = config.scene(self.scene.k)
        orbit = find_orbit(scene)
        order = max(self.order, 8)
        series, chi_series = compute_phase_series(scene, orbit, order)
        standard = config.r == 0.5 and config.d == 1.0
        closed = oracles.closed_form_coeffs() if standard else None
        rows = []
        for i in range(order + 1):
            rows.append([i, closed.c[i] if closed is not None and i < len(closed.c) else None, series.c[0, i],
                         closed.a[i] if closed is not None and i < len(closed.a) else None,
                         chi_series.a[0, i] if i < chi_series.a.shape[1] else None])
        self.report.add_table("twodisk_coeffs", ["i", "c_closed_form", "c_computed", "a_closed_form",
                                                 "a_computed"], rows)
        rows = []
        for tau in [0.0] + list(self.config["report"]["offsets"]):
            try:
                via_chi = oracles.phi_via_chi_integral(config, tau, chi)
            except oracles.TwoDiskError:
                via_chi = math.nan
            rows.append([tau, float(chi(tau)), oracles.phi_geometric_sum(config, tau, chi=chi), via_chi,
                         eval_phase(series, 0, tau).value])
        self.report.add_table("twodisk_phi", ["tau", "chi", "phi_geometric_sum", "phi_chi_integral",
                                              "phi_taylor"], rows)
        fit = oracles.fit_taylor(config, chi=chi)
        self.report.summary["twodisk"] = {
            "r": config.r, "d": config.d,
            "chi_max_residual": float(np.max(np.abs(chi.residual))),
            "chi_sweeps": chi.sweeps,
            "chi_derivative_at_zero": chi.derivative_at_zero(),
            "fitted_c": fit,
            "closed_form": standard
        }

    def add_mode(self):
        result = self.mode
        mode = result.mode
        value = mode.eigenvalue
        length = float(self.orbit.total_length)
        k = self.scene.k
        sign = cycle_sign(self.scene.size)
        eigen_rows = [[0, value.real, value.imag, abs(value), cmath.phase(value)]]
        if result.leading is not None:
            eigen_rows += [[i + 1, v.real, v.imag, abs(v), cmath.phase(v)] for i, v in enumerate(result.leading)]
        self.report.add_table("eigen", ["index", "re", "im", "abs", "arg"], eigen_rows)
        rows = []
        for j, vector in enumerate(mode.vectors):
            nodes = mode.grid[j].nodes
            rows.extend([j, tau, v.real, v.imag, abs(v)] for tau, v in zip(nodes, vector))
        self.report.add_table("mode", ["j", "tau", "re", "im", "abs"], rows)
        rows = []
        for j, samples in enumerate(result.phases):
            rows.extend([j, tau, phi, eval_phase(self.phase, j, tau).value] for tau, phi in zip(samples.taus,
                                                                                           samples.phase))
        self.report.add_table("mode_phase", ["j", "tau", "phase_numeric", "phase_taylor"], rows)
        self.report.summary["mode"] = {
            "lambda": complex_dict(value),
            "k": k,
            "k_length_mod_2pi": math.fmod(k * length, 2 * math.pi),
            "reflection_sign": sign,
            "phase_defect": abs(cmath.exp(1j * cmath.phase(sign * value)) - cmath.exp(1j * k * length)),
            "closing_residual": mode.closing_residual,
            "iterations": mode.iterations,
            "points": mode.grid.sizes,
            "conditions": [result.system.conditions[j] for j in range(self.scene.size)],
            "windows": [samples.window for samples in result.phases],
            "leading_eigenvalues": [complex_dict(v) for v in result.leading] if result.leading is not None else []
        }

    def add_iterate(self):
        iteration = self.iteration
        grid = self.system.grid
        rows = []
        for row in iteration.reflections:
            for reflection in row:
                nodes = grid[reflection.obstacle].nodes
                rows.extend([reflection.n, reflection.obstacle, tau, v.real, v.imag, abs(v)]
                            for tau, v in zip(nodes, reflection.density))
        self.report.add_table("fiter", ["n", "j", "tau", "re", "im", "abs"], rows)
        self.report.summary["iterate"] = {
            "incident": self.config["bem"]["incident"],
            "points": grid.sizes,
            "peaks": [[r.peak_tau for r in row] for row in iteration.reflections],
            "peak_amplitudes": [[r.peak_amplitude for r in row] for row in iteration.reflections],
            "cycle_ratios": iteration.cycle_ratios,
            "phase_settling": iteration.phase_settling
        }

    def _reference_phase(self) -> t.Tuple[str, t.Optional[t.Callable[[float], float]]]:
        """ Name and function of the reference phase of obstacle 0 (argument: offset from the orbit point) """
        if self.config["twodisk"] is not None:
            config, chi = self.twodisk, self.chi_solution
            return "geometric_sum", lambda offset: oracles.phi_geometric_sum(config, offset, chi=chi)
        numeric = self._numeric_phase()
        if numeric is not None:
            return "numeric", numeric
        return "none", None

    def _numeric_phase(self) -> t.Optional[t.Callable[[float], float]]:
        if not self.config["bem"]["enabled"]:
            return None
        samples = self.mode.phases[0]
        offsets = samples.offsets(float(self.orbit.taus[0]))
        return lambda offset: float(np.interp(offset, offsets, samples.phase, left=math.nan, right=math.nan))

    def add_figures(self):
        orders = self.config["report"]["orders"]
        offsets = self.config["report"]["offsets"]
        tau_star = float(self.orbit.taus[0])
        reference_name, reference = self._reference_phase()
        numeric = self._numeric_phase()
        extent = max(offsets)
        rows = []
        for offset in np.linspace(-extent, extent, 81):
            taylor = [eval_phase(self.phase, 0, tau_star + offset, order).value for order in orders]
            rows.append([offset, reference(offset) if reference else None] + taylor
                        + [numeric(offset) if numeric else None])
        self.report.add_table("fphase", ["offset", "reference"] + ["taylor_{}".format(o) for o in orders]
                              + ["numeric"], rows)
        rows = []
        for offset in offsets:
            for side, sign in (("+", 1), ("-", -1)):
                if reference is None:
                    continue
                ref = reference(sign * offset)
                errors = [abs(eval_phase(self.phase, 0, tau_star + sign * offset, order).value - ref)
                          for order in orders]
                err_numeric = abs(numeric(sign * offset) - ref) if numeric and reference_name != "numeric" else None
                rows.append([offset, side] + errors + [err_numeric])
        self.report.add_table("fconv", ["offset", "side"] + ["err_taylor_{}".format(o) for o in orders]
                              + ["err_numeric"], rows)
        self.report.summary["figures"] = {"reference": reference_name, "orders": orders}

    def build(self) -> Report:
        """
        Runs the stages of the subcommand.

        :raises: ConfigError, NumericalError
        """
        subcommand = self.report.subcommand
        bem = self.config["bem"]["enabled"]
        steps = {
            "orbit": [self.add_orbit],
            "fseries": [self.add_orbit, self.add_fseries],
            "phase": [self.add_orbit, self.add_phase],
            "twodisk": [self.add_twodisk],
            "mode": [self.add_orbit, self.add_mode],
            "iterate": [self.add_orbit, self.add_iterate],
            "report": [self.add_orbit, self.add_fseries, self.add_phase]
                      + ([self.add_twodisk] if self.config["twodisk"] is not None else [])
                      + ([self.add_mode, self.add_iterate] if bem else [])
                      + [self.add_figures]
        }[subcommand]
        for step in steps:
            step()
        self.report.summary["tol"] = Settings().default(self.config["bem"]["tol"], "bem/power_tol")
        return self.report


def build_report(config: SceneConfig, subcommand: str) -> Report:
    return ReportBuilder(config, subcommand).build()


TABLE_TOLERANCES = [
    ("orbit", 1e-10, False),
    ("fseries_leg*", 1e-10, False),
    ("phase", 1e-9, True),
    ("chi", 1e-9, True),
    ("twodisk_coeffs", 1e-9, True),
    ("twodisk_phi", 1e-9, False),
    ("eigen", 1e-3, True),
    ("mode", 1e-6, False),
    ("mode_phase", 1e-6, False),
    ("fiter", 1e-6, False),
    ("fphase", 1e-6, False),
    ("fconv", 1e-6, False),
]  # type: t.List[t.Tuple[str, float, bool]]
""" (table name pattern, relative tolerance, compare the common rows of tables with different lengths) """


class CompareResult(t.NamedTuple):
    passed: bool
    differences: t.Dict[str, t.Optional[float]]
    """ Largest relative difference per table, None for skipped tables """
    failures: t.List[str]

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {"passed": self.passed, "differences": self.differences, "failures": self.failures}


def _table_rule(name: str) -> t.Tuple[float, bool]:
    for pattern, rtol, prefix in TABLE_TOLERANCES:
        if fnmatch.fnmatchcase(name, pattern):
            return rtol, prefix
    return 1e-9, False


def _load_dir(directory: str) -> t.Tuple[t.Dict[str, t.Any], t.Dict[str, tablib.Dataset]]:
    manifest_file = os.path.join(directory, "manifest.json")
    if not os.path.isfile(manifest_file):
        raise ReportMismatchError("{} contains no manifest.json".format(directory))
    with open(manifest_file) as f:
        manifest = json.load(f)
    tables = {}
    for name in manifest.get("tables", {}):
        with open(os.path.join(directory, name + ".csv"), newline="") as f:
            tables[name] = tablib.Dataset().load(f.read(), format="csv")
    return manifest, tables


def _column_difference(values: t.List[str], baseline: t.List[str]) -> float:
    """ Largest difference relative to the largest magnitude in the baseline column (0 for equal strings) """
    try:
        a = np.array([float(x) if x != "" else math.nan for x in values])
        b = np.array([float(x) if x != "" else math.nan for x in baseline])
    except ValueError:
        return 0.0 if list(values) == list(baseline) else math.inf
    same_nan = np.isnan(a) & np.isnan(b)
    if np.any(np.isnan(a) != np.isnan(b)):
        return math.inf
    finite = ~same_nan
    if not np.any(finite):
        return 0.0
    scale = float(np.max(np.abs(b[finite])))
    diff = float(np.max(np.abs(a[finite] - b[finite])))
    if diff == 0:
        return 0.0
    return diff / scale if scale > 0 else math.inf


def compare_report(report_dir: str, baseline_dir: str, rtol: float = None, strict: bool = True) -> CompareResult:
    """
    Compares the tables of two report directories cell by cell.

    :param rtol: tolerance for all tables, default: per table tolerances
    :param strict: require the same config hash and the same table shapes
    :raises: ReportMismatchError if the manifests don't match (strict mode) or are missing
    """
    manifest, tables = _load_dir(report_dir)
    base_manifest, base_tables = _load_dir(baseline_dir)
    if strict and manifest.get("config_sha256") != base_manifest.get("config_sha256"):
        raise ReportMismatchError("The reports belong to different configs ({} and {})"
                                  .format(manifest.get("config_sha256"), base_manifest.get("config_sha256")))
    differences = {}
    failures = []
    for name in sorted(set(tables) | set(base_tables)):
        if name not in tables or name not in base_tables:
            differences[name] = None
            if strict:
                failures.append("{}: only in one report".format(name))
            continue
        table, base = tables[name], base_tables[name]
        tol, prefix = _table_rule(name)
        tol = rtol if rtol is not None else tol
        if list(table.headers) != list(base.headers):
            differences[name] = None
            failures.append("{}: different columns".format(name))
            continue
        rows = min(table.height, base.height)
        if table.height != base.height and (strict or not prefix):
            differences[name] = None
            if strict:
                failures.append("{}: {} rows instead of {}".format(name, table.height, base.height))
            continue
        worst = 0.0
        for col in range(table.width):
            worst = max(worst, _column_difference(table.get_col(col)[:rows], base.get_col(col)[:rows]))
        differences[name] = worst
        if worst > tol:
            failures.append("{}: relative difference {:.3g} above {:.3g}".format(name, worst, tol))
    passed = not failures
    logging.info("Compared {} tables: {}".format(len(differences), "passed" if passed else "failed"))
    return CompareResult(passed, differences, failures)
