import locale
import logging
import sys
import typing as t
from enum import Enum

import click

import orbitphase.scripts.version
from orbitphase.report.config import SceneConfig, bundled_config_names, bundled_config_path
from orbitphase.report.report import (SUBCOMMANDS, ReportMismatchError, build_report, compare_report, dump_json,
                                      write_failure)
from orbitphase.utils.click_helper import cmd_option, settings_option, type_scheme_option
from orbitphase.utils.errors import ConfigError, NumericalError
from orbitphase.utils.settings import Settings, SettingsError
from orbitphase.utils.typecheck import *
from orbitphase.utils.util import atomic_write

Settings().load_files()


class ErrorCode(Enum):
    NO_ERROR = 0
    CONFIG_ERROR = 2
    NUMERICAL_ERROR = 3
    IO_ERROR = 4


command_docs = {
    "orbit": "Find the periodic orbit of a scene",
    "fseries": "Taylor coefficients of the leg distances around the orbit",
    "phase": "Taylor coefficients of the limiting phase and of the chi maps",
    "twodisk": "Closed form and numerical two disk results",
    "mode": "Dominant mode of the reflection cycle and its numerical phase",
    "iterate": "Successive reflections of an incident field",
    "report": "All tables of a scene, including the phase convergence tables",
    "compare": "Compare a report directory with a baseline",
    "init": "Helper commands to initialize files (settings, scene configs)",
    "version": "Print the current version ({})".format(orbitphase.scripts.version.version),
}  # type: t.Dict[str, str]

common_options = [
    settings_option("settings", help="Additional settings file"),
    settings_option("log_level", help="Logging level"),
]

data_options = [
    click.option("--config", "config", type=click.Path(exists=False), required=True,
                 help="Scene config file (JSON)"),
    type_scheme_option("out", Str(), help="Output directory, default: the config's out or the report/out setting"),
    type_scheme_option("order", Int(range=range(2, 33)), help="Highest phase coefficient"),
    type_scheme_option("k", PositiveNumber(), help="Wavenumber"),
    type_scheme_option("tol", PositiveNumber(), help="Power iteration tolerance"),
]


def _apply_common(settings: str = None, log_level: str = None):
    if settings:
        Settings()["settings"] = settings
    if log_level:
        Settings()["log_level"] = log_level


def run_guarded(func: t.Callable, *args, **kwargs) -> t.Any:
    """
    Calls the function and exits with the error code that belongs to the raised error.
    """
    try:
        return func(*args, **kwargs)
    except NumericalError as err:
        err.log()
        sys.exit(ErrorCode.NUMERICAL_ERROR.value)
    except ReportMismatchError as err:
        logging.error(str(err))
        sys.exit(ErrorCode.NUMERICAL_ERROR.value)
    except (ConfigError, SettingsError) as err:
        logging.error(str(err))
        sys.exit(ErrorCode.CONFIG_ERROR.value)
    except OSError as err:
        logging.error(str(err))
        sys.exit(ErrorCode.IO_ERROR.value)


@click.group(epilog="""
orbitphase (version {})

Computes periodic ray orbits between obstacles in the plane, the Taylor expansion of the
limiting phase along the orbit and its numerical counterpart from a boundary element
discretisation of the multiple scattering problem.

Settings are read from `{}` in the current directory.
""".format(orbitphase.scripts.version.version, Settings.config_file_name))
def cli():
    pass


def create_data_command(name: str):
    """ Registers the command that runs the stages of the subcommand ``name`` """

    @cli.command(name=name, short_help=command_docs[name])
    @cmd_option(*data_options)
    @cmd_option(*common_options)
    def func(config: str, out: str = None, order: int = None, k: float = None, tol: float = None,
             settings: str = None, log_level: str = None):
        run_guarded(_apply_common, settings, log_level)
        run_guarded(orbitphase__data, name, config, out=out, order=order, k=k, tol=tol)

    func.__doc__ = command_docs[name]
    return func


def orbitphase__data(name: str, config: str, out: str = None, order: int = None, k: float = None,
                     tol: float = None):
    """
    Builds the report of the subcommand, writes it and prints the summary.
    Nothing is written if the config is invalid. If a numerical stage fails, only a summary with
    the failure diagnostics is written and the error is raised again.
    """
    scene_config = SceneConfig.load(config).with_overrides(k=k, order=order, out=out, tol=tol)
    out_dir = scene_config["out"] or Settings()["report/out"]
    try:
        report = build_report(scene_config, name)
    except NumericalError as err:
        write_failure(out_dir, scene_config, name, err)
        raise
    report.write(out_dir)
    click.echo(dump_json(report.summary), nl=False)


for _name in SUBCOMMANDS:
    create_data_command(_name)


@cli.command(short_help=command_docs["compare"])
@click.argument("report_dir", type=click.Path(exists=False))
@click.argument("baseline_dir", type=click.Path(exists=False))
@click.option("--rtol", type=float, default=None, help="Relative tolerance for all tables")
@click.option("--strict/--no-strict", default=True,
              help="Require the same config and table shapes (default), else compare common rows")
@cmd_option(*common_options)
def compare(report_dir: str, baseline_dir: str, rtol: float, strict: bool, settings: str = None,
            log_level: str = None):
    run_guarded(_apply_common, settings, log_level)
    if not run_guarded(orbitphase__compare, report_dir, baseline_dir, rtol, strict):
        sys.exit(ErrorCode.NUMERICAL_ERROR.value)


def orbitphase__compare(report_dir: str, baseline_dir: str, rtol: float = None, strict: bool = True) -> bool:
    result = compare_report(report_dir, baseline_dir, rtol, strict)
    click.echo(dump_json(result.to_dict()), nl=False)
    for failure in result.failures:
        logging.error(failure)
    return result.passed


@cli.group(short_help=command_docs["init"])
def init():
    pass


@init.command(short_help="Create a settings file with all default settings commented out")
@click.argument("file", type=click.Path(exists=False), default=Settings.config_file_name)
@cmd_option(*common_options)
def settings(file: str, **kwargs):
    run_guarded(_apply_common, kwargs.get("settings"), kwargs.get("log_level"))
    run_guarded(orbitphase__init__settings, file)


def orbitphase__init__settings(file: str):
    Settings().store_into_file(file, comment_out_defaults=True)


@init.command(short_help="Copy a bundled scene config ({})".format(", ".join(bundled_config_names())))
@click.argument("file", type=click.Path(exists=False), default=None, required=False)
@click.option("--name", type=click.Choice(bundled_config_names()), default="twodisks",
              help="Name of the bundled config")
@cmd_option(*common_options)
def config(file: str, name: str, **kwargs):
    run_guarded(_apply_common, kwargs.get("settings"), kwargs.get("log_level"))
    run_guarded(orbitphase__init__config, name, file)


def orbitphase__init__config(name: str, file: str = None):
    """ Writes the completed bundled config ``name`` into the file (default: ``<name>.json``) """
    file = file or name + ".json"
    atomic_write(file, SceneConfig.load(bundled_config_path(name)).emit())
    logging.info("Wrote {}".format(file))


@cli.command(short_help=command_docs["version"])
def version():
    click.echo(orbitphase.scripts.version.version)


def cli_with_error_catching():
    """
    Process the command line arguments and catch (some) errors.
    """
    try:
        locale.setlocale(locale.LC_ALL, "en_US.UTF-8")
    except locale.Error:
        pass
    try:
        cli()
    except TypeError as err:
        logging.error(err)
        import traceback
        logging.debug("".join(traceback.format_exception(None, err, err.__traceback__)))
        sys.exit(1)


if __name__ == "__main__":
    cli_with_error_catching()
