"""
Error classes shared by the numerical modules.

Config problems are ``ConfigError`` (a ``ValueError``), everything that goes wrong while
computing is a ``NumericalError``. The command line interface maps them to exit codes.
"""

import logging
import typing as t


class ConfigError(ValueError):
    """ Invalid scene configuration or curve parameters """
    pass


class NumericalError(Exception):
    """
    A numerical stage failed. Carries the stage name and a dictionary of diagnostics
    that are logged and written into the summary of the failed run.
    """

    stage = "numerics"  # type: str
    """ Name of the failing stage, set by the subclasses """

    def __init__(self, message: str, diagnostics: t.Dict[str, t.Any] = None):
        super().__init__(message)
        self.message = message  # type: str
        self.diagnostics = diagnostics or {}  # type: t.Dict[str, t.Any]
        """ Values that explain the failure, e.g. iteration counts or residuals """

    def log(self):
        """ Log this error with its diagnostics """
        logging.error("{} failed: {}".format(self.stage, self.message))
        for key in sorted(self.diagnostics):
            logging.error("    {}: {}".format(key, self.diagnostics[key]))


class SpecfunError(NumericalError, ValueError):
    """ Special function evaluated outside of its domain """
    stage = "specfun"
