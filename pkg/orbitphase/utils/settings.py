import copy
import logging
import os
import typing as t

import click
import yaml

from orbitphase.utils.typecheck import *
from orbitphase.utils.util import recursive_exec_for_leafs, Singleton


class SettingsError(ValueError):
    """ Error raised if something with the settings goes wrong """
    pass


def Tolerance(default: float, description: str) -> Type:
    """ A positive finite number with the passed default and description """
    return PositiveNumber() // Default(default) // Description(description)


class Settings(metaclass=Singleton):
    """
    Manages the numerical settings (tolerances, iteration caps, grid sizes).
    The settings keys and sub keys are combined by a slash, e.g. "orbit/max_iterations".

    Settings are loaded from ``orbitphase.yaml`` in the current working directory and
    from the application directory if these files exist. A commented file with all
    defaults is produced by ``orbitphase init settings``.
    """

    config_file_name = "orbitphase.yaml"  # type: str
    """ Default name of the configuration files """
    type_scheme = Dict({
        "settings": Str() // Description("Additional settings file") // Default(""),
        "log_level": ExactEither("debug", "info", "warn", "error", "quiet") // Default("info")
                     // Description("Logging level"),
        "curves": Dict({
            "max_jet_order": PositiveInt() // Default(32)
                             // Description("Maximum order of the Taylor jets of the boundary curves"),
            "positivity_grid": PositiveInt() // Default(1024)
                               // Description("Grid size for checking the radius of radial fourier curves"),
        }),
        "scene": Dict({
            "separation_grid": PositiveInt() // Default(256)
                               // Description("Grid size (per curve) for checking that the obstacles are disjoint"),
        }),
        "orbit": Dict({
            "samples": PositiveInt() // Default(100)
                       // Description("Equispaced samples per obstacle used to initialize the orbit search"),
            "max_iterations": PositiveInt() // Default(500) // Description("Maximum number of Newton steps"),
            "gradient_tol": Tolerance(1e-13, "Convergence when |gradient| <= tol * max(1, length)"),
            "min_eigenvalue": Tolerance(1e-8, "Smallest eigenvalue of the shifted Hessian"),
        }),
        "series": Dict({
            "newton_max_iterations": PositiveInt() // Default(100)
                                     // Description("Maximum Newton steps for the second order system"),
            "consistency_tol": Tolerance(1e-9, "Allowed relative mismatch of the two first order phase coefficients"),
            "max_condition": Tolerance(1e14, "Condition number above which a linear stage counts as singular"),
            "trust_radius": Tolerance(0.15, "Distance from the orbit point up to which the phase series is trusted"),
        }),
        "twodisk": Dict({
            "grid_extent": Tolerance(0.2, "The stationary point map is solved on |tau| <= grid_extent"),
            "grid_points": PositiveInt(lambda x: x >= 5) // Default(801)
                           // Description("Number of grid points for the stationary point map"),
            "tol": Tolerance(1e-12, "Residual tolerance of the equal angle equation"),
            "max_sweeps": PositiveInt() // Default(200) // Description("Maximum number of Newton sweeps"),
            "max_reflections": PositiveInt() // Default(10)
                               // Description("Number of reflection cycles summed for the geometric phase"),
        }),
        "bem": Dict({
            "points_per_wavelength": PositiveNumber() // Default(10)
                                     // Description("Collocation points per wavelength of arc length"),
            "min_points": PositiveInt(lambda x: x >= 8) // Default(64)
                          // Description("Minimum number of collocation points per obstacle"),
            "gauss_nodes": PositiveInt() // Default(8) // Description("Gauss-Legendre nodes per panel"),
            "chunk_size": PositiveInt() // Default(64) // Description("Matrix rows assembled at once"),
            "quadrature_tol": Tolerance(1e-8, "Allowed change of sampled matrix entries under panel refinement"),
            "check_quadrature": Bool() // Default(True)
                                // Description("Check sampled matrix rows against refined panels"),
            "max_condition": Tolerance(1e12, "Condition number of a diagonal block that counts as resonant"),
            "power_tol": Tolerance(1e-10, "Convergence tolerance of the power iteration"),
            "power_max_iterations": PositiveInt() // Default(500)
                                    // Description("Maximum number of power iterations"),
            "window": Tolerance(0.15, "Half width of the phase extraction window around the orbit point"),
            "amplitude_floor": Tolerance(1e-8, "Relative amplitude below which the phase extraction stops"),
        }),
        "report": Dict({
            "out": Str() // Default("out") // Description("Default output directory"),
        }),
    })  # type: Dict
    """ Type scheme of the settings """

    def __init__(self):
        """
        Initializes a Settings singleton object with the default settings.

        :raises: SettingsError if the defaults aren't in the format described via the type_scheme
        """
        self.prefs = copy.deepcopy(self.type_scheme.get_default())  # type: t.Dict[str, t.Any]
        """ The current settings """
        res = self._validate_settings_dict(self.prefs, "default settings")
        if not res:
            raise SettingsError(str(res))
        self._setup()

    def load_files(self):
        """ Loads the configuration files from the config directory and the current directory """
        conf = os.path.join(click.get_app_dir("orbitphase"), "config.yaml")
        if os.path.isfile(conf):
            self.load_file(conf)
        if os.path.isfile(self.config_file_name):
            self.load_file(self.config_file_name)
        self._setup()

    def _setup(self):
        """
        Applies the logging level.
        """
        log_level = self["log_level"]
        logger = logging.getLogger()
        logger.disabled = log_level == "quiet"
        mapping = {
            "debug": logging.DEBUG,
            "info": logging.INFO,
            "warn": logging.WARNING,
            "error": logging.ERROR,
            "quiet": logging.ERROR
        }
        logger.setLevel(mapping[log_level])

    def reset(self):
        """
        Resets the current settings to the defaults.
        """
        self.prefs = copy.deepcopy(self.type_scheme.get_default())
        self._setup()

    def _validate_settings_dict(self, data: t.Dict[str, t.Any], description: str = None):
        """
        Check whether the passed dictionary matches the settings type scheme.

        :return: True like object if valid, else string like object which is the error message
        """
        return verbose_isinstance(data, self.type_scheme, description or "settings")

    def load_file(self, file: str):
        """
        Loads the settings from a YAML file, keys missing in the file keep their current value.

        :param file: path to the file
        :raises: SettingsError if the settings file is incorrect or doesn't exist
        """
        try:
            with open(file, 'r') as stream:
                data = yaml.safe_load(stream.read())
        except (yaml.YAMLError, IOError) as err:
            raise SettingsError(str(err))
        self.load_from_dict(data or {}, "settings from file '{}'".format(file))

    def load_from_dict(self, config_dict: t.Dict[str, t.Any], description: str = None):
        """
        Sets all leaves of the passed (possibly partial) settings dictionary.

        :param config_dict: passed settings dictionary
        :param description: name of the source used in error messages
        :raises: SettingsError if the resulting settings are invalid
        """
        tmp = copy.deepcopy(self.prefs)
        settings_file = None

        def func(key, path, value):
            nonlocal settings_file
            if not self.validate_key_path(path):
                self.prefs = tmp
                raise SettingsError("No such setting {}".format("/".join(path)))
            if value is None and isinstance(self.get_type_scheme(path), Dict):
                # section with all entries commented out
                return
            if path == ["settings"]:
                settings_file = value
            self._set(path, value)

        recursive_exec_for_leafs(config_dict, func)
        res = self._validate_settings_dict(self.prefs, description or "settings dict")
        if not res:
            self.prefs = tmp
            raise SettingsError(str(res))
        if settings_file:
            self.load_file(settings_file)
        self._setup()

    def get(self, key: t.Union[str, t.List[str]]) -> t.Any:
        """
        Get the setting with the given key.

        :param key: name of the setting
        :return: value of the setting
        :raises: SettingsError if the setting doesn't exist
        """
        path = key.split("/") if isinstance(key, str) else key
        if not self.validate_key_path(path):
            raise SettingsError("No such setting {}".format(key))
        data = self.prefs
        for sub in path:
            data = data[sub]
        return data

    def __getitem__(self, key: str) -> t.Any:
        """
        Alias for self.get(self, key).
        """
        return self.get(key)

    def _set(self, path: t.List[str], value):
        tmp_pref = self.prefs
        for key in path[0:-1]:
            tmp_pref = tmp_pref[key]
        tmp_pref[path[-1]] = value

    def set(self, key: str, value, validate: bool = True, setup: bool = True):
        """
        Sets the setting key to the passed new value

        :param key: settings key
        :param value: new value
        :param validate: validate after the setting operation
        :param setup: call the setup function
        :raises: SettingsError if the setting isn't valid
        """
        path = key.split("/")
        if not self.validate_key_path(path):
            raise SettingsError("No such setting {}".format(key))
        tmp = copy.deepcopy(self.prefs)
        self._set(path, value)
        if validate:
            res = self._validate_settings_dict(self.prefs, "settings with new setting ({}={!r})".format(key, value))
            if not res:
                self.prefs = tmp
                raise SettingsError(str(res))
        if path == ["settings"] and value:
            self.load_file(value)
        if setup:
            self._setup()

    def __setitem__(self, key: str, value):
        """
        Alias for self.set(key, value).
        """
        self.set(key, value)

    def validate_key_path(self, path: t.List[str]) -> bool:
        """
        Is the path (list of sub keys) a valid path into the settings tree?
        """
        tmp = self.prefs
        for item in path:
            if not isinstance(tmp, dict) or item not in tmp:
                return False
            tmp = tmp[item]
        return True

    def has_key(self, key: str) -> bool:
        """ Does the passed key exist? """
        return self.validate_key_path(key.split("/"))

    def get_type_scheme(self, key: t.Union[str, t.List[str]]) -> Type:
        """
        Returns the type scheme of the given key.

        :raises: SettingsError if the setting with the given key doesn't exist
        """
        path = key.split("/") if isinstance(key, str) else key
        if not self.validate_key_path(path):
            raise SettingsError("Setting {} doesn't exist".format("/".join(path)))
        tmp_typ = self.type_scheme
        for subkey in path:
            tmp_typ = tmp_typ[subkey]
        return tmp_typ

    def default(self, value: t.Optional[t.Any], key: str):
        """
        Returns the passed value if it isn't None else the settings value under the passed key.

        :param value: passed value
        :param key: passed settings key
        """
        if value is None:
            return self[key]
        typecheck(value, self.get_type_scheme(key), key)
        return value

    def store_into_file(self, file_name: str, comment_out_defaults: bool = False):
        """
        Stores the current settings into a yaml file with comments.

        :param file_name: name of the resulting file
        :param comment_out_defaults: comment out the default values
        """
        with open(file_name, "w") as f:
            print(self.type_scheme.get_default_yaml(defaults=self.prefs,
                                                    comment_out_defaults=comment_out_defaults), file=f)

    def tolerances(self) -> t.Dict[str, t.Any]:
        """ The numerical sections of the settings, as recorded in report manifests """
        return {key: copy.deepcopy(value) for key, value in self.prefs.items()
                if isinstance(value, dict) and key != "report"}
