"""
Scene configuration documents (JSON).

A document names the obstacles (curve descriptors ``{"kind": ..., params}``), the order in which
the periodic orbit visits them and the numerical parameters of a run::

    {
        "name": "twodisks",
        "obstacles": [{"kind": "circle", "radius": 0.5},
                      {"kind": "circle", "radius": 0.5, "center": [0, 2], "orientation": -1}],
        "k": 64,
        "order": 8,
        "twodisk": {"r": 0.5, "d": 1}
    }

Parsed configs are complete: every optional key carries its default, so ``parse(emit(config))``
gives the same config again.
"""

import copy
import hashlib
import json
import os
import typing as t

from orbitphase.bem.assembly import IncidentField, IncidentRegistry
from orbitphase.geometry.curves import CurveRegistry
from orbitphase.geometry.scene import Scene
from orbitphase.twodisk.oracles import TwoDiskConfig
from orbitphase.utils.errors import ConfigError
from orbitphase.utils.typecheck import *

SCENES_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "scenes"))  # type: str
""" Directory of the bundled scene configs """

TWODISK_SCHEME = Dict({
    "r": PositiveNumber() // Default(0.5) // Description("Radius of both disks"),
    "d": PositiveNumber() // Default(1.0) // Description("Distance of the closest points"),
})  # type: Dict

CONFIG_SCHEME = Dict({
    "name": Str() // Default("scene") // Description("Name of the scene"),
    "obstacles": List(Dict({"kind": Str()}, unknown_keys=True))
                 // Description("Curve descriptors of the obstacles"),
    "orbit": Optional(List(NaturalNumber())) // Default(None)
             // Description("Indices of the obstacles in the order of the orbit, default: listed order"),
    "k": PositiveNumber() // Default(64.0) // Description("Wavenumber"),
    "order": Int(range=range(2, 33)) // Default(8) // Description("Highest phase coefficient"),
    "separation_check": Bool() // Default(False) // Description("Require obstacle distances of at least 1/k"),
    "twodisk": Optional(Dict({}, unknown_keys=True)) // Default(None)
               // Description("Radius and gap of two equal disks, enables the two disk oracles"),
    "bem": Dict({
        "enabled": Bool() // Default(True) // Description("Run the boundary element parts of the report"),
        "points_per_wavelength": Optional(PositiveNumber()) // Default(None),
        "min_points": Optional(PositiveInt(lambda x: x >= 8)) // Default(None),
        "points": Optional(PositiveInt(lambda x: x >= 8)) // Default(None)
                  // Description("Explicit number of collocation points per obstacle"),
        "tol": Optional(PositiveNumber()) // Default(None) // Description("Power iteration tolerance"),
        "window": Optional(PositiveNumber()) // Default(None) // Description("Phase extraction half width"),
        "reflections": PositiveInt() // Default(8) // Description("Reflections of the scattering iteration"),
        "eigenvalues": NaturalNumber() // Default(0)
                       // Description("Number of leading eigenvalues of the cycle operator to report"),
        "incident": Dict({"kind": Str()}, unknown_keys=True) // Default({"kind": "plane_wave"})
                    // Description("Incident field of the scattering iteration"),
    }),
    "report": Dict({
        "orders": List(Int(range=range(1, 33))) // Default([2, 4, 6, 8])
                  // Description("Taylor orders compared in the convergence table"),
        "offsets": List(PositiveNumber()) // Default([0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1])
                   // Description("Distances from the orbit point of the convergence table"),
    }),
    "out": Optional(Str()) // Default(None) // Description("Output directory"),
}, unknown_keys=False)  # type: Dict
""" Scheme of the scene configs, unknown keys are rejected """


class SceneConfig:
    """
    A validated and completed scene configuration.
    """

    def __init__(self, data: t.Dict[str, t.Any], source: str = None):
        """
        :param data: parsed JSON document
        :param source: file name used in error messages
        :raises: ConfigError if the document doesn't match the scheme
        """
        self.source = source or "config"  # type: str
        res = verbose_isinstance(data, CONFIG_SCHEME, self.source)
        if not res:
            raise ConfigError(str(res))
        data = CONFIG_SCHEME.complete(copy.deepcopy(data))
        if len(data["obstacles"]) < 2:
            raise ConfigError("{}: at least two obstacles are needed".format(self.source))
        data["obstacles"] = [self._complete(CurveRegistry, obstacle, "{}['obstacles'][{}]".format(self.source, i))
                             for i, obstacle in enumerate(data["obstacles"])]
        data["bem"]["incident"] = self._complete(IncidentRegistry, data["bem"]["incident"],
                                                 "{}['bem']['incident']".format(self.source))
        if data["twodisk"] is not None:
            res = verbose_isinstance(data["twodisk"], TWODISK_SCHEME, self.source + "['twodisk']")
            if not res:
                raise ConfigError(str(res))
            data["twodisk"] = TWODISK_SCHEME.complete(data["twodisk"])
        if data["orbit"] is not None:
            orbit = data["orbit"]
            if len(orbit) < 2 or len(set(orbit)) != len(orbit) or max(orbit) >= len(data["obstacles"]):
                raise ConfigError("{}: the orbit {} has to list at least two different obstacle indices"
                                  .format(self.source, orbit))
        self.data = data  # type: t.Dict[str, t.Any]

    @staticmethod
    def _complete(registry, descriptor: t.Dict[str, t.Any], value_name: str) -> t.Dict[str, t.Any]:
        params = registry.validate(descriptor, value_name)
        ret = {"kind": descriptor["kind"]}
        ret.update(params)
        return ret

    @classmethod
    def parse(cls, text: str, source: str = None) -> 'SceneConfig':
        """
        :raises: ConfigError on malformed JSON or an invalid document
        """
        try:
            data = json.loads(text)
        except ValueError as err:
            raise ConfigError("{}: malformed JSON: {}".format(source or "config", err))
        return cls(data, source)

    @classmethod
    def load(cls, file_name: str) -> 'SceneConfig':
        """
        :raises: ConfigError on invalid content, OSError if the file can't be read
        """
        with open(file_name, "r") as f:
            return cls.parse(f.read(), file_name)

    @classmethod
    def bundled(cls, name: str) -> 'SceneConfig':
        """ One of the configs that come with the package, e.g. ``twodisks`` """
        return cls.load(bundled_config_path(name))

    def emit(self) -> str:
        """ The config as a formatted JSON document """
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def canonical(self) -> str:
        """ Compact JSON with sorted keys, the input of :meth:`digest` """
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """ SHA-256 hex digest of the canonical JSON """
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, SceneConfig) and self.data == other.data

    def __getitem__(self, key: str) -> t.Any:
        return self.data[key]

    def with_overrides(self, k: float = None, order: int = None, out: str = None, tol: float = None,
                       points: int = None) -> 'SceneConfig':
        """ A copy with the passed (non None) values replaced """
        data = copy.deepcopy(self.data)
        for key, value in (("k", k), ("order", order), ("out", out)):
            if value is not None:
                data[key] = value
        if tol is not None:
            data["bem"]["tol"] = tol
        if points is not None:
            data["bem"]["points"] = points
        return SceneConfig(data, self.source)

    @property
    def orbit_order(self) -> t.List[int]:
        return self.data["orbit"] if self.data["orbit"] is not None else list(range(len(self.data["obstacles"])))

    def build_scene(self) -> Scene:
        """
        :raises: ConfigError for invalid curve parameters or intersecting obstacles
        """
        curves = [CurveRegistry.create(self.data["obstacles"][i], "obstacle {}".format(i)) for i in self.orbit_order]
        return Scene(curves, self.data["k"], self.data["separation_check"])

    def twodisk_config(self) -> t.Optional[TwoDiskConfig]:
        if self.data["twodisk"] is None:
            return None
        return TwoDiskConfig(self.data["twodisk"]["r"], self.data["twodisk"]["d"])

    def incident(self) -> IncidentField:
        return IncidentRegistry.create(self.data["bem"]["incident"], "incident field")


def bundled_config_path(name: str) -> str:
    """
    :raises: ConfigError if there is no such bundled config
    """
    file_name = os.path.join(SCENES_DIR, name if name.endswith(".json") else name + ".json")
    if not os.path.isfile(file_name):
        raise ConfigError("No bundled config {!r}, available are {}".format(name, bundled_config_names()))
    return file_name


def bundled_config_names() -> t.List[str]:
    return sorted(name[:-5] for name in os.listdir(SCENES_DIR) if name.endswith(".json"))
