import logging
import typing as t

from orbitphase.utils.errors import ConfigError
from orbitphase.utils.typecheck import *
from orbitphase.utils.util import join_strs


class AbstractRegistry:
    """
    An abstract registry of classes that are created from flat descriptors of the form
    ``{"kind": name, param: value, ...}``.

    Each registered class has a parameter type scheme, the constructor of the class gets
    the validated parameters (with defaults filled in) as keyword arguments.

    Important: Be sure to have "registry = {}" and "param_types = {}" lines in your extending class.
    """

    registry = {}  # type: t.Dict[str, type]
    """ Registered classes (indexed by their name) """
    param_types = {}  # type: t.Dict[str, Dict]
    """ Parameter type schemes of the registered classes """
    kind_key = "kind"  # type: str
    """ Descriptor key that names the registered class """
    plugin_synonym = ("plugin", "plugins")  # type: t.Tuple[str, str]
    """ Singular and plural version of the word that is used in error messages """

    @classmethod
    def register(cls, name: str, klass: type, param_type: Dict):
        """
        Registers a new class.

        :param name: common name of the registered class
        :param klass: actual class
        :param param_type: type scheme of the parameters
        """
        if klass.__doc__ is None:
            logging.error("Class level documentation for {} is missing".format(klass.__name__))
        klass.kind = name
        cls.registry[name] = klass
        cls.param_types[name] = param_type

    @classmethod
    def names(cls) -> t.List[str]:
        """ Sorted names of the registered classes """
        return sorted(cls.registry.keys())

    @classmethod
    def get_class(cls, name: str) -> type:
        """
        :raises: ConfigError if there isn't such a class
        """
        if name not in cls.registry:
            raise ConfigError("No such {} {!r}, possible {} are {}".format(
                cls.plugin_synonym[0], name, cls.plugin_synonym[1], join_strs(map(repr, cls.names()), "or")))
        return cls.registry[name]

    @classmethod
    def validate(cls, descriptor: t.Dict[str, t.Any], value_name: str = None) -> t.Dict[str, t.Any]:
        """
        Checks a descriptor and returns its parameters (without the kind key) with all defaults filled in.

        :param descriptor: dictionary with the kind key and the parameters
        :param value_name: name used in error messages
        :raises: ConfigError if the descriptor is invalid
        """
        value_name = value_name or cls.plugin_synonym[0]
        res = verbose_isinstance(descriptor, Dict({cls.kind_key: Str()}, unknown_keys=True), value_name)
        if not res:
            raise ConfigError(str(res))
        name = descriptor[cls.kind_key]
        cls.get_class(name)
        param_type = cls.param_types[name]
        params = {key: value for key, value in descriptor.items() if key != cls.kind_key}
        res = verbose_isinstance(params, param_type, value_name)
        if not res:
            raise ConfigError(str(res))
        return param_type.complete(params)

    @classmethod
    def create(cls, descriptor: t.Dict[str, t.Any], value_name: str = None) -> t.Any:
        """
        Creates an object of the class named in the descriptor.

        :raises: ConfigError if the descriptor is invalid
        """
        params = cls.validate(descriptor, value_name)
        return cls.registry[descriptor[cls.kind_key]](**params)


def register(registry: type, name: str, param_type: Dict):
    """
    Class decorator that calls the register method for the decorated class.

    :param registry: the registry class to register the class in
    :param name: common name of the registered class
    :param param_type: type scheme of the parameters
    """
    assert issubclass(registry, AbstractRegistry)

    def dec(klass):
        registry.register(name, klass, param_type)
        return klass

    return dec
