"""
Type schemes for the structures that come in from users: the settings YAML files and the
scene JSON configs.

A scheme is a tree of :class:`Type` objects that works with ``isinstance``::

    isinstance([0.0, 1.5], Tuple(FiniteNumber(), FiniteNumber()))

Types are annotated with ``//``::

    PositiveNumber() // Default(0.5) // Description("Radius of the disk")

:func:`verbose_isinstance` returns a message object that explains why a value doesn't match,
which is what config errors are built from.
"""
import math
import textwrap
import typing as t

import yaml

__all__ = [
    "Type",
    "ExactEither",
    "Int",
    "Number",
    "FiniteNumber",
    "PositiveNumber",
    "Bool",
    "Str",
    "NaturalNumber",
    "PositiveInt",

    "Info",
    "Description",
    "Default",

    "Optional",
    "List",
    "Tuple",
    "Dict",
    "verbose_isinstance",
    "typecheck",
]


class ConstraintError(ValueError):
    """ Raised when a scheme is built from something that isn't a type """
    pass


class InfoMsg:
    """
    Result of a type check: truthy on success, carries an error message otherwise.
    """

    def __init__(self, msg_or_bool: t.Union[str, bool]):
        self.success = msg_or_bool is True  # type: bool
        """ Did the value match? """
        self.msg = msg_or_bool if isinstance(msg_or_bool, str) else str(self.success)  # type: str
        """ Error message (or "True") """

    def __str__(self) -> str:
        return self.msg

    def __bool__(self) -> bool:
        return self.success


class Info:
    """
    Collects the information needed to produce a readable error message: the name of the
    checked value and the path into it (e.g. ``config['obstacles'][1]['radius']``).
    """

    def __init__(self, value_name: str = None, value=None, _path: str = ""):
        self.value_name = value_name  # type: t.Optional[str]
        """ Name of the checked value """
        self.path = _path  # type: str
        """ Path of the currently checked part inside the value """
        self.value = value
        """ The checked (root) value """
        self.has_value = value is not None  # type: bool

    def set_value(self, value):
        self.value = value
        self.has_value = True

    def add_to_name(self, app_str: str) -> 'Info':
        """ Info object for a part of the value, e.g. ``info.add_to_name("[0]")`` """
        return Info(self.value_name, self.value, self.path + app_str)

    def _location(self) -> str:
        name = self.value_name or "value"
        return name + self.path

    def errormsg(self, constraint: 'Type', value, msg: str = None) -> InfoMsg:
        app = ": " + msg if msg else ""
        return InfoMsg("{!r} is not of the expected type {} (at {}){}".format(value, constraint,
                                                                             self._location(), app))

    def errormsg_cond(self, cond: bool, constraint: 'Type', value, msg: str = None) -> InfoMsg:
        return InfoMsg(True) if cond else self.errormsg(constraint, value, msg)

    def errormsg_key_non_existent(self, constraint: 'Type', key) -> InfoMsg:
        return InfoMsg("Key {!r} is missing (at {})".format(key, self._location()))

    def errormsg_unexpected(self, key) -> InfoMsg:
        return InfoMsg("Unexpected key {!r} (at {})".format(key, self._location()))

    def wrap(self, result: bool) -> InfoMsg:
        return InfoMsg(result)


class NoInfo(Info):
    """
    Info object used when only the boolean result matters.
    """

    def __init__(self):
        super().__init__()
        self.has_value = True

    def set_value(self, value):
        pass

    def add_to_name(self, app_str: str) -> 'NoInfo':
        return self

    def errormsg(self, constraint: 'Type', value, msg: str = None) -> InfoMsg:
        return InfoMsg(False)

    def errormsg_cond(self, cond: bool, *args) -> InfoMsg:
        return InfoMsg(cond)

    def errormsg_key_non_existent(self, constraint: 'Type', key) -> InfoMsg:
        return InfoMsg(False)

    def errormsg_unexpected(self, key) -> InfoMsg:
        return InfoMsg(False)


class Description:
    """
    Description annotation::

        Int() // Description("Number of samples")
    """

    def __init__(self, description: str):
        typecheck(description, str)
        self.description = description

    def __str__(self) -> str:
        return self.description


class Default:
    """
    Default value annotation. Dict types collect the defaults of their keys,
    so ``Dict(...).get_default()`` yields a complete default document.
    """

    def __init__(self, default):
        self.default = default


class Type:
    """
    Base class of all scheme types.
    """

    def __init__(self):
        self.description = None  # type: t.Optional[str]
        """ Description of this type instance """
        self.default = None  # type: t.Optional[Default]
        """ Default value of this type instance """
        self.typecheck_default = True  # type: bool
        """ Check the default value against this type when it is set """

    def __instancecheck__(self, value, info: Info = None) -> InfoMsg:
        info = info or NoInfo()
        if not info.has_value:
            info.set_value(value)
        return self._instancecheck_impl(value, info)

    def check(self, value) -> bool:
        """ Does the passed value match this type? """
        return self.__instancecheck__(value).success

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        return info.wrap(False)

    def __str__(self) -> str:
        return "Type()"

    def __repr__(self) -> str:
        return str(self)

    @staticmethod
    def _validate_types(*types):
        for typ in types:
            if not isinstance(typ, Type):
                raise ConstraintError("{} is not an instance of a Type subclass".format(typ))

    def __floordiv__(self, other: t.Union[str, Description, Default]) -> 'Type':
        """
        Annotate with a description or default value.
        """
        if isinstance(other, (str, Description)):
            self.description = str(other)
            return self
        if isinstance(other, Default):
            self.default = other
            if self.typecheck_default:
                typecheck(other.default, self)
            return self
        raise ConstraintError("{!r} is neither a description nor a default value".format(other))

    def __eq__(self, other) -> bool:
        return type(other) == type(self) and self._eq_impl(other)

    def __hash__(self):
        return id(self)

    def _eq_impl(self, other: 'Type') -> bool:
        return False

    def get_default(self) -> t.Any:
        """ Default value of this type or None """
        return None if self.default is None else self.default.default

    def has_default(self) -> bool:
        return self.default is not None

    def get_default_yaml(self, indents: int = 0, indentation: int = 4, str_list: bool = False,
                         defaults=None, comment_out_defaults: bool = False) -> t.Union[str, t.List[str]]:
        """
        YAML representation of the default value (or the passed one), used to write
        commented settings files.
        """
        if defaults is None:
            defaults = self.get_default()
        i_str = " " * indents * indentation
        y_str = yaml.safe_dump(defaults, default_flow_style=None).strip()
        if y_str.endswith("\n..."):
            y_str = y_str[:-4]
        strs = [i_str + line for line in y_str.split("\n")]
        return strs if str_list else "\n".join(strs)


class ExactEither(Type):
    """
    Matches one of several exact values (e.g. the choices of an enumeration setting).
    """

    def __init__(self, *exp_values):
        super().__init__()
        self.exp_values = list(exp_values)

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        return info.errormsg_cond(value in self.exp_values, self, value)

    def __str__(self) -> str:
        return "ExactEither({})".format("|".join(repr(val) for val in self.exp_values))

    def _eq_impl(self, other: 'ExactEither') -> bool:
        return other.exp_values == self.exp_values


class Optional(Type):
    """
    The value is None or matches the passed type.
    """

    def __init__(self, other_type: Type):
        super().__init__()
        self._validate_types(other_type)
        self.other_type = other_type  # type: Type

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if value is None:
            return info.wrap(True)
        return self.other_type.__instancecheck__(value, info)

    def __str__(self) -> str:
        return "Optional({})".format(self.other_type)

    def _eq_impl(self, other: 'Optional') -> bool:
        return other.other_type == self.other_type


class List(Type):
    """
    A list whose elements match the passed type.
    """

    def __init__(self, elem_type: Type):
        super().__init__()
        self.elem_type = elem_type  # type: Type
        self._validate_types(self.elem_type)

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if not isinstance(value, list):
            return info.errormsg(self, value)
        for i, elem in enumerate(value):
            res = self.elem_type.__instancecheck__(elem, info.add_to_name("[{}]".format(i)))
            if not res:
                return res
        return info.wrap(True)

    def __str__(self) -> str:
        return "List({})".format(self.elem_type)

    def _eq_impl(self, other: 'List') -> bool:
        return other.elem_type == self.elem_type

    def get_default(self) -> t.Any:
        return self.default.default if self.has_default() else []


class Tuple(Type):
    """
    A fixed length list or tuple with per position types.
    """

    def __init__(self, *elem_types: Type):
        super().__init__()
        self._validate_types(*elem_types)
        self.elem_types = elem_types

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if not isinstance(value, (list, tuple)) or len(self.elem_types) != len(value):
            return info.errormsg(self, value)
        for i, (elem, typ) in enumerate(zip(value, self.elem_types)):
            res = typ.__instancecheck__(elem, info.add_to_name("[{}]".format(i)))
            if not res:
                return res
        return info.wrap(True)

    def __str__(self) -> str:
        return "Tuple({})".format(", ".join(str(typ) for typ in self.elem_types))

    def _eq_impl(self, other: 'Tuple') -> bool:
        return list(other.elem_types) == list(self.elem_types)


class Dict(Type):
    """
    A dictionary with known keys, each with its own type. Other keys are rejected unless
    unknown_keys is set.
    """

    def __init__(self, data: t.Dict[t.Any, Type] = None, unknown_keys: bool = False):
        """
        :param data: expected keys and the types of their values
        :param unknown_keys: accept (and don't check) keys that are not in data
        """
        super().__init__()
        self.data = data or {}  # type: t.Dict[t.Any, Type]
        self._validate_types(*self.data.values())
        self.unknown_keys = unknown_keys  # type: bool
        """ Accept keys that are not in data """

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if not isinstance(value, dict):
            return info.errormsg(self, value)
        for key, typ in self.data.items():
            sub_info = info.add_to_name("[{!r}]".format(key))
            if key in value:
                res = typ.__instancecheck__(value[key], sub_info)
                if not res:
                    return res
            elif not typ.has_default():
                return info.errormsg_key_non_existent(self, key)
        if not self.unknown_keys:
            for key in value:
                if key not in self.data:
                    return info.errormsg_unexpected(key)
        return info.wrap(True)

    def __str__(self) -> str:
        data_str = ", ".join("{!r}: {}".format(key, self.data[key]) for key in self.data)
        return "Dict({{{}}}, unknown_keys={})".format(data_str, self.unknown_keys)

    def __getitem__(self, key) -> Type:
        return self.data[key]

    def _eq_impl(self, other: 'Dict') -> bool:
        return self.data == other.data and self.unknown_keys == other.unknown_keys

    def get_default(self) -> dict:
        default_dict = dict(self.default.default) if self.default is not None else {}
        for key, typ in self.data.items():
            if key not in default_dict and (typ.has_default() or isinstance(typ, Dict)):
                default_dict[key] = typ.get_default()
        return default_dict

    def has_default(self) -> bool:
        if self.default is not None:
            return True
        return all(typ.has_default() for typ in self.data.values())

    def complete(self, value: dict) -> dict:
        """
        Returns a copy of the (valid) value with the defaults of all missing keys filled in,
        recursively for nested dictionaries.
        """
        ret = dict(value)
        for key, typ in self.data.items():
            if key not in ret:
                if typ.has_default() or isinstance(typ, Dict):
                    ret[key] = typ.get_default()
            elif isinstance(typ, Dict) and isinstance(ret[key], dict):
                ret[key] = typ.complete(ret[key])
        return ret

    def get_default_yaml(self, indents: int = 0, indentation: int = 4, str_list: bool = False,
                         defaults=None, comment_out_defaults: bool = False) -> t.Union[str, t.List[str]]:
        if not self.data:
            return ["{}"] if str_list else "{}"
        if defaults is None:
            defaults = self.get_default()
        # plain keys first, then the sections
        keys = sorted(k for k in self.data if not isinstance(self.data[k], Dict)) \
            + sorted(k for k in self.data if isinstance(self.data[k], Dict))
        strs = []
        for key in keys:
            typ = self.data[key]
            strs.append("")
            if typ.description is not None:
                strs.extend("# " + line for line in textwrap.wrap(typ.description, 100 - indents * indentation))
            if isinstance(typ, Dict) and typ.data:
                strs.append("{}:".format(key))
                strs.extend(typ.get_default_yaml(1, indentation, str_list=True, defaults=defaults.get(key),
                                                 comment_out_defaults=comment_out_defaults))
            else:
                value_yaml = typ.get_default_yaml(defaults=defaults.get(key))
                strs.append("{}{}: {}".format("#" if comment_out_defaults else "", key, value_yaml.strip()))
        i_str = " " * indents * indentation
        ret_strs = [i_str + line for line in strs]
        return ret_strs if str_list else "\n".join(ret_strs)


class Int(Type):
    """
    An int (not a bool) that optionally satisfies a predicate and lies in a range.
    """

    def __init__(self, constraint: t.Callable[[int], bool] = None, range: range = None):
        super().__init__()
        self.constraint = constraint
        self.range = range

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if not isinstance(value, int) or isinstance(value, bool) \
                or (self.constraint is not None and not self.constraint(value)) \
                or (self.range is not None and value not in self.range):
            return info.errormsg(self, value)
        return info.wrap(True)

    def __str__(self) -> str:
        arr = []
        if self.constraint is not None:
            arr.append("constraint=<function>")
        if self.range is not None:
            arr.append("range={}".format(self.range))
        return "Int({})".format(",".join(arr))

    def _eq_impl(self, other: 'Int') -> bool:
        return other.constraint == self.constraint and other.range == self.range


class Number(Type):
    """
    An int or float (bools excluded) that optionally satisfies a predicate.
    JSON and YAML documents write ``1`` and ``1.0`` interchangeably, so numeric
    parameters use this type instead of a plain float check.
    """

    def __init__(self, constraint: t.Callable[[float], bool] = None, constraint_description: str = None):
        super().__init__()
        self.constraint = constraint
        self.constraint_description = constraint_description

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return info.errormsg(self, value)
        if self.constraint is not None and not self.constraint(value):
            return info.errormsg(self, value, self.constraint_description)
        return info.wrap(True)

    def __str__(self) -> str:
        return "Number({})".format(self.constraint_description or "")

    def _eq_impl(self, other: 'Number') -> bool:
        return other.constraint == self.constraint


def FiniteNumber(constraint: t.Callable[[float], bool] = None, description: str = None) -> Number:
    """
    A finite int or float that satisfies the optional predicate.
    """
    if constraint is not None:
        return Number(lambda x: math.isfinite(x) and constraint(x), description or "finite")
    return Number(math.isfinite, "finite")


def PositiveNumber() -> Number:
    """ A finite number > 0 """
    return FiniteNumber(lambda x: x > 0, "finite and > 0")


class Str(Type):
    """
    A string that optionally satisfies a predicate.
    """

    def __init__(self, constraint: t.Callable[[str], bool] = None):
        super().__init__()
        self.constraint = constraint

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        if not isinstance(value, str) or (self.constraint is not None and not self.constraint(value)):
            return info.errormsg(self, value)
        return info.wrap(True)

    def __str__(self) -> str:
        return "Str()"

    def _eq_impl(self, other: 'Str') -> bool:
        return self.constraint == other.constraint


class Bool(Type):
    """
    True or False.
    """

    def _instancecheck_impl(self, value, info: Info) -> InfoMsg:
        return info.errormsg_cond(isinstance(value, bool), self, value)

    def __str__(self) -> str:
        return "Bool()"

    def _eq_impl(self, other: 'Bool') -> bool:
        return True


def NaturalNumber(constraint: t.Callable[[int], bool] = None) -> Int:
    """ An int >= 0 that satisfies the optional predicate """
    if constraint is not None:
        return Int(lambda x: x >= 0 and constraint(x))
    return Int(lambda x: x >= 0)


def PositiveInt(constraint: t.Callable[[int], bool] = None) -> Int:
    """ An int > 0 that satisfies the optional predicate """
    if constraint is not None:
        return Int(lambda x: x > 0 and constraint(x))
    return Int(lambda x: x > 0)


def verbose_isinstance(value, type: t.Union[Type, type], value_name: str = None) -> InfoMsg:
    """
    Checks the value against the type and explains a mismatch.

    :param value: checked value
    :param type: scheme type or native type
    :param value_name: name used in the error message
    :return: truthy message object
    """
    if isinstance(type, Type):
        return type.__instancecheck__(value, Info(value_name, value))
    return InfoMsg(isinstance(value, type))


def typecheck(value, type: t.Union[Type, type], value_name: str = None):
    """
    Like verbose_isinstance but raises a TypeError on a mismatch.
    """
    res = verbose_isinstance(value, type, value_name)
    if not res:
        raise TypeError(str(res))
