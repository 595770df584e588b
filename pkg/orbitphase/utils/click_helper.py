"""
This module simplifies the creation of click options from settings and type schemes.
"""

import typing as t

import click

from orbitphase.utils.settings import Settings
from orbitphase.utils.typecheck import *


def raw_type(type_scheme: Type) -> t.Union[type, click.ParamType]:
    """
    Returns the click parameter type that corresponds to the passed type scheme.

    :raises: ValueError if the type scheme isn't annotatable
    """
    if isinstance(type_scheme, ExactEither):
        return click.Choice([str(val) for val in type_scheme.exp_values])
    if isinstance(type_scheme, Int):
        return int
    if isinstance(type_scheme, Number):
        return float
    if isinstance(type_scheme, Str):
        return str
    if isinstance(type_scheme, Bool):
        return bool
    raise ValueError("type scheme {} is not annotatable".format(type_scheme))


def validate(type_scheme: Type) -> t.Callable[[click.Context, click.Parameter, t.Any], t.Any]:
    """
    Creates a click option validator function that can be passed to click via the callback
    parameter. ``None`` (option not passed) is always accepted.

    :param type_scheme: type scheme the validator validates against
    :return: the validator function
    """
    def func(ctx, param, value):
        if value is None:
            return value
        name = param.human_readable_name.replace("-", "")
        res = verbose_isinstance(value, type_scheme, value_name=name)
        if not res:
            raise click.BadParameter(str(res))
        return value
    return func


def type_scheme_option(option_name: str, type_scheme: Type, is_flag: bool = False,
                       help: str = None) -> t.Callable[[t.Callable], t.Callable]:
    """
    Is essentially a wrapper around click.option that works with type schemes.
    The option has no default, an option that isn't passed is ``None``, so that
    ``Settings().default(value, key)`` can fill in the configured value.

    :param option_name: name of the option
    :param type_scheme: type scheme to use
    :param is_flag: is this option a "--ABC/--no-ABC" like flag
    :param help: help text, default: description of the type scheme
    """
    option_args = {
        "default": None,
        "help": help or type_scheme.description,
    }
    if is_flag:
        return click.option("--{name}/--no-{name}".format(name=option_name), **option_args)
    used_type = raw_type(type_scheme)
    option_args["type"] = used_type
    if not isinstance(used_type, click.ParamType):
        option_args["callback"] = validate(type_scheme)
    return click.option("--{}".format(option_name), **option_args)


def settings_option(key: str, option_name: str = None, help: str = None) -> t.Callable[[t.Callable], t.Callable]:
    """
    Creates an option for the setting with the passed key (e.g. "bem/power_tol").

    :param key: settings key
    :param option_name: name of the option, default: last part of the key
    :param help: help text, default: description of the setting
    """
    type_scheme = Settings().get_type_scheme(key)
    return type_scheme_option(option_name or key.split("/")[-1], type_scheme,
                              is_flag=isinstance(type_scheme, Bool), help=help)


def cmd_option(*options: t.Callable[[t.Callable], t.Callable]) -> t.Callable[[t.Callable], t.Callable]:
    """
    Chains the passed option decorators.
    """
    def func(f: t.Callable) -> t.Callable:
        for option in reversed(options):
            f = option(f)
        return f
    return func
