"""
Utility functions and classes that don't depend on the rest of the orbitphase code base.
"""

import logging
import os
import sys
import tempfile
import typing as t

from rainbow_logging_handler import RainbowLoggingHandler


def recursive_exec_for_leafs(data: dict, func, _path_prep: t.List[str] = None):
    """
    Executes the function for every leaf key (a key without any sub keys) of the data dict tree.

    :param data: dict tree
    :param func: function that gets passed the leaf key, the key path and the actual value
    """
    if not isinstance(data, dict):
        return
    _path_prep = _path_prep or []
    for subkey, value in data.items():
        if type(value) is dict:
            recursive_exec_for_leafs(value, func, _path_prep=_path_prep + [subkey])
        else:
            func(subkey, _path_prep + [subkey], value)


def join_strs(strs: t.List[str], last_word: str = "and") -> str:
    """
    Joins the passed strings with ", " except for the last two that are separated by the passed word.

    >>> join_strs(["circle", "ellipse", "radial_fourier"])
    'circle, ellipse and radial_fourier'
    """
    strs = list(strs)
    if len(strs) <= 1:
        return "".join(strs)
    return " {} ".format(last_word).join([", ".join(strs[0:-1]), strs[-1]])


def atomic_write(file_name: str, content: str):
    """
    Writes the content into a temporary file next to the target and renames it,
    so that readers never see a partially written file.

    :param file_name: target file
    :param content: text to write
    """
    directory = os.path.dirname(os.path.abspath(file_name))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(file_name))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(content)
        os.replace(tmp_name, file_name)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise


class Singleton(type):
    """
    Singleton meta class.
    @see http://stackoverflow.com/a/6798042
    """
    _instances = {}

    def __call__(cls, *args, **kwargs):
        if cls not in cls._instances:
            cls._instances[cls] = super(Singleton, cls).__call__(*args, **kwargs)
        return cls._instances[cls]


# setup `RainbowLoggingHandler`
handler = RainbowLoggingHandler(sys.stderr, color_funcName=('black', 'yellow', True))
""" Colored logging handler that is used for the root logger """
handler.setFormatter(logging.Formatter("[%(asctime)s] %(message)s"))
logging.getLogger().addHandler(handler)
