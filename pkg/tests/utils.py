import copy
import json
import os
import shlex
import sys
import traceback
from typing import Dict, Union, NamedTuple, Any

import yaml

from click.testing import CliRunner

sys.path.append(os.path.dirname(__file__) + "/..")

from orbitphase.utils.settings import Settings

from orbitphase.scripts.cli import cli


class Result(NamedTuple):
    out: str
    ret_code: int
    file_contents: Dict[str, str]
    """ Contents of the files created by the run, keyed by their path relative to the working directory """
    json_contents: Dict[str, Any]
    """ Parsed JSON files of the run """


def _store_files(files: Dict[str, Union[dict, list, str]] = None, d: str = "."):
    if files is not None:
        for file, content in files.items():
            file = os.path.join(d, file)
            os.makedirs(os.path.dirname(file) or ".", exist_ok=True)
            with open(file, "w") as f:
                if isinstance(content, str):
                    f.write(content)
                elif file.endswith(".json"):
                    json.dump(content, f)
                else:
                    yaml.dump(content, f)


def _load_files(files: Dict[str, Any], d: str = ".") -> Dict[str, str]:
    file_contents = {}
    for root, directories, fs in os.walk(d):
        for f in fs:
            fd = os.path.relpath(os.path.join(root, f), d)
            if f != "settings.yaml" and (files is None or fd not in files):
                with open(os.path.join(root, f)) as fs_:
                    file_contents[fd] = fs_.read()
    return file_contents


def run_orbitphase(args: str, settings: dict = None, files: Dict[str, Union[dict, list, str]] = None,
                   expect_success: bool = True, raise_exc: bool = False, with_settings: bool = True) -> Result:
    """
    Run orbitphase with the passed arguments in an isolated directory

    :param args: arguments for orbitphase
    :param settings: settings dictionary, stored in a file called `settings.yaml` and appended to the arguments
    :param files: {file name: content as string or dictionary that is converted into JSON (.json) or YAML first}
    :param expect_success: expect a zero return code
    :param raise_exc: raise unexpected exceptions of the run
    :param with_settings: pass the settings file (not possible for commands without the option)
    :return: result of the call
    """
    runner = CliRunner()
    prior = copy.deepcopy(Settings().prefs)
    set = copy.deepcopy(Settings().type_scheme.get_default())
    for key, value in (settings or {}).items():
        if isinstance(value, dict):
            set[key].update(value)
        else:
            set[key] = value
    with runner.isolated_filesystem():
        _store_files(files)
        with open("settings.yaml", "w") as f:
            yaml.dump(set, f)
        cmd = args + (" --settings settings.yaml" if with_settings else "")
        result = runner.invoke(cli, shlex.split(cmd), catch_exceptions=True)
        file_contents = _load_files(files)
        json_contents = {}
        for name, content in file_contents.items():
            if name.endswith(".json"):
                try:
                    json_contents[name] = json.loads(content)
                except ValueError:
                    pass
        ret = Result(result.output.strip(), result.exit_code, file_contents, json_contents)
    Settings().load_from_dict(prior)
    if result.exception and not isinstance(result.exception, SystemExit):
        print("".join(traceback.format_exception(None, result.exception, result.exception.__traceback__)))
        if raise_exc:
            raise result.exception
    if expect_success:
        assert result.exit_code == 0, repr(ret)
    return ret
