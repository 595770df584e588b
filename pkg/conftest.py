import pathlib


def pytest_ignore_collect(collection_path: pathlib.Path):
    return "examples" in collection_path.parts or collection_path.name in ("setup.py", "conftest.py")
