"""
Tests for the scene configs, the report tables and the report comparison
"""
import cmath
import hashlib
import json
import math
import os
import shutil

import numpy as np
import pytest

from orbitphase.geometry.curves import Circle
from orbitphase.report.config import SceneConfig, bundled_config_names
from orbitphase.report.report import build_report, compare_report, format_cell, write_failure, \
    ReportMismatchError, SUBCOMMANDS
from orbitphase.series.phase_solver import PhaseSolverError
from orbitphase.utils.errors import ConfigError

MINIMAL = {"obstacles": [{"kind": "circle", "radius": 0.5},
                         {"kind": "circle", "radius": 0.5, "center": [0, 2], "orientation": -1}]}


def small_twodisks(**overrides) -> SceneConfig:
    config = SceneConfig.bundled("twodisks").with_overrides(k=8.0, order=6, points=64)
    return config.with_overrides(**overrides) if overrides else config


@pytest.fixture(scope="module")
def full_report():
    return build_report(small_twodisks(), "report")


def test_minimal_config_is_completed():
    config = SceneConfig(MINIMAL)
    assert config["k"] == 64.0
    assert config["order"] == 8
    assert config["bem"]["incident"] == {"kind": "plane_wave", "direction": [1.0, 0.0]}
    assert config["obstacles"][0]["orientation"] == 1
    assert config.orbit_order == [0, 1]


@pytest.mark.parametrize("name", bundled_config_names())
def test_emit_parse(name):
    config = SceneConfig.bundled(name)
    again = SceneConfig.parse(config.emit())
    assert again == config
    assert again.digest() == config.digest()
    assert len(config.digest()) == 64


def test_bundled_names():
    assert bundled_config_names() == ["ellipse_pair", "three_obstacles", "twodisks"]
    with pytest.raises(ConfigError):
        SceneConfig.bundled("four_disks")


@pytest.mark.parametrize("data", [
    dict(MINIMAL, colour="red"),
    {"obstacles": MINIMAL["obstacles"][:1]},
    dict(MINIMAL, order=1),
    dict(MINIMAL, k=-1),
    dict(MINIMAL, orbit=[0, 0]),
    dict(MINIMAL, orbit=[0, 5]),
    dict(MINIMAL, twodisk={"r": 0.5, "gap": 1}),
    {"obstacles": [{"kind": "square"}, {"kind": "circle", "radius": 1}]},
    dict(MINIMAL, bem={"incident": {"kind": "laser"}}),
])
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        SceneConfig(data)


def test_malformed_json():
    with pytest.raises(ConfigError):
        SceneConfig.parse("{\"obstacles\": [", "broken.json")


def test_overrides():
    config = SceneConfig.bundled("twodisks")
    changed = config.with_overrides(k=32, order=4, tol=1e-8, points=100, out="dir")
    assert (changed["k"], changed["order"], changed["out"]) == (32, 4, "dir")
    assert changed["bem"]["tol"] == 1e-8 and changed["bem"]["points"] == 100
    assert changed.digest() != config.digest()
    assert config.with_overrides() == config
    with pytest.raises(ConfigError):
        config.with_overrides(order=40)


def test_orbit_order():
    config = SceneConfig(dict(MINIMAL, orbit=[1, 0]))
    scene = config.build_scene()
    assert scene.obstacles[0].center[1] == 2.0
    assert isinstance(scene.obstacles[1], Circle)


def test_single_stage_reports():
    config = small_twodisks()
    assert set(build_report(config, "orbit").tables) == {"orbit"}
    assert set(build_report(config, "fseries").tables) == {"orbit", "fseries_leg0", "fseries_leg1"}
    phase = build_report(config, "phase")
    assert set(phase.tables) == {"orbit", "phase", "chi"}
    assert phase.tables["phase"].headers == ["i", "c_0", "c_1"]
    assert phase.tables["phase"].height == 7
    assert float(phase.tables["phase"][2][1]) == pytest.approx(math.sqrt(2) * math.pi ** 2, rel=1e-9)
    assert set(build_report(config, "twodisk").tables) == {"twodisk_coeffs", "twodisk_phi"}


def test_twodisk_needs_section():
    config = SceneConfig(dict(MINIMAL, k=8.0))
    with pytest.raises(ConfigError):
        build_report(config, "twodisk")
    with pytest.raises(ValueError):
        build_report(config, "plot")


def test_full_report(full_report):
    assert set(full_report.tables) == {"orbit", "fseries_leg0", "fseries_leg1", "phase", "chi", "twodisk_coeffs",
                                       "twodisk_phi", "eigen", "mode", "mode_phase", "fiter", "fphase", "fconv"}
    summary = full_report.summary
    assert summary["subcommand"] == "report"
    assert summary["figures"]["reference"] == "geometric_sum"
    assert summary["mode"]["points"] == [64, 64]
    assert summary["mode"]["reflection_sign"] == 1
    assert len(summary["iterate"]["peaks"]) == 9
    assert full_report.tables["fconv"].height == 2 * 7
    assert full_report.tables["fconv"].headers[-1] == "err_numeric"



def test_odd_cycle_sign():
    summary = build_report(SceneConfig.bundled("three_obstacles"), "mode").summary["mode"]
    assert summary["reflection_sign"] == -1
    value = complex(summary["lambda"]["re"], summary["lambda"]["im"])
    length_phase = cmath.exp(1j * summary["k_length_mod_2pi"])
    assert summary["phase_defect"] <= 0.5
    assert abs(value / abs(value) - length_phase) > abs(-value / abs(value) - length_phase)


def test_report_without_bem():
    config = SceneConfig(dict(MINIMAL, k=8.0, order=4, bem={"enabled": False}, report={"orders": [2, 4]}))
    report = build_report(config, "report")
    assert "mode" not in report.tables
    assert report.summary["figures"]["reference"] == "none"
    assert report.tables["fconv"].height == 0


def test_write(full_report, tmp_path):
    written = full_report.write(str(tmp_path))
    assert sorted(os.listdir(str(tmp_path))) == sorted(written)
    with open(str(tmp_path / "manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["config_sha256"] == small_twodisks().digest()
    with open(str(tmp_path / "phase.csv"), newline="") as f:
        assert manifest["tables"]["phase"] == hashlib.sha256(f.read().encode("utf-8")).hexdigest()
    assert manifest["tolerances"]["series"]["consistency_tol"] == 1e-9
    assert "report" not in manifest["tolerances"]
    with open(str(tmp_path / "summary.json")) as f:
        assert json.load(f)["name"] == "twodisks"


def test_reports_are_deterministic():
    config = small_twodisks()
    first, second = build_report(config, "phase"), build_report(config, "phase")
    assert first.manifest() == second.manifest()


def test_write_failure(tmp_path):
    out = str(tmp_path / "failed")
    write_failure(out, small_twodisks(), "phase", PhaseSolverError("broken", {"order": 3}))
    with open(os.path.join(out, "summary.json")) as f:
        summary = json.load(f)
    assert summary["error"] == {"stage": "phase_solver", "message": "broken", "diagnostics": {"order": 3}}


def _scale_cell(directory: str, table: str, line: int, factor: float):
    file_name = os.path.join(directory, table + ".csv")
    with open(file_name, newline="") as f:
        lines = f.read().split("\r\n")
    cells = lines[line].split(",")
    cells[1] = format_cell(float(cells[1]) * factor)
    lines[line] = ",".join(cells)
    with open(file_name, "w", newline="") as f:
        f.write("\r\n".join(lines))


def test_compare(tmp_path):
    report = build_report(small_twodisks(), "phase")
    base, other = str(tmp_path / "base"), str(tmp_path / "other")
    report.write(base)
    report.write(other)
    result = compare_report(other, base)
    assert result.passed
    assert result.differences["phase"] == 0.0
    _scale_cell(other, "phase", 3, 1 + 1e-6)
    result = compare_report(other, base)
    assert not result.passed
    assert result.failures[0].startswith("phase:")
    assert compare_report(other, base, rtol=1e-3).passed
    assert set(result.to_dict()) == {"passed", "differences", "failures"}


def test_compare_other_config(tmp_path):
    base, other = str(tmp_path / "base"), str(tmp_path / "other")
    build_report(small_twodisks(), "phase").write(base)
    build_report(small_twodisks(order=8), "phase").write(other)
    with pytest.raises(ReportMismatchError):
        compare_report(other, base)
    # the coefficients of the lower orders agree
    assert compare_report(other, base, strict=False).passed
    shutil.rmtree(other)
    os.makedirs(other)
    with pytest.raises(ReportMismatchError):
        compare_report(other, base, strict=False)


def test_format_cell():
    assert format_cell(True) == "true"
    assert format_cell(np.float64(1.5)) == "1.5"
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(math.nan) == "nan"
    assert float(format_cell(math.pi)) == math.pi


def test_subcommands():
    assert SUBCOMMANDS == ["orbit", "fseries", "phase", "twodisk", "mode", "iterate", "report"]
