import json
import os

import pytest
from hypothesis import settings

from stencil_dse import (AreaCoeffs, data_path, load_arch, load_calibration, load_kernel,
                         load_tile)

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

# hand-arithmetic area fixture used across area/codesign tests
SYNTH_COEFFS = AreaCoeffs(a_fixed=100.0, a_sm_fixed=3.0, a_lane=0.08, a_shmem=0.05,
                          a_l2=0.05, a_mc=2.0)


def toy_paths():
    return {name: data_path("toy", f"{name}.json")
            for name in ("kernel", "arch", "calib", "tile", "grid")}


@pytest.fixture
def toy():
    p = toy_paths()
    return (load_kernel(p["kernel"]), load_arch(p["arch"]), load_calibration(p["calib"]),
            load_tile(p["tile"]))


@pytest.fixture
def sweep_fixture():
    return (load_kernel(data_path("sweep", "kernel.json")),
            load_arch(data_path("sweep", "arch.json")),
            load_calibration(data_path("golden_calib.json")),
            load_tile(data_path("sweep", "tile.json")))


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    failed = report.failed and report.when in ("setup", "call", "teardown")
    if report.when == "call" or failed:
        prev = _CRITERIA.get(number, (title, True))
        _CRITERIA[number] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}")
