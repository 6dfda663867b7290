import csv
import io
import json
import os
import random
import subprocess
import sys

import jsonschema
import pytest

from stencil_dse import data_path
from stencil_dse.cli import main

from conftest import toy_paths, write_json
from oracles import dominance_filter

SCHEMAS = os.path.join(os.path.dirname(data_path()), "schemas")


def schema(name):
    with open(os.path.join(SCHEMAS, f"{name}.schema.json"), encoding="utf-8") as fh:
        return json.load(fh)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def toy_args(*names):
    p = toy_paths()
    args = []
    for n in names:
        args += [f"--{n}", p[n]]
    return args


def test_predict_toy(capsys):
    code, out, _ = run(capsys, "predict", *toy_args("kernel", "arch", "calib", "tile"))
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("predict"))
    assert doc["t_alg_ns"] == 420
    assert doc["time"]["t_ideal_ns"] == 64


def test_tune_outputs(capsys, tmp_path):
    csv_path = tmp_path / "top.csv"
    code, out, _ = run(capsys, "tune", *toy_args("kernel", "arch", "calib"),
                       "--grid", toy_paths()["grid"], "--objective", "edp", "--top", "3",
                       "--csv", csv_path)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("tune"))
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert len(rows) == 3 and rows[0]["rank"] == "1"
    assert float(rows[0]["value"]) == doc["best"]["value"]


def test_tune_empty_grid_exit_2(capsys, tmp_path):
    arch = write_json(tmp_path, "a.json", {"n_sm": 1, "n_v": 32, "m_sm_kib": 1,
                                           "bw_global_gb_s": 1})
    code, _, err = run(capsys, "tune", "--kernel", toy_paths()["kernel"], "--arch", arch,
                       "--calib", toy_paths()["calib"], "--grid", toy_paths()["grid"])
    assert code == 2
    line = json.loads(err.strip().splitlines()[-1])
    assert line["error"] == "EmptyFeasibleSpace" and line["exit_code"] == 2


def test_supertune_winner(capsys, tmp_path):
    grids = write_json(tmp_path, "g.json", [
        json.loads(open(toy_paths()["grid"], encoding="utf-8").read()),
        {"strategy": "RectWavefront", "t_s1": [4, 8], "t_s2": [8], "t_t": [1, 2, 4]}])
    code, out, _ = run(capsys, "supertune", *toy_args("kernel", "arch", "calib"), "--grid", grids)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("tune"))
    assert set(doc["per_strategy"]) == {"HexHybrid", "RectWavefront"}
    assert doc["winner"] == doc["best"]["tile"]["strategy"]
    assert doc["best"]["value"] == min(v["value"] for v in doc["per_strategy"].values())


def test_bottleneck_sweep(capsys):
    code, out, _ = run(capsys, "bottleneck", "--kernel", data_path("sweep", "kernel.json"),
                       "--arch", data_path("sweep", "arch.json"),
                       "--calib", data_path("golden_calib.json"),
                       "--tile", data_path("sweep", "tile.json"), "--sweep-k", "1..12",
                       "--budget", "400")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("bottleneck"))
    assert doc["best_k"] > 1
    assert any(not e["feasible"] and e["binding_constraint"] == "KCapacity" for e in doc["sweep"])


def test_bottleneck_bad_range(capsys):
    code, _, err = run(capsys, "bottleneck", *toy_args("kernel", "arch", "calib", "tile"),
                       "--sweep-k", "3..1")
    assert code == 3
    assert json.loads(err)["field"] == "sweep-k"


def test_calibrate_area(capsys):
    code, out, _ = run(capsys, "calibrate-area", "--anchors",
                       data_path("anchors", "anchors.json"),
                       "--free", "a_fixed,a_sm_fixed,a_lane,a_shmem,a_l2,a_mc")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("area_coeffs"))
    expected = json.load(open(data_path("area_coeffs_estimate.json"), encoding="utf-8"))
    for key, value in doc.items():
        assert value == pytest.approx(expected[key], rel=1e-9, abs=1e-12)


def test_calibrate_rank_error(capsys, tmp_path):
    anchors = write_json(tmp_path, "an.json", [{"arch": data_path("anchors", "arch_0.json"),
                                                "area_mm2": 100.0}])
    code, _, err = run(capsys, "calibrate-area", "--anchors", anchors, "--free", "a_fixed,a_lane")
    assert code == 3 and json.loads(err)["error"] == "RankError"


@pytest.mark.parametrize("argv", [["predict"], ["nonsense"], []])
def test_usage_errors(capsys, argv):
    assert main(argv) == 3


def test_parse_error_exit_3(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    code, _, err = run(capsys, "predict", "--kernel", bad,
                       *toy_args("arch", "calib", "tile"))
    assert code == 3 and json.loads(err)["error"] == "ParseError"


def test_infeasible_tile_exit_2(capsys, tmp_path):
    tile = write_json(tmp_path, "t.json", {"strategy": "HexHybrid", "t_s1": 8, "t_s2": 8,
                                           "t_t": 4, "k": 2})
    code, _, _ = run(capsys, "predict", *toy_args("kernel", "arch", "calib"), "--tile", tile)
    assert code == 2


def test_pareto_subcommand_vs_oracle(capsys, tmp_path):
    rng = random.Random(5)
    rows = [(round(rng.uniform(50, 300), 3), round(rng.uniform(0, 1000), 2), i) for i in range(400)]
    src = tmp_path / "pts.csv"
    src.write_text("area_mm2,weighted_gflops,n_sm\n"
                   + "".join(f"{a},{g},{n}\n" for a, g, n in rows), encoding="utf-8")
    code, out, _ = run(capsys, "pareto", "--points", src)
    assert code == 0
    got = [(float(r["area_mm2"]), float(r["weighted_gflops"]), int(r["n_sm"]))
           for r in csv.DictReader(io.StringIO(out))]
    assert sorted(got) == dominance_filter(rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stencil_dse", "predict",
                           *toy_args("kernel", "arch", "calib", "tile")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["t_alg_ns"] == 420
