# Copyright 2026 The qcascade Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""End-to-end checks of the qcascade command line."""

import csv
import io
import json
import os
import pathlib
import subprocess

import jsonschema
import pytest
from referencing import Registry, Resource

BIN = os.environ["QCASCADE_BIN"]
SCHEMAS = pathlib.Path(os.environ["QCASCADE_SCHEMAS"])


def _registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


REGISTRY = _registry()


def validate(doc, schema):
    body = json.loads((SCHEMAS / schema).read_text())
    jsonschema.Draft202012Validator(body, registry=REGISTRY).validate(doc)


def cli(*args, check=True):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args[0]} failed: {proc.stderr}")
    return proc


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    model, data = root / "model.bin", root / "data.bin"
    info = json.loads(cli("init-model", "--arch", "toy", "--seed", 5, "--out", model).stdout)
    assert info["stages"] == 3
    cli("gen-data", "--dataset", "cifar10", "--count", 96, "--seed", 6, "--out", data)
    return root, model, data


def data_flags(workspace):
    _, model, data = workspace
    return ["--model", model, "--data", data, "--dataset", "cifar10"]


def test_simulate_defaults_give_full_batch_throughput():
    doc = json.loads(cli("simulate").stdout)
    validate(doc, "sim_report.schema.json")
    assert doc["total_ms"] == 3192
    assert doc["throughput_imgs_per_s"] == pytest.approx(160.4, abs=0.05)


def test_simulate_adaptive_survivors_and_config_sweep(tmp_path):
    doc = json.loads(cli("simulate", "--survivors", "512,256,128").stdout)
    assert doc["throughput_imgs_per_s"] == pytest.approx(267.8, abs=0.05)
    rows = list(csv.DictReader(io.StringIO(
        cli("simulate", "--survivors", "512,256,128", "--config-sweep", "0:40:20").stdout)))
    assert [float(r["config_ms"]) for r in rows] == [0, 20, 40]
    assert float(rows[-1]["total_ms"]) == 1912


def test_run_with_zero_trigger_stops_everything_at_first_part(workspace, tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    cli("run", *data_flags(workspace), "--gamma", 0, "--out", out, "--csv", table)
    doc = json.loads(out.read_text())
    validate(doc, "report.schema.json")
    assert doc["summary"]["stop_ratios"] == [1, 0, 0]
    assert doc["metadata"]["images"] == 96
    assert all(p["exit_stage"] == 1 for p in doc["predictions"])
    rows = list(csv.DictReader(io.StringIO(table.read_text())))
    assert [int(r["exit_count"]) for r in rows] == [96, 0, 0]


def test_force_full_visits_every_part(workspace):
    doc = json.loads(cli("run", *data_flags(workspace), "--force-full").stdout)
    assert doc["summary"]["stop_ratios"] == [0, 0, 1]
    assert doc["summary"]["flops_fraction"] == 1


def test_calibration_output_validates_and_feeds_sweep(workspace, tmp_path):
    calib = tmp_path / "calib.json"
    cli("calibrate", *data_flags(workspace), "--out", calib)
    doc = json.loads(calib.read_text())
    validate(doc, "calibration.schema.json")
    assert len(doc["per_stage"]) == 2
    assert all(sum(s["histogram"]) == 96 for s in doc["per_stage"])
    rows = list(csv.DictReader(io.StringIO(
        cli("sweep", *data_flags(workspace), "--calibration", calib).stdout)))
    assert len(rows) == 9
    fractions = [float(r["flops_fraction"]) for r in rows]
    assert fractions == sorted(fractions)


def test_run_matches_chosen_sweep_row(workspace, tmp_path):
    calib, table = tmp_path / "calib.json", tmp_path / "sweep.csv"
    cli("calibrate", *data_flags(workspace), "--out", calib)
    cli("sweep", *data_flags(workspace), "--calibration", calib, "--out", table)
    rows = list(csv.DictReader(io.StringIO(table.read_text())))
    best = max(float(r["accuracy"]) for r in rows)
    doc = json.loads(cli("run", *data_flags(workspace), "--theta", 0,
                         "--gamma-from-sweep", table, "--lambda", best).stdout)
    chosen = [r for r in rows if float(r["gamma"]) == doc["metadata"]["gate"]["gammas"][0]]
    assert chosen, "run picked a trigger point that is not in the sweep"
    assert doc["summary"]["accuracy"] == pytest.approx(float(chosen[0]["accuracy"]), abs=1e-12)
    assert doc["summary"]["flops_fraction"] == pytest.approx(
        float(chosen[0]["flops_fraction"]), abs=1e-12)


def test_resources_report_validates():
    doc = json.loads(cli("resources").stdout)
    validate(doc, "resources.schema.json")
    assert doc["totals"] == {"bram": 280, "dsp": 220, "ff": 106400}


def test_outputs_are_deterministic(workspace, tmp_path):
    a = cli("run", *data_flags(workspace), "--gamma", "0.45", "--priority", "1,3").stdout
    b = cli("run", *data_flags(workspace), "--gamma", "0.45", "--priority", "1,3").stdout
    assert a == b
    first, second = tmp_path / "a.bin", tmp_path / "b.bin"
    cli("gen-data", "--count", 4, "--seed", 9, "--out", first)
    cli("gen-data", "--count", 4, "--seed", 9, "--out", second)
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize("args,code", [
    (["run", "--model", "missing.bin", "--data", "missing.bin"], "runtime"),
    (["run", "--model", "x"], "usage"),
    (["simulate", "--mode", "compute"], "usage"),
])
def test_errors_are_machine_readable(args, code):
    proc = cli(*args, check=False)
    assert proc.returncode != 0
    doc = json.loads(proc.stderr.strip().splitlines()[-1])
    validate(doc, "error.schema.json")
    assert doc["error"]["code"] == code


def test_corrupt_model_reports_its_error_code(workspace, tmp_path):
    _, model, data = workspace
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + model.read_bytes()[4:])
    proc = cli("run", "--model", bad, "--data", data, "--dataset", "cifar10", check=False)
    assert proc.returncode != 0
    doc = json.loads(proc.stderr)
    validate(doc, "error.schema.json")
    assert doc["error"]["code"] == "model_bad_magic"
