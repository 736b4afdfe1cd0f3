import csv
import json
import subprocess
import sys

import pytest

from ghlab.cli import main
from ghlab.config import PunctureConfig, TailModel, chen_chen, dump_config, generate_config


def write(tmp_path, name, config):
    p = tmp_path / name
    p.write_text(dump_config(config))
    return str(p)


@pytest.fixture
def files(tmp_path):
    return {
        "gz": write(tmp_path, "gz.json", generate_config("geometric_z", ratio=2.0, count=20)),
        "cc": write(tmp_path, "cc.json", chen_chen()),
        "one": write(tmp_path, "one.json", PunctureConfig([[0, 0, 0]], [-1])),
        "pos": write(tmp_path, "pos.json", PunctureConfig([[0, 0, 1]], [1])),
        "ball": write(tmp_path, "ball.json", generate_config("random_ball", radius=1.0, count=10, seed=7)),
        "acc": write(tmp_path, "acc.json", PunctureConfig(
            [[2.0**j, 1.0 / j, 0.0] for j in range(1, 9)], [-1] * 8, TailModel("geometric", 2.0))),
    }


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_validate(files, capsys):
    code, out = run(["validate", "--config", files["gz"]], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"]["reason"] == "ok"
    assert len(doc["manifest"]["config_sha256"]) == 64
    code, out = run(["validate", "--config", files["pos"]], capsys)
    assert code == 1 and json.loads(out)["verdict"]["reason"] == "positive_weight"
    assert main(["validate", "--config", "/nonexistent/x.json"]) == 2


def test_usage_errors(files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["direction", "--config", files["cc"], "--v", "0,0,0"]) == 2
    assert main(["direction", "--config", files["cc"], "--v", "1,2"]) == 2


@pytest.mark.parametrize("name", ["one", "cc"])
def test_verify_geometry_passes(files, name, capsys):
    code, out = run(["verify-geometry", "--config", files[name], "--points", "100"], capsys)
    rows = list(csv.DictReader(out.splitlines()))
    assert code == 0 and len(rows) == 100
    assert max(float(r["laplacian"]) for r in rows) <= 1e-5


def test_verify_geometry_coarse_step_fails(files, capsys):
    code, _ = run(["verify-geometry", "--config", files["cc"], "--h", "0.5", "--points", "20"], capsys)
    assert code == 1


def test_direction(files, capsys):
    code, out = run(["direction", "--config", files["cc"], "--v", "1,0,0"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["projection"]["m0"] == 2 and not doc["projection"]["generic"]
    assert doc["singularities"][0]["type"] == "A1"
    code, out = run(["direction", "--config", files["cc"], "--v", "0,0,1"], capsys)
    assert json.loads(out)["projection"]["generic"]
    code, out = run(["direction", "--config", files["gz"], "--v", "1,0,0", "--cap-n", "1", "--samples", "50000"], capsys)
    caps = json.loads(out)["caps"]
    assert caps["exact_sum"] <= caps["bound"]


def test_direction_survey(files, capsys):
    code, out = run(["direction", "--config", files["ball"], "--survey", "2000", "--seed", "4"], capsys)
    assert code == 0 and json.loads(out)["survey"]["fraction_generic"] == 1.0


def test_surface_chen_chen(files, tmp_path, capsys):
    out_dir = tmp_path / "cc_out"
    code, _ = run(["surface", "--config", files["cc"], "--v", "1,0,0", "--out", str(out_dir)], capsys)
    assert code == 0
    product = json.loads((out_dir / "product.json").read_text())
    sing = json.loads((out_dir / "singularities.json").read_text())
    audit = json.loads((out_dir / "audit.json").read_text())
    assert product["delta"] == 2 and product["zeros"] == []
    assert [s["type"] for s in sing["singular"]] == ["A1"]
    assert sing["atlas"]["charts"] == ["minus", "0_1", "plus"]
    assert audit["passed"]
    rows = list(csv.DictReader((out_dir / "residual_grid.csv").read_text().splitlines()))
    assert len(rows) == 3 * 21 * 21


def test_surface_geometric_and_gate(files, capsys):
    code, out = run(["surface", "--config", files["gz"], "--v", "1,0,0"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["singularities"]["singular"] == []
    code, out = run(["surface", "--config", files["gz"], "--v", "1,0,0", "--mode", "minimal_genus", "--radius", "50"], capsys)
    assert code == 0 and json.loads(out)["product"]["mode"] == "minimal_genus"
    code, out = run(["surface", "--config", files["acc"], "--v", "1,0,0"], capsys)
    assert code == 1 and "accumulation" in json.loads(out)["error"]


def test_reports_are_deterministic(files, capsys):
    docs = []
    for _ in range(2):
        _, out = run(["surface", "--config", files["cc"], "--v", "1,0,0", "--seed", "3"], capsys)
        doc = json.loads(out)
        doc["manifest"].pop("timestamp")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_generate_round_trip(tmp_path, capsys):
    code, out = run(["generate", "geometric_z", "--count", "5"], capsys)
    assert code == 0 and json.loads(out)["tail"] == {"kind": "geometric", "ratio": 2.0}


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "ghlab", "validate", "--config", files["gz"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.endswith("\n")
