import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from fixgen.cli import main
from fixgen.errors import ConfigError
from fixgen.report import dumps_report, run_suite, validate_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def load(name):
    return json.loads((CONFIGS / name).read_text())


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_invalid_body_kind_exits_2(tmp_path, capsys):
    cfg = load("tube.json")
    cfg["body"]["kind"] = "donut"
    assert main(["suite", "--config", write(tmp_path, cfg)]) == 2
    assert "/body/kind" in capsys.readouterr().err


def test_validation_error_carries_pointer():
    cfg = load("tube.json")
    cfg["perturb_fix"]["eps"] = -1
    with pytest.raises(ConfigError) as exc:
        validate_config(cfg)
    assert exc.value.pointer == "/perturb_fix/eps"


def test_missing_section_exits_2(tmp_path, capsys):
    cfg = load("fullspace.json")
    assert main(["lur", "--config", write(tmp_path, cfg)]) == 2
    assert "/lur" in capsys.readouterr().err


def test_unreadable_config_exits_2(tmp_path):
    assert main(["suite", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["suite", "--config", str(bad)]) == 2


def test_certify_only(tmp_path):
    cfg = load("tube.json")
    out = tmp_path / "out"
    assert main(["certify", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert list(rep["stages"]) == ["certify"] and rep["pass"]
    assert rep["stages"]["certify"]["covering"][0]["params"]["t"] == pytest.approx(3 + 2 * 2 ** 0.5, abs=1e-9)


def test_full_tube_pipeline(tmp_path):
    out = tmp_path / "out"
    assert main(["suite", "--config", str(CONFIGS / "tube.json"), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert set(rep["stages"]) == {"certify", "perturb_fix", "boundary_drift", "orbit"}
    assert all(v["pass"] for v in rep["stages"].values())
    assert "timing" not in rep and (out / "timing.json").exists()
    with open(out / "orbit.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "k" and rows[0][-2:] == ["residual", "boundary_distance"]
    # cells are 17-significant-digit renderings that read back exactly
    for row in rows[1:]:
        for cell in row[1:]:
            assert format(float(cell), ".17g") == cell


def test_failed_postcondition_exits_1(tmp_path):
    cfg = load("fullspace.json")
    cfg["body"] = {"kind": "ball", "center": [0] * 8, "radius": 1.0}
    assert main(["perturb-drift", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 1
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["stages"]["perturb_drift"]["error"] == "UnboundednessError"


def test_empty_seed_batch(tmp_path):
    cfg = load("demo_01law.json")
    cfg["demo_01law"]["seeds"] = []
    out = tmp_path / "out"
    assert main(["demo-01law", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())["stages"]["demo_01law"]
    assert rep["seeds"] == 0 and rep["pass"]


def test_demo_small_batch():
    cfg = load("demo_01law.json")
    cfg["demo_01law"]["seeds"] = [0, 1, 2]
    rep, tables, _ = run_suite(cfg)
    d = rep["stages"]["demo_01law"]
    assert d["fixed_points_found"] == 3 and d["exclusions_issued"] == 3
    assert len(tables["demo_01law"][1]) == 3 * 4


def test_seed_and_terms_flags(tmp_path):
    out = tmp_path / "out"
    assert main(["perturb-drift", "--config", str(CONFIGS / "fullspace.json"), "--out", str(out), "--seed", "3",
                 "--theta-terms", "30"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["seed"] == 3 and rep["theta_terms"] == 30
    assert rep["stages"]["perturb_drift"]["distance"]["n"] == 30


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["suite", "--config", str(CONFIGS / "tube.json"), "--out", str(out)]) == 0
    for f in sorted(p.name for p in a.iterdir() if p.name != "timing.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fixgen", "certify", "--config", str(CONFIGS / "tube.json")],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    rep = json.loads(proc.stdout)
    assert rep["stages"]["certify"]["pass"]
    assert dumps_report(rep) == proc.stdout
