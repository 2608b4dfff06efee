"""Command behavior through the in-process client: exit codes, artifacts,
manifests."""

import json

import pytest

from adc.cli import main
from adc.scheduling import parse_schedule

MANIFEST_KEYS = {"command", "config_path", "seed", "tool_version", "outputs",
                 "wall_clock_s"}

PATH_TOPOLOGY = "# sink 0\n0 1\n1 2\n2 3\n"

SIM_CONFIG = {
    "topology": {"edges": [[0, 1], [1, 2], [2, 3]], "sink": 0},
    "traffic": {"mode": "raw", "generation_period_ms": 500},
    "duration_slots": 120,
}


def test_qs_human_output(capsys):
    assert main(["qs", "--m", "36", "--demand", "0.33"]) == 0
    out = capsys.readouterr().out
    assert "grid 6x6" in out
    assert "11 slots" in out
    assert "load:" in out


def test_qs_json_output(capsys):
    assert main(["qs", "--m", "36", "--demand", "0.33", "--json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["quorum"]["cardinality"] == 11


def test_qs_closure_verdict(capsys):
    assert main(["qs", "--m", "16", "--verify-closure"]) == 0
    assert "closure holds" in capsys.readouterr().out


def test_qs_bad_anchor_is_usage_error(capsys):
    assert main(["qs", "--m", "36", "--anchor", "99"]) == 2
    assert "error:" in capsys.readouterr().err


def test_schedule_writes_artifact_and_manifest(tmp_path, capsys):
    topo = tmp_path / "net.txt"
    topo.write_text(PATH_TOPOLOGY)
    assert main(["--output-dir", str(tmp_path), "schedule", str(topo)]) == 0
    text = (tmp_path / "schedule.txt").read_text()
    sched = parse_schedule(text)
    assert sched.m >= 4
    manifest = json.loads((tmp_path / "schedule.manifest.json").read_text())
    assert set(manifest) == MANIFEST_KEYS
    assert manifest["command"] == "schedule"
    assert manifest["config_path"] == str(topo)
    assert manifest["outputs"] == [str(tmp_path / "schedule.txt")]


def test_schedule_out_flag_overrides(tmp_path):
    topo = tmp_path / "net.txt"
    topo.write_text(PATH_TOPOLOGY)
    target = tmp_path / "deep" / "mine.txt"
    assert main(["schedule", str(topo), "--out", str(target)]) == 0
    assert target.exists()
    assert (tmp_path / "deep" / "mine.manifest.json").exists()


def test_schedule_accepts_json_spec(tmp_path):
    spec = tmp_path / "gen.json"
    spec.write_text(json.dumps(
        {"generator": {"n": 12, "area": 5.0, "radius": 2.0, "seed": 1}}))
    assert main(["--output-dir", str(tmp_path), "schedule", str(spec)]) == 0


def test_schedule_parse_error_is_usage(tmp_path, capsys):
    topo = tmp_path / "net.txt"
    topo.write_text("0 1\nbroken line here\n")
    assert main(["--output-dir", str(tmp_path), "schedule", str(topo)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_schedule_missing_file_is_usage(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert main(["schedule", str(missing)]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_simulate_honors_output_env(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(SIM_CONFIG))
    outdir = tmp_path / "results"
    monkeypatch.setenv("ADC_OUTPUT_DIR", str(outdir))
    assert main(["simulate", str(cfg)]) == 0
    report = json.loads((outdir / "report.json").read_text())
    assert report["mac"] == "adc"
    manifest = json.loads((outdir / "report.manifest.json").read_text())
    assert set(manifest) == MANIFEST_KEYS
    assert manifest["seed"] == report["seed"]


def test_simulate_json_flag_prints_report(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(SIM_CONFIG))
    assert main(["--output-dir", str(tmp_path), "simulate", str(cfg),
                 "--json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["generated"] == body["delivered"] + body["lost"] + body["in_flight"]


def test_simulate_disconnected_topology_is_usage(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    doc = dict(SIM_CONFIG)
    doc["topology"] = {"edges": [[0, 1], [2, 3]]}
    cfg.write_text(json.dumps(doc))
    assert main(["--output-dir", str(tmp_path), "simulate", str(cfg)]) == 2


def test_sweep_writes_csv(tmp_path, capsys):
    matrix = {
        "topology": {"edges": [[0, 1], [1, 2]], "sink": 0},
        "m": 16,
        "slot_sizes_ms": [1000],
        "generation_periods_ms": [500],
        "macs": ["adc"],
        "seeds": [0],
        "superframes": 2,
    }
    cfg = tmp_path / "matrix.json"
    cfg.write_text(json.dumps(matrix))
    assert main(["--output-dir", str(tmp_path), "sweep", str(cfg)]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("mac,slot_ms")
    assert len(lines) == 2
    manifest = json.loads((tmp_path / "sweep.manifest.json").read_text())
    assert manifest["seed"] == [0]


def test_verify_fast(capsys):
    assert main(["verify", "--fast"]) == 0
    out = capsys.readouterr().out
    assert "PASS rotation_closure" in out
    assert "all checks pass" in out


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_missing_subcommand_is_usage():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
