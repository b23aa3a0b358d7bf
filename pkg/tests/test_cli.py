import json
import os
import socket
import subprocess
import sys
import time

import pytest
from click.testing import CliRunner

from flipscope.cli import load_config, main

STUB = os.path.join(os.path.dirname(__file__), "helpers", "bridge_stub.py")


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """synth -> train -> explain -> report, end to end on one corpus."""
    root = tmp_path_factory.mktemp("pipeline")
    runner = CliRunner()
    r = runner.invoke(main, ["synth", "--items", "300", "--features", "40",
                             "--seed", "3", "--out", str(root / "data.txt"),
                             "--model-out", str(root / "planted.json")])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["train", "--data", str(root / "data.txt"),
                             "--split", "0.3", "--seed", "3", "--model", "logistic",
                             "--epochs", "60", "--out", str(root / "model.json")])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["explain", "--data", str(root / "data.txt"),
                             "--model", str(root / "model.json"), "--seed", "3",
                             "--out", str(root / "run")])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["report", "--data", str(root / "data.txt"),
                             "--model", str(root / "model.json"),
                             "--explanations", str(root / "run"),
                             "--out", str(root / "report.json")])
    assert r.exit_code == 0, r.output
    return root


def test_pipeline_outputs(workdir):
    report = json.loads((workdir / "report.json").read_text())
    assert set(report) >= {"manifest", "summary", "groups"}
    assert report["summary"]["roc"]["auc_test"] is not None
    assert report["groups"]
    manifest = json.loads((workdir / "run" / "manifest.json").read_text())
    assert manifest["items"] == 300
    assert manifest["failures"] == 0
    lines = (workdir / "run" / "explanations.jsonl").read_text().splitlines()
    assert len(lines) == 300


def test_train_is_machine_readable(workdir):
    artifact = json.loads((workdir / "model.json").read_text())
    assert artifact["type"] == "linear"
    assert 0.0 <= artifact["threshold"] <= 1.0
    assert artifact["split_fraction"] == 0.3


def test_explain_deterministic(workdir, tmp_path):
    runner = CliRunner()
    for name in ("a", "b"):
        r = runner.invoke(main, ["explain", "--data", str(workdir / "data.txt"),
                                 "--model", str(workdir / "model.json"), "--seed", "11",
                                 "--parallelism", "4", "--out", str(tmp_path / name)])
        assert r.exit_code == 0, r.output
    a = (tmp_path / "a" / "explanations.jsonl").read_bytes()
    b = (tmp_path / "b" / "explanations.jsonl").read_bytes()
    assert a == b


def test_report_mismatched_manifest_exit_2(workdir, tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["synth", "--items", "50", "--features", "40", "--seed", "9",
                             "--out", str(tmp_path / "other.txt")])
    assert r.exit_code == 0
    r = runner.invoke(main, ["report", "--data", str(tmp_path / "other.txt"),
                             "--explanations", str(workdir / "run"),
                             "--out", str(tmp_path / "r.json")])
    assert r.exit_code == 2


def test_explain_rejects_model_from_other_dataset(workdir, tmp_path):
    runner = CliRunner()
    runner.invoke(main, ["synth", "--items", "50", "--features", "40", "--seed", "9",
                         "--out", str(tmp_path / "other.txt")])
    r = runner.invoke(main, ["explain", "--data", str(tmp_path / "other.txt"),
                             "--model", str(workdir / "model.json"), "--seed", "1",
                             "--out", str(tmp_path / "run")])
    assert r.exit_code == 2


def test_report_without_model_uses_run_scores(workdir, tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["report", "--data", str(workdir / "data.txt"),
                             "--explanations", str(workdir / "run"),
                             "--out", str(tmp_path / "r2.json")])
    assert r.exit_code == 0, r.output
    with_model = json.loads((workdir / "report.json").read_text())
    without = json.loads((tmp_path / "r2.json").read_text())
    assert without["summary"]["confusion"] == with_model["summary"]["confusion"]


def test_explain_via_bridge(workdir, tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["explain", "--data", str(workdir / "data.txt"),
                             "--bridge-cmd", f"{sys.executable} {STUB} size",
                             "--threshold", "0.15", "--seed", "2",
                             "--out", str(tmp_path / "brun")])
    assert r.exit_code == 0, r.output
    manifest = json.loads((tmp_path / "brun" / "manifest.json").read_text())
    assert manifest["threshold"] == 0.15
    assert manifest["items"] == 300


def test_bridge_requires_threshold_or_calibrate(workdir, tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["explain", "--data", str(workdir / "data.txt"),
                             "--bridge-cmd", f"{sys.executable} {STUB} size",
                             "--out", str(tmp_path / "x")])
    assert r.exit_code == 1


def test_config_file_presets_flags(workdir, tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("seed = 3\nsplit = 0.3\nepochs = 60  # fast\n", encoding="utf-8")
    runner = CliRunner()
    r = runner.invoke(main, ["--config", str(cfg), "train",
                             "--data", str(workdir / "data.txt"),
                             "--out", str(tmp_path / "m.json")])
    assert r.exit_code == 0, r.output
    ours = json.loads((tmp_path / "m.json").read_text())
    theirs = json.loads((workdir / "model.json").read_text())
    assert ours["weights"] == theirs["weights"]


def test_load_config_rejects_bad_lines(tmp_path):
    p = tmp_path / "bad"
    p.write_text("just words\n")
    with pytest.raises(Exception, match="key = value"):
        load_config(p)


def test_serve_http_smoke(workdir):
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    proc = subprocess.Popen(
        [sys.executable, "-m", "flipscope.cli", "serve", "--port", str(port),
         "--data", f"demo={workdir / 'data.txt'}",
         "--model", f"m={workdir / 'model.json'}",
         "--run", f"r={workdir / 'run'}"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        import httpx

        deadline = time.time() + 20
        last = None
        while time.time() < deadline:
            try:
                resp = httpx.get(f"http://127.0.0.1:{port}/datasets", timeout=1.0)
                last = resp
                break
            except Exception:
                time.sleep(0.2)
        assert last is not None and last.status_code == 200
        assert last.json()[0]["name"] == "demo"
        sid = httpx.post(f"http://127.0.0.1:{port}/sessions",
                         json={"dataset": "demo", "model": "m", "run": "r"},
                         timeout=5.0).json()["session"]
        summary = httpx.get(f"http://127.0.0.1:{port}/sessions/{sid}/summary",
                            timeout=5.0)
        assert summary.status_code == 200
    finally:
        proc.terminate()
        proc.wait(timeout=10)
