import csv
import json
import os
import pathlib
import subprocess

import pytest

BIN = os.environ.get("GDBSIM_BIN")
SCENARIOS = pathlib.Path(os.environ.get("GDBSIM_SCENARIOS", pathlib.Path(__file__).parents[2] / "scenarios"))

pytestmark = pytest.mark.skipif(not BIN, reason="GDBSIM_BIN not set")


def cli(*args):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)


def test_run_writes_artifacts(tmp_path):
    p = cli("run", SCENARIOS / "ring4.json", "--out", tmp_path)
    assert p.returncode == 0, p.stderr
    with open(tmp_path / "bounds.csv") as f:
        assert len(list(csv.DictReader(f))) == 12
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [a["name"] for a in manifest["artifacts"]] == ["trace.jsonl", "bounds.csv", "detection.json"]


def test_manifest_digests_are_stable(tmp_path):
    for d in ("a", "b"):
        assert cli("run", SCENARIOS / "mpnv.json", "--seed", 9, "--out", tmp_path / d).returncode == 0
    digests = [
        [a["sha256"] for a in json.loads((tmp_path / d / "manifest.json").read_text())["artifacts"]] for d in ("a", "b")
    ]
    assert digests[0] == digests[1]


def test_small_ring_is_an_input_error(tmp_path):
    p = cli("run", SCENARIOS / "ring3_invalid.json", "--out", tmp_path)
    assert p.returncode == 2
    assert "N must be >= 4" in p.stderr


def test_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert cli("run", bad, "--out", tmp_path / "o").returncode == 2


def test_unknown_key_names_the_field(tmp_path):
    doc = json.loads((SCENARIOS / "ring4.json").read_text())
    doc["config"]["bogus"] = 1
    f = tmp_path / "s.json"
    f.write_text(json.dumps(doc))
    p = cli("run", f, "--out", tmp_path / "o")
    assert p.returncode == 2
    assert "bogus" in p.stderr


def test_sweep_merges_runs(tmp_path):
    p = cli("--workers", 2, "sweep", SCENARIOS / "ring4.json", "--param", "config.n=1,2", "--param", "rng_seed=1,2,3",
            "--out", tmp_path)
    assert p.returncode == 0, p.stderr
    with open(tmp_path / "sweep.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 6 * 12
    assert {r["status"] for r in rows} == {"ok"}
    assert len(list(tmp_path.glob("run_*/manifest.json"))) == 6


def test_sweep_reports_bad_points(tmp_path):
    p = cli("sweep", SCENARIOS / "ring4.json", "--param", "config.n=0,1", "--out", tmp_path)
    assert p.returncode == 2
    assert "config.n" in p.stderr


def test_figures(tmp_path):
    assert cli("figures", "--which", "6c", "--out", tmp_path).returncode == 0
    lines = (tmp_path / "fig6c.csv").read_text().splitlines()
    assert len(lines) == 101
    first = (tmp_path / "fig6c.csv").read_bytes()
    assert cli("figures", "--which", "6c", "--out", tmp_path).returncode == 0
    assert (tmp_path / "fig6c.csv").read_bytes() == first
    assert cli("figures", "--which", "7z", "--out", tmp_path).returncode == 2


def test_verify_quick_prints_one_line_per_criterion():
    p = cli("verify", "--quick")
    lines = [l for l in p.stdout.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) == 9
    assert p.returncode == (0 if all(l.startswith("PASS") for l in lines) else 1)
