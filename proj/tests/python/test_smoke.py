import json
import math
import os
import pathlib

import pytest

import gdbsim

SCENARIOS = pathlib.Path(os.environ.get("GDBSIM_SCENARIOS", pathlib.Path(__file__).parents[2] / "scenarios"))


def square_ring(n=1, seed=7):
    nodes = [
        {"id": i + 1, "pos": list(p), "role": "Peer"}
        for i, p in enumerate([(0, 0), (150, 0), (150, 100), (0, 100)])
    ]
    return {"protocol": "MultiPartyRing", "nodes": nodes, "config": {"n": n}, "rng_seed": seed}


def test_ring_bounds_match_geometry():
    r = gdbsim.run(square_ring())
    assert len(r["estimates"]) == 12
    pos = {1: (0, 0), 2: (150, 0), 3: (150, 100), 4: (0, 100)}
    for e in r["estimates"]:
        assert abs(e["bound_m"] - math.dist(pos[e["measurer"]], pos[e["target"]])) < 1e-6
    assert r["rapid"] == 8
    assert not r["detection"]["detected"]


def test_same_seed_same_trace():
    a = gdbsim.run(square_ring(seed=3))
    b = gdbsim.run(json.dumps(square_ring(seed=3)))
    c = gdbsim.run(square_ring(), seed=4)
    assert a["trace_jsonl"] == b["trace_jsonl"]
    assert a["trace_jsonl"] != c["trace_jsonl"]


def test_scenario_file():
    r = gdbsim.run(str(SCENARIOS / "one_way_passive.json"))
    assert r["emissions"] == 23
    assert {e["method"] for e in r["estimates"]} == {"Active", "Passive"}


def test_errors_carry_code_and_field():
    s = square_ring()
    s["nodes"].pop()
    issues = gdbsim.validate(json.dumps(s))
    assert issues[0][0] == "ParamOutOfRange"
    with pytest.raises(gdbsim.GdbError) as info:
        gdbsim.run(s)
    assert info.value.code == "ParamOutOfRange"
    assert info.value.input_error
    assert "N must be >= 4" in str(info.value)


def test_dbc_values():
    assert gdbsim.dbc(10, 0.0) == 1 - 2**-10
    assert gdbsim.dbc(10, 0.5) == 0.96875
    assert gdbsim.dbc_avg([10] * 10, [0.5] * 5 + [0.0] * 5) == pytest.approx(0.98391, abs=1e-4)
    assert gdbsim.dbc_ap(2, [4] * 10, [1.0] * 10) == 0.75


def test_figure_csv():
    csv = gdbsim.figure_csv("6a")
    assert csv.startswith("N,n,frac_cheating,pr_ch,value\n")
    with pytest.raises(gdbsim.GdbError):
        gdbsim.figure_csv("9q")


def test_run_to_dir(tmp_path):
    d1 = gdbsim.run_to_dir(str(SCENARIOS / "ring4.json"), str(tmp_path / "a"), 5)
    d2 = gdbsim.run_to_dir(str(SCENARIOS / "ring4.json"), str(tmp_path / "b"), 5)
    assert d1 == d2
    assert set(d1) == {"trace.jsonl", "bounds.csv", "detection.json"}
    assert (tmp_path / "a" / "manifest.json").exists()
