"""Smoke tests for the _trrip extension module."""
import json
import os
import tempfile

import pytest

import _trrip as trrip


def test_address_helpers():
    assert trrip.line_of(0, 64) == 0
    assert trrip.line_of(127, 64) == 1
    assert trrip.set_index(257, 256) == 1
    assert trrip.mpki(16680, 1_000_000) == pytest.approx(16.68)
    with pytest.raises(trrip.DataError):
        trrip.mpki(1, 0)


def test_classify():
    blocks = [("A", 64, 500), ("B", 64, 300), ("C", 64, 150), ("D", 64, 50), ("E", 64, 0)]
    temps = trrip.classify(blocks, percentile_hot=0.9, percentile_cold=0.9999)
    assert temps == {"A": "hot", "B": "hot", "C": "hot", "D": "warm", "E": "cold"}
    assert trrip.hot_count_threshold(blocks, 0.9) == 150


def test_generate_and_simulate():
    spec = {
        "pattern": "mixed_temperature",
        "hot_lines": 8,
        "cold_lines": 64,
        "data_lines": 64,
        "target_reuse_distance": 11,
        "hot_rotate": 1,
        "iterations": 120,
    }
    workload = trrip.generate(json.dumps(spec))
    trace = workload["trace"]
    assert len(trace) == 120 * 12  # 8 hot + 4 interferers per cycle

    srrip = trrip.simulate(trace, workload["map_json"],
                           json.dumps({"l2": {"policy": "srrip"}}))
    trrip1 = trrip.simulate(trace, workload["map_json"],
                            json.dumps({"l2": {"policy": "trrip1"}}))
    assert trrip1["l2"]["instr"]["misses"] < srrip["l2"]["instr"]["misses"]
    assert srrip["retired_instructions"] == sum(1 for k, _, _ in trace if k == "I")


def test_trace_file_round_trip(tmp_path):
    trace = [("I", 0x4000, 0x4000), ("L", 0x100, 0x4000), ("S", 0x200, 0x4000)]
    path = str(tmp_path / "t.bin")
    trrip.write_trace(path, trace, "binary")
    assert trrip.read_trace(path) == trace
    assert os.path.getsize(path) == 13 + 17 * 3


def test_reuse_histogram():
    spec = {
        "pattern": "mixed_temperature",
        "hot_lines": 8,
        "cold_lines": 4,
        "target_reuse_distance": 11,
        "hot_rotate": 0,
        "iterations": 30,
    }
    workload = trrip.generate(json.dumps(spec))
    hist = trrip.reuse_histogram(workload["trace"], workload["map_json"])
    bins = dict(hist["bins"])
    assert bins["9-12"] == hist["measured_reaccesses"]  # every distance is exactly 11


def test_reductions():
    assert trrip.mpki_reduction(16.68, 15.69) == pytest.approx(5.935, abs=1e-3)
    assert trrip.geomean_reduction([10.0, -10.0]) == pytest.approx(-0.5013, abs=1e-3)


def test_error_mapping():
    with pytest.raises(trrip.ConfigError):
        trrip.generate(json.dumps({"pattern": "mixed_temperature", "hot_lines": 8,
                                   "cold_lines": 0, "data_lines": 0,
                                   "target_reuse_distance": 11}))
    with pytest.raises(trrip.DataError):
        trrip.simulate([], "", "")
