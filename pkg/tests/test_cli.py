"""Command-line interface: outputs, schemas, determinism, exit codes."""

import json
import math

import numpy as np
import pytest

import capflow as cf
from capflow.cli import main

THETA3 = "1.0471975511965976"


def test_toolkit_cap(tmp_path):
    out = tmp_path / "tk"
    code = main(["toolkit", "--body", "cap", "--theta", "0.7853981634",
                 "--n", "1", "--nodes", "201", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "toolkit_report.json").read_text())
    assert payload["santalo_point"][0] == pytest.approx(0.0, abs=1e-10)
    assert payload["entropy_value"] == pytest.approx(0.0, abs=1e-12)
    assert payload["bs_bound"] - payload["bs_product"] > 0.0


def test_shrink_writes_all_outputs(tmp_path):
    out = tmp_path / "run1"
    code = main(["shrink", "--n", "1", "--theta", THETA3, "--init", "cap:r=1",
                 "--nodes", "101", "--trace-stride", "5000",
                 "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["outcome"]["kind"] == "extinct"
    assert summary["outcome"]["t_est"] == pytest.approx(0.5, rel=1e-3)
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0].startswith("t,dt,volume,entropy,entropy_point_1,")
    body = cf.load_snapshot(out / "body_final.json")
    assert body.grid.node_count == 101


def test_normalize_converges_with_defaults(tmp_path):
    out = tmp_path / "run2"
    code = main(["normalize", "--n", "1", "--theta", THETA3,
                 "--init", "random:amp=0.1,modes=3,seed=7", "--nodes", "201",
                 "--tmax", "30", "--trace-stride", "2000", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["outcome"]["kind"] == "converged"
    rows = (out / "trace.csv").read_text().splitlines()[1:]
    entropy = [float(r.split(",")[3]) for r in rows]
    assert all(b <= a + 1e-6 for a, b in zip(entropy, entropy[1:]))


def test_soliton_command(tmp_path):
    out = tmp_path / "sol"
    code = main(["soliton", "--n", "1", "--theta", THETA3, "--nodes", "101",
                 "--init", "random:amp=0.05,modes=2,seed=3",
                 "--out", str(out)])
    assert code == 0
    report = json.loads((out / "soliton_report.json").read_text())
    assert report["converged"] is True
    assert report["residual_sup"] <= 1e-10


def test_determinism_byte_identical(tmp_path):
    args = ["normalize", "--n", "1", "--theta", THETA3,
            "--init", "random:amp=0.1,modes=3,seed=7", "--nodes", "101",
            "--tmax", "0.5", "--stop-rate", "0", "--trace-stride", "500"]
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(args + ["--out", str(out)]) == 0
        outs.append(out)
    for name in ("trace.csv", "summary.json", "body_final.json",
                 "body_initial.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_theta_degrees_flag(tmp_path):
    out = tmp_path / "deg"
    code = main(["toolkit", "--body", "cap", "--theta-deg", "60",
                 "--n", "1", "--nodes", "101", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "toolkit_report.json").read_text())
    assert payload["grid"]["theta"] == pytest.approx(math.pi / 3, rel=1e-12)


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "n": 1, "theta": float(THETA3), "nodes": 101,
        "init": "cap:r=1", "tmax": 0.01, "trace_stride": 100,
        "out": str(tmp_path / "fromcfg"),
    }))
    code = main(["--config", str(cfg), "shrink"])
    assert code == 0
    assert (tmp_path / "fromcfg" / "summary.json").exists()


def test_sweep_alpha(tmp_path):
    out = tmp_path / "sweep"
    code = main(["sweep", "--run", "shrink", "--param", "alpha",
                 "--values", "1,2", "--n", "1", "--theta", THETA3,
                 "--init", "cap:r=1", "--nodes", "101",
                 "--trace-stride", "20000", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "sweep.json").read_text())
    assert len(payload) == 2
    assert payload[0]["outcome"]["t_est"] == pytest.approx(0.5, rel=1e-3)
    assert payload[1]["outcome"]["t_est"] == pytest.approx(1 / 3, rel=1e-3)


def test_bad_arguments_exit_two(tmp_path):
    assert main(["shrink", "--n", "1", "--theta", THETA3,
                 "--init", "bogus:spec", "--nodes", "101",
                 "--out", str(tmp_path / "x")]) == 2
    assert main(["shrink"]) == 2
    assert main(["toolkit", "--body", "cap", "--n", "1", "--nodes", "101",
                 "--out", str(tmp_path / "y")]) == 2  # theta missing


def test_runtime_abort_exit_three(tmp_path):
    # drifting normalized run without re-centering aborts mid-flight
    code = main(["normalize", "--n", "1", "--theta", THETA3,
                 "--init", "random:amp=0.1,modes=3,seed=7", "--nodes", "101",
                 "--tmax", "40", "--stop-rate", "0", "--recenter", "0",
                 "--trace-stride", "50000", "--out", str(tmp_path / "z")])
    assert code == 3


def test_snapshot_body_roundtrip_through_cli(tmp_path):
    out1 = tmp_path / "first"
    assert main(["shrink", "--n", "1", "--theta", THETA3, "--init",
                 "cap:r=1", "--nodes", "101", "--tmax", "0.05",
                 "--trace-stride", "1000", "--out", str(out1)]) == 0
    out2 = tmp_path / "second"
    assert main(["toolkit", "--n", "1", "--theta", THETA3, "--nodes", "101",
                 "--body", f"file:{out1 / 'body_final.json'}",
                 "--out", str(out2)]) == 0
    payload = json.loads((out2 / "toolkit_report.json").read_text())
    assert payload["entropy_value"] < 0.0  # body shrank below unit size
