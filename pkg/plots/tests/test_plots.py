"""Schema validation and figure rendering.

Unit tests run on hand-written files that follow the documented schemas; the
final test drives the actual solver CLI end to end (the normalized reference
run) and renders all three figure kinds from its outputs.
"""

import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from capplots import PlotSpec, SchemaMismatch, load_snapshot, load_trace, render
from conftest import record_criterion

HEADER = ("t,dt,volume,entropy,entropy_point_1,k_min,k_max,lambda_min,"
          "lambda_max,u_min,u_max,phi_max,res_sup,res_l2,norm_coeff")


def write_trace(path, rows=6):
    lines = [HEADER]
    for i in range(rows):
        t = 0.05 * i
        vals = [t, 1e-4, 0.61, 0.01 * math.exp(-t), 0.001, 0.9, 1.1,
                0.9, 1.1, 0.95, 1.05, 2.0, 1e-2 * math.exp(-2 * t),
                5e-3 * math.exp(-2 * t), 1.0]
        lines.append(",".join(f"{v:.17g}" for v in vals))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_snapshot(path, theta=math.pi / 3, count=65, radius=1.0,
                   label="cap"):
    nodes = np.linspace(-theta, theta, count)
    h = radius * (1.0 - math.cos(theta) * np.cos(nodes))
    payload = {
        "n": 1, "theta": theta, "mode": "full1d", "node_count": count,
        "h": [float(v) for v in h],
        "meta": {"label": label, "created_by": "test"},
    }
    path.write_text(json.dumps(payload))
    return path


def test_load_trace_roundtrip(tmp_path):
    data = load_trace(write_trace(tmp_path / "trace.csv"))
    assert set(data) == set(HEADER.split(","))
    assert data["t"].size == 6


def test_empty_trace_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaMismatch):
        load_trace(path)


def test_truncated_header_rejected(tmp_path):
    path = tmp_path / "trunc.csv"
    full = write_trace(tmp_path / "full.csv").read_text().splitlines()
    truncated = [",".join(line.split(",")[:-2]) for line in full]
    path.write_text("\n".join(truncated) + "\n")
    with pytest.raises(SchemaMismatch):
        load_trace(path)


def test_unknown_column_rejected(tmp_path):
    path = tmp_path / "extra.csv"
    full = write_trace(tmp_path / "full.csv").read_text().splitlines()
    path.write_text("\n".join(line + ",surprise" for line in full) + "\n")
    with pytest.raises(SchemaMismatch):
        load_trace(path)


def test_ragged_row_rejected(tmp_path):
    path = write_trace(tmp_path / "ragged.csv")
    lines = path.read_text().splitlines()
    lines[3] = lines[3] + ",0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaMismatch):
        load_trace(path)


def test_load_snapshot_and_validation(tmp_path):
    snap = load_snapshot(write_snapshot(tmp_path / "body.json"))
    assert snap["h"].size == snap["node_count"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 1}))
    with pytest.raises(SchemaMismatch):
        load_snapshot(bad)
    wrong_len = json.loads((tmp_path / "body.json").read_text())
    wrong_len["h"] = wrong_len["h"][:-3]
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps(wrong_len))
    with pytest.raises(SchemaMismatch):
        load_snapshot(bad2)


@pytest.mark.parametrize("ext", ["png", "svg"])
def test_render_traces(tmp_path, ext):
    trace = write_trace(tmp_path / "trace.csv")
    out = render(PlotSpec(kind="traces", output=tmp_path / f"fig.{ext}",
                          traces=[trace]))
    assert out.exists() and out.stat().st_size > 0


def test_render_profiles(tmp_path):
    snaps = [write_snapshot(tmp_path / "a.json", radius=1.0, label="start"),
             write_snapshot(tmp_path / "b.json", radius=0.7, label="later")]
    out = render(PlotSpec(kind="profiles", output=tmp_path / "profiles.png",
                          snapshots=snaps))
    assert out.exists() and out.stat().st_size > 0


def test_embedding_is_circular_arc_for_cap(tmp_path):
    from capplots.render import _embedded_curve
    theta = math.pi / 3
    snap = load_snapshot(write_snapshot(tmp_path / "cap.json", theta=theta,
                                        count=129))
    curve = _embedded_curve(snap)
    # unit-cap curve: distance 1 from (0, -cos theta), rim at +-sin(theta)
    center = np.array([0.0, -math.cos(theta)])
    radii = np.hypot(*(curve - center).T)
    assert np.max(np.abs(radii - 1.0)) <= 1e-3
    assert abs(curve[-1, 0] - math.sin(theta)) <= 1e-3
    assert abs(curve[0, 0] + math.sin(theta)) <= 1e-3
    out = render(PlotSpec(kind="embedding", output=tmp_path / "emb.png",
                          snapshots=[tmp_path / "cap.json"]))
    assert out.exists()


def test_cli_schema_mismatch_exits_nonzero(tmp_path):
    from capplots.cli import main
    path = tmp_path / "trunc.csv"
    full = write_trace(tmp_path / "full.csv").read_text().splitlines()
    path.write_text("\n".join(",".join(l.split(",")[:-2]) for l in full))
    code = main(["--kind", "traces", "--trace", str(path),
                 "--out", str(tmp_path / "fig.png")])
    assert code != 0


def test_cli_renders(tmp_path):
    from capplots.cli import main
    trace = write_trace(tmp_path / "trace.csv")
    code = main(["--kind", "traces", "--trace", str(trace),
                 "--out", str(tmp_path / "fig.png")])
    assert code == 0
    assert (tmp_path / "fig.png").exists()


def test_criterion_13_end_to_end(tmp_path):
    """Render all figure kinds from the normalized reference run's outputs;
    a truncated CSV must exit nonzero."""
    capflow = shutil.which("capflow")
    if capflow is None:
        record_criterion("criterion-13 plot-scripts", False,
                         "capflow CLI not installed")
        pytest.skip("capflow CLI not on PATH")
    run_dir = tmp_path / "run"
    proc = subprocess.run(
        [capflow, "normalize", "--n", "1", "--theta", "1.0471975511965976",
         "--init", "random:amp=0.1,modes=3,seed=7", "--nodes", "201",
         "--tmax", "30", "--stop-rate", "0", "--trace-stride", "1000",
         "--out", str(run_dir)],
        capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr

    plots = shutil.which("capflow-plots")
    assert plots is not None
    outputs = []
    for kind, inputs in (
            ("traces", ["--trace", str(run_dir / "trace.csv")]),
            ("profiles", ["--snapshot", str(run_dir / "body_initial.json"),
                          "--snapshot", str(run_dir / "body_final.json")]),
            ("embedding", ["--snapshot", str(run_dir / "body_final.json")])):
        out = tmp_path / f"{kind}.png"
        proc = subprocess.run([plots, "--kind", kind, *inputs,
                               "--out", str(out)],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0, proc.stderr
        assert out.exists() and out.stat().st_size > 0
        outputs.append(out)

    truncated = tmp_path / "truncated.csv"
    lines = (run_dir / "trace.csv").read_text().splitlines()
    truncated.write_text(
        "\n".join(",".join(l.split(",")[:-2]) for l in lines) + "\n")
    proc = subprocess.run([plots, "--kind", "traces", "--trace",
                           str(truncated), "--out",
                           str(tmp_path / "bad.png")],
                          capture_output=True, text=True, timeout=120)
    ok = proc.returncode != 0
    record_criterion(
        "criterion-13 plot-scripts", ok,
        f"{len(outputs)} figures rendered; truncated CSV exit "
        f"{proc.returncode}")
    assert ok
