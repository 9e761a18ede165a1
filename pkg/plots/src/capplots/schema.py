"""Parsers for the solver's output files.

The trace CSV header is fixed:

    t,dt,volume,entropy,entropy_point_1..n,k_min,k_max,lambda_min,
    lambda_max,u_min,u_max,phi_max,res_sup,res_l2,norm_coeff

and a body snapshot is a JSON object {n, theta, mode, node_count, h, meta}.
Anything that deviates raises :class:`SchemaMismatch`; this package never
recomputes geometry beyond the transforms needed to draw.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

HEAD_COLUMNS = ["t", "dt", "volume", "entropy"]
TAIL_COLUMNS = ["k_min", "k_max", "lambda_min", "lambda_max", "u_min",
                "u_max", "phi_max", "res_sup", "res_l2", "norm_coeff"]
SNAPSHOT_KEYS = {"n", "theta", "mode", "node_count", "h", "meta"}


class SchemaMismatch(Exception):
    """Input file does not match the documented trace/snapshot schema."""


def _validate_header(header: list[str], path) -> int:
    if header[:len(HEAD_COLUMNS)] != HEAD_COLUMNS:
        raise SchemaMismatch(
            f"{path}: header must start with {','.join(HEAD_COLUMNS)}")
    rest = header[len(HEAD_COLUMNS):]
    n_points = 0
    while n_points < len(rest) and rest[n_points] == f"entropy_point_{n_points + 1}":
        n_points += 1
    if n_points == 0:
        raise SchemaMismatch(f"{path}: missing entropy_point_1 column")
    if rest[n_points:] != TAIL_COLUMNS:
        unknown = [c for c in rest[n_points:] if c not in TAIL_COLUMNS]
        missing = [c for c in TAIL_COLUMNS if c not in rest[n_points:]]
        raise SchemaMismatch(
            f"{path}: unknown columns {unknown}, missing columns {missing}")
    return n_points


def load_trace(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a trace CSV into column arrays keyed by header name."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise SchemaMismatch(f"{path}: empty trace file")
    header = [c.strip() for c in rows[0]]
    _validate_header(header, path)
    if len(rows) < 2:
        raise SchemaMismatch(f"{path}: no data rows")
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise SchemaMismatch(
                f"{path}: row {i + 2} has {len(row)} fields, "
                f"expected {len(header)}")
        try:
            data[i] = [float(v) for v in row]
        except ValueError as exc:
            raise SchemaMismatch(f"{path}: row {i + 2}: {exc}") from None
    return {name: data[:, j] for j, name in enumerate(header)}


def load_snapshot(path: str | Path) -> dict:
    """Parse and validate a body snapshot JSON."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict) or set(data) != SNAPSHOT_KEYS:
        got = set(data) if isinstance(data, dict) else type(data)
        raise SchemaMismatch(
            f"{path}: snapshot keys must be {sorted(SNAPSHOT_KEYS)}, "
            f"got {got}")
    if data["mode"] not in ("full1d", "axisymmetric"):
        raise SchemaMismatch(f"{path}: unknown mode {data['mode']!r}")
    h = np.asarray(data["h"], dtype=float)
    if h.ndim != 1 or h.size != int(data["node_count"]):
        raise SchemaMismatch(
            f"{path}: h has {h.size} samples, expected {data['node_count']}")
    data = dict(data)
    data["h"] = h
    return data


def snapshot_nodes(snapshot: dict) -> np.ndarray:
    """Angular nodes implied by (theta, mode, node_count)."""
    theta = float(snapshot["theta"])
    count = int(snapshot["node_count"])
    if snapshot["mode"] == "full1d":
        return np.linspace(-theta, theta, count)
    return np.linspace(0.0, theta, count)
