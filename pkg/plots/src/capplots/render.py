"""Figure rendering from validated trace/snapshot data.

Three figure kinds:

* ``traces``    time series of entropy, volume, and the stationarity
                residual (log scale) on a shared time axis;
* ``profiles``  overlaid support profiles h(angle) from body snapshots;
* ``embedding`` the planar curve of a FULL1D snapshot together with its
                wetting segment on the floor, equal aspect.

The embedding uses the same reconstruction the solver documents (gradient of
the support plus the support times the direction); central differences in the
interior, one-sided at the ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from .schema import load_snapshot, load_trace, snapshot_nodes

KINDS = ("traces", "profiles", "embedding")


@dataclass
class PlotSpec:
    kind: str
    output: Path
    traces: list[Path] = field(default_factory=list)
    snapshots: list[Path] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        self.output = Path(self.output)
        self.traces = [Path(p) for p in self.traces]
        self.snapshots = [Path(p) for p in self.snapshots]


def _render_traces(spec: PlotSpec):
    if not spec.traces:
        raise ValueError("traces plot needs at least one --trace file")
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 8))
    for path in spec.traces:
        data = load_trace(path)
        label = path.parent.name or path.stem
        axes[0].plot(data["t"], data["entropy"], label=label)
        axes[1].plot(data["t"], data["volume"], label=label)
        positive = data["res_sup"] > 0
        axes[2].semilogy(data["t"][positive], data["res_sup"][positive],
                         label=label)
    axes[0].set_ylabel("entropy")
    axes[1].set_ylabel("volume")
    axes[2].set_ylabel("stationarity residual (sup)")
    axes[2].set_xlabel("t")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def _render_profiles(spec: PlotSpec):
    if not spec.snapshots:
        raise ValueError("profiles plot needs at least one --snapshot file")
    fig, ax = plt.subplots(figsize=(7, 5))
    for path in spec.snapshots:
        snap = load_snapshot(path)
        nodes = snapshot_nodes(snap)
        label = snap["meta"].get("label") or path.stem
        ax.plot(nodes, snap["h"], label=label)
    ax.set_xlabel("polar angle of the normal")
    ax.set_ylabel("support h")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def _embedded_curve(snap: dict) -> np.ndarray:
    nodes = snapshot_nodes(snap)
    h = snap["h"]
    dx = nodes[1] - nodes[0]
    hp = np.empty_like(h)
    hp[1:-1] = (h[2:] - h[:-2]) / (2 * dx)
    hp[0] = (-3 * h[0] + 4 * h[1] - h[2]) / (2 * dx)
    hp[-1] = (3 * h[-1] - 4 * h[-2] + h[-3]) / (2 * dx)
    x = hp * np.cos(nodes) + h * np.sin(nodes)
    y = -hp * np.sin(nodes) + h * np.cos(nodes)
    return np.column_stack([x, y])


def _render_embedding(spec: PlotSpec):
    if not spec.snapshots:
        raise ValueError("embedding plot needs at least one --snapshot file")
    fig, ax = plt.subplots(figsize=(6, 6))
    for path in spec.snapshots:
        snap = load_snapshot(path)
        if snap["mode"] != "full1d":
            raise ValueError(
                f"{path}: embedding plots are for full1d snapshots")
        curve = _embedded_curve(snap)
        label = snap["meta"].get("label") or path.stem
        line, = ax.plot(curve[:, 0], curve[:, 1], label=label)
        ax.plot([curve[0, 0], curve[-1, 0]], [curve[0, 1], curve[-1, 1]],
                color=line.get_color(), linestyle="--", linewidth=1)
    ax.axhline(0.0, color="k", linewidth=0.5)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("height")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> Path:
    """Render one figure and write it to spec.output (format by extension)."""
    if spec.kind == "traces":
        fig = _render_traces(spec)
    elif spec.kind == "profiles":
        fig = _render_profiles(spec)
    else:
        fig = _render_embedding(spec)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output)
    plt.close(fig)
    return spec.output
