"""Render diagnostics: matplotlib figures plus a per-frame stats CSV.

Written next to the frame sequence when a job enables `report`. The
figures are inspection aids (motion field, depth layering, hole
filling over the loop, camera path); the CSV is the machine-readable
record of the same run.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .assets import DepthMap, FlowField
from .pipeline import FrameStat, Trajectory
from .scene import LayeredScene


def write_report(
    directory,
    *,
    stats: list[FrameStat],
    field: FlowField,
    depth: DepthMap,
    scene: LayeredScene,
    trajectory: Trajectory,
) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [
        _write_stats_csv(directory / "frame_stats.csv", stats),
        _plot_motion(directory / "motion_field.png", field),
        _plot_depth_layers(directory / "depth_layers.png", depth, scene),
        _plot_coverage(directory / "coverage.png", stats),
        _plot_trajectory(directory / "trajectory.png", trajectory),
    ]
    return written


def _write_stats_csv(path: Path, stats: list[FrameStat]) -> Path:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["frame", "path", "seconds", "holes_filled"])
        for stat in stats:
            writer.writerow(
                [stat.index, stat.path.name, f"{stat.seconds:.4f}", stat.holes_filled]
            )
    return path


def _plot_motion(path: Path, field: FlowField) -> Path:
    magnitude = np.hypot(field.data[:, :, 0], field.data[:, :, 1])
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    im = axes[0].imshow(magnitude, cmap="viridis")
    axes[0].set_title("|M| (px/frame)")
    fig.colorbar(im, ax=axes[0], fraction=0.046)
    step = max(1, min(field.width, field.height) // 24)
    ys, xs = np.mgrid[0 : field.height : step, 0 : field.width : step]
    if magnitude.max() > 0:
        axes[1].quiver(
            xs,
            ys,
            field.data[::step, ::step, 0],
            -field.data[::step, ::step, 1],
            angles="xy",
            scale_units="xy",
            color="tab:blue",
        )
    axes[1].set_ylim(field.height, 0)
    axes[1].set_xlim(0, field.width)
    axes[1].set_aspect("equal")
    axes[1].set_title("motion vectors")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_depth_layers(path: Path, depth: DepthMap, scene: LayeredScene) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(depth.data.ravel(), bins=96, color="0.6")
    for low, high in scene.intervals.intervals:
        ax.axvspan(low, high, color="tab:orange", alpha=0.25)
    ax.set_xlabel("depth")
    ax.set_ylabel("pixels")
    ax.set_title(f"depth histogram with {len(scene.intervals)} layer interval(s)")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_coverage(path: Path, stats: list[FrameStat]) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([s.index for s in stats], [s.holes_filled for s in stats], marker="o")
    ax.set_xlabel("frame")
    ax.set_ylabel("hole pixels filled")
    ax.set_title("diffusion-filled holes per frame")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_trajectory(path: Path, trajectory: Trajectory) -> Path:
    centers = np.stack([camera.center for camera in trajectory.cameras])
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(centers[:, 0], centers[:, 2], "-o", markersize=3)
    ax.plot(centers[0, 0], centers[0, 2], "s", color="tab:red", label="frame 0 / N")
    ax.set_xlabel("x (world)")
    ax.set_ylabel("z (world)")
    ax.set_title(f"camera path: {trajectory.preset}")
    ax.legend()
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
