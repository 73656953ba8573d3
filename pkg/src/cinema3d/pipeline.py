"""Camera trajectories and end-to-end cinemagraph rendering.

Trajectory presets are sinusoidal in the frame index so the camera
pose, like the time blend, closes the loop exactly: pose(0) == pose(N)
bit for bit. Translation amplitudes are fractions of the median scene
depth, which keeps presets scale-free across depth conventions; the
orbit amplitude is the swing angle in radians.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import motion as motion_mod
from .assets import AssetBundle, frame_filename, load_color, load_depth, load_flow, save_frame
from .config import TRAJECTORY_PRESETS, JobConfig
from .errors import ConfigError
from .renderer import Frame, render_view
from .scene import (
    Camera,
    DepthStats,
    LayeredScene,
    build_layered_scene,
    default_camera,
    dump_layers,
)

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """A loop-closed pose sequence: cameras[0] == cameras[N]."""

    preset: str
    amplitude: float
    cameras: list[Camera]

    def __len__(self) -> int:
        return len(self.cameras)


@dataclass
class FrameStat:
    index: int
    path: Path
    seconds: float
    holes_filled: int


def _orbit_pose(source: Camera, angle: float, pivot_depth: float) -> Camera:
    look_at = np.array([0.0, 0.0, pivot_depth])
    offset = np.array([0.0, 0.0, -pivot_depth])
    sin, cos = np.sin(angle), np.cos(angle)
    rot_y = np.array([[cos, 0.0, sin], [0.0, 1.0, 0.0], [-sin, 0.0, cos]])
    center = look_at + rot_y @ offset
    forward = look_at - center
    forward /= np.linalg.norm(forward)
    right = np.cross([0.0, 1.0, 0.0], forward)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    return source.with_pose(rotation, -rotation @ center)


def preset_pose(
    preset: str,
    amplitude: float,
    phase: float,
    intrinsics: Camera,
    depth_stats: DepthStats,
) -> Camera:
    """Pose of a preset at a continuous loop phase in [0, 1).

    still: source pose. zoom: dolly along +Z by a * sin^2(pi * phase).
    sway: slide along X by a * sin(2 pi * phase). orbit: swing around
    the optical-axis point at the median depth by a * sin(2 pi * phase)
    radians, re-aimed at that point. Translation amplitudes are
    fractions of the median depth.
    """
    if preset not in TRAJECTORY_PRESETS:
        raise ConfigError(f"unknown preset: {preset!r}")
    if amplitude < 0:
        raise ConfigError(f"amplitude must be >= 0, got {amplitude}")
    source = intrinsics.with_pose(np.eye(3), np.zeros(3))
    median = depth_stats.median
    if preset == "still":
        return source
    if preset == "zoom":
        shift = amplitude * median * np.sin(np.pi * phase) ** 2
        return source.with_pose(np.eye(3), np.array([0.0, 0.0, -shift]))
    if preset == "sway":
        shift = amplitude * median * np.sin(2.0 * np.pi * phase)
        return source.with_pose(np.eye(3), np.array([-shift, 0.0, 0.0]))
    angle = amplitude * np.sin(2.0 * np.pi * phase)
    return _orbit_pose(source, angle, median)


def make_trajectory(
    preset: str,
    amplitude: float,
    num_frames: int,
    intrinsics: Camera,
    depth_stats: DepthStats,
) -> Trajectory:
    """Build the N+1 loop-closed poses for a preset (see preset_pose)."""
    if num_frames < 1:
        raise ConfigError(f"frames must be >= 1, got {num_frames}")
    # Reducing k modulo N keeps the k = N pose bit-identical to k = 0
    # (sin(2*pi) is not exactly zero in floating point).
    cameras = [
        preset_pose(preset, amplitude, (k % num_frames) / num_frames, intrinsics, depth_stats)
        for k in range(num_frames + 1)
    ]
    return Trajectory(preset, amplitude, cameras)


def load_job_assets(config: JobConfig):
    """Decode all inputs, run the single dimension check, and build M."""
    color = load_color(config.image)
    depth = load_depth(config.depth, depth_scale=config.depth_scale)
    speed = config.speed
    if config.flow is not None:
        field = load_flow(config.flow)
        mask = None
    else:
        mask, hints, hint_speed = motion_mod.load_hints_document(config.hints)
        field = motion_mod.estimate_motion_from_hints(
            mask, hints, (color.width, color.height)
        )
        speed *= hint_speed
    AssetBundle(color=color, depth=depth, flow=field, mask=mask)
    if speed != 1.0:
        field = motion_mod.scale_flow(field, speed)
    return color, depth, field


def render_cinemagraph(config: JobConfig, workers: int = 1) -> list[Path]:
    """Run a full job: build the scene once, render frames 0..N-1,
    write them as zero-padded PNGs, and return the ordered paths.

    Frames render in a bounded worker pool but are written strictly in
    index order; the output is bit-identical for any worker count.
    """
    color, depth, field = load_job_assets(config)
    camera = default_camera(color.width, color.height, config.focal_px)
    scene = build_layered_scene(color, depth, camera, config.scene_params)
    trajectory = make_trajectory(
        config.trajectory, config.amplitude, config.frames, camera, scene.depth_stats
    )
    if config.dump_layers:
        dump_layers(scene.layers, config.out / "layers")

    config.out.mkdir(parents=True, exist_ok=True)
    num_frames = config.frames
    forward = motion_mod.integrate_sequence(field, num_frames, "forward")
    backward = motion_mod.integrate_sequence(field, num_frames, "backward")

    def render_one(index: int) -> tuple[Frame, float]:
        start = time.perf_counter()
        frame = render_view(
            scene,
            field,
            index,
            num_frames,
            trajectory.cameras[index],
            config.render_config,
            displacements=(forward[index], backward[num_frames - index]),
        )
        return frame, time.perf_counter() - start

    paths: list[Path] = []
    stats: list[FrameStat] = []
    workers = max(1, workers)
    logger.info("rendering %d frames with %d worker(s)", num_frames, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for index, (frame, seconds) in enumerate(pool.map(render_one, range(num_frames))):
            path = config.out / frame_filename(index)
            save_frame(frame.color, path)
            paths.append(path)
            stats.append(FrameStat(index, path, seconds, frame.holes_filled))

    if config.report:
        from . import report

        report.write_report(
            config.out / "report",
            stats=stats,
            field=field,
            depth=depth,
            scene=scene,
            trajectory=trajectory,
        )
    logger.info("wrote %d frames to %s", len(paths), config.out)
    return paths
