"""Point splatting and bidirectional blend compositing.

Each frame renders the point cloud twice: displaced forward to time t
and displaced backward to t - N. The two renders are merged by a
per-pixel weight that ramps with time (so frame 0 and frame N are
identical), prefers nearer depths, and treats coverage as a gate.
Remaining holes are filled by harmonic diffusion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import solver
from .assets import ColorImage, FlowField
from .motion import DisplacementField, euler_integrate
from .scene import Camera, LayeredScene, PointCloud, displace, lift_flow

logger = logging.getLogger(__name__)

WEIGHT_EPSILON = 1e-8
DEPTH_RANGE_EPSILON = 1e-8
HOLE_FILL_TOLERANCE = 1e-4
HOLE_FILL_MAX_ITERS = 5000


@dataclass(frozen=True)
class RenderConfig:
    """Splat and blend knobs (config keys splat.*, blend.*, cull.*)."""

    mode: str = "soft"
    radius_px: float = 1.0
    z_window: float = 0.01
    sharpness: float = 10.0
    near: float = 1e-3

    def __post_init__(self):
        if self.mode not in ("nearest", "soft"):
            raise ValueError(f"splat mode must be 'nearest' or 'soft', got {self.mode!r}")
        if self.radius_px <= 0:
            raise ValueError("radius_px must be positive")
        if self.z_window < 0:
            raise ValueError("z_window must be >= 0")
        if self.near <= 0:
            raise ValueError("near plane must be positive")


@dataclass
class RenderLayers:
    """One direction's splat output: color, depth, coverage.

    Uncovered pixels have alpha 0 and depth 0; color is already
    un-premultiplied wherever alpha is positive.
    """

    color: np.ndarray
    depth: np.ndarray
    alpha: np.ndarray

    @property
    def covered(self) -> np.ndarray:
        return self.alpha > 0


@dataclass
class WeightMap:
    """Per-pixel forward-blend factor in [0, 1] plus the hole mask.

    A pixel is a hole when neither direction carries positive blend
    weight there; the weight value is meaningless on holes.
    """

    values: np.ndarray
    holes: np.ndarray


@dataclass
class Frame:
    """Composited output at one time step."""

    color: ColorImage
    depth: np.ndarray
    time_index: int
    camera: Camera | None = None
    holes_filled: int = 0


def _round_half_up(values: np.ndarray) -> np.ndarray:
    # Deterministic pixel snapping: half-way coordinates go toward +inf.
    return np.floor(values + 0.5).astype(np.int64)


def _zbuffer_first(flat: np.ndarray, depth: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Winning entry per pixel: minimum depth, then minimum input index.

    lexsort is stable, so equal (pixel, depth) pairs keep input order,
    which makes parallel-safe tie-breaking by point index automatic.
    """
    order = np.lexsort((depth, flat))
    flat_sorted = flat[order]
    first = np.flatnonzero(np.r_[True, flat_sorted[1:] != flat_sorted[:-1]])
    return flat_sorted[first], order[first]


def splat(
    cloud: PointCloud,
    camera: Camera,
    size: tuple[int, int],
    config: RenderConfig | None = None,
) -> RenderLayers:
    """Project the cloud into the camera and rasterize it.

    nearest: each point lands on its rounded pixel; minimum depth wins,
    ties broken by smaller point index; alpha is 0 or 1.
    soft: a separable tent footprint of radius_px spreads each point
    over nearby pixels; per pixel, contributions within the relative
    z_window of the nearest incoming depth accumulate with coverage
    weights, alpha saturating at 1 and depth being the weighted mean.
    """
    config = config or RenderConfig()
    width, height = size
    color = np.zeros((height, width, 3), dtype=np.float64)
    depth = np.zeros((height, width), dtype=np.float64)
    alpha = np.zeros((height, width), dtype=np.float64)
    layers = RenderLayers(color, depth, alpha)
    if len(cloud) == 0:
        return layers

    cam_points = camera.transform(cloud.positions)
    z = cam_points[:, 2]
    keep = z > config.near
    if not keep.any():
        return layers
    cam_points = cam_points[keep]
    z = z[keep]
    point_colors = cloud.colors[keep]
    px = camera.fx * cam_points[:, 0] / z + camera.cx
    py = camera.fy * cam_points[:, 1] / z + camera.cy

    if config.mode == "nearest":
        ix = _round_half_up(px)
        iy = _round_half_up(py)
        inside = (ix >= 0) & (ix < width) & (iy >= 0) & (iy < height)
        if not inside.any():
            return layers
        flat = iy[inside] * width + ix[inside]
        pixels, winners = _zbuffer_first(flat, z[inside])
        color.reshape(-1, 3)[pixels] = point_colors[inside][winners]
        depth.reshape(-1)[pixels] = z[inside][winners]
        alpha.reshape(-1)[pixels] = 1.0
        return layers

    radius = config.radius_px
    taps = max(1, int(np.ceil(2.0 * radius)))
    base_x = np.floor(px - radius).astype(np.int64) + 1
    base_y = np.floor(py - radius).astype(np.int64) + 1
    offsets = np.arange(taps)
    tap_x = base_x[:, None] + offsets[None, :]
    tap_y = base_y[:, None] + offsets[None, :]
    wx = np.maximum(0.0, 1.0 - np.abs(tap_x - px[:, None]) / radius)
    wy = np.maximum(0.0, 1.0 - np.abs(tap_y - py[:, None]) / radius)

    gx = np.repeat(tap_x, taps, axis=1)
    gy = np.tile(tap_y, (1, taps))
    w = (np.repeat(wx, taps, axis=1) * np.tile(wy, (1, taps))).ravel()
    gx = gx.ravel()
    gy = gy.ravel()
    point_index = np.repeat(np.arange(len(z)), taps * taps)
    keep_tap = (w > 0) & (gx >= 0) & (gx < width) & (gy >= 0) & (gy < height)
    if not keep_tap.any():
        return layers
    w = w[keep_tap]
    flat = gy[keep_tap] * width + gx[keep_tap]
    tap_depth = z[point_index[keep_tap]]
    tap_color = point_colors[point_index[keep_tap]]

    pixels, winners = _zbuffer_first(flat, tap_depth)
    min_depth = np.full(width * height, np.inf)
    min_depth[pixels] = tap_depth[winners]
    accept = tap_depth <= min_depth[flat] * (1.0 + config.z_window)
    w = w[accept]
    flat = flat[accept]
    tap_depth = tap_depth[accept]
    tap_color = tap_color[accept]

    n = width * height
    wsum = np.bincount(flat, weights=w, minlength=n)
    wz = np.bincount(flat, weights=w * tap_depth, minlength=n)
    covered = wsum > 0
    safe = np.where(covered, wsum, 1.0)
    for channel in range(3):
        wc = np.bincount(flat, weights=w * tap_color[:, channel], minlength=n)
        color.reshape(-1, 3)[:, channel] = np.where(covered, wc / safe, 0.0)
    depth.reshape(-1)[:] = np.where(covered, wz / safe, 0.0)
    alpha.reshape(-1)[:] = np.where(covered, np.minimum(wsum, 1.0), 0.0)
    return layers


def blend_weights(
    fwd: RenderLayers,
    bwd: RenderLayers,
    t: int,
    num_frames: int,
    sharpness: float = 10.0,
) -> WeightMap:
    """Forward blend factor: time ramp x coverage x depth preference.

    Depths from both directions are normalized jointly to [0, 1] before
    entering exp(-sharpness * depth), which keeps the preference for
    nearer content stable under arbitrary monocular depth scales. The
    two weights are normalized per pixel by their maximum before the
    epsilon guard is added, so the guard can never bias pixels that are
    carried by a single direction; those reduce exactly to 1 or 0.
    """
    if num_frames < 1:
        raise ValueError("num_frames must be >= 1")
    if not 0 <= t <= num_frames:
        raise ValueError(f"t must lie in [0, {num_frames}], got {t}")
    if fwd.color.shape != bwd.color.shape:
        raise ValueError("forward and backward layers differ in size")

    tau = t / num_frames
    covered_f = fwd.covered
    covered_b = bwd.covered
    any_cover = covered_f | covered_b
    values = np.zeros_like(fwd.depth)
    holes = ~any_cover
    if not any_cover.any():
        return WeightMap(values, holes)

    observed = np.concatenate([fwd.depth[covered_f], bwd.depth[covered_b]])
    d_min = observed.min()
    scale = observed.max() - d_min + DEPTH_RANGE_EPSILON
    weight_f = np.zeros_like(fwd.depth)
    weight_b = np.zeros_like(bwd.depth)
    weight_f[covered_f] = (
        (1.0 - tau)
        * fwd.alpha[covered_f]
        * np.exp(-sharpness * (fwd.depth[covered_f] - d_min) / scale)
    )
    weight_b[covered_b] = (
        tau
        * bwd.alpha[covered_b]
        * np.exp(-sharpness * (bwd.depth[covered_b] - d_min) / scale)
    )

    has_f = weight_f > 0
    has_b = weight_b > 0
    values[has_f & ~has_b] = 1.0
    both = has_f & has_b
    if both.any():
        wf = weight_f[both]
        wb = weight_b[both]
        m = np.maximum(wf, wb)
        values[both] = (wf / m) / ((wf + wb) / m + WEIGHT_EPSILON)
    # At t = 0 and t = N one time factor is exactly zero; covered pixels
    # whose surviving direction has no coverage become holes, keeping
    # the first and the last frame of the loop identical.
    holes = ~has_f & ~has_b
    return WeightMap(values, holes)


def composite(fwd: RenderLayers, bwd: RenderLayers, weights: WeightMap) -> Frame:
    """Blend the two renders and diffuse into the remaining holes."""
    w = weights.values
    # Lerp in the form b + w*(f - b), then write W == 1 pixels through:
    # both endpoints and equal inputs reproduce exactly in floating
    # point, which the loop-closure and reprojection guarantees rely on.
    color = bwd.color + w[:, :, None] * (fwd.color - bwd.color)
    depth = bwd.depth + w * (fwd.depth - bwd.depth)
    pure_forward = w == 1.0
    color[pure_forward] = fwd.color[pure_forward]
    depth[pure_forward] = fwd.depth[pure_forward]
    holes_filled = 0
    if weights.holes.any():
        stacked = np.concatenate([color, depth[:, :, None]], axis=2)
        stacked[weights.holes] = 0.0
        filled_values, _, filled = solver.fill_region(
            stacked, weights.holes, HOLE_FILL_TOLERANCE, HOLE_FILL_MAX_ITERS
        )
        if filled.any():
            color[filled] = filled_values[:, :, :3][filled]
            depth[filled] = filled_values[:, :, 3][filled]
            holes_filled = int(filled.sum())
        unfilled = weights.holes & ~filled
        if unfilled.any():
            color[unfilled] = 0.0
            depth[unfilled] = 0.0
            logger.warning(
                "%d hole pixels had no covered boundary; filled with black",
                int(unfilled.sum()),
            )
    return Frame(
        color=ColorImage(np.clip(color, 0.0, 1.0)),
        depth=np.maximum(depth, 0.0),
        time_index=0,
        holes_filled=holes_filled,
    )


def render_view(
    scene: LayeredScene,
    field: FlowField,
    t: int,
    num_frames: int,
    camera: Camera,
    config: RenderConfig | None = None,
    displacements: tuple[DisplacementField, DisplacementField] | None = None,
) -> Frame:
    """Render one loop frame: displace the cloud forward to t and
    backward to t - N, splat both into the camera, and blend.

    `displacements` optionally supplies precomputed (forward to t,
    backward to t - N) fields, letting a frame loop integrate the
    motion once instead of once per frame; values must match what
    euler_integrate produces for (t, N - t).
    """
    config = config or RenderConfig()
    if num_frames < 1:
        raise ValueError("num_frames must be >= 1")
    if not 0 <= t <= num_frames:
        raise ValueError(f"t must lie in [0, {num_frames}], got {t}")
    height = scene.layers[0].color.height
    width = scene.layers[0].color.width
    size = (width, height)

    if displacements is None:
        fwd_displacement = euler_integrate(field, t, "forward")
        bwd_displacement = euler_integrate(field, num_frames - t, "backward")
    else:
        fwd_displacement, bwd_displacement = displacements
        if fwd_displacement.time_index != t or bwd_displacement.time_index != -(num_frames - t):
            raise ValueError("supplied displacement fields do not match (t, N - t)")
    cloud_f = displace(scene.cloud, lift_flow(fwd_displacement, scene.cloud, scene.camera))
    cloud_b = displace(scene.cloud, lift_flow(bwd_displacement, scene.cloud, scene.camera))
    fwd = splat(cloud_f, camera, size, config)
    bwd = splat(cloud_b, camera, size, config)
    weights = blend_weights(fwd, bwd, t, num_frames, config.sharpness)
    frame = composite(fwd, bwd, weights)
    return replace(frame, time_index=t, camera=camera)
