"""Layered 3D scene construction from a single RGB-D input.

The depth range is split into intervals by 1-D single-linkage
clustering, the image is separated into one layer per interval
(farther layers first), occluded parts of each layer are filled by
harmonic diffusion inside a band around the layer's visible content,
and every valid layer pixel is unprojected to an RGB-attributed 3D
point. 2D displacement fields lift to 3D scene flow at constant depth.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import solver
from .assets import (
    DEPTH_FLOOR,
    ColorImage,
    DepthMap,
    MaskImage,
    save_frame,
    save_mask,
    save_pfm,
)
from .errors import RenderError
from .motion import DisplacementField, sample_bilinear

logger = logging.getLogger(__name__)

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

INPAINT_TOLERANCE = 1e-4
INPAINT_MAX_ITERS = 5000


@dataclass(frozen=True)
class Camera:
    """Pinhole intrinsics plus a world-to-camera rigid pose.

    The source view is the world frame by convention (identity pose);
    trajectory poses are expressed relative to it.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "rotation", np.ascontiguousarray(self.rotation, dtype=np.float64)
        )
        object.__setattr__(
            self, "translation", np.ascontiguousarray(self.translation, dtype=np.float64)
        )
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.rotation.shape != (3, 3) or self.translation.shape != (3,):
            raise ValueError("pose must be a 3x3 rotation and a 3-vector")
        gram_error = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if gram_error > 1e-6:
            raise ValueError(f"rotation not orthonormal (|R'R - I| = {gram_error:.2e})")
        if abs(np.linalg.det(self.rotation) - 1.0) > 1e-6:
            raise ValueError("rotation must have determinant +1")

    @classmethod
    def identity(cls, fx: float, fy: float, cx: float, cy: float) -> "Camera":
        return cls(fx, fy, cx, cy, np.eye(3), np.zeros(3))

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates: -R^T t."""
        return -self.rotation.T @ self.translation

    def with_pose(self, rotation: np.ndarray, translation: np.ndarray) -> "Camera":
        return Camera(self.fx, self.fy, self.cx, self.cy, rotation, translation)

    def transform(self, points: np.ndarray) -> np.ndarray:
        """World points (N, 3) to camera coordinates."""
        return points @ self.rotation.T + self.translation

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """World points (N, 3) to continuous pixel coords and depths."""
        cam = self.transform(points)
        z = cam[:, 2]
        xy = np.empty((len(points), 2), dtype=np.float64)
        xy[:, 0] = self.fx * cam[:, 0] / z + self.cx
        xy[:, 1] = self.fy * cam[:, 1] / z + self.cy
        return xy, z

    def unproject_pixels(self, xs, ys, depths) -> np.ndarray:
        """Pixel coords + depth to points in this camera's own frame."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        depths = np.asarray(depths, dtype=np.float64)
        return np.stack(
            [
                (xs - self.cx) / self.fx * depths,
                (ys - self.cy) / self.fy * depths,
                depths,
            ],
            axis=-1,
        )


@dataclass(frozen=True)
class DepthIntervals:
    """Disjoint ascending [low, high] depth ranges covering the input.

    `threshold_abs` is the clustering gap threshold in absolute depth
    units; inpainted depth may wander that far outside its interval.
    """

    intervals: tuple[tuple[float, float], ...]
    threshold_abs: float

    def __len__(self) -> int:
        return len(self.intervals)

    def assign(self, depths: np.ndarray) -> np.ndarray:
        """Ascending interval index per value; gap midpoints go to the
        nearer (lower) interval."""
        if len(self.intervals) == 1:
            return np.zeros(np.shape(depths), dtype=np.int64)
        lows = np.array([iv[0] for iv in self.intervals])
        highs = np.array([iv[1] for iv in self.intervals])
        edges = 0.5 * (highs[:-1] + lows[1:])
        return np.searchsorted(edges, depths, side="left")


@dataclass
class LdiLayer:
    """One depth layer: color, depth, validity, and inpainting origin."""

    color: ColorImage
    depth: DepthMap
    valid: MaskImage
    inpainted: MaskImage
    interval: tuple[float, float]

    def original(self) -> np.ndarray:
        return self.valid.as_bool() & ~self.inpainted.as_bool()


@dataclass
class PointCloud:
    """Flat arrays over points: 3D position, RGB attribute, layer id,
    and the integer source pixel each point came from."""

    positions: np.ndarray
    colors: np.ndarray
    layer_ids: np.ndarray
    source_pixels: np.ndarray

    def __post_init__(self):
        n = len(self.positions)
        if self.positions.shape != (n, 3) or self.colors.shape != (n, 3):
            raise ValueError("positions and colors must be (N, 3)")
        if self.layer_ids.shape != (n,) or self.source_pixels.shape != (n, 2):
            raise ValueError("layer_ids must be (N,), source_pixels (N, 2)")
        if n and self.positions[:, 2].min() <= 0:
            raise ValueError("all point depths must be positive")
        if n and (self.colors.min() < 0 or self.colors.max() > 1):
            raise ValueError("point colors must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.positions)


@dataclass
class SceneFlow:
    """Per-point 3D translations matching a PointCloud's ordering."""

    translations: np.ndarray
    time_index: int

    def __post_init__(self):
        if self.translations.ndim != 2 or self.translations.shape[1] != 3:
            raise ValueError("scene flow must be (N, 3)")
        if not np.isfinite(self.translations).all():
            raise ValueError("scene flow contains non-finite values")


@dataclass
class DepthStats:
    minimum: float
    median: float
    maximum: float


@dataclass
class LayeredScene:
    """Everything the renderer needs: layers, the unprojected cloud,
    the source camera, and summary depth statistics."""

    layers: list[LdiLayer]
    cloud: PointCloud
    camera: Camera
    intervals: DepthIntervals
    depth_stats: DepthStats


@dataclass
class SceneParams:
    gap_threshold: float = 0.12
    max_layers: int = 4
    band_px: int = 16


def cluster_depth(depth: DepthMap, gap_threshold: float, max_layers: int) -> DepthIntervals:
    """Split the depth range by 1-D single-linkage clustering.

    Sorted unique values are cut at gaps larger than gap_threshold times
    the full range (so at most 1/gap_threshold clusters can emerge); if
    that still exceeds max_layers, adjacent clusters merge bottom-up,
    smallest gap first, ties preferring the smaller merged span and then
    the leftmost pair.
    """
    if not 0 < gap_threshold < 1:
        raise ValueError("gap_threshold must be in (0, 1)")
    if max_layers < 1:
        raise ValueError("max_layers must be >= 1")
    values = np.unique(depth.data)
    if values.size == 1:
        v = float(values[0])
        return DepthIntervals(((v, v),), 0.0)
    spread = float(values[-1] - values[0])
    threshold_abs = gap_threshold * spread
    gaps = np.diff(values)
    splits = np.flatnonzero(gaps > threshold_abs)
    starts = np.concatenate(([0], splits + 1))
    ends = np.concatenate((splits, [values.size - 1]))
    intervals = [(float(values[a]), float(values[b])) for a, b in zip(starts, ends)]
    while len(intervals) > max_layers:
        best = None
        for i in range(len(intervals) - 1):
            gap = intervals[i + 1][0] - intervals[i][1]
            span = intervals[i + 1][1] - intervals[i][0]
            key = (gap, span, i)
            if best is None or key < best:
                best = key
        i = best[2]
        intervals[i : i + 2] = [(intervals[i][0], intervals[i + 1][1])]
    return DepthIntervals(tuple(intervals), threshold_abs)


def build_ldi(
    color: ColorImage, depth: DepthMap, intervals: DepthIntervals
) -> list[LdiLayer]:
    """Partition the image into one layer per interval, farthest first.

    Depths exactly on an interval boundary go to the nearer interval
    (DepthIntervals.assign is deterministic about ties).
    """
    assignment = intervals.assign(depth.data)
    layers = []
    for ascending_index in reversed(range(len(intervals))):
        member = assignment == ascending_index
        layers.append(
            LdiLayer(
                color=ColorImage(color.data.copy()),
                depth=DepthMap(depth.data.copy()),
                valid=MaskImage(member.astype(np.uint8)),
                inpainted=MaskImage(np.zeros_like(member, dtype=np.uint8)),
                interval=intervals.intervals[ascending_index],
            )
        )
    return layers


def occlusion_masks(depth: DepthMap, intervals: DepthIntervals) -> list[MaskImage]:
    """Per layer (farthest first): pixels hidden behind a nearer layer."""
    assignment = intervals.assign(depth.data)
    masks = []
    for ascending_index in reversed(range(len(intervals))):
        masks.append(MaskImage((assignment < ascending_index).astype(np.uint8)))
    return masks


def inpaint_layer(
    layer: LdiLayer,
    occluded: MaskImage,
    band_px: int,
    theta: float | None = None,
) -> LdiLayer:
    """Diffuse color and depth into the occluded band around a layer.

    The target is occluded pixels within `band_px` (Chebyshev) of the
    layer's valid content. Color and depth relax jointly toward the
    discrete harmonic interpolant of the adjacent valid pixels; target
    components with no valid boundary stay unfilled. Filled depth is
    clamped into the layer interval widened by `theta` (defaults to
    the interval's own span allowance of 0).
    """
    if band_px < 0:
        raise ValueError("band_px must be >= 0")
    valid = layer.valid.as_bool()
    if band_px == 0 or not valid.any():
        return layer
    reach = ndimage.binary_dilation(valid, structure=_CROSS, iterations=band_px)
    target = occluded.as_bool() & reach & ~valid
    if not target.any():
        return layer

    stacked = np.concatenate(
        [layer.color.data, layer.depth.data[:, :, None]], axis=2
    )
    filled_values, _, filled = solver.fill_region(
        stacked,
        target,
        INPAINT_TOLERANCE,
        INPAINT_MAX_ITERS,
        support=target | valid,
    )
    if not filled.any():
        return layer

    theta = 0.0 if theta is None else float(theta)
    low, high = layer.interval
    new_color = layer.color.data.copy()
    new_depth = layer.depth.data.copy()
    new_color[filled] = np.clip(filled_values[:, :, :3][filled], 0.0, 1.0)
    new_depth[filled] = np.clip(
        filled_values[:, :, 3][filled], max(low - theta, DEPTH_FLOOR), high + theta
    )
    return LdiLayer(
        color=ColorImage(new_color),
        depth=DepthMap(new_depth),
        valid=MaskImage((valid | filled).astype(np.uint8)),
        inpainted=MaskImage((layer.inpainted.as_bool() | filled).astype(np.uint8)),
        interval=layer.interval,
    )


def unproject(layers: list[LdiLayer], camera: Camera) -> PointCloud:
    """Lift every valid layer pixel to a 3D point in source coordinates.

    Points are emitted layer by layer (farthest first), row-major within
    a layer; the splat tie-break depends on this ordering being stable.
    """
    positions = []
    colors = []
    layer_ids = []
    pixels = []
    for layer_id, layer in enumerate(layers):
        ys, xs = np.nonzero(layer.valid.data)
        if len(ys) == 0:
            continue
        depths = layer.depth.data[ys, xs]
        if depths.min() <= 0:
            raise RenderError(f"nonpositive depth at a valid pixel in layer {layer_id}")
        positions.append(camera.unproject_pixels(xs, ys, depths))
        colors.append(layer.color.data[ys, xs])
        layer_ids.append(np.full(len(ys), layer_id, dtype=np.int64))
        pixels.append(np.stack([xs, ys], axis=1).astype(np.float64))
    if not positions:
        return PointCloud(
            np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0, dtype=np.int64), np.zeros((0, 2))
        )
    return PointCloud(
        np.concatenate(positions),
        np.concatenate(colors),
        np.concatenate(layer_ids),
        np.concatenate(pixels),
    )


def lift_flow(
    displacement: DisplacementField, cloud: PointCloud, camera: Camera
) -> SceneFlow:
    """Lift a 2D displacement field to 3D scene flow at constant depth.

    For a point at pixel p with depth d and sampled displacement u, the
    translation is the unprojection difference pi^-1(p + u, d) -
    pi^-1(p, d), which keeps Z fixed: (u_x d / fx, u_y d / fy, 0).
    """
    n = len(cloud)
    translations = np.zeros((n, 3), dtype=np.float64)
    if n:
        u = sample_bilinear(
            displacement.data, cloud.source_pixels[:, 0], cloud.source_pixels[:, 1]
        )
        depths = cloud.positions[:, 2]
        translations[:, 0] = u[:, 0] * depths / camera.fx
        translations[:, 1] = u[:, 1] * depths / camera.fy
    return SceneFlow(translations, displacement.time_index)


def displace(cloud: PointCloud, flow: SceneFlow) -> PointCloud:
    """Move every point by its translation; attributes are untouched."""
    if len(flow.translations) != len(cloud):
        raise ValueError(
            f"scene flow has {len(flow.translations)} entries for {len(cloud)} points"
        )
    return PointCloud(
        cloud.positions + flow.translations,
        cloud.colors,
        cloud.layer_ids,
        cloud.source_pixels,
    )


def default_camera(width: int, height: int, focal_px: float | None = None) -> Camera:
    """Source camera for unposed inputs: principal point at the image
    center, focal length defaulting to the longer image side."""
    focal = float(focal_px) if focal_px else float(max(width, height))
    return Camera.identity(focal, focal, (width - 1) / 2.0, (height - 1) / 2.0)


def build_layered_scene(
    color: ColorImage,
    depth: DepthMap,
    camera: Camera | None = None,
    params: SceneParams | None = None,
) -> LayeredScene:
    """Full scene construction: cluster, layer, inpaint, unproject."""
    params = params or SceneParams()
    if camera is None:
        camera = default_camera(color.width, color.height)
    intervals = cluster_depth(depth, params.gap_threshold, params.max_layers)
    layers = build_ldi(color, depth, intervals)
    if len(layers) > 1 and params.band_px > 0:
        occlusions = occlusion_masks(depth, intervals)
        layers = [
            inpaint_layer(layer, occluded, params.band_px, intervals.threshold_abs)
            for layer, occluded in zip(layers, occlusions)
        ]
    cloud = unproject(layers, camera)
    stats = DepthStats(
        minimum=float(depth.data.min()),
        median=float(np.median(depth.data)),
        maximum=float(depth.data.max()),
    )
    logger.debug(
        "scene built: %d layers, %d points, depth %.4g..%.4g",
        len(layers),
        len(cloud),
        stats.minimum,
        stats.maximum,
    )
    return LayeredScene(layers, cloud, camera, intervals, stats)


def dump_layers(layers: list[LdiLayer], directory) -> None:
    """Debug dump: per-layer color PNG, depth PFM, and validity PNG."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, layer in enumerate(layers):
        masked = layer.color.data * layer.valid.as_bool()[:, :, None]
        save_frame(ColorImage(masked), directory / f"layer_{index}_color.png")
        save_pfm(layer.depth.data, directory / f"layer_{index}_depth.pfm")
        save_mask(layer.valid, directory / f"layer_{index}_valid.png")
