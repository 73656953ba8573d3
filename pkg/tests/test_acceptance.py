"""Acceptance suite: one test per release criterion.

Each test is marked with its criterion name; the conftest hook prints a
PASS/FAIL line per criterion in the terminal summary. Tolerances are
fixed here, not tuned elsewhere.
"""

import os
import time

import numpy as np
import pytest

import cv2

from cinema3d import (
    Camera,
    ColorImage,
    DepthMap,
    FlowField,
    MaskImage,
    RenderConfig,
    blend_weights,
    build_layered_scene,
    cluster_depth,
    estimate_motion_from_hints,
    load_color,
    make_trajectory,
    render_cinemagraph,
    render_view,
    save_frame,
    splat,
    validate_config,
)
from cinema3d.motion import FlowHint, euler_integrate
from cinema3d.scene import SceneParams
from cinema3d.assets import save_flow, save_pfm

from tests.conftest import gradient_depth, smooth_texture, two_plane_depth
from tests.test_motion import scalar_euler
from tests.test_scene import as_depth, brute_force_single_linkage


def masked_random_flow(rng, height, width, magnitude=1.5):
    """Smooth random velocity inside a random rectangle, zero outside."""
    field = np.zeros((height, width, 2))
    y0, x0 = int(rng.integers(4, height // 2)), int(rng.integers(4, width // 2))
    y1, x1 = int(rng.integers(y0 + 8, height - 2)), int(rng.integers(x0 + 8, width - 2))
    coarse = rng.uniform(-magnitude, magnitude, size=(3, 3, 2))
    patch = cv2.resize(coarse, (x1 - x0, y1 - y0), interpolation=cv2.INTER_LINEAR)
    field[y0:y1, x0:x1] = patch
    return FlowField(field)


@pytest.mark.acceptance("loop closure: frame(0) == frame(N) for random scenes")
def test_loop_closure(rng, tmp_path):
    presets = ["still", "zoom", "sway", "orbit"]
    start = time.perf_counter()
    for index in range(5):
        height = width = 64
        color = smooth_texture(rng, height, width)
        depth = (
            two_plane_depth(rng, height, width)
            if index % 2 == 0
            else gradient_depth(rng, height, width)
        )
        scene = build_layered_scene(color, depth, params=SceneParams(band_px=6))
        field = masked_random_flow(rng, height, width)
        for preset in (presets[index % 4], presets[(index + 1) % 4]):
            trajectory = make_trajectory(preset, 0.05, 12, scene.camera, scene.depth_stats)
            first = render_view(scene, field, 0, 12, trajectory.cameras[0])
            last = render_view(scene, field, 12, 12, trajectory.cameras[12])
            pre_quant = np.abs(first.color.data - last.color.data).max()
            assert pre_quant <= 1e-6, f"{preset}: pre-quantization diff {pre_quant}"
            save_frame(first.color, tmp_path / "first.png")
            save_frame(last.color, tmp_path / "last.png")
            a = load_color(tmp_path / "first.png").data
            b = load_color(tmp_path / "last.png").data
            assert np.abs(a - b).max() <= 1.0 / 255.0
    elapsed = time.perf_counter() - start
    print(f"\nloop closure over 5 scenes x 2 presets: {elapsed:.2f}s")
    assert elapsed < 10.0


@pytest.mark.acceptance("displacement recursion: exact on constants, 1e-5 vs scalar oracle")
def test_euler_integration_exactness(rng):
    height, width = 24, 32
    for _ in range(20):
        c = rng.uniform(-2.0, 2.0, size=2)
        steps = int(rng.integers(1, 17))
        field = FlowField(np.broadcast_to(c, (height, width, 2)).copy())
        result = euler_integrate(field, steps, "forward")
        ys, xs = np.mgrid[0:height, 0:width]
        inside = (
            (xs + steps * c[0] >= 0)
            & (xs + steps * c[0] <= width - 1)
            & (ys + steps * c[1] >= 0)
            & (ys + steps * c[1] <= height - 1)
        )
        assert inside.any()
        # Exact accumulation: each step adds c bit-for-bit, so the field
        # equals the sequential sum; t*c agrees to accumulated rounding.
        sequential = np.zeros(2)
        for _ in range(steps):
            sequential = sequential + c
        assert (result.data[inside] == sequential).all()
        assert np.abs(result.data[inside] - steps * c).max() <= 1e-12

    for _ in range(10):
        h = int(rng.integers(4, 10))
        w = int(rng.integers(4, 10))
        velocity = rng.normal(scale=1.5, size=(h, w, 2))
        steps = int(rng.integers(1, 9))
        result = euler_integrate(FlowField(velocity), steps, "forward")
        for _ in range(8):
            x0, y0 = int(rng.integers(0, w)), int(rng.integers(0, h))
            u, v = scalar_euler(velocity, x0, y0, steps)
            assert abs(result.data[y0, x0, 0] - u) <= 1e-5
            assert abs(result.data[y0, x0, 1] - v) <= 1e-5


@pytest.mark.acceptance("identity reprojection: exact, >= 99% coverage, < 1 s at 256x144")
def test_identity_reprojection(rng):
    height, width = 144, 256
    color = smooth_texture(rng, height, width)
    depth = DepthMap(rng.uniform(2.0, 9.0, size=(height, width)))
    scene = build_layered_scene(
        color, depth, params=SceneParams(max_layers=1, band_px=0)
    )
    field = FlowField(np.zeros((height, width, 2)))
    config = RenderConfig(mode="nearest")

    start = time.perf_counter()
    frame = render_view(scene, field, 0, 8, scene.camera, config)
    elapsed = time.perf_counter() - start

    layers = splat(scene.cloud, scene.camera, (width, height), config)
    coverage = layers.covered.mean()
    assert coverage >= 0.99
    covered = layers.covered
    assert np.array_equal(frame.color.data[covered], color.data[covered])
    print(f"\nidentity reprojection: coverage {coverage:.4f}, {elapsed*1e3:.0f} ms")
    assert elapsed < 1.0


@pytest.mark.acceptance("analytic parallax: shift = fx*tx/d within 0.5 px, near > far")
def test_analytic_parallax(rng):
    height, width = 64, 96
    near_depth, far_depth = 2.0, 8.0
    color = np.full((height, width, 3), 0.5)
    depth = np.full((height, width), far_depth)
    depth[20:44, 8:56] = near_depth
    # Trackable markers: a red stripe on the near plane, green on the far.
    color[24:40, 30:34] = [1.0, 0.0, 0.0]
    color[24:40, 74:78] = [0.0, 1.0, 0.0]
    scene = build_layered_scene(
        ColorImage(color), DepthMap(depth), params=SceneParams(band_px=8)
    )
    fx = scene.camera.fx
    t_x = 0.25
    moved = scene.camera.with_pose(np.eye(3), np.array([-t_x, 0.0, 0.0]))
    config = RenderConfig(mode="nearest")
    field = FlowField(np.zeros((height, width, 2)))

    def centroid(frame, channel):
        data = frame.color.data
        hit = (data[:, :, channel] > 0.9) & (data.sum(axis=2) < 1.5)
        assert hit.any()
        return np.nonzero(hit)[1].mean()

    base = render_view(scene, field, 0, 4, scene.camera, config)
    shifted = render_view(scene, field, 0, 4, moved, config)
    near_shift = abs(centroid(shifted, 0) - centroid(base, 0))
    far_shift = abs(centroid(shifted, 1) - centroid(base, 1))
    assert abs(near_shift - fx * t_x / near_depth) <= 0.5
    assert abs(far_shift - fx * t_x / far_depth) <= 0.5
    assert near_shift > far_shift
    print(f"\nparallax: near {near_shift:.2f}px (want {fx*t_x/near_depth:.2f}), "
          f"far {far_shift:.2f}px (want {fx*t_x/far_depth:.2f})")


@pytest.mark.acceptance("blend weights: range, exact endpoints, logistic midpoint")
def test_blend_weight_properties(rng):
    from cinema3d.renderer import RenderLayers

    def layers(alpha, depth):
        alpha = np.asarray(alpha, dtype=np.float64)
        depth = np.asarray(depth, dtype=np.float64)
        return RenderLayers(np.zeros(alpha.shape + (3,)), depth * (alpha > 0), alpha)

    shape = (16, 16)
    for _ in range(20):
        fwd = layers(rng.integers(0, 2, shape), rng.uniform(1, 9, shape))
        bwd = layers(rng.integers(0, 2, shape), rng.uniform(1, 9, shape))
        n = int(rng.integers(1, 13))
        t = int(rng.integers(0, n + 1))
        weights = blend_weights(fwd, bwd, t, n)
        assert weights.values.min() >= 0.0 and weights.values.max() <= 1.0

        at_start = blend_weights(fwd, bwd, 0, n)
        covered_f = fwd.covered
        assert np.abs(at_start.values[covered_f] - 1.0).max() <= 1e-6
        at_end = blend_weights(fwd, bwd, n, n)
        covered_b = bwd.covered
        assert np.abs(at_end.values[covered_b]).max() <= 1e-6

    # Scalar check: alpha = 1 both sides, t = N/2, normalized depth gap
    # of 1/sharpness, so W = 1 / (1 + e^-1) = 0.731059 (6 d.p.).
    sharpness = 10.0
    fwd = layers([[1.0, 1.0, 1.0]], [[1.0, 2.0, 1.0]])
    bwd = layers([[1.0, 1.0, 1.0]], [[1.0, 2.0, 1.0 + 1.0 / sharpness]])
    weights = blend_weights(fwd, bwd, 6, 12, sharpness)
    assert abs(weights.values[0, 2] - 0.731059) <= 1e-6


@pytest.mark.acceptance("3DSA: bidirectional blending strictly reduces holes")
def test_bidirectional_hole_filling(rng):
    height = width = 48
    color = smooth_texture(rng, height, width)
    depth = DepthMap(np.full((height, width), 5.0))
    scene = build_layered_scene(color, depth, params=SceneParams(max_layers=1, band_px=0))
    field = FlowField(np.full((height, width, 2), [1.0, 0.0]))
    t, n = 6, 12  # 6 px of rightward displacement at the midpoint
    config = RenderConfig(mode="nearest")

    from cinema3d.motion import euler_integrate as integrate
    from cinema3d.scene import displace, lift_flow

    fwd_cloud = displace(
        scene.cloud, lift_flow(integrate(field, t, "forward"), scene.cloud, scene.camera)
    )
    bwd_cloud = displace(
        scene.cloud, lift_flow(integrate(field, n - t, "backward"), scene.cloud, scene.camera)
    )
    fwd = splat(fwd_cloud, scene.camera, (width, height), config)
    bwd = splat(bwd_cloud, scene.camera, (width, height), config)
    weights = blend_weights(fwd, bwd, t, n)
    fwd_only = int((~fwd.covered).sum())
    bwd_only = int((~bwd.covered).sum())
    blended = int(weights.holes.sum())
    assert fwd_only > 0
    assert blended <= fwd_only and blended <= bwd_only
    assert blended < fwd_only
    print(f"\n3DSA holes: forward {fwd_only}, backward {bwd_only}, blended {blended}")


@pytest.mark.acceptance("oracles: nearest splat and clustering match brute force (200 each)")
def test_oracles(rng):
    from cinema3d.scene import PointCloud

    for _ in range(200):
        width = int(rng.integers(2, 17))
        height = int(rng.integers(2, 17))
        n = int(rng.integers(1, 128))
        positions = np.stack(
            [rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(0.3, 7.0, n)],
            axis=1,
        )
        duplicates = positions[rng.integers(0, n, size=max(1, n // 3))]
        positions = np.concatenate([positions, duplicates])[:256]
        total = len(positions)
        cloud = PointCloud(
            positions,
            rng.uniform(0, 1, (total, 3)),
            np.zeros(total, dtype=np.int64),
            np.zeros((total, 2)),
        )
        camera = Camera.identity(
            float(rng.uniform(1.5, 9.0)),
            float(rng.uniform(1.5, 9.0)),
            (width - 1) / 2.0,
            (height - 1) / 2.0,
        )
        got = splat(cloud, camera, (width, height), RenderConfig(mode="nearest"))

        # Brute force: per pixel, argmin depth over every point that
        # rounds onto it (earlier index wins ties).
        cam = camera.transform(cloud.positions)
        z = cam[:, 2]
        live = z > 1e-3
        px = np.floor(camera.fx * cam[:, 0] / z + camera.cx + 0.5).astype(int)
        py = np.floor(camera.fy * cam[:, 1] / z + camera.cy + 0.5).astype(int)
        for row in range(height):
            for col in range(width):
                candidates = np.flatnonzero(live & (px == col) & (py == row))
                if len(candidates) == 0:
                    assert got.alpha[row, col] == 0.0
                    continue
                winner = candidates[np.argmin(z[candidates])]  # first minimum
                assert got.alpha[row, col] == 1.0
                assert got.depth[row, col] == z[winner]
                assert np.array_equal(got.color[row, col], cloud.colors[winner])

    for _ in range(200):
        n = int(rng.integers(1, 65))
        values = rng.uniform(0.5, 20.0, size=n)
        if rng.random() < 0.3:
            values = np.repeat(values, 2)[:n]
        threshold = float(rng.uniform(0.02, 0.5))
        max_layers = int(rng.integers(1, 6))
        got = cluster_depth(as_depth(values), threshold, max_layers)
        expected = brute_force_single_linkage(values, threshold, max_layers)
        assert list(got.intervals) == expected


@pytest.mark.acceptance("hint solver: exact hints, zero outside mask, maximum principle")
def test_hint_solver_properties(rng):
    for _ in range(50):
        height = int(rng.integers(12, 28))
        width = int(rng.integers(12, 28))
        mask = np.zeros((height, width), dtype=np.uint8)
        y0, x0 = int(rng.integers(0, height // 3)), int(rng.integers(0, width // 3))
        y1 = int(rng.integers(y0 + 6, height))
        x1 = int(rng.integers(x0 + 6, width))
        mask[y0:y1, x0:x1] = 1
        hints = []
        taken = set()
        for _ in range(int(rng.integers(1, 5))):
            hx = int(rng.integers(x0, x1))
            hy = int(rng.integers(y0, y1))
            if (hx, hy) in taken:
                continue
            taken.add((hx, hy))
            hints.append(
                FlowHint(hx, hy, float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
            )
        field = estimate_motion_from_hints(MaskImage(mask), hints, (width, height))
        for hint in hints:
            got = field.data[int(hint.y), int(hint.x)]
            assert abs(got[0] - hint.dx) <= 1e-4
            assert abs(got[1] - hint.dy) <= 1e-4
        outside = mask == 0
        assert (field.data[outside] == 0.0).all()
        inside = field.data[mask.astype(bool)]
        for c, name in enumerate(("dx", "dy")):
            bounds = [getattr(h, name) for h in hints] + [0.0]
            assert inside[:, c].min() >= min(bounds) - 1e-9
            assert inside[:, c].max() <= max(bounds) + 1e-9


@pytest.mark.acceptance("determinism & performance: 512x288 N=60 soft splat")
def test_determinism_and_performance(rng, tmp_path):
    height, width = 288, 512
    color = smooth_texture(rng, height, width)
    ys = np.arange(height)[:, None]
    depth = np.where(
        ys < height // 3,
        18.0,
        4.0 + 5.0 * (1.0 - ys / height) + 0.2 * np.sin(np.arange(width) / 13.0)[None, :],
    )
    depth = np.broadcast_to(depth, (height, width)).copy()
    flow = np.zeros((height, width, 2))
    flow[height // 3 :, :, 0] = 0.8

    save_frame(color, tmp_path / "image.png")
    save_pfm(depth, tmp_path / "depth.pfm")
    save_flow(FlowField(flow), tmp_path / "flow.flo")
    document = {
        "image": "image.png",
        "depth": "depth.pfm",
        "flow": "flow.flo",
        "out": "frames",
        "trajectory": "sway",
        "frames": 60,
        "amplitude": 0.04,
    }
    job = validate_config(document, base_dir=tmp_path)

    start = time.perf_counter()
    serial_paths = render_cinemagraph(job, workers=1)
    elapsed = time.perf_counter() - start
    serial = [p.read_bytes() for p in serial_paths]

    workers = os.cpu_count() or 2
    parallel = [p.read_bytes() for p in render_cinemagraph(job, workers=workers)]
    assert serial == parallel, "frames differ across worker counts"

    target, hard_limit = 120.0, 240.0
    status = "within target" if elapsed <= target else "OVER SOFT TARGET"
    print(f"\n512x288 N=60 single worker: {elapsed:.1f}s ({status}; hard limit {hard_limit:.0f}s)")
    assert elapsed < hard_limit
