#!/usr/bin/env python3
"""Regenerate the bundled 256x144 sample scene (deterministic).

Writes image.png, depth.pfm, mask.png, hints.json, flow.flo, and
job.json into assets/sample/. The scene is a procedural lake: gradient
sky, two mountain ridges, and rippling water animated by leftward flow
hints inside the water mask.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from cinema3d import ColorImage, DepthMap, MaskImage, save_frame, save_mask, save_pfm
from cinema3d.assets import save_flow
from cinema3d.motion import FlowHint, estimate_motion_from_hints

WIDTH, HEIGHT = 256, 144
HORIZON = 78


def ridge_profile(rng, base, wobble, period):
    xs = np.arange(WIDTH)
    phase = rng.uniform(0, 2 * np.pi, size=3)
    amp = rng.uniform(0.4, 1.0, size=3) * wobble
    profile = base + sum(
        a * np.sin(2 * np.pi * xs / (period * (i + 1)) + p)
        for i, (a, p) in enumerate(zip(amp, phase))
    )
    return profile.astype(np.int64)


def build_scene():
    rng = np.random.default_rng(31415)
    color = np.zeros((HEIGHT, WIDTH, 3))
    depth = np.zeros((HEIGHT, WIDTH))

    ys = np.arange(HEIGHT)[:, None]
    xs = np.arange(WIDTH)[None, :]

    # Sky: blue fading toward a warm horizon, plus a sun disk.
    t = np.clip(ys / HORIZON, 0, 1)
    color[:, :, 0] = 0.25 + 0.55 * t
    color[:, :, 1] = 0.45 + 0.35 * t
    color[:, :, 2] = 0.80 - 0.15 * t
    sun = ((xs - 196) ** 2 + (ys - 30) ** 2) <= 11**2
    color[sun] = [0.99, 0.92, 0.70]
    depth[:] = 30.0

    # Two mountain ridges at distinct depths.
    far_top = ridge_profile(rng, HORIZON - 26, 7.0, 60)
    near_top = ridge_profile(rng, HORIZON - 10, 5.0, 40)
    shade_far = 0.12 * np.sin(xs / 9.0)
    for x in range(WIDTH):
        color[far_top[x] : HORIZON, x] = [
            0.38 + shade_far[0, x],
            0.40 + shade_far[0, x],
            0.47,
        ]
        depth[far_top[x] : HORIZON, x] = 18.0
        color[near_top[x] : HORIZON, x] = [0.22, 0.30 + 0.05 * np.sin(x / 5.0), 0.26]
        depth[near_top[x] : HORIZON, x] = 11.0

    # Water: mirrored sky tint with ripples; depth recedes to the horizon.
    water_rows = ys[HORIZON:] - HORIZON
    span = HEIGHT - HORIZON
    ripple = 0.08 * np.sin(xs / 6.0 + water_rows / 2.5) + 0.04 * np.sin(
        xs / 2.3 - water_rows / 1.7
    )
    color[HORIZON:, :, 0] = 0.18 + 0.10 * (water_rows / span) + ripple[:span]
    color[HORIZON:, :, 1] = 0.30 + 0.12 * (water_rows / span) + ripple[:span]
    color[HORIZON:, :, 2] = 0.48 + 0.08 * (water_rows / span) + 0.5 * ripple[:span]
    depth[HORIZON:] = 6.0 - 4.0 * (water_rows / span)

    color = np.clip(color, 0.0, 1.0)

    mask = np.zeros((HEIGHT, WIDTH), dtype=np.uint8)
    mask[HORIZON:] = 1

    hints = [
        FlowHint(40.0, 100.0, -0.9, 0.0),
        FlowHint(128.0, 110.0, -1.1, 0.05),
        FlowHint(216.0, 96.0, -0.8, 0.0),
        FlowHint(128.0, 138.0, -1.3, 0.1),
    ]
    return ColorImage(color), DepthMap(depth), MaskImage(mask), hints


def main():
    out = Path(__file__).resolve().parent.parent / "assets" / "sample"
    out.mkdir(parents=True, exist_ok=True)
    color, depth, mask, hints = build_scene()
    save_frame(color, out / "image.png")
    save_pfm(depth.data, out / "depth.pfm")
    save_mask(mask, out / "mask.png")

    hints_doc = {
        "mask": "mask.png",
        "hints": [{"x": h.x, "y": h.y, "dx": h.dx, "dy": h.dy} for h in hints],
        "speed": 1.0,
    }
    (out / "hints.json").write_text(json.dumps(hints_doc, indent=2) + "\n")

    field = estimate_motion_from_hints(mask, hints, (WIDTH, HEIGHT))
    save_flow(field, out / "flow.flo")

    job = {
        "image": "image.png",
        "depth": "depth.pfm",
        "flow": "flow.flo",
        "out": "out",
        "trajectory": "sway",
        "frames": 30,
        "amplitude": 0.03,
    }
    (out / "job.json").write_text(json.dumps(job, indent=2) + "\n")
    print(f"sample scene written to {out}")


if __name__ == "__main__":
    main()
