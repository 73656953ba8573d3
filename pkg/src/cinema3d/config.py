"""Job configuration: schema, defaults, and strict validation.

A job is one JSON document; CLI flags override document keys one to
one. Validation is strict (unknown keys are errors) and runs before
any asset is decoded, so a bad config never starts a render.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .renderer import RenderConfig
from .scene import SceneParams

TRAJECTORY_PRESETS = ("still", "zoom", "sway", "orbit")

_TOP_LEVEL_KEYS = {
    "image",
    "depth",
    "flow",
    "hints",
    "out",
    "trajectory",
    "frames",
    "amplitude",
    "speed",
    "depth_scale",
    "focal_px",
    "layers",
    "splat",
    "blend",
    "cull",
    "report",
    "dump_layers",
}
_LAYER_KEYS = {"gap_threshold", "max_layers", "band_px"}
_SPLAT_KEYS = {"mode", "radius_px", "z_window"}
_BLEND_KEYS = {"sharpness"}
_CULL_KEYS = {"near"}


@dataclass
class JobConfig:
    """Fully validated, path-resolved render job. Deterministic: no seed."""

    image: Path
    depth: Path
    out: Path
    flow: Path | None = None
    hints: Path | None = None
    trajectory: str = "sway"
    frames: int = 60
    amplitude: float = 0.05
    speed: float = 1.0
    depth_scale: float = 10.0
    focal_px: float | None = None
    scene_params: SceneParams = field(default_factory=SceneParams)
    render_config: RenderConfig = field(default_factory=RenderConfig)
    report: bool = False
    dump_layers: bool = False


def load_config(path) -> JobConfig:
    """Read and validate a job JSON file; paths resolve against it."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid config JSON: {exc}") from exc
    return validate_config(document, base_dir=path.parent)


def validate_config(document, base_dir=None) -> JobConfig:
    """Check a config document and apply defaults.

    Rejects unknown keys at every level, wrong types, a missing or
    ambiguous motion source, and referenced files that do not exist.
    """
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(document) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config key: {', '.join(sorted(unknown))}")

    for required in ("image", "depth", "out"):
        if required not in document:
            raise ConfigError(f"missing required config key: {required}")
    has_flow = document.get("flow") is not None
    has_hints = document.get("hints") is not None
    if has_flow and has_hints:
        raise ConfigError("ambiguous motion source: give 'flow' or 'hints', not both")
    if not has_flow and not has_hints:
        raise ConfigError("no motion source: give 'flow' or 'hints'")

    base = Path(base_dir) if base_dir is not None else Path.cwd()

    def resolve(key, must_exist=True):
        value = document[key]
        if not isinstance(value, str) or not value:
            raise ConfigError(f"'{key}' must be a non-empty path string")
        resolved = Path(value)
        if not resolved.is_absolute():
            resolved = base / resolved
        if must_exist and not resolved.is_file():
            raise ConfigError(f"'{key}' does not exist: {resolved}")
        return resolved

    image = resolve("image")
    depth = resolve("depth")
    flow = resolve("flow") if has_flow else None
    hints = resolve("hints") if has_hints else None
    out_value = document["out"]
    if not isinstance(out_value, str) or not out_value:
        raise ConfigError("'out' must be a non-empty path string")
    out = Path(out_value)
    if not out.is_absolute():
        out = base / out

    trajectory = document.get("trajectory", "sway")
    if trajectory not in TRAJECTORY_PRESETS:
        raise ConfigError(
            f"unknown preset: {trajectory!r} (choose from {', '.join(TRAJECTORY_PRESETS)})"
        )
    frames = _expect_int(document, "frames", default=60, minimum=1)
    amplitude = _expect_number(document, "amplitude", default=0.05, minimum=0.0)
    speed = _expect_number(document, "speed", default=1.0, minimum_exclusive=0.0)
    depth_scale = _expect_number(document, "depth_scale", default=10.0, minimum_exclusive=0.0)
    focal_px = None
    if document.get("focal_px") is not None:
        focal_px = _expect_number(document, "focal_px", default=None, minimum_exclusive=0.0)

    layers = _expect_group(document, "layers", _LAYER_KEYS)
    splat = _expect_group(document, "splat", _SPLAT_KEYS)
    blend = _expect_group(document, "blend", _BLEND_KEYS)
    cull = _expect_group(document, "cull", _CULL_KEYS)
    try:
        scene_params = SceneParams(
            gap_threshold=float(layers.get("gap_threshold", 0.12)),
            max_layers=int(layers.get("max_layers", 4)),
            band_px=int(layers.get("band_px", 16)),
        )
        render_config = RenderConfig(
            mode=splat.get("mode", "soft"),
            radius_px=float(splat.get("radius_px", 1.0)),
            z_window=float(splat.get("z_window", 0.01)),
            sharpness=float(blend.get("sharpness", 10.0)),
            near=float(cull.get("near", 1e-3)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 0 < scene_params.gap_threshold < 1:
        raise ConfigError("layers.gap_threshold must be in (0, 1)")
    if scene_params.max_layers < 1:
        raise ConfigError("layers.max_layers must be >= 1")
    if scene_params.band_px < 0:
        raise ConfigError("layers.band_px must be >= 0")

    return JobConfig(
        image=image,
        depth=depth,
        out=out,
        flow=flow,
        hints=hints,
        trajectory=trajectory,
        frames=frames,
        amplitude=amplitude,
        speed=speed,
        depth_scale=depth_scale,
        focal_px=focal_px,
        scene_params=scene_params,
        render_config=render_config,
        report=_expect_bool(document, "report", default=False),
        dump_layers=_expect_bool(document, "dump_layers", default=False),
    )


def _expect_group(document, key, allowed) -> dict:
    group = document.get(key, {})
    if not isinstance(group, dict):
        raise ConfigError(f"'{key}' must be an object")
    unknown = set(group) - allowed
    if unknown:
        raise ConfigError(f"unknown config key: {key}.{', '.join(sorted(unknown))}")
    return group


def _expect_int(document, key, default, minimum) -> int:
    value = document.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer")
    if value < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}, got {value}")
    return value


def _expect_number(document, key, default, minimum=None, minimum_exclusive=None):
    value = document.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number")
    value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}, got {value}")
    if minimum_exclusive is not None and value <= minimum_exclusive:
        raise ConfigError(f"'{key}' must be > {minimum_exclusive}, got {value}")
    return value


def _expect_bool(document, key, default) -> bool:
    value = document.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"'{key}' must be a boolean")
    return value
