"""cinema3d: looping 3D cinemagraphs from a single RGB-D image.

Turns {image, depth, motion field or sparse flow hints} into a
seamlessly looping frame sequence with animated scene content and
camera parallax: Eulerian motion integration, layered-depth-image
scene construction, bidirectional point-cloud animation, and weighted
splat compositing.
"""

from .assets import (
    AssetBundle,
    ColorImage,
    DepthMap,
    FlowField,
    MaskImage,
    load_color,
    load_depth,
    load_flow,
    load_mask,
    save_flow,
    save_frame,
    save_mask,
    save_pfm,
)
from .config import JobConfig, load_config, validate_config
from .errors import AssetError, CinemaError, ConfigError, RenderError
from .motion import (
    DisplacementField,
    FlowHint,
    SolverParams,
    estimate_motion_from_hints,
    euler_integrate,
    scale_flow,
)
from .pipeline import Trajectory, make_trajectory, preset_pose, render_cinemagraph
from .renderer import (
    Frame,
    RenderConfig,
    RenderLayers,
    WeightMap,
    blend_weights,
    composite,
    render_view,
    splat,
)
from .scene import (
    Camera,
    DepthIntervals,
    LayeredScene,
    LdiLayer,
    PointCloud,
    SceneFlow,
    SceneParams,
    build_layered_scene,
    build_ldi,
    cluster_depth,
    displace,
    inpaint_layer,
    lift_flow,
    unproject,
)

__version__ = "0.1.0"

__all__ = [
    "AssetBundle",
    "AssetError",
    "Camera",
    "CinemaError",
    "ColorImage",
    "ConfigError",
    "DepthIntervals",
    "DepthMap",
    "DisplacementField",
    "FlowField",
    "FlowHint",
    "Frame",
    "JobConfig",
    "LayeredScene",
    "LdiLayer",
    "MaskImage",
    "PointCloud",
    "RenderConfig",
    "RenderError",
    "RenderLayers",
    "SceneFlow",
    "SceneParams",
    "SolverParams",
    "Trajectory",
    "WeightMap",
    "blend_weights",
    "build_layered_scene",
    "build_ldi",
    "cluster_depth",
    "composite",
    "displace",
    "estimate_motion_from_hints",
    "euler_integrate",
    "inpaint_layer",
    "lift_flow",
    "load_color",
    "load_config",
    "load_depth",
    "load_flow",
    "load_mask",
    "make_trajectory",
    "preset_pose",
    "render_cinemagraph",
    "render_view",
    "save_flow",
    "save_frame",
    "save_mask",
    "save_pfm",
    "scale_flow",
    "splat",
    "unproject",
    "validate_config",
]
