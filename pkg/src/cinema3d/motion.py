"""Eulerian motion fields: estimation from sparse hints and time integration.

The scene's motion is a single time-invariant velocity field M. Dense M
comes either from a flow file or from harmonic interpolation of sparse
user hints inside an animation mask. Total displacement up to frame t
is built by recursively advecting positions through M (forward) or -M
(backward), sampling off-grid with bilinear interpolation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from . import solver
from .assets import FlowField, MaskImage, decode_mask, load_mask
from .errors import AssetError

# Below this edge length the hint solver stops coarsening its pyramid.
_COARSEST_EDGE = 32


@dataclass(frozen=True)
class FlowHint:
    """A sparse velocity constraint: pixels-per-frame (dx, dy) at (x, y)."""

    x: float
    y: float
    dx: float
    dy: float


@dataclass
class SolverParams:
    max_iters: int = 20000
    tolerance: float = 1e-5
    warm_start: bool = True


@dataclass
class SolveInfo:
    iterations: int


@dataclass
class DisplacementField:
    """Total per-pixel displacement from frame 0 to `time_index`.

    time_index is negative for backward fields; 0 implies a zero field.
    """

    data: np.ndarray
    time_index: int

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 2:
            raise ValueError(f"displacement field must be (H, W, 2), got {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise ValueError("displacement field contains non-finite values")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def _snap(value: float) -> int:
    # Half-way coordinates round toward +inf; keeps the Dirichlet system
    # well posed on the integer grid.
    return int(np.floor(value + 0.5))


def _validate_hints(
    mask: MaskImage, hints: list[FlowHint], width: int, height: int
) -> tuple[np.ndarray, np.ndarray]:
    if (mask.height, mask.width) != (height, width):
        raise AssetError(
            f"mask is {mask.width}x{mask.height}, expected {width}x{height}"
        )
    if not hints:
        raise AssetError("no hints given")
    if not mask.data.any():
        raise AssetError("no animation region (mask is empty)")
    pixels = np.empty((len(hints), 2), dtype=np.int64)
    values = np.empty((len(hints), 2), dtype=np.float64)
    for i, hint in enumerate(hints):
        if not (0 <= hint.x <= width - 1 and 0 <= hint.y <= height - 1):
            raise AssetError(f"hint ({hint.x}, {hint.y}) outside image")
        px, py = _snap(hint.x), _snap(hint.y)
        if mask.data[py, px] == 0:
            raise AssetError(f"hint ({hint.x}, {hint.y}) outside mask")
        if not np.isfinite([hint.dx, hint.dy]).all():
            raise AssetError(f"hint at ({hint.x}, {hint.y}) has non-finite velocity")
        pixels[i] = (px, py)
        values[i] = (hint.dx, hint.dy)
    return pixels, values


def _mask_boundary(inside: np.ndarray) -> np.ndarray:
    """Mask pixels with at least one unmasked 4-neighbor.

    Image borders do not count: missing neighbors mirror the pixel
    itself, so motion is free to run along the frame edge.
    """
    padded = np.pad(inside, 1, mode="edge")
    has_outside_neighbor = ~(
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return inside & has_outside_neighbor


def _solve_level(
    inside: np.ndarray,
    pixels: np.ndarray,
    values: np.ndarray,
    params: SolverParams,
) -> tuple[np.ndarray, int]:
    height, width = inside.shape
    fixed_ring = _mask_boundary(inside)
    fixed_ring[pixels[:, 1], pixels[:, 0]] = False
    # Start free pixels at the mean of all Dirichlet data (hints plus
    # the zero ring): constant solutions are then reached exactly, and
    # the start point already satisfies the discrete maximum principle.
    init = values.sum(axis=0) / (len(values) + np.count_nonzero(fixed_ring & inside))
    field = np.broadcast_to(init, (height, width, 2)).copy()

    total_iters = 0
    if params.warm_start and min(height, width) > _COARSEST_EDGE:
        coarse_inside = np.zeros(((height + 1) // 2, (width + 1) // 2), dtype=bool)
        # A coarse pixel is masked if any fine pixel under it is: keeps
        # thin animated regions alive on the way down.
        for dy in (0, 1):
            for dx in (0, 1):
                block = inside[dy::2, dx::2]
                coarse_inside[: block.shape[0], : block.shape[1]] |= block
        coarse_pixels = np.minimum(
            pixels // 2,
            np.array([coarse_inside.shape[1] - 1, coarse_inside.shape[0] - 1]),
        )
        coarse_field, coarse_iters = _solve_level(
            coarse_inside, coarse_pixels, values, params
        )
        total_iters += coarse_iters
        field = cv2.resize(coarse_field, (width, height), interpolation=cv2.INTER_LINEAR)

    fixed = ~inside | _mask_boundary(inside)
    field[fixed] = 0.0
    field[pixels[:, 1], pixels[:, 0]] = values  # hints override the zero ring
    free = inside & ~fixed
    free[pixels[:, 1], pixels[:, 0]] = False
    field, iterations = solver.relax(field, free, params.tolerance, params.max_iters)
    return field, total_iters + iterations


def solve_hint_field(
    mask: MaskImage,
    hints: list[FlowHint],
    size: tuple[int, int],
    params: SolverParams | None = None,
) -> tuple[FlowField, SolveInfo]:
    """Harmonically interpolate sparse hints into a dense field.

    Each component is the discrete harmonic function on the masked
    region with Dirichlet values at the snapped hint pixels, zero on
    mask pixels that touch unmasked ones, and mirrored image borders.
    Outside the mask the field is identically zero. Returns the field
    and solver diagnostics.
    """
    params = params or SolverParams()
    width, height = size
    pixels, values = _validate_hints(mask, hints, width, height)
    inside = mask.as_bool()
    field, iterations = _solve_level(inside, pixels, values, params)
    field[~inside] = 0.0
    return FlowField(field), SolveInfo(iterations=iterations)


def estimate_motion_from_hints(
    mask: MaskImage,
    hints: list[FlowHint],
    size: tuple[int, int],
    params: SolverParams | None = None,
) -> FlowField:
    """Dense Eulerian field from mask + hints (see solve_hint_field)."""
    field, _ = solve_hint_field(mask, hints, size, params)
    return field


def sample_bilinear(data: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample (H, W, C) data at continuous, edge-clamped coordinates.

    Uses the incremental form v00 + fx*(v10-v00) + ..., which is exact
    (to the bit) for constant fields.
    """
    height, width = data.shape[:2]
    x = np.clip(x, 0.0, width - 1.0)
    y = np.clip(y, 0.0, height - 1.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    v00 = data[y0, x0]
    v10 = data[y0, x1]
    v01 = data[y1, x0]
    v11 = data[y1, x1]
    return v00 + fx * (v10 - v00) + fy * (v01 - v00) + fx * fy * (v11 - v10 - v01 + v00)


def euler_integrate(field: FlowField, steps: int, direction: str) -> DisplacementField:
    """Accumulate displacement by stepping through M (or -M) `steps` times.

    F_0 = 0 and F_t(x0) = F_{t-1}(x0) + M~(x0 + F_{t-1}(x0)), with M~
    sampled bilinearly at edge-clamped positions.
    """
    return integrate_sequence(field, steps, direction)[-1]


def integrate_sequence(
    field: FlowField, steps: int, direction: str
) -> list[DisplacementField]:
    """All displacement fields 0..steps in one pass.

    Each entry is bit-identical to euler_integrate at that step count;
    the recursion simply shares prefixes, so a whole loop's fields cost
    one integration instead of one per frame.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    velocity = field.data if direction == "forward" else -field.data
    height, width = velocity.shape[:2]
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    sign = 1 if direction == "forward" else -1
    displacement = np.zeros((height, width, 2), dtype=np.float64)
    sequence = [DisplacementField(displacement, 0)]
    for step in range(1, steps + 1):
        sampled = sample_bilinear(
            velocity, xs + displacement[:, :, 0], ys + displacement[:, :, 1]
        )
        displacement = displacement + sampled
        sequence.append(DisplacementField(displacement, sign * step))
    return sequence


def scale_flow(field: FlowField, speed: float) -> FlowField:
    """Multiply every vector by a global speed factor (> 0)."""
    if not np.isfinite(speed) or speed <= 0:
        raise ValueError(f"speed must be finite and > 0, got {speed}")
    return FlowField(field.data * float(speed))


def load_hints_document(path) -> tuple[MaskImage, list[FlowHint], float]:
    """Read the hints JSON: {"mask": path, "hints": [...], "speed": s}.

    The mask path resolves relative to the document. The mask may also
    be inlined as a base64 PNG data URI (used by the HTTP service,
    whose clients have no server-side files).
    """
    path = Path(path)
    if not path.is_file():
        raise AssetError(f"no such hints file: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AssetError(f"invalid hints JSON: {exc}") from exc
    return parse_hints_document(document, base_dir=path.parent)


def parse_hints_document(document, base_dir=None) -> tuple[MaskImage, list[FlowHint], float]:
    if not isinstance(document, dict):
        raise AssetError("hints document must be a JSON object")
    unknown = set(document) - {"mask", "hints", "speed"}
    if unknown:
        raise AssetError(f"unknown hints keys: {sorted(unknown)}")
    if "mask" not in document or "hints" not in document:
        raise AssetError("hints document needs 'mask' and 'hints'")
    mask = _load_mask_ref(document["mask"], base_dir)
    raw_hints = document["hints"]
    if not isinstance(raw_hints, list):
        raise AssetError("'hints' must be a list")
    hints = []
    for entry in raw_hints:
        if not isinstance(entry, dict) or set(entry) != {"x", "y", "dx", "dy"}:
            raise AssetError(f"hint entries need exactly x, y, dx, dy: {entry}")
        try:
            hints.append(FlowHint(*(float(entry[k]) for k in ("x", "y", "dx", "dy"))))
        except (TypeError, ValueError) as exc:
            raise AssetError(f"non-numeric hint entry: {entry}") from exc
    speed = document.get("speed", 1.0)
    if not isinstance(speed, (int, float)) or not np.isfinite(speed) or speed <= 0:
        raise AssetError(f"speed must be a positive number, got {speed!r}")
    return mask, hints, float(speed)


def _load_mask_ref(ref, base_dir) -> MaskImage:
    import base64

    if not isinstance(ref, str):
        raise AssetError("'mask' must be a path or data URI string")
    if ref.startswith("data:image/png;base64,"):
        try:
            raw = base64.b64decode(ref.split(",", 1)[1], validate=True)
        except Exception as exc:
            raise AssetError(f"undecodable mask data URI: {exc}") from exc
        return decode_mask(raw, "<data URI>")
    mask_path = Path(ref)
    if base_dir is not None and not mask_path.is_absolute():
        mask_path = Path(base_dir) / mask_path
    return load_mask(mask_path)
