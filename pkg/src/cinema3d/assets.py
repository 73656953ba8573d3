"""Image, depth, flow, and mask containers plus file I/O.

All pixel data lives in numpy arrays. Color is kept in linear light
internally; sRGB conversion happens only when reading or writing PNG.
Depth is positive with larger values meaning farther. Flow vectors are
in pixel units per frame step.

Supported formats:
  - PNG, 8- or 16-bit (color frames, masks, 16-bit grayscale depth)
  - PFM, grayscale "Pf" variant (depth; scale sign encodes endianness)
  - Middlebury .flo (dense flow; little-endian float32 throughout)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .errors import AssetError

FLO_MAGIC = 202021.25
DEPTH_FLOOR = 1e-4

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# PNG color types from the IHDR chunk.
_PNG_GRAY = 0
_PNG_RGB = 2
_PNG_PALETTE = 3
_PNG_GRAY_ALPHA = 4
_PNG_RGBA = 6


def _lock(arr: np.ndarray) -> np.ndarray:
    """Make an array read-only; asset types are immutable after load."""
    arr.flags.writeable = False
    return arr


@dataclass
class ColorImage:
    """Dense RGB grid, linear-light floats in [0, 1], shape (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise AssetError(f"color image must be (H, W, 3), got {self.data.shape}")
        if self.data.shape[0] == 0 or self.data.shape[1] == 0:
            raise AssetError("color image has zero dimension")
        if not np.isfinite(self.data).all():
            raise AssetError("color image contains non-finite values")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise AssetError("color image values must lie in [0, 1]")
        _lock(self.data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass
class DepthMap:
    """Dense positive depth grid, arbitrary monocular scale, shape (H, W)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise AssetError(f"depth map must be (H, W), got {self.data.shape}")
        if self.data.shape[0] == 0 or self.data.shape[1] == 0:
            raise AssetError("depth map has zero dimension")
        if not np.isfinite(self.data).all():
            raise AssetError("depth map contains non-finite values")
        if self.data.min() <= 0.0:
            raise AssetError("depth map values must be positive")
        _lock(self.data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass
class FlowField:
    """Per-pixel (u, v) velocity in pixels per frame step, shape (H, W, 2)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 2:
            raise AssetError(f"flow field must be (H, W, 2), got {self.data.shape}")
        if self.data.shape[0] == 0 or self.data.shape[1] == 0:
            raise AssetError("flow field has zero dimension")
        if not np.isfinite(self.data).all():
            raise AssetError("flow field contains non-finite values")
        _lock(self.data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass
class MaskImage:
    """Binary per-pixel mask, values in {0, 1}, shape (H, W)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if self.data.ndim != 2:
            raise AssetError(f"mask must be (H, W), got {self.data.shape}")
        if not np.isin(self.data, (0, 1)).all():
            raise AssetError("mask values must be 0 or 1")
        _lock(self.data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)


@dataclass
class AssetBundle:
    """Dimension-checked set of inputs for one scene.

    All present members must share the same W x H; the check runs once
    here so downstream stages can assume consistency.
    """

    color: ColorImage
    depth: DepthMap
    flow: FlowField | None = None
    mask: MaskImage | None = None

    def __post_init__(self):
        ref = (self.color.height, self.color.width)
        for name in ("depth", "flow", "mask"):
            member = getattr(self, name)
            if member is None:
                continue
            got = (member.height, member.width)
            if got != ref:
                raise AssetError(
                    f"dimension mismatch: {name} is {got[1]}x{got[0]}, "
                    f"color is {ref[1]}x{ref[0]}"
                )


def srgb_to_linear(u: np.ndarray) -> np.ndarray:
    """sRGB electro-optical transfer function, array-valued."""
    u = np.asarray(u, dtype=np.float64)
    return np.where(u <= 0.04045, u / 12.92, ((u + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`srgb_to_linear`."""
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1.0 / 2.4) - 0.055)


def _read_bytes(path) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise AssetError(f"no such file: {p}")
    return p.read_bytes()


def _write_bytes(path, payload: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as exc:
        raise AssetError(f"cannot write {path}: {exc}") from exc


def _png_header(raw: bytes, path) -> tuple[int, int, int, int]:
    """Parse the IHDR chunk: (width, height, bit_depth, color_type)."""
    if len(raw) < 33 or not raw.startswith(_PNG_SIGNATURE):
        raise AssetError(f"malformed image (not a PNG): {path}")
    length, ctype = struct.unpack(">I4s", raw[8:16])
    if ctype != b"IHDR" or length != 13:
        raise AssetError(f"malformed image (bad IHDR): {path}")
    width, height, bit_depth, color_type = struct.unpack(">IIBB", raw[16:26])
    return width, height, bit_depth, color_type


def _decode_png(raw: bytes, path) -> np.ndarray:
    img = cv2.imdecode(np.frombuffer(raw, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise AssetError(f"malformed image: {path}")
    return img


def load_color(path) -> ColorImage:
    """Load an 8- or 16-bit RGB(A) PNG and decode sRGB to linear floats.

    Alpha, when present, is dropped. Raises AssetError for missing or
    truncated files, zero dimensions, and unsupported bit depths or
    color types (grayscale, palette).
    """
    return decode_color(_read_bytes(path), path)


def decode_color(raw: bytes, path="<bytes>") -> ColorImage:
    width, height, bit_depth, color_type = _png_header(raw, path)
    if width == 0 or height == 0:
        raise AssetError(f"zero dimension in image: {path}")
    if bit_depth not in (8, 16):
        raise AssetError(f"unsupported bit depth {bit_depth} (want 8 or 16): {path}")
    if color_type not in (_PNG_RGB, _PNG_RGBA):
        raise AssetError(f"unsupported color type {color_type} (want RGB or RGBA): {path}")
    img = _decode_png(raw, path)
    if img.ndim != 3:
        raise AssetError(f"malformed image: {path}")
    img = img[:, :, :3][:, :, ::-1]  # BGR(A) -> RGB
    scale = 255.0 if img.dtype == np.uint8 else 65535.0
    return ColorImage(srgb_to_linear(img.astype(np.float64) / scale))


def save_frame(image: ColorImage, path) -> None:
    """Encode linear color to sRGB and write an 8-bit PNG."""
    srgb = linear_to_srgb(np.clip(image.data, 0.0, 1.0))
    quantized = np.floor(srgb * 255.0 + 0.5).astype(np.uint8)
    bgr = quantized[:, :, ::-1]
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(bgr))
    if not ok:
        raise AssetError(f"PNG encode failed: {path}")
    _write_bytes(path, buf.tobytes())


def _parse_pfm(raw: bytes, path) -> np.ndarray:
    # Header is three whitespace-separated tokens: magic, "W H", scale.
    # A negative scale marks little-endian payload; the magnitude is a
    # unit annotation that readers conventionally ignore.
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(raw):
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start < pos:
            tokens.append(raw[start:pos])
    if len(tokens) < 4:
        raise AssetError(f"truncated PFM header: {path}")
    magic = tokens[0]
    if magic == b"PF":
        raise AssetError(f"expected grayscale PFM ('Pf'), got color ('PF'): {path}")
    if magic != b"Pf":
        raise AssetError(f"not a PFM file: {path}")
    try:
        width, height = int(tokens[1]), int(tokens[2])
        scale = float(tokens[3])
    except ValueError as exc:
        raise AssetError(f"bad PFM header: {path}") from exc
    if width <= 0 or height <= 0:
        raise AssetError(f"bad PFM dimensions {width}x{height}: {path}")
    if scale == 0:
        raise AssetError(f"PFM scale must be nonzero: {path}")
    pos += 1  # single whitespace byte separates header from payload
    count = width * height
    payload = raw[pos : pos + 4 * count]
    if len(payload) < 4 * count:
        raise AssetError(f"truncated PFM payload: {path}")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(payload, dtype=dtype, count=count).astype(np.float64)
    # PFM scanlines run bottom-to-top.
    return data.reshape(height, width)[::-1].copy()


def save_pfm(data: np.ndarray, path) -> None:
    """Write a grayscale little-endian PFM (scale -1.0)."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise AssetError(f"PFM payload must be 2-D, got {arr.shape}")
    header = f"Pf\n{arr.shape[1]} {arr.shape[0]}\n-1.0\n".encode("ascii")
    _write_bytes(path, header + arr[::-1].astype("<f4").tobytes())


def load_depth(path, depth_scale: float = 10.0) -> DepthMap:
    """Load depth from a grayscale PFM or a 16-bit grayscale PNG.

    PNG values map linearly as v / 65535 * depth_scale. Values at or
    below zero are clamped up to DEPTH_FLOOR; if more than 10% of the
    pixels are non-positive before clamping the file is rejected as
    degenerate.
    """
    return decode_depth(_read_bytes(path), depth_scale, path)


def decode_depth(raw: bytes, depth_scale: float = 10.0, path="<bytes>") -> DepthMap:
    if raw.startswith(_PNG_SIGNATURE):
        width, height, bit_depth, color_type = _png_header(raw, path)
        if width == 0 or height == 0:
            raise AssetError(f"zero dimension in depth image: {path}")
        if bit_depth != 16 or color_type != _PNG_GRAY:
            raise AssetError(f"depth PNG must be 16-bit grayscale: {path}")
        img = _decode_png(raw, path)
        if img.ndim != 2 or img.dtype != np.uint16:
            raise AssetError(f"depth PNG must be 16-bit grayscale: {path}")
        values = img.astype(np.float64) / 65535.0 * float(depth_scale)
    else:
        values = _parse_pfm(raw, path)
    if not np.isfinite(values).all():
        raise AssetError(f"depth contains non-finite values: {path}")
    bad = np.count_nonzero(values <= 0.0)
    if bad > 0.10 * values.size:
        raise AssetError(f"degenerate depth ({bad} of {values.size} pixels <= 0): {path}")
    return DepthMap(np.maximum(values, DEPTH_FLOOR))


def load_flow(path) -> FlowField:
    """Decode a Middlebury .flo file bit-exactly (no resampling)."""
    raw = _read_bytes(path)
    if len(raw) < 12:
        raise AssetError(f"not a .flo file (too short): {path}")
    (magic,) = struct.unpack("<f", raw[0:4])
    if magic != FLO_MAGIC:
        raise AssetError(f"not a .flo file (bad magic): {path}")
    width, height = struct.unpack("<ii", raw[4:12])
    if width <= 0 or height <= 0:
        raise AssetError(f"bad .flo dimensions {width}x{height}: {path}")
    count = width * height * 2
    payload = raw[12 : 12 + 4 * count]
    if len(payload) < 4 * count:
        raise AssetError(f"truncated flow: {path}")
    data = np.frombuffer(payload, dtype="<f4", count=count).astype(np.float64)
    return FlowField(data.reshape(height, width, 2))


def save_flow(flow: FlowField, path) -> None:
    """Write a Middlebury .flo file; round trips through load_flow bit-exactly."""
    header = struct.pack("<fii", FLO_MAGIC, flow.width, flow.height)
    _write_bytes(path, header + flow.data.astype("<f4").tobytes())


def load_mask(path) -> MaskImage:
    """Load a PNG as a binary mask: any nonzero pixel counts as 1."""
    return decode_mask(_read_bytes(path), path)


def decode_mask(raw: bytes, path="<bytes>") -> MaskImage:
    if not raw.startswith(_PNG_SIGNATURE):
        raise AssetError(f"mask must be a PNG: {path}")
    img = _decode_png(raw, path)
    if img.ndim == 3:
        img = img.max(axis=2)
    return MaskImage((img > 0).astype(np.uint8))


def save_mask(mask: MaskImage, path) -> None:
    """Write a binary mask as an 8-bit grayscale PNG (0 / 255)."""
    ok, buf = cv2.imencode(".png", (mask.data * 255).astype(np.uint8))
    if not ok:
        raise AssetError(f"PNG encode failed: {path}")
    _write_bytes(path, buf.tobytes())


def frame_filename(index: int) -> str:
    """Zero-padded output name for frame `index`."""
    return f"frame_{index:05d}.png"
