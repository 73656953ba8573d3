"""Jacobi relaxation toward discrete harmonic (Laplace) solutions.

One kernel backs three users: hint-field estimation, layer inpainting,
and frame hole filling. Free pixels relax toward the average of their
participating 4-neighbors; fixed participating pixels act as Dirichlet
data; non-participating neighbors and image borders contribute nothing
(zero-gradient). Jacobi, not in-place Gauss-Seidel, so results are
independent of update order and thread scheduling.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# Below this edge length the fill pyramid stops coarsening.
_COARSEST_EDGE = 24


def _neighbor_sum(values: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Sum of the 4-neighborhood with edge-mirrored borders (no pad)."""
    if values.shape[0] == 1:
        out[0] = 2.0 * values[0]
    else:
        out[1:-1] = values[:-2]
        out[1:-1] += values[2:]
        out[0] = values[0]
        out[0] += values[1]
        out[-1] = values[-1]
        out[-1] += values[-2]
    if values.shape[1] == 1:
        out[:, 0] += 2.0 * values[:, 0]
    else:
        out[:, 1:-1] += values[:, :-2]
        out[:, 1:-1] += values[:, 2:]
        out[:, 0] += values[:, 0]
        out[:, 0] += values[:, 1]
        out[:, -1] += values[:, -1]
        out[:, -1] += values[:, -2]
    return out


def relax(
    values: np.ndarray,
    free: np.ndarray,
    tolerance: float,
    max_iters: int,
    support: np.ndarray | None = None,
) -> tuple[np.ndarray, int]:
    """Run Jacobi sweeps on `free` pixels until the largest per-pixel
    update drops below `tolerance` or `max_iters` is reached.

    `values` is (H, W) or (H, W, C); `free` is a boolean (H, W) mask.
    When `support` is given, only neighbors inside it enter the local
    average (weighted by how many participate). Returns the relaxed
    array and the number of iterations performed.
    """
    if not free.any():
        return values.copy(), 0
    out = np.array(values, dtype=np.float64, copy=True)
    channels = out.ndim == 3
    free_sel = free[:, :, None] if channels else free

    if support is None:
        weight = None
        denom = np.full(free.shape, 0.25)
        orphan = None
    else:
        weight = support.astype(np.float64)
        counts = _neighbor_sum(weight, np.empty_like(weight))
        # Free pixels with no participating neighbor keep their value.
        orphan = free & (counts == 0)
        if not orphan.any():
            orphan = None
        denom = 1.0 / np.maximum(counts, 1.0)
        if channels:
            weight = weight[:, :, None]
    if channels:
        denom = denom[:, :, None]
        orphan_sel = orphan[:, :, None] if orphan is not None else None
    else:
        orphan_sel = orphan

    buffer = np.empty_like(out)
    for iteration in range(1, max_iters + 1):
        source = out if weight is None else out * weight
        averaged = _neighbor_sum(source, buffer) * denom
        if orphan_sel is not None:
            averaged = np.where(orphan_sel, out, averaged)
        updated = np.where(free_sel, averaged, out)
        delta = np.abs(updated[free] - out[free]).max()
        out = updated
        if delta < tolerance:
            return out, iteration
    return out, max_iters


def _pool_any(mask: np.ndarray) -> np.ndarray:
    half = ((mask.shape[0] + 1) // 2, (mask.shape[1] + 1) // 2)
    out = np.zeros(half, dtype=bool)
    for dy in (0, 1):
        for dx in (0, 1):
            block = mask[dy::2, dx::2]
            out[: block.shape[0], : block.shape[1]] |= block
    return out


def _pool_fixed_mean(values: np.ndarray, fixed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = ((fixed.shape[0] + 1) // 2, (fixed.shape[1] + 1) // 2)
    total = np.zeros(half + values.shape[2:], dtype=np.float64)
    count = np.zeros(half, dtype=np.float64)
    masked = values * (fixed[:, :, None] if values.ndim == 3 else fixed)
    for dy in (0, 1):
        for dx in (0, 1):
            block = masked[dy::2, dx::2]
            total[: block.shape[0], : block.shape[1]] += block
            cblock = fixed[dy::2, dx::2]
            count[: cblock.shape[0], : cblock.shape[1]] += cblock
    safe = np.maximum(count, 1.0)
    mean = total / (safe[:, :, None] if values.ndim == 3 else safe)
    return mean, count > 0


def _relax_pyramid(
    values: np.ndarray,
    free: np.ndarray,
    support: np.ndarray,
    tolerance: float,
    max_iters: int,
    neutral: np.ndarray,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, int]:
    """Coarse-to-fine Jacobi: solve a 2x-downsampled version of the
    problem first and upsample it as the starting point. The stopping
    rule at the finest level is unchanged; only the initial guess
    improves. `neutral` fills non-participating pixels before resizing
    so out-of-domain values never bleed into the interpolation, and
    the init is clamped into `bounds` (the Dirichlet ring's range) so
    the maximum principle survives early stopping exactly.
    """
    height, width = free.shape
    total_iterations = 0
    if min(height, width) > _COARSEST_EDGE:
        import cv2

        fixed = support & ~free
        coarse_fixed_values, coarse_has_fixed = _pool_fixed_mean(values, fixed)
        coarse_free = _pool_any(free) & ~coarse_has_fixed
        coarse_support = coarse_has_fixed | coarse_free
        coarse_values = np.broadcast_to(
            neutral, coarse_fixed_values.shape
        ).astype(np.float64)
        sel = coarse_has_fixed[:, :, None] if values.ndim == 3 else coarse_has_fixed
        coarse_values = np.where(sel, coarse_fixed_values, coarse_values)
        solved, iterations = _relax_pyramid(
            coarse_values, coarse_free, coarse_support, tolerance, max_iters, neutral
        )
        total_iterations += iterations
        blended = np.where(
            coarse_support[:, :, None] if values.ndim == 3 else coarse_support,
            solved,
            np.broadcast_to(neutral, solved.shape),
        )
        upsampled = cv2.resize(blended, (width, height), interpolation=cv2.INTER_LINEAR)
        if upsampled.ndim < values.ndim:
            upsampled = upsampled[:, :, None]
        values = values.copy()
        init = upsampled[free]
        if bounds is not None:
            init = np.clip(init, bounds[0], bounds[1])
        values[free] = init
    relaxed, iterations = relax(values, free, tolerance, max_iters, support=support)
    return relaxed, total_iterations + iterations


def fill_region(
    values: np.ndarray,
    free: np.ndarray,
    tolerance: float,
    max_iters: int,
    support: np.ndarray | None = None,
) -> tuple[np.ndarray, int, np.ndarray]:
    """Harmonically fill `free` pixels from adjacent fixed support pixels.

    Connected components of the free region with no adjacent fixed
    support pixel are left untouched. Each remaining component starts
    at the mean of its own Dirichlet ring (so a constant surround is
    reproduced exactly) and relaxes independently inside its bounding
    window; components are decoupled because the label connectivity
    matches the Jacobi stencil. Returns (filled values, iterations,
    mask of pixels actually filled).
    """
    full_support = np.ones_like(free) if support is None else support
    free = free & full_support
    if not free.any():
        return values.copy(), 0, np.zeros_like(free)

    out = np.array(values, dtype=np.float64, copy=True)
    labels, count = ndimage.label(free, structure=_CROSS)
    fixed_support = full_support & ~free
    filled = np.zeros_like(free)
    total_iterations = 0
    for component, box in enumerate(ndimage.find_objects(labels), start=1):
        pixels = labels == component
        ring = ndimage.binary_dilation(pixels, structure=_CROSS) & fixed_support
        if not ring.any():
            continue  # no Dirichlet boundary: leave unfilled
        ring_values = out[ring]
        ring_mean = ring_values.mean(axis=0)
        out[pixels] = ring_mean
        filled |= pixels
        window = (
            slice(max(box[0].start - 1, 0), min(box[0].stop + 1, free.shape[0])),
            slice(max(box[1].start - 1, 0), min(box[1].stop + 1, free.shape[1])),
        )
        relaxed, iterations = _relax_pyramid(
            out[window],
            pixels[window],
            full_support[window],
            tolerance,
            max_iters,
            np.asarray(ring_mean),
            bounds=(ring_values.min(axis=0), ring_values.max(axis=0)),
        )
        out[window] = relaxed
        total_iterations += iterations
    return out, total_iterations, filled
