# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Resampling of 2D grids. Bicubic resizing adapts position-embedding grids; bilinear resizing
upsamples attention maps for display."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from volformer.errors import ShapeError
from volformer.tensor.ops import Tensor, result_dtype

CATMULL_ROM_A = -0.5


def cubic_kernel(
    distance: npt.NDArray[np.float64], a: float = CATMULL_ROM_A
) -> npt.NDArray[np.float64]:
    """The Keys cubic convolution kernel; a = -0.5 gives Catmull-Rom.

    Args:
        distance (NDArray): Distances from the sample point.
        a (float, optional): The kernel parameter. Defaults to -0.5.

    Returns:
        NDArray: The kernel weights.
    """

    x = np.abs(distance)
    near = ((a + 2) * x - (a + 3)) * x * x + 1
    far = ((a * x - 5 * a) * x + 8 * a) * x - 4 * a
    return np.where(x <= 1, near, np.where(x < 2, far, 0.0))


def _bicubic_weights(size_in: int, size_out: int) -> npt.NDArray[np.float64]:
    """The [size_out, size_in] matrix that resamples one axis with align-corners sampling.
    Taps beyond the border are clamped to the edge sample."""

    weights = np.zeros((size_out, size_in), dtype=np.float64)
    scale = (size_in - 1) / (size_out - 1) if size_out > 1 else 0.0
    for out_idx in range(size_out):
        src = out_idx * scale
        base = int(np.floor(src))
        frac = src - base
        taps = np.arange(base - 1, base + 3)
        tap_weights = cubic_kernel(frac - (taps - base).astype(np.float64))
        for tap, weight in zip(np.clip(taps, 0, size_in - 1), tap_weights):
            weights[out_idx, tap] += weight
    return weights


def bicubic_resize_2d(grid: Tensor, out_h: int, out_w: int) -> Tensor:
    """Channelwise Catmull-Rom resize of an [h, w, d] grid with align-corners sampling.
    An axis whose size does not change is copied through untouched.

    Args:
        grid (Tensor): The grid of shape [h, w, d], h and w at least 2.
        out_h (int): The output height, at least 1.
        out_w (int): The output width, at least 1.

    Raises:
        ShapeError: If the grid is not 3D or is degenerate (h or w below 2).
        ValueError: If an output size is below 1.

    Returns:
        Tensor: The resized grid of shape [out_h, out_w, d].
    """

    if grid.ndim != 3:
        raise ShapeError.mismatch("bicubic_resize_2d expects [h, w, d]", grid.shape)
    height, width, _ = grid.shape
    if height < 2 or width < 2:
        raise ShapeError(
            message=f"Cannot interpolate a degenerate {height}x{width} grid, "
            + "replicate it instead of resizing",
            shapes=(tuple(grid.shape),),
        )
    if out_h < 1 or out_w < 1:
        raise ValueError(f"Output size must be positive, {out_h}x{out_w} provided")

    out = grid
    if out_h != height:
        rows = _bicubic_weights(height, out_h)
        out = np.einsum("oh,hwd->owd", rows, out.astype(np.float64, copy=False))
    if out_w != width:
        cols = _bicubic_weights(width, out_w)
        out = np.einsum("pw,hwd->hpd", cols, out.astype(np.float64, copy=False))
    return np.array(out, dtype=result_dtype(grid), copy=True)


def _bilinear_weights(size_in: int, size_out: int) -> npt.NDArray[np.float64]:
    """The [size_out, size_in] linear interpolation matrix with half-pixel sampling, so each
    input cell covers size_out / size_in output samples."""

    weights = np.zeros((size_out, size_in), dtype=np.float64)
    for out_idx in range(size_out):
        src = min(max((out_idx + 0.5) * size_in / size_out - 0.5, 0.0), size_in - 1.0)
        low = int(np.floor(src))
        high = min(low + 1, size_in - 1)
        frac = src - low
        weights[out_idx, low] += 1.0 - frac
        weights[out_idx, high] += frac
    return weights


def bilinear_resize_2d(grid: Tensor, out_h: int, out_w: int) -> Tensor:
    """Bilinear resize of an [h, w] map with half-pixel sampling and clamped borders.

    Args:
        grid (Tensor): The map of shape [h, w], any positive size.
        out_h (int): The output height.
        out_w (int): The output width.

    Returns:
        Tensor: The resized map of shape [out_h, out_w].
    """

    if grid.ndim != 2:
        raise ShapeError.mismatch("bilinear_resize_2d expects [h, w]", grid.shape)
    rows = _bilinear_weights(grid.shape[0], out_h)
    cols = _bilinear_weights(grid.shape[1], out_w)
    out = rows @ grid.astype(np.float64, copy=False) @ cols.T
    return out.astype(result_dtype(grid), copy=False)
