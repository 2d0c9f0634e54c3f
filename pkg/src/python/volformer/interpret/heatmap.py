# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Volume heatmaps of where the class token attends, and their export as archives and PGM
slices."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import List

import numpy as np

from volformer.checkpoint import archive
from volformer.errors import ShapeError
from volformer.interpret.rollout import RolloutMatrix
from volformer.model.tokenizer import PatchGeometry
from volformer.tensor.ops import Tensor
from volformer.tensor.resize import bilinear_resize_2d

HEATMAP_TENSOR = "heatmap"
PGM_MAXVAL = 255


@dataclass(frozen=True)
class VolumeHeatmap:
    """Class-token attention projected onto the padded volume.

    Attributes:
        values (Tensor): Shape [D, H, W], min 0 and max 1, or all 0 when constant.
    """

    values: Tensor


def class_heatmap(
    rollout: RolloutMatrix, geometry: PatchGeometry, height: int, width: int
) -> VolumeHeatmap:
    """Turns the class token's rollout row into a volume heatmap. The patch entries are
    arranged in patchify order, each slice is upsampled bilinearly to height x width and the
    whole volume is min-max normalized.

    Args:
        rollout (RolloutMatrix): The [T, T] rollout, T = D * Gh * Gw + 1.
        geometry (PatchGeometry): The patch grid.
        height (int): The padded slice height.
        width (int): The padded slice width.

    Raises:
        ShapeError: If the rollout does not match the geometry.

    Returns:
        VolumeHeatmap: The heatmap.
    """

    tokens = geometry.num_patches + 1
    if rollout.shape != (tokens, tokens):
        raise ShapeError.mismatch("class_heatmap rollout", rollout.shape, (tokens, tokens))
    patch_map = np.asarray(rollout[0, 1:], dtype=np.float64).reshape(
        geometry.depth, geometry.grid_h, geometry.grid_w
    )
    low, high = float(patch_map.min()), float(patch_map.max())
    if high == low:
        return VolumeHeatmap(np.zeros((geometry.depth, height, width), dtype=np.float32))
    slices = [bilinear_resize_2d(depth_slice, height, width) for depth_slice in patch_map]
    volume = np.stack(slices).astype(np.float64)
    low, high = float(volume.min()), float(volume.max())
    normalized = (volume - low) / (high - low) if high > low else np.zeros_like(volume)
    return VolumeHeatmap(np.clip(normalized, 0.0, 1.0).astype(np.float32))


def pgm_bytes(plane: Tensor) -> bytes:
    """Encodes a [H, W] plane of values in [0, 1] as a binary 8-bit PGM.

    Args:
        plane (Tensor): The plane.

    Returns:
        bytes: The PGM file.
    """

    height, width = plane.shape
    pixels = np.rint(PGM_MAXVAL * np.clip(plane.astype(np.float64), 0.0, 1.0)).astype(np.uint8)
    return f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii") + pixels.tobytes()


def export_heatmap(heatmap: VolumeHeatmap, path: str) -> List[str]:
    """Writes a heatmap archive at path and one PGM per slice next to it, named
    <stem>_slice<d>.pgm with d zero-padded to three digits.

    Args:
        heatmap (VolumeHeatmap): The heatmap.
        path (str): The archive path, normally ending in .nta.

    Returns:
        List[str]: The written paths, archive first.
    """

    archive.save(path, {HEATMAP_TENSOR: heatmap.values})
    stem = os.path.splitext(path)[0]
    written = [path]
    for index, plane in enumerate(heatmap.values):
        slice_path = f"{stem}_slice{index:03d}.pgm"
        with open(slice_path, "wb") as pgm_file:
            pgm_file.write(pgm_bytes(plane))
        written.append(slice_path)
    return written


def mass_fraction(heatmap: VolumeHeatmap, mask: Tensor) -> float:
    """The share of total heatmap mass inside a mask.

    Args:
        heatmap (VolumeHeatmap): The heatmap.
        mask (Tensor): A [D, H', W'] mask with H' <= H and W' <= W, nonzero inside; it is
            zero-padded to the heatmap's shape.

    Returns:
        float: Mass inside the mask over total mass, 0 for an all-zero heatmap.
    """

    values = heatmap.values.astype(np.float64)
    if mask.ndim != 3 or mask.shape[0] != values.shape[0] or any(
        mine > theirs for mine, theirs in zip(mask.shape[1:], values.shape[1:])
    ):
        raise ShapeError.mismatch("mass_fraction mask", mask.shape, values.shape)
    padded = np.zeros(values.shape, dtype=bool)
    padded[:, : mask.shape[1], : mask.shape[2]] = mask != 0
    total = float(values.sum())
    return float(values[padded].sum()) / total if total > 0 else 0.0
