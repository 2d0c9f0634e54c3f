# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Turns a 3D volume into the encoder's input sequence. Each slice is replicated to three
channels and cut into patches; patches are flattened channel-major then row-major and
ordered slice-major, then patch-row, then patch-column. Patch intensities are mapped from
[0, 1] to [-1, 1] before projection. The 2D position embedding grid is resized to the slice
grid if needed and replicated once per slice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from volformer.checkpoint import archive
from volformer.errors import ArchiveError, ArchiveErrorCode, DataError, ShapeError
from volformer.tensor.ops import Tensor, as_tensor, check_finite, matmul
from volformer.tensor.resize import bicubic_resize_2d

PATCH_SIZE = 16
VOLUME_TENSOR = "volume"
INTENSITY_CENTRE = 0.5
INTENSITY_SCALE = 0.5


@dataclass(frozen=True)
class Volume:
    """A D x H x W grid of normalized voxel intensities.

    Attributes:
        voxels (Tensor): The intensities, shape [D, H, W], values in [0, 1].
    """

    voxels: Tensor

    def __post_init__(self) -> None:
        voxels = self.voxels
        if voxels.ndim != 3 or min(voxels.shape) < 1:
            raise ShapeError.mismatch("Volume expects a non-empty [D, H, W] grid", voxels.shape)
        check_finite(voxels, "volume voxels")
        if voxels.min() < 0.0 or voxels.max() > 1.0:
            raise DataError(
                message="Voxel intensities must lie in [0, 1], "
                + f"found [{voxels.min()}, {voxels.max()}]"
            )

    @staticmethod
    def of(values: Tensor) -> Volume:
        """Builds a float32 Volume from array-like values.

        Args:
            values (Tensor): The intensities, shape [D, H, W].

        Returns:
            Volume: The volume.
        """

        return Volume(as_tensor(values, np.float32))

    @staticmethod
    def load(path: str) -> Volume:
        """Reads a volume stored as the "volume" tensor of an archive.

        Args:
            path (str): The archive path.

        Raises:
            ArchiveError: If the archive has no volume tensor.

        Returns:
            Volume: The volume.
        """

        tensors = archive.load(path)
        if VOLUME_TENSOR not in tensors:
            raise ArchiveError(
                message=f"{path} has no {VOLUME_TENSOR} tensor",
                code=ArchiveErrorCode.MISSING,
                tensor=VOLUME_TENSOR,
            )
        return Volume(tensors[VOLUME_TENSOR])

    def save(self, path: str, **extra: Tensor) -> None:
        """Writes the volume, and any extra tensors such as masks, to an archive.

        Args:
            path (str): The archive path.
            **extra (Tensor): Additional tensors stored next to the volume.
        """

        archive.save(path, {VOLUME_TENSOR: self.voxels, **extra})

    @property
    def depth(self) -> int:
        """The number of slices."""

        return int(self.voxels.shape[0])

    @property
    def height(self) -> int:
        """The slice height."""

        return int(self.voxels.shape[1])

    @property
    def width(self) -> int:
        """The slice width."""

        return int(self.voxels.shape[2])


@dataclass(frozen=True)
class PatchGeometry:
    """The patch grid of a padded volume.

    Attributes:
        depth (int): The number of slices D.
        grid_h (int): Patch rows per slice, H / P.
        grid_w (int): Patch columns per slice, W / P.
        patch (int, optional): The patch side P. Defaults to 16.
    """

    depth: int
    grid_h: int
    grid_w: int
    patch: int = PATCH_SIZE

    def __post_init__(self) -> None:
        if min(self.depth, self.grid_h, self.grid_w, self.patch) < 1:
            raise ValueError(f"Patch geometry sizes must be positive: {self}")

    @staticmethod
    def for_shape(depth: int, height: int, width: int, patch: int = PATCH_SIZE) -> PatchGeometry:
        """The geometry of a volume after padding to patch multiples.

        Args:
            depth (int): The number of slices.
            height (int): The unpadded slice height.
            width (int): The unpadded slice width.
            patch (int, optional): The patch side. Defaults to 16.

        Returns:
            PatchGeometry: The geometry.
        """

        return PatchGeometry(depth, -(-height // patch), -(-width // patch), patch)

    @staticmethod
    def for_volume(volume: Volume, patch: int = PATCH_SIZE) -> PatchGeometry:
        """The geometry of a volume after padding to patch multiples.

        Args:
            volume (Volume): The volume.
            patch (int, optional): The patch side. Defaults to 16.

        Returns:
            PatchGeometry: The geometry.
        """

        return PatchGeometry.for_shape(volume.depth, volume.height, volume.width, patch)

    @property
    def num_patches(self) -> int:
        """The token count N = D * Gh * Gw, excluding the class token."""

        return self.depth * self.grid_h * self.grid_w

    @property
    def padded_shape(self) -> Tuple[int, int, int]:
        """The [D, H, W] shape of a padded volume with this geometry."""

        return (self.depth, self.grid_h * self.patch, self.grid_w * self.patch)


@dataclass(frozen=True)
class PositionTable:
    """Learnable position embeddings for a volume geometry.

    Attributes:
        class_pe (Tensor): The class token's embedding, shape [1, dim].
        patch_pe (Tensor): One embedding per patch, shape [D, Gh, Gw, dim].
    """

    class_pe: Tensor
    patch_pe: Tensor

    @property
    def geometry(self) -> Tuple[int, int, int]:
        """The (D, Gh, Gw) the table covers."""

        depth, grid_h, grid_w, _ = self.patch_pe.shape
        return (depth, grid_h, grid_w)


@dataclass(frozen=True)
class TokenSequence:
    """The encoder input: the class token at row 0 followed by one token per patch.

    Attributes:
        tokens (Tensor): Shape [N + 1, dim].
        geometry (PatchGeometry): The geometry of the patches.
    """

    tokens: Tensor
    geometry: PatchGeometry

    @property
    def length(self) -> int:
        """The sequence length T = N + 1."""

        return int(self.tokens.shape[0])


def replicate_channels(volume: Volume, channels: int = 3) -> Tensor:
    """Copies every grayscale slice into each color channel.

    Args:
        volume (Volume): The volume.
        channels (int, optional): The number of channels. Defaults to 3.

    Returns:
        Tensor: Shape [D, channels, H, W].
    """

    voxels = volume.voxels
    return np.ascontiguousarray(
        np.broadcast_to(voxels[:, None, :, :], (voxels.shape[0], channels) + voxels.shape[1:])
    )


def pad_to_patch_multiple(volume: Volume, patch: int = PATCH_SIZE) -> Volume:
    """Zero-pads the bottom and right of every slice so H and W become patch multiples.

    Args:
        volume (Volume): The volume.
        patch (int, optional): The patch side. Defaults to 16.

    Returns:
        Volume: The padded volume, or the input itself when already divisible.
    """

    pad_h = -volume.height % patch
    pad_w = -volume.width % patch
    if pad_h == 0 and pad_w == 0:
        return volume
    return Volume(np.pad(volume.voxels, ((0, 0), (0, pad_h), (0, pad_w))))


def patchify(images: Tensor, patch: int = PATCH_SIZE) -> Tensor:
    """Cuts [D, C, H, W] images into flattened patches.

    Args:
        images (Tensor): The channel-replicated volume, H and W multiples of patch.
        patch (int, optional): The patch side. Defaults to 16.

    Raises:
        ShapeError: If H or W is not a multiple of the patch side.

    Returns:
        Tensor: Shape [D * Gh * Gw, C * patch * patch].
    """

    depth, chans, height, width = images.shape
    if height % patch or width % patch:
        raise ShapeError(
            message=f"Slices of {height}x{width} are not multiples of {patch}, "
            + "call pad_to_patch_multiple first",
            shapes=(tuple(images.shape),),
        )
    grid_h, grid_w = height // patch, width // patch
    blocks = images.reshape(depth, chans, grid_h, patch, grid_w, patch)
    blocks = blocks.transpose(0, 2, 4, 1, 3, 5)
    return np.ascontiguousarray(blocks.reshape(depth * grid_h * grid_w, chans * patch * patch))


def center_intensities(patches: Tensor) -> Tensor:
    """Maps intensities from [0, 1] to [-1, 1], the input range of the encoder. Padding
    voxels become -1.

    Args:
        patches (Tensor): Flattened patches of voxel intensities.

    Returns:
        Tensor: (patches - 0.5) / 0.5 in the dtype of patches.
    """

    return ((patches - INTENSITY_CENTRE) / INTENSITY_SCALE).astype(patches.dtype, copy=False)


def unpatchify(patches: Tensor, geometry: PatchGeometry, channels: int = 3) -> Tensor:
    """Inverts patchify.

    Args:
        patches (Tensor): Shape [N, channels * P * P].
        geometry (PatchGeometry): The patch grid.
        channels (int, optional): The number of channels. Defaults to 3.

    Returns:
        Tensor: Shape [D, channels, H, W].
    """

    patch = geometry.patch
    if patches.shape != (geometry.num_patches, channels * patch * patch):
        raise ShapeError.mismatch(
            "unpatchify", patches.shape, (geometry.num_patches, channels * patch * patch)
        )
    blocks = patches.reshape(
        geometry.depth, geometry.grid_h, geometry.grid_w, channels, patch, patch
    ).transpose(0, 3, 1, 4, 2, 5)
    depth, height, width = geometry.padded_shape
    return np.ascontiguousarray(blocks.reshape(depth, channels, height, width))


def project_patches(patches: Tensor, proj_w: Tensor, proj_b: Tensor) -> Tensor:
    """Linear projection of flattened patches to token embeddings.

    Args:
        patches (Tensor): Shape [N, patch_dim].
        proj_w (Tensor): Shape [patch_dim, dim].
        proj_b (Tensor): Shape [dim].

    Raises:
        ShapeError: If the shapes disagree.

    Returns:
        Tensor: patches @ proj_w + proj_b, shape [N, dim].
    """

    if proj_b.shape != (proj_w.shape[-1],):
        raise ShapeError.mismatch("project_patches bias", proj_w.shape, proj_b.shape)
    out = matmul(patches, proj_w)
    return (out + proj_b.astype(out.dtype)).astype(out.dtype, copy=False)


def build_position_table(
    pe2d_class: Tensor, pe2d_grid: Tensor, depth: int, grid_h: int, grid_w: int
) -> PositionTable:
    """Adapts pretrained 2D position embeddings to a volume geometry. The grid is resized
    bicubically when the slice grid differs (larger or smaller), then replicated into depth
    independent copies. The class embedding passes through unchanged.

    Args:
        pe2d_class (Tensor): The class embedding, shape [1, dim].
        pe2d_grid (Tensor): The 2D grid, shape [Gh0, Gw0, dim], Gh0 and Gw0 at least 2.
        depth (int): The number of slices D.
        grid_h (int): The target patch rows Gh.
        grid_w (int): The target patch columns Gw.

    Raises:
        ShapeError: If the source grid is degenerate or the class embedding has the wrong
            width.

    Returns:
        PositionTable: The adapted table.
    """

    if pe2d_grid.ndim != 3 or pe2d_grid.shape[0] < 2 or pe2d_grid.shape[1] < 2:
        raise ShapeError(
            message=f"Position grid {list(pe2d_grid.shape)} is degenerate, need at least 2x2",
            shapes=(tuple(pe2d_grid.shape),),
        )
    if pe2d_class.shape != (1, pe2d_grid.shape[2]):
        raise ShapeError.mismatch("class position embedding", pe2d_class.shape, pe2d_grid.shape)
    if depth < 1:
        raise ValueError(f"Depth must be positive, {depth} provided")
    if (grid_h, grid_w) != pe2d_grid.shape[:2]:
        slice_pe = bicubic_resize_2d(pe2d_grid, grid_h, grid_w)
    else:
        slice_pe = pe2d_grid
    patch_pe = np.repeat(slice_pe[None, ...], depth, axis=0)
    return PositionTable(class_pe=np.array(pe2d_class, copy=True), patch_pe=patch_pe)


def assemble_sequence(
    embeddings: Tensor, class_token: Tensor, table: PositionTable, geometry: PatchGeometry
) -> TokenSequence:
    """Prepends the class token and adds position embeddings.

    Args:
        embeddings (Tensor): Patch embeddings, shape [N, dim].
        class_token (Tensor): The class token, shape [1, dim].
        table (PositionTable): The position embeddings.
        geometry (PatchGeometry): The geometry of the patches.

    Raises:
        ShapeError: If the table does not cover the geometry or widths disagree.

    Returns:
        TokenSequence: Row 0 is class_token + class_pe, row i is embeddings[i - 1] plus the
            position embedding of patch i - 1 in patchify order.
    """

    expected = (geometry.depth, geometry.grid_h, geometry.grid_w)
    if table.geometry != expected or embeddings.shape[0] != geometry.num_patches:
        raise ShapeError.mismatch(
            "assemble_sequence geometry", table.patch_pe.shape, embeddings.shape, expected
        )
    dim = embeddings.shape[1]
    if class_token.shape != (1, dim) or table.patch_pe.shape[-1] != dim:
        raise ShapeError.mismatch(
            "assemble_sequence width", embeddings.shape, class_token.shape, table.patch_pe.shape
        )
    head = class_token + table.class_pe
    body = embeddings + table.patch_pe.reshape(-1, dim)
    return TokenSequence(tokens=np.concatenate([head, body], axis=0), geometry=geometry)
