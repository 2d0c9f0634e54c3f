# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Synthetic 2D checkpoints and the name mapping from public DeiT releases.

The converter mapping, DeiT name to archive name:

=================================  ===========================  ==========================
DeiT name                          Archive name                 Transform
=================================  ===========================  ==========================
patch_embed.proj.weight            proj.w                       [dim, C, P, P] -> [C*P*P, dim]
patch_embed.proj.bias              proj.b
cls_token                          cls                          [1, 1, dim] -> [1, dim]
pos_embed                          pos.cls, pos.grid            row 0, rest as [G, G, dim]
blocks.{i}.norm1.weight/bias       blk{i}.ln1.g/b
blocks.{i}.attn.qkv.weight/bias    blk{i}.attn.qkv.w/b          weight transposed
blocks.{i}.attn.proj.weight/bias   blk{i}.attn.out.w/b          weight transposed
blocks.{i}.norm2.weight/bias       blk{i}.ln2.g/b
blocks.{i}.mlp.fc1.weight/bias     blk{i}.mlp.fc1.w/b           weight transposed
blocks.{i}.mlp.fc2.weight/bias     blk{i}.mlp.fc2.w/b           weight transposed
norm.weight/bias                   ln_f.g/b
head.weight/bias                   (dropped)
=================================  ===========================  ==========================
"""

from __future__ import annotations

import math
import re
from typing import Dict, Mapping, Tuple

import numpy as np

from volformer.checkpoint.archive import Tensors
from volformer.errors import ArchiveError, ArchiveErrorCode, ShapeError
from volformer.model.config import ViTConfig
from volformer.model.params import POS_CLASS, POS_GRID, encoder_shapes
from volformer.tensor.ops import Tensor
from volformer.tensor.rng import SeededRng

INIT_STD = 0.02

_BLOCK_NAMES = {
    "norm1.weight": ("ln1.g", False),
    "norm1.bias": ("ln1.b", False),
    "attn.qkv.weight": ("attn.qkv.w", True),
    "attn.qkv.bias": ("attn.qkv.b", False),
    "attn.proj.weight": ("attn.out.w", True),
    "attn.proj.bias": ("attn.out.b", False),
    "norm2.weight": ("ln2.g", False),
    "norm2.bias": ("ln2.b", False),
    "mlp.fc1.weight": ("mlp.fc1.w", True),
    "mlp.fc1.bias": ("mlp.fc1.b", False),
    "mlp.fc2.weight": ("mlp.fc2.w", True),
    "mlp.fc2.bias": ("mlp.fc2.b", False),
}
_BLOCK_PATTERN = re.compile(r"^blocks\.(\d+)\.(.+)$")
_DROPPED = ("head.weight", "head.bias", "head_dist.weight", "head_dist.bias", "dist_token")


def pretrained_tensors(cfg: ViTConfig, grid: Tuple[int, int], seed: int) -> Tensors:
    """Generates the tensors of a 2D checkpoint with fixed-seed random weights. Weights and
    embeddings are truncated normal with std 0.02, biases are small normal values and layer
    norm scales are close to 1.

    Args:
        cfg (ViTConfig): The encoder shape.
        grid (Tuple[int, int]): The pretraining patch grid (Gh0, Gw0), each at least 2.
        seed (int): The seed.

    Returns:
        Tensors: The float32 tensors, including pos.cls and pos.grid.
    """

    grid_h, grid_w = grid
    if grid_h < 2 or grid_w < 2:
        raise ShapeError.mismatch("pretraining grid must be at least 2x2", grid)
    rng = SeededRng(seed)
    shapes = dict(encoder_shapes(cfg))
    shapes[POS_CLASS] = (1, cfg.dim)
    shapes[POS_GRID] = (grid_h, grid_w, cfg.dim)
    tensors: Tensors = {}
    for name, shape in sorted(shapes.items()):
        if name.endswith(".g"):
            tensors[name] = (1.0 + rng.normal_array(shape, std=INIT_STD)).astype(np.float32)
        elif name.endswith(".b"):
            tensors[name] = rng.normal_array(shape, std=INIT_STD)
        else:
            tensors[name] = rng.truncated_normal_array(shape, std=INIT_STD)
    return tensors


def convert_state_names(state: Mapping[str, Tensor], cfg: ViTConfig) -> Tensors:
    """Renames and reshapes an in-memory DeiT state dictionary to archive names.

    Args:
        state (Mapping[str, Tensor]): The DeiT tensors by DeiT name.
        cfg (ViTConfig): The encoder shape, used for the patch kernel and grid layout.

    Raises:
        ArchiveError: If a name has no mapping or pos_embed is not a square grid.

    Returns:
        Tensors: The float32 tensors under archive names.
    """

    tensors: Dict[str, Tensor] = {}
    for name, raw in state.items():
        value = np.asarray(raw, dtype=np.float32)
        match = _BLOCK_PATTERN.match(name)
        if name in _DROPPED:
            continue
        if match is not None and match.group(2) in _BLOCK_NAMES:
            target, transpose = _BLOCK_NAMES[match.group(2)]
            tensors[f"blk{match.group(1)}.{target}"] = value.T.copy() if transpose else value
        elif name == "patch_embed.proj.weight":
            tensors["proj.w"] = value.reshape(value.shape[0], -1).T.copy()
        elif name == "patch_embed.proj.bias":
            tensors["proj.b"] = value
        elif name == "cls_token":
            tensors["cls"] = value.reshape(1, -1)
        elif name == "pos_embed":
            rows = value.reshape(-1, value.shape[-1])
            side = math.isqrt(rows.shape[0] - 1)
            if side * side != rows.shape[0] - 1:
                raise ArchiveError(
                    message=f"pos_embed with {rows.shape[0] - 1} patch rows is not a square grid",
                    code=ArchiveErrorCode.CONSISTENCY,
                    tensor=name,
                )
            tensors[POS_CLASS] = rows[:1].copy()
            tensors[POS_GRID] = rows[1:].reshape(side, side, -1).copy()
        elif name == "norm.weight":
            tensors["ln_f.g"] = value
        elif name == "norm.bias":
            tensors["ln_f.b"] = value
        else:
            raise ArchiveError(
                message=f"No archive name for {name}",
                code=ArchiveErrorCode.FORMAT,
                tensor=name,
            )
    if "proj.w" in tensors and tensors["proj.w"].shape[0] != cfg.patch_dim:
        raise ShapeError.mismatch("proj.w", tensors["proj.w"].shape, (cfg.patch_dim, cfg.dim))
    return dict(sorted(tensors.items()))
