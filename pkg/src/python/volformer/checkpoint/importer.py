# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Adapts a 2D vision transformer checkpoint to a volume geometry."""

from __future__ import annotations

from typing import List, Mapping, Tuple

import numpy as np

from volformer.errors import ArchiveError, ArchiveErrorCode, ShapeError
from volformer.event.checkpoint import ImportEvent
from volformer.event.handler import EventHandler
from volformer.model.config import ViTConfig
from volformer.model.params import (
    HEAD_TENSORS,
    POS_CLASS,
    POS_GRID,
    POS_PATCH,
    ModelParams,
    check_tensors,
    encoder_shapes,
)
from volformer.model.tokenizer import PatchGeometry, build_position_table
from volformer.tensor.ops import Tensor
from volformer.tensor.rng import SeededRng
from volformer.util.component import ComponentModel

HEAD_INIT_STD = 0.02
IMPORT_STREAM = 0x68656164


class ImportReport(ComponentModel):
    """What happened to every tensor of an imported model. Copied, adapted and
    reinitialized partition the model's tensor names.

    Attributes:
        copied (List[str]): Tensors copied verbatim from the checkpoint.
        adapted (List[str]): Position embeddings built from the checkpoint's.
        resized (List[str]): The adapted tensors whose grid was interpolated.
        reinitialized (List[str]): Tensors drawn fresh, the classification head.
        source_grid (Tuple[int, int]): The checkpoint's patch grid (Gh0, Gw0).
        target_geometry (Tuple[int, int, int]): The model's (D, Gh, Gw).
        ignored (List[str], optional): Checkpoint tensors the model does not use.
            Defaults to [].
    """

    copied: List[str]
    adapted: List[str]
    resized: List[str]
    reinitialized: List[str]
    source_grid: Tuple[int, int]
    target_geometry: Tuple[int, int, int]
    ignored: List[str] = []


def import_2d_vit(
    checkpoint: Mapping[str, Tensor],
    geometry: PatchGeometry,
    cfg: ViTConfig,
    rng: SeededRng,
) -> Tuple[ModelParams, ImportReport]:
    """Builds volume model parameters from a 2D checkpoint. Encoder, projection and class
    tensors are copied verbatim, the position table is replicated per slice (and resized
    when the slice grid differs) and the head is drawn fresh from rng.

    Args:
        checkpoint (Mapping[str, Tensor]): The decoded 2D checkpoint.
        geometry (PatchGeometry): The target patch grid.
        cfg (ViTConfig): The encoder shape the checkpoint must match.
        rng (SeededRng): The stream the head is drawn from.

    Raises:
        ArchiveError: If a tensor is missing, naming it.
        ShapeError: If a tensor's shape disagrees with cfg, naming it.

    Returns:
        Tuple[ModelParams, ImportReport]: The parameters and what was done to each tensor.
    """

    shapes = encoder_shapes(cfg)
    check_tensors(checkpoint, shapes)
    check_tensors(checkpoint, {POS_CLASS: (1, cfg.dim)})
    if POS_GRID not in checkpoint:
        raise ArchiveError(
            message=f"Missing tensor {POS_GRID}", code=ArchiveErrorCode.MISSING, tensor=POS_GRID
        )
    grid = checkpoint[POS_GRID]
    if grid.ndim != 3 or grid.shape[2] != cfg.dim:
        raise ShapeError(
            message=f"{POS_GRID}: expected [Gh0, Gw0, {cfg.dim}], found {list(grid.shape)}",
            shapes=(tuple(grid.shape),),
        )

    tensors = {name: np.array(checkpoint[name], copy=True) for name in shapes}
    table = build_position_table(
        checkpoint[POS_CLASS], grid, geometry.depth, geometry.grid_h, geometry.grid_w
    )
    tensors[POS_CLASS] = table.class_pe
    tensors[POS_PATCH] = table.patch_pe.astype(np.float32, copy=False)
    tensors["head.w"] = rng.truncated_normal_array((cfg.dim, cfg.out_logits), std=HEAD_INIT_STD)
    tensors["head.b"] = np.zeros((cfg.out_logits,), dtype=np.float32)
    params = ModelParams.from_tensors(tensors, cfg)

    source_grid = (int(grid.shape[0]), int(grid.shape[1]))
    resized = [] if source_grid == (geometry.grid_h, geometry.grid_w) else [POS_PATCH]
    used = set(shapes) | {POS_CLASS, POS_GRID}
    report = ImportReport(
        copied=sorted(shapes),
        adapted=[POS_CLASS, POS_PATCH],
        resized=resized,
        reinitialized=list(HEAD_TENSORS),
        ignored=sorted(set(checkpoint) - used),
        source_grid=source_grid,
        target_geometry=(geometry.depth, geometry.grid_h, geometry.grid_w),
    )
    EventHandler.get().handle(
        ImportEvent(
            {
                "source_grid": report.source_grid,
                "target_geometry": report.target_geometry,
                "copied": len(report.copied),
                "resized": report.resized,
            }
        )
    )
    return params, report
