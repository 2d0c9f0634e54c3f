# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The learnable tensors of the encoder, stored under the archive name schema.

Tensor names:
    proj.w [patch_dim, dim], proj.b [dim], cls [1, dim], pos.cls [1, dim],
    pos.patch [D, Gh, Gw, dim], blk{i}.ln1.g/b [dim], blk{i}.attn.qkv.w [dim, 3 dim],
    blk{i}.attn.qkv.b [3 dim], blk{i}.attn.out.w [dim, dim], blk{i}.attn.out.b [dim],
    blk{i}.ln2.g/b [dim], blk{i}.mlp.fc1.w [dim, mlp_dim], blk{i}.mlp.fc1.b [mlp_dim],
    blk{i}.mlp.fc2.w [mlp_dim, dim], blk{i}.mlp.fc2.b [dim], ln_f.g/b [dim],
    head.w [dim, 1], head.b [1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Tuple

import numpy as np
import numpy.typing as npt

from volformer.checkpoint import archive
from volformer.errors import ArchiveError, ArchiveErrorCode, ShapeError
from volformer.model.config import ViTConfig
from volformer.model.tokenizer import PatchGeometry, PositionTable
from volformer.tensor.ops import Tensor, check_finite

POS_CLASS = "pos.cls"
POS_PATCH = "pos.patch"
POS_GRID = "pos.grid"
HEAD_TENSORS = ("head.w", "head.b")


def block_prefix(index: int) -> str:
    """The name prefix of a transformer block's tensors.

    Args:
        index (int): The block index.

    Returns:
        str: The prefix, such as "blk3.".
    """

    return f"blk{index}."


def block_shapes(cfg: ViTConfig) -> Dict[str, Tuple[int, ...]]:
    """The shapes of one block's tensors, keyed by name without the block prefix.

    Args:
        cfg (ViTConfig): The encoder shape.

    Returns:
        Dict[str, Tuple[int, ...]]: The shapes.
    """

    dim, hidden = cfg.dim, cfg.mlp_dim
    return {
        "ln1.g": (dim,),
        "ln1.b": (dim,),
        "attn.qkv.w": (dim, 3 * dim),
        "attn.qkv.b": (3 * dim,),
        "attn.out.w": (dim, dim),
        "attn.out.b": (dim,),
        "ln2.g": (dim,),
        "ln2.b": (dim,),
        "mlp.fc1.w": (dim, hidden),
        "mlp.fc1.b": (hidden,),
        "mlp.fc2.w": (hidden, dim),
        "mlp.fc2.b": (dim,),
    }


def encoder_shapes(cfg: ViTConfig) -> Dict[str, Tuple[int, ...]]:
    """The shapes of every tensor a 2D checkpoint and a volume model share: projection,
    class token, blocks and final layer norm.

    Args:
        cfg (ViTConfig): The encoder shape.

    Returns:
        Dict[str, Tuple[int, ...]]: The shapes by name.
    """

    shapes: Dict[str, Tuple[int, ...]] = {
        "proj.w": (cfg.patch_dim, cfg.dim),
        "proj.b": (cfg.dim,),
        "cls": (1, cfg.dim),
    }
    for index in range(cfg.depth):
        prefix = block_prefix(index)
        shapes.update({prefix + name: shape for name, shape in block_shapes(cfg).items()})
    shapes["ln_f.g"] = (cfg.dim,)
    shapes["ln_f.b"] = (cfg.dim,)
    return shapes


def expected_shapes(cfg: ViTConfig, geometry: PatchGeometry) -> Dict[str, Tuple[int, ...]]:
    """The shapes of every tensor of a volume model.

    Args:
        cfg (ViTConfig): The encoder shape.
        geometry (PatchGeometry): The patch grid the position table covers.

    Returns:
        Dict[str, Tuple[int, ...]]: The shapes by name, sorted.
    """

    shapes = encoder_shapes(cfg)
    shapes[POS_CLASS] = (1, cfg.dim)
    shapes[POS_PATCH] = (geometry.depth, geometry.grid_h, geometry.grid_w, cfg.dim)
    shapes["head.w"] = (cfg.dim, cfg.out_logits)
    shapes["head.b"] = (cfg.out_logits,)
    return dict(sorted(shapes.items()))


def check_tensors(tensors: Mapping[str, Tensor], shapes: Mapping[str, Tuple[int, ...]]) -> None:
    """Checks that every expected tensor is present with its expected shape.

    Args:
        tensors (Mapping[str, Tensor]): The tensors to check.
        shapes (Mapping[str, Tuple[int, ...]]): The expected shapes by name.

    Raises:
        ArchiveError: If a tensor is missing.
        ShapeError: If a tensor has the wrong shape.
    """

    for name, shape in shapes.items():
        if name not in tensors:
            raise ArchiveError(
                message=f"Missing tensor {name}", code=ArchiveErrorCode.MISSING, tensor=name
            )
        if tuple(tensors[name].shape) != tuple(shape):
            raise ShapeError.mismatch(name, tensors[name].shape, shape)


@dataclass
class ModelParams:
    """All learnable tensors of a volume model. Tensors are owned by the instance; the
    trainer is the only writer.

    Attributes:
        tensors (Dict[str, Tensor]): The tensors by name.
    """

    tensors: Dict[str, Tensor]

    @staticmethod
    def from_tensors(tensors: Mapping[str, Tensor], cfg: ViTConfig) -> ModelParams:
        """Builds validated parameters from named tensors. The geometry is read from the
        patch position table.

        Args:
            tensors (Mapping[str, Tensor]): The tensors.
            cfg (ViTConfig): The encoder shape.

        Raises:
            ArchiveError: If a tensor is missing or unexpected.
            ShapeError: If a tensor has the wrong shape.

        Returns:
            ModelParams: The parameters.
        """

        if POS_PATCH not in tensors or tensors[POS_PATCH].ndim != 4:
            raise ArchiveError(
                message=f"Missing 4D tensor {POS_PATCH}",
                code=ArchiveErrorCode.MISSING,
                tensor=POS_PATCH,
            )
        params = ModelParams({name: np.asarray(value) for name, value in sorted(tensors.items())})
        params.validate(cfg)
        return params

    @staticmethod
    def load(path: str, cfg: ViTConfig) -> ModelParams:
        """Reads parameters from an archive.

        Args:
            path (str): The archive path.
            cfg (ViTConfig): The encoder shape.

        Returns:
            ModelParams: The parameters.
        """

        return ModelParams.from_tensors(archive.load(path), cfg)

    def save(self, path: str) -> None:
        """Writes the parameters to an archive.

        Args:
            path (str): The archive path.
        """

        archive.save(path, self.tensors)

    @property
    def geometry(self) -> PatchGeometry:
        """The patch grid of the position table."""

        depth, grid_h, grid_w, _ = self.tensors[POS_PATCH].shape
        return PatchGeometry(int(depth), int(grid_h), int(grid_w))

    @property
    def dtype(self) -> np.dtype:
        """The dtype of the projection weights."""

        return self.tensors["proj.w"].dtype

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def names(self) -> List[str]:
        """The tensor names in sorted order.

        Returns:
            List[str]: The names.
        """

        return sorted(self.tensors)

    def block(self, index: int) -> Dict[str, Tensor]:
        """One block's tensors, keyed without the block prefix.

        Args:
            index (int): The block index.

        Returns:
            Dict[str, Tensor]: The tensors.
        """

        prefix = block_prefix(index)
        return {
            name[len(prefix) :]: value
            for name, value in self.tensors.items()
            if name.startswith(prefix)
        }

    def position_table(self) -> PositionTable:
        """The position embeddings as a table.

        Returns:
            PositionTable: The table, sharing storage with the parameters.
        """

        return PositionTable(class_pe=self.tensors[POS_CLASS], patch_pe=self.tensors[POS_PATCH])

    def validate(self, cfg: ViTConfig) -> None:
        """Checks names, shapes and finiteness.

        Args:
            cfg (ViTConfig): The encoder shape.

        Raises:
            ArchiveError: If a tensor is missing or unexpected.
            ShapeError: If a tensor has the wrong shape.
            NumericError: If a tensor holds non-finite values.
        """

        shapes = expected_shapes(cfg, self.geometry)
        check_tensors(self.tensors, shapes)
        extra = sorted(set(self.tensors) - set(shapes))
        if extra:
            raise ArchiveError(
                message=f"Unexpected tensors {extra}",
                code=ArchiveErrorCode.CONSISTENCY,
                tensor=extra[0],
            )
        for name, value in self.tensors.items():
            check_finite(value, name)

    def copy(self) -> ModelParams:
        """A deep copy.

        Returns:
            ModelParams: The copy.
        """

        return ModelParams({name: value.copy() for name, value in self.tensors.items()})

    def astype(self, dtype: npt.DTypeLike) -> ModelParams:
        """A copy with every tensor converted.

        Args:
            dtype (npt.DTypeLike): The dtype.

        Returns:
            ModelParams: The converted copy.
        """

        return ModelParams({name: value.astype(dtype) for name, value in self.tensors.items()})

    def zeros_like(self, dtype: npt.DTypeLike = np.float64) -> ModelParams:
        """Zero tensors with the same names and shapes, used for gradients and moments.

        Args:
            dtype (npt.DTypeLike, optional): The dtype. Defaults to float64.

        Returns:
            ModelParams: The zeros.
        """

        return ModelParams(
            {name: np.zeros(value.shape, dtype=dtype) for name, value in self.tensors.items()}
        )

    def add_(self, other: ModelParams, scale: float = 1.0) -> None:
        """Accumulates scale * other into these tensors in place.

        Args:
            other (ModelParams): Tensors with the same names and shapes.
            scale (float, optional): The factor. Defaults to 1.0.
        """

        for name, value in other.tensors.items():
            target = self.tensors[name]
            target += (scale * value).astype(target.dtype, copy=False)

    def equals(self, other: ModelParams) -> bool:
        """Bitwise equality of names, shapes, dtypes and values.

        Args:
            other (ModelParams): The parameters to compare.

        Returns:
            bool: Whether both hold identical tensors.
        """

        if self.names() != other.names():
            return False
        return all(
            self.tensors[name].dtype == other.tensors[name].dtype
            and np.array_equal(self.tensors[name], other.tensors[name])
            for name in self.tensors
        )
