# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The shape configuration of the transformer encoder."""

from __future__ import annotations

from pydantic import field_validator, model_validator

from volformer.util.component import ComponentModel


class ViTConfig(ComponentModel):
    """The shape of a DeiT-Ti style encoder. The defaults are the published DeiT-Ti
    configuration, which pretrained checkpoints must match.

    Attributes:
        dim (int, optional): The token width. Defaults to 192.
        heads (int, optional): The number of attention heads. Defaults to 3.
        depth (int, optional): The number of transformer blocks. Defaults to 12.
        mlp_ratio (int, optional): The MLP hidden width as a multiple of dim. Defaults to 4.
        patch (int, optional): The side of a square patch in voxels. Defaults to 16.
        in_chans (int, optional): The number of image channels. Defaults to 3.
        out_logits (int, optional): The number of head outputs, always 1. Defaults to 1.
        ln_eps (float, optional): The layer norm epsilon. Defaults to 1e-6.
    """

    dim: int = 192
    heads: int = 3
    depth: int = 12
    mlp_ratio: int = 4
    patch: int = 16
    in_chans: int = 3
    out_logits: int = 1
    ln_eps: float = 1e-6

    # pylint: disable=invalid-name
    @field_validator("dim", "heads", "depth", "mlp_ratio", "patch", "in_chans")
    @classmethod
    def is_positive(cls, v: int) -> int:
        """Validates that a size is positive.

        Args:
            v (int): The size.

        Raises:
            ValueError: Raised if the size is not positive.

        Returns:
            int: The unmodified size.
        """

        if v < 1:
            raise ValueError(f"Encoder sizes must be positive, {v} provided")
        return v

    @field_validator("out_logits")
    @classmethod
    def is_single_logit(cls, v: int) -> int:
        """Validates that the head emits one logit.

        Args:
            v (int): The number of logits.

        Raises:
            ValueError: Raised if the number of logits is not 1.

        Returns:
            int: The unmodified number of logits.
        """

        if v != 1:
            raise ValueError(f"Only single-logit heads are supported, {v} provided")
        return v

    @model_validator(mode="after")
    def heads_divide_dim(self) -> ViTConfig:
        """Validates that the token width splits evenly across heads.

        Raises:
            ValueError: Raised if dim is not divisible by heads.

        Returns:
            ViTConfig: The unmodified config.
        """

        if self.dim % self.heads != 0:
            raise ValueError(f"dim {self.dim} is not divisible by heads {self.heads}")
        return self

    @property
    def head_dim(self) -> int:
        """The width of one attention head."""

        return self.dim // self.heads

    @property
    def mlp_dim(self) -> int:
        """The hidden width of the MLP."""

        return self.dim * self.mlp_ratio

    @property
    def patch_dim(self) -> int:
        """The length of a flattened patch."""

        return self.in_chans * self.patch * self.patch
