# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Attention rollout: the attention of every layer, fused over heads and mixed with the
residual identity, multiplied from the first layer to the last."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from volformer.errors import NumericError, ShapeError
from volformer.model.encoder import AttentionStack

ROW_TOLERANCE = 1e-3
RESIDUAL_WEIGHT = 0.5

RolloutMatrix = npt.NDArray[np.float64]


def attention_rollout(stack: AttentionStack) -> RolloutMatrix:
    """Computes the rollout A'_L ... A'_1 where A'_l = row-normalized 0.5 * mean-over-heads
    attention + 0.5 * I.

    Args:
        stack (AttentionStack): The attention of every layer, each [heads, T, T].

    Raises:
        ShapeError: If the stack is empty or layers disagree in T.
        NumericError: If an attention row sums to 1 with an error above 1e-3.

    Returns:
        RolloutMatrix: The [T, T] rollout in float64.
    """

    if not stack.layers:
        raise ShapeError(message="Attention rollout needs at least one layer")
    tokens = stack.tokens
    identity = np.eye(tokens)
    rollout = identity
    for index, layer in enumerate(stack.layers):
        if layer.ndim != 3 or layer.shape[1:] != (tokens, tokens):
            raise ShapeError.mismatch(f"attention layer {index}", layer.shape, (tokens, tokens))
        wide = layer.astype(np.float64)
        row_error = float(np.abs(wide.sum(axis=-1) - 1.0).max())
        if row_error > ROW_TOLERANCE or (wide < 0).any():
            raise NumericError(
                message=f"Attention of layer {index} is not row-stochastic "
                + f"(row sum error {row_error:.2e})",
                where=f"layer {index}",
            )
        fused = (1.0 - RESIDUAL_WEIGHT) * wide.mean(axis=0) + RESIDUAL_WEIGHT * identity
        fused /= fused.sum(axis=-1, keepdims=True)
        rollout = fused @ rollout
    return rollout
