# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The pre-norm transformer encoder, its classification head and the hand-derived backward
pass used for training."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import numpy.typing as npt

from volformer.errors import NumericError, ShapeError
from volformer.model.config import ViTConfig
from volformer.model.params import ModelParams, block_prefix
from volformer.model.tokenizer import (
    PatchGeometry,
    TokenSequence,
    Volume,
    assemble_sequence,
    center_intensities,
    pad_to_patch_multiple,
    patchify,
    project_patches,
    replicate_channels,
)
from volformer.tensor.ops import (
    Tensor,
    check_finite,
    gelu,
    gelu_grad,
    layer_norm_stats,
    matmul,
    sigmoid,
    softmax_lastdim,
)

PROB_CLAMP = 1e-7

Wide = npt.NDArray[np.float64]


@dataclass(frozen=True)
class AttentionStack:
    """The post-softmax attention of every layer.

    Attributes:
        layers (List[Tensor]): One [heads, T, T] tensor per block, in block order.
    """

    layers: List[Tensor]

    @property
    def depth(self) -> int:
        """The number of layers."""

        return len(self.layers)

    @property
    def tokens(self) -> int:
        """The sequence length T."""

        return int(self.layers[0].shape[-1])

    def max_row_error(self) -> float:
        """The largest deviation of any attention row sum from 1.

        Returns:
            float: The deviation.
        """

        return max(
            float(np.abs(layer.astype(np.float64).sum(axis=-1) - 1.0).max())
            for layer in self.layers
        )


@dataclass
class _BlockCache:
    x_hat1: Wide
    rstd1: Wide
    h1: Tensor
    q: Tensor
    k: Tensor
    v: Tensor
    attn: Tensor
    ctx: Tensor
    x_hat2: Wide
    rstd2: Wide
    h2: Tensor
    pre_act: Tensor
    act: Tensor


@dataclass
class _ForwardCache:
    blocks: List[_BlockCache]
    x_hat_f: Wide
    rstd_f: Wide


def _split_heads(x: Tensor, heads: int) -> Tensor:
    tokens, width = x.shape
    return x.reshape(tokens, heads, width // heads).transpose(1, 0, 2)


def _merge_heads(x: Tensor) -> Tensor:
    heads, tokens, head_dim = x.shape
    return x.transpose(1, 0, 2).reshape(tokens, heads * head_dim)


def _attention(
    x: Tensor, block: Mapping[str, Tensor], cfg: ViTConfig
) -> Tuple[Tensor, Tensor, Tuple[Wide, Wide, Tensor, Tensor, Tensor, Tensor, Tensor]]:
    h1, x_hat1, rstd1 = layer_norm_stats(x, block["ln1.g"], block["ln1.b"], cfg.ln_eps)
    qkv = matmul(h1, block["attn.qkv.w"]) + block["attn.qkv.b"]
    q, k, v = (_split_heads(part, cfg.heads) for part in np.split(qkv, 3, axis=1))
    scores = matmul(q, k.transpose(0, 2, 1)) / math.sqrt(cfg.head_dim)
    attn = softmax_lastdim(scores)
    ctx = _merge_heads(matmul(attn, v))
    out = matmul(ctx, block["attn.out.w"]) + block["attn.out.b"]
    return out, attn, (x_hat1, rstd1, h1, q, k, v, ctx)


def mhsa_forward(
    x: Tensor, block: Mapping[str, Tensor], cfg: ViTConfig
) -> Tuple[Tensor, Tensor]:
    """The attention branch of a pre-norm block: layer norm, multi-head self-attention and
    the output projection. The residual is not added.

    Args:
        x (Tensor): The block input, shape [T, dim].
        block (Mapping[str, Tensor]): The block's tensors, keyed without the block prefix.
        cfg (ViTConfig): The encoder shape.

    Raises:
        ShapeError: If the input width is not cfg.dim.

    Returns:
        Tuple[Tensor, Tensor]: The branch output [T, dim] and the attention
            [heads, T, T].
    """

    if x.ndim != 2 or x.shape[1] != cfg.dim or x.shape[0] < 1:
        raise ShapeError.mismatch("mhsa_forward input", x.shape, (x.shape[0], cfg.dim))
    out, attn, _ = _attention(x, block, cfg)
    return out, attn


def _block_forward(
    x: Tensor, block: Mapping[str, Tensor], cfg: ViTConfig
) -> Tuple[Tensor, _BlockCache]:
    attn_out, attn, (x_hat1, rstd1, h1, q, k, v, ctx) = _attention(x, block, cfg)
    mid = x + attn_out
    h2, x_hat2, rstd2 = layer_norm_stats(mid, block["ln2.g"], block["ln2.b"], cfg.ln_eps)
    pre_act = matmul(h2, block["mlp.fc1.w"]) + block["mlp.fc1.b"]
    act = gelu(pre_act)
    out = mid + matmul(act, block["mlp.fc2.w"]) + block["mlp.fc2.b"]
    cache = _BlockCache(x_hat1, rstd1, h1, q, k, v, attn, ctx, x_hat2, rstd2, h2, pre_act, act)
    return out, cache


def _encode(
    seq: TokenSequence, params: ModelParams, cfg: ViTConfig
) -> Tuple[Tensor, _ForwardCache]:
    if seq.tokens.ndim != 2 or seq.tokens.shape[1] != cfg.dim:
        raise ShapeError.mismatch("encoder input", seq.tokens.shape, (seq.length, cfg.dim))
    x = seq.tokens
    caches = []
    for index in range(cfg.depth):
        x, cache = _block_forward(x, params.block(index), cfg)
        check_finite(x, f"block {index}")
        caches.append(cache)
    normed, x_hat_f, rstd_f = layer_norm_stats(
        x, params["ln_f.g"], params["ln_f.b"], cfg.ln_eps
    )
    check_finite(normed, "final layer norm")
    embedding = normed[0]
    return embedding, _ForwardCache(caches, x_hat_f, rstd_f)


def encoder_forward(
    seq: TokenSequence, params: ModelParams, cfg: ViTConfig
) -> Tuple[Tensor, AttentionStack]:
    """Runs the pre-norm blocks and the final layer norm.

    Args:
        seq (TokenSequence): The input sequence, class token first.
        params (ModelParams): The parameters.
        cfg (ViTConfig): The encoder shape.

    Raises:
        NumericError: If a block produces non-finite activations, naming the block.

    Returns:
        Tuple[Tensor, AttentionStack]: The class embedding [dim] and the attention of
            every block.
    """

    embedding, cache = _encode(seq, params, cfg)
    return embedding, AttentionStack([block.attn for block in cache.blocks])


def classify(class_embedding: Tensor, head_w: Tensor, head_b: Tensor) -> float:
    """The linear head.

    Args:
        class_embedding (Tensor): The encoded class token, shape [dim].
        head_w (Tensor): Shape [dim, 1].
        head_b (Tensor): Shape [1].

    Raises:
        NumericError: If the embedding is not finite.

    Returns:
        float: The logit.
    """

    check_finite(class_embedding, "class embedding")
    if head_w.shape != (class_embedding.shape[0], 1) or head_b.shape != (1,):
        raise ShapeError.mismatch("classify", class_embedding.shape, head_w.shape, head_b.shape)
    logit = class_embedding.astype(np.float64) @ head_w[:, 0].astype(np.float64)
    return float(logit + float(head_b[0]))


def tokenize(
    volume: Volume, params: ModelParams, cfg: ViTConfig
) -> Tuple[TokenSequence, Tensor]:
    """Pads, replicates and patchifies a volume, then centers the intensities, projects the
    patches and assembles the sequence.

    Args:
        volume (Volume): The volume.
        params (ModelParams): The parameters, whose position table must cover the volume.
        cfg (ViTConfig): The encoder shape.

    Returns:
        Tuple[TokenSequence, Tensor]: The sequence and the centered flattened patches.
    """

    padded = pad_to_patch_multiple(volume, cfg.patch)
    geometry = PatchGeometry.for_volume(padded, cfg.patch)
    patches = center_intensities(patchify(replicate_channels(padded, cfg.in_chans), cfg.patch))
    embeddings = project_patches(patches, params["proj.w"], params["proj.b"])
    seq = assemble_sequence(embeddings, params["cls"], params.position_table(), geometry)
    return seq, patches


def forward(
    volume: Volume, params: ModelParams, cfg: ViTConfig
) -> Tuple[float, AttentionStack]:
    """Scores a volume.

    Args:
        volume (Volume): The volume.
        params (ModelParams): The parameters.
        cfg (ViTConfig): The encoder shape.

    Returns:
        Tuple[float, AttentionStack]: The probability of the positive class and the
            attention of every block.
    """

    seq, _ = tokenize(volume, params, cfg)
    embedding, stack = encoder_forward(seq, params, cfg)
    return sigmoid(classify(embedding, params["head.w"], params["head.b"])), stack


def bce_loss(probability: float, label: int) -> float:
    """Binary cross-entropy with the probability clamped to [1e-7, 1 - 1e-7].

    Args:
        probability (float): The predicted probability.
        label (int): The label, 0 or 1.

    Returns:
        float: The loss.
    """

    clamped = min(max(probability, PROB_CLAMP), 1.0 - PROB_CLAMP)
    return -(label * math.log(clamped) + (1 - label) * math.log(1.0 - clamped))


def _wide(x: Tensor) -> Wide:
    return x.astype(np.float64, copy=False)


def _layer_norm_backward(
    grad_out: Wide, gamma: Tensor, x_hat: Wide, rstd: Wide
) -> Tuple[Wide, Wide, Wide]:
    grad_gamma = (grad_out * x_hat).reshape(-1, x_hat.shape[-1]).sum(axis=0)
    grad_beta = grad_out.reshape(-1, x_hat.shape[-1]).sum(axis=0)
    grad_hat = grad_out * _wide(gamma)
    grad_x = rstd * (
        grad_hat
        - grad_hat.mean(axis=-1, keepdims=True)
        - x_hat * (grad_hat * x_hat).mean(axis=-1, keepdims=True)
    )
    return grad_x, grad_gamma, grad_beta


def _block_backward(
    grad_out: Wide,
    block: Mapping[str, Tensor],
    cache: _BlockCache,
    cfg: ViTConfig,
    prefix: str,
    grads: Dict[str, Wide],
) -> Wide:
    # MLP branch
    grads[prefix + "mlp.fc2.w"] = _wide(cache.act).T @ grad_out
    grads[prefix + "mlp.fc2.b"] = grad_out.sum(axis=0)
    grad_pre = (grad_out @ _wide(block["mlp.fc2.w"]).T) * gelu_grad(cache.pre_act)
    grads[prefix + "mlp.fc1.w"] = _wide(cache.h2).T @ grad_pre
    grads[prefix + "mlp.fc1.b"] = grad_pre.sum(axis=0)
    grad_h2 = grad_pre @ _wide(block["mlp.fc1.w"]).T
    grad_mid, grads[prefix + "ln2.g"], grads[prefix + "ln2.b"] = _layer_norm_backward(
        grad_h2, block["ln2.g"], cache.x_hat2, cache.rstd2
    )
    grad_mid += grad_out

    # attention branch
    grads[prefix + "attn.out.w"] = _wide(cache.ctx).T @ grad_mid
    grads[prefix + "attn.out.b"] = grad_mid.sum(axis=0)
    grad_ctx = _split_heads(grad_mid @ _wide(block["attn.out.w"]).T, cfg.heads)
    attn = _wide(cache.attn)
    grad_attn = grad_ctx @ _wide(cache.v).transpose(0, 2, 1)
    grad_v = attn.transpose(0, 2, 1) @ grad_ctx
    grad_scores = attn * (grad_attn - (grad_attn * attn).sum(axis=-1, keepdims=True))
    grad_scores /= math.sqrt(cfg.head_dim)
    grad_q = grad_scores @ _wide(cache.k)
    grad_k = grad_scores.transpose(0, 2, 1) @ _wide(cache.q)
    grad_qkv = np.concatenate(
        [_merge_heads(grad_q), _merge_heads(grad_k), _merge_heads(grad_v)], axis=1
    )
    grads[prefix + "attn.qkv.w"] = _wide(cache.h1).T @ grad_qkv
    grads[prefix + "attn.qkv.b"] = grad_qkv.sum(axis=0)
    grad_h1 = grad_qkv @ _wide(block["attn.qkv.w"]).T
    grad_x, grads[prefix + "ln1.g"], grads[prefix + "ln1.b"] = _layer_norm_backward(
        grad_h1, block["ln1.g"], cache.x_hat1, cache.rstd1
    )
    return grad_x + grad_mid


def loss_and_grads(
    volume: Volume,
    label: int,
    params: ModelParams,
    cfg: ViTConfig,
    grads_dtype: Optional[npt.DTypeLike] = None,
) -> Tuple[float, ModelParams]:
    """Binary cross-entropy of one volume and its gradient with respect to every parameter.

    Args:
        volume (Volume): The volume.
        label (int): The label, 0 or 1.
        params (ModelParams): The parameters.
        cfg (ViTConfig): The encoder shape.
        grads_dtype (Optional[npt.DTypeLike], optional): The dtype of the returned
            gradients. Defaults to None, which keeps float64.

    Raises:
        NumericError: If a gradient is not finite, naming the tensor.

    Returns:
        Tuple[float, ModelParams]: The loss and the gradients, shaped like params.
    """

    if label not in (0, 1):
        raise ValueError(f"Labels must be 0 or 1, {label} provided")
    seq, patches = tokenize(volume, params, cfg)
    embedding, cache = _encode(seq, params, cfg)
    logit = classify(embedding, params["head.w"], params["head.b"])
    probability = sigmoid(logit)
    loss = bce_loss(probability, label)
    inside = PROB_CLAMP < probability < 1.0 - PROB_CLAMP
    grad_logit = (probability - label) if inside else 0.0

    grads: Dict[str, Wide] = {
        "head.w": _wide(embedding)[:, None] * grad_logit,
        "head.b": np.array([grad_logit]),
    }
    grad_normed = np.zeros((seq.length, cfg.dim))
    grad_normed[0] = _wide(params["head.w"][:, 0]) * grad_logit
    grad_x, grads["ln_f.g"], grads["ln_f.b"] = _layer_norm_backward(
        grad_normed, params["ln_f.g"], cache.x_hat_f, cache.rstd_f
    )
    for index in reversed(range(cfg.depth)):
        grad_x = _block_backward(
            grad_x, params.block(index), cache.blocks[index], cfg, block_prefix(index), grads
        )

    geometry = seq.geometry
    grads["cls"] = grad_x[:1].copy()
    grads["pos.cls"] = grad_x[:1].copy()
    grad_embeddings = grad_x[1:]
    grads["pos.patch"] = grad_embeddings.reshape(
        geometry.depth, geometry.grid_h, geometry.grid_w, cfg.dim
    ).copy()
    grads["proj.w"] = _wide(patches).T @ grad_embeddings
    grads["proj.b"] = grad_embeddings.sum(axis=0)

    dtype = np.float64 if grads_dtype is None else grads_dtype
    named = {}
    for name in sorted(grads):
        check_finite(grads[name], f"gradient of {name}")
        named[name] = grads[name].astype(dtype, copy=False)
    if set(named) != set(params.tensors):
        missing = sorted(set(params.tensors) - set(named))
        raise NumericError(message=f"No gradient for {missing}", where=str(missing))
    return loss, ModelParams(named)
