# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The elementwise, normalization and matrix kernels every other module builds on."""

from __future__ import annotations

import math
from typing import Any, Optional, Tuple

import numpy as np
import numpy.typing as npt

from volformer.errors import NumericError, ShapeError

Tensor = npt.NDArray[np.floating[Any]]

DEFAULT_DTYPE = np.float32
LAYER_NORM_EPS = 1e-6
_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_K = 0.044715


def as_tensor(values: Any, dtype: Optional[npt.DTypeLike] = None) -> Tensor:
    """Converts values to a C-contiguous tensor.

    Args:
        values (Any): Array-like values.
        dtype (Optional[npt.DTypeLike], optional): The dtype to use. Floating arrays keep
            their dtype when None, everything else becomes float32. Defaults to None.

    Returns:
        Tensor: The tensor.
    """

    array = np.asarray(values)
    if dtype is None:
        dtype = array.dtype if array.dtype in (np.float32, np.float64) else DEFAULT_DTYPE
    return np.ascontiguousarray(array, dtype=dtype)


def result_dtype(*tensors: Tensor) -> np.dtype:
    """The dtype a kernel stores its output in: float64 if any input is float64.

    Args:
        *tensors (Tensor): The kernel inputs.

    Returns:
        np.dtype: The output dtype.
    """

    if any(np.asarray(tensor).dtype == np.float64 for tensor in tensors):
        return np.dtype(np.float64)
    return np.dtype(DEFAULT_DTYPE)


def check_finite(x: Tensor, where: str) -> Tensor:
    """Raises if a tensor holds NaN or infinite values.

    Args:
        x (Tensor): The tensor to check.
        where (str): A description of the tensor used in the error.

    Raises:
        NumericError: If a value is not finite.

    Returns:
        Tensor: The unmodified tensor.
    """

    if not np.isfinite(x).all():
        raise NumericError(message=f"Non-finite values in {where}", where=where)
    return x


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two dimensions, broadcasting leading dimensions.

    Args:
        a (Tensor): A tensor of shape [..., m, k].
        b (Tensor): A tensor of shape [..., k, n].

    Raises:
        ShapeError: If either input is not at least 2D or the inner dimensions differ.

    Returns:
        Tensor: The product, accumulated in float64 and stored in the result dtype.
    """

    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError.mismatch("matmul", a.shape, b.shape)
    out = np.matmul(a.astype(np.float64, copy=False), b.astype(np.float64, copy=False))
    return out.astype(result_dtype(a, b), copy=False)


def softmax_lastdim(x: Tensor) -> Tensor:
    """Softmax over the last dimension, with max subtraction for stability. Rows holding +inf
    split their mass evenly over the +inf entries, and rows that are entirely -inf are
    uniform, the limits of finite logits.

    Args:
        x (Tensor): The logits, last dimension at least 1.

    Raises:
        NumericError: If the input holds NaN.

    Returns:
        Tensor: Rows that are nonnegative and sum to 1.
    """

    if x.shape[-1] < 1:
        raise ShapeError.mismatch("softmax_lastdim", x.shape)
    if np.isnan(x).any():
        raise NumericError(message="NaN input to softmax", where="softmax_lastdim")
    wide = x.astype(np.float64, copy=False)
    top = wide.max(axis=-1, keepdims=True)
    infinite = np.isinf(top)
    if infinite.any():
        wide = np.where(infinite, np.where(wide == top, 0.0, -np.inf), wide)
        top = np.where(infinite, 0.0, top)
    shifted = np.exp(wide - top)
    out = shifted / shifted.sum(axis=-1, keepdims=True)
    return out.astype(result_dtype(x), copy=False)


def layer_norm(
    x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS
) -> Tensor:
    """Normalizes every row of the last dimension to zero mean and unit variance, then
    applies the affine map gamma * x + beta.

    Args:
        x (Tensor): The input of shape [..., d].
        gamma (Tensor): The scale of shape [d].
        beta (Tensor): The shift of shape [d].
        eps (float, optional): Added to the variance. Defaults to 1e-6.

    Raises:
        ShapeError: If gamma or beta does not match the last dimension.

    Returns:
        Tensor: The normalized tensor.
    """

    return layer_norm_stats(x, gamma, beta, eps)[0]


def layer_norm_stats(
    x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS
) -> Tuple[Tensor, npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Layer norm that also returns the normalized input and the inverse standard deviation,
    both float64, for the backward pass.

    Args:
        x (Tensor): The input of shape [..., d].
        gamma (Tensor): The scale of shape [d].
        beta (Tensor): The shift of shape [d].
        eps (float, optional): Added to the variance. Defaults to 1e-6.

    Returns:
        Tuple[Tensor, NDArray, NDArray]: The output, x_hat and 1/sqrt(var + eps).
    """

    if eps <= 0:
        raise ValueError(f"Layer norm eps must be positive, {eps} provided")
    dim = x.shape[-1]
    if gamma.shape != (dim,) or beta.shape != (dim,):
        raise ShapeError.mismatch("layer_norm", x.shape, gamma.shape, beta.shape)
    wide = x.astype(np.float64, copy=False)
    mean = wide.mean(axis=-1, keepdims=True)
    centered = wide - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    x_hat = centered * rstd
    out = x_hat * gamma.astype(np.float64) + beta.astype(np.float64)
    return out.astype(result_dtype(x, gamma, beta), copy=False), x_hat, rstd


def gelu(x: Tensor) -> Tensor:
    """The tanh approximation of GELU: 0.5x(1 + tanh(sqrt(2/pi)(x + 0.044715x^3))).

    Args:
        x (Tensor): The input.

    Returns:
        Tensor: GELU applied elementwise.
    """

    wide = x.astype(np.float64, copy=False)
    out = 0.5 * wide * (1.0 + np.tanh(_GELU_C * (wide + _GELU_K * wide**3)))
    return out.astype(result_dtype(x), copy=False)


def gelu_grad(x: Tensor) -> npt.NDArray[np.float64]:
    """The derivative of the tanh GELU approximation, in float64.

    Args:
        x (Tensor): The GELU input.

    Returns:
        NDArray: d gelu(x) / dx.
    """

    wide = x.astype(np.float64, copy=False)
    t = np.tanh(_GELU_C * (wide + _GELU_K * wide**3))
    return 0.5 * (1.0 + t) + 0.5 * wide * (1.0 - t * t) * _GELU_C * (1.0 + 3 * _GELU_K * wide**2)


def sigmoid(x: Any) -> Any:
    """A numerically stable logistic function for scalars or arrays.

    Args:
        x (Any): The logit(s).

    Returns:
        Any: The probability, same kind as the input.
    """

    wide = np.asarray(x, dtype=np.float64)
    decay = np.exp(-np.abs(wide))
    out = np.where(wide >= 0, 1.0 / (1.0 + decay), decay / (1.0 + decay))
    return float(out) if out.ndim == 0 else out
