# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""AdamW with decoupled weight decay over ModelParams, and the learning rate schedules it is
driven with."""

from __future__ import annotations

import math
from enum import Enum
from typing import Dict, Optional

import numpy as np
import numpy.typing as npt

from volformer.model.params import ModelParams


class Schedule(str, Enum):
    """How the learning rate evolves after warmup."""

    CONSTANT = "constant"
    COSINE = "cosine"


def scheduled_lr(
    base_lr: float, step: int, total_steps: int, warmup_steps: int, schedule: Schedule
) -> float:
    """The learning rate of one optimizer step. The rate ramps linearly up to base_lr over
    the warmup steps, then stays there or follows a half cosine towards zero.

    Args:
        base_lr (float): The peak learning rate.
        step (int): The zero-based step index.
        total_steps (int): The number of steps of the whole run.
        warmup_steps (int): The number of warmup steps.
        schedule (Schedule): The shape after warmup.

    Returns:
        float: The learning rate.
    """

    if step < warmup_steps:
        return base_lr * (step + 1) / warmup_steps
    if schedule == Schedule.CONSTANT or total_steps <= warmup_steps:
        return base_lr
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def decays(name: str, param: np.ndarray) -> bool:
    """Whether weight decay applies to a tensor. Matrices decay; biases, layer norm
    parameters, the class token and position embeddings do not.

    Args:
        name (str): The tensor name.
        param (np.ndarray): The tensor.

    Returns:
        bool: Whether the tensor decays.
    """

    return param.ndim >= 2 and name != "cls" and not name.startswith("pos.")


class AdamW:
    """Adam with weight decay applied directly to the parameters. Moments are kept in
    float64.

    Attributes:
        lr (float): The learning rate.
        beta1 (float): The first moment decay.
        beta2 (float): The second moment decay.
        eps (float): Added to the second moment root.
        weight_decay (float): The decoupled decay coefficient.
        steps (int): The number of steps taken.
    """

    lr: float
    beta1: float
    beta2: float
    eps: float
    weight_decay: float
    steps: int
    _first: Dict[str, npt.NDArray[np.float64]]
    _second: Dict[str, npt.NDArray[np.float64]]

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        params: ModelParams,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        """Creates zero moments for every tensor of params.

        Args:
            params (ModelParams): The parameters that will be updated.
            lr (float): The learning rate, at least 0.
            beta1 (float, optional): The first moment decay. Defaults to 0.9.
            beta2 (float, optional): The second moment decay. Defaults to 0.999.
            eps (float, optional): Added to the second moment root. Defaults to 1e-8.
            weight_decay (float, optional): The decoupled decay. Defaults to 0.0.
        """

        if lr < 0 or weight_decay < 0 or eps <= 0:
            raise ValueError(f"Invalid AdamW settings lr={lr} wd={weight_decay} eps={eps}")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError(f"AdamW betas must lie in [0, 1), ({beta1}, {beta2}) provided")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.steps = 0
        self._first = params.zeros_like().tensors
        self._second = params.zeros_like().tensors

    def step(
        self, params: ModelParams, grads: ModelParams, lr: Optional[float] = None
    ) -> None:
        """Updates params in place from one batch's gradients.

        Args:
            params (ModelParams): The parameters.
            grads (ModelParams): The gradients, same names and shapes.
            lr (Optional[float], optional): The learning rate of this step. Defaults to
                None, which uses self.lr.
        """

        lr = self.lr if lr is None else lr
        self.steps += 1
        first_fix = 1.0 - self.beta1**self.steps
        second_fix = 1.0 - self.beta2**self.steps
        for name, param in params.tensors.items():
            grad = grads[name].astype(np.float64, copy=False)
            first = self._first[name]
            second = self._second[name]
            first *= self.beta1
            first += (1.0 - self.beta1) * grad
            second *= self.beta2
            second += (1.0 - self.beta2) * grad * grad
            if lr == 0:
                continue
            wide = param.astype(np.float64)
            if self.weight_decay and decays(name, param):
                wide -= lr * self.weight_decay * wide
            wide -= lr * (first / first_fix) / (np.sqrt(second / second_fix) + self.eps)
            param[...] = wide.astype(param.dtype)

