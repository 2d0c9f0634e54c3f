# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for AdamW."""

import numpy as np
import pytest

from volformer.cohort.optimizer import AdamW, Schedule, decays, scheduled_lr
from volformer.model.params import ModelParams


def _params() -> ModelParams:
    return ModelParams(
        {
            "blk0.mlp.fc1.w": np.ones((2, 2), dtype=np.float32),
            "blk0.mlp.fc1.b": np.ones(2, dtype=np.float32),
            "pos.patch": np.ones((1, 1, 1, 2), dtype=np.float32),
        }
    )


def test_decays():
    """Tests which tensors take weight decay."""

    assert decays("blk0.mlp.fc1.w", np.ones((2, 2)))
    assert not decays("blk0.mlp.fc1.b", np.ones(2))
    assert not decays("cls", np.ones((1, 2)))
    assert not decays("pos.patch", np.ones((1, 1, 1, 2)))


def test_first_step_moves_by_lr():
    """Tests that the bias-corrected first step moves every weight by lr against the
    gradient's sign."""

    params = _params()
    grads = params.zeros_like()
    grads["blk0.mlp.fc1.w"][...] = 0.5
    grads["blk0.mlp.fc1.b"][...] = -2.0
    grads["pos.patch"][...] = 1e-3
    AdamW(params, lr=0.1).step(params, grads)
    assert np.allclose(params["blk0.mlp.fc1.w"], 0.9, atol=1e-6)
    assert np.allclose(params["blk0.mlp.fc1.b"], 1.1, atol=1e-6)
    assert np.allclose(params["pos.patch"], 0.9, atol=1e-4)


def test_weight_decay_only_on_matrices():
    """Tests that a zero gradient still shrinks decaying tensors."""

    params = _params()
    AdamW(params, lr=0.1, weight_decay=0.5).step(params, params.zeros_like())
    assert np.allclose(params["blk0.mlp.fc1.w"], 0.95)
    assert np.array_equal(params["blk0.mlp.fc1.b"], np.ones(2, dtype=np.float32))
    assert np.array_equal(params["pos.patch"], np.ones((1, 1, 1, 2), dtype=np.float32))


def test_zero_lr_is_exact():
    """Tests that a zero learning rate leaves parameters bit for bit unchanged."""

    params = _params()
    before = params.copy()
    grads = params.zeros_like()
    grads["blk0.mlp.fc1.w"][...] = 3.0
    optimizer = AdamW(params, lr=0.0, weight_decay=0.1)
    for _ in range(3):
        optimizer.step(params, grads)
    assert params.equals(before)
    assert optimizer.steps == 3


def test_invalid_settings():
    """Tests that negative rates and out of range betas are refused."""

    with pytest.raises(ValueError):
        AdamW(_params(), lr=-1.0)
    with pytest.raises(ValueError):
        AdamW(_params(), lr=0.1, beta1=1.0)


def test_step_rate_override():
    """Tests that a per step rate replaces the optimizer's own."""

    params = _params()
    grads = params.zeros_like()
    grads["blk0.mlp.fc1.b"][...] = 1.0
    optimizer = AdamW(params, lr=0.1)
    optimizer.step(params, grads, lr=0.01)
    assert np.allclose(params["blk0.mlp.fc1.b"], 0.99, atol=1e-6)
    optimizer.step(params, grads, lr=0.0)
    assert np.allclose(params["blk0.mlp.fc1.b"], 0.99, atol=1e-6)


def test_warmup_ramp():
    """Tests that warmup rises linearly to the base rate."""

    rates = [scheduled_lr(0.4, step, 10, 4, Schedule.COSINE) for step in range(4)]
    assert np.allclose(rates, [0.1, 0.2, 0.3, 0.4])


def test_constant_schedule():
    """Tests that the constant schedule holds the base rate after warmup."""

    assert scheduled_lr(0.3, 0, 10, 0, Schedule.CONSTANT) == 0.3
    assert scheduled_lr(0.3, 9, 10, 2, Schedule.CONSTANT) == 0.3


def test_cosine_schedule():
    """Tests the cosine decay from the base rate after warmup towards zero."""

    assert scheduled_lr(0.2, 2, 12, 2, Schedule.COSINE) == pytest.approx(0.2)
    assert scheduled_lr(0.2, 7, 12, 2, Schedule.COSINE) == pytest.approx(0.1)
    last = scheduled_lr(0.2, 11, 12, 2, Schedule.COSINE)
    assert 0.0 < last < 0.01
    rates = [scheduled_lr(0.2, step, 12, 2, Schedule.COSINE) for step in range(2, 12)]
    assert all(later <= earlier for earlier, later in zip(rates, rates[1:]))
    assert scheduled_lr(0.2, 3, 3, 4, Schedule.COSINE) == pytest.approx(0.2)
