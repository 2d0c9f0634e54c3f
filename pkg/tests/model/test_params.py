# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for ModelParams."""

import numpy as np
import pytest

from volformer.errors import ArchiveError, ArchiveErrorCode, NumericError, ShapeError
from volformer.model.params import POS_PATCH, ModelParams, expected_shapes
from volformer.model.tokenizer import PatchGeometry


def test_expected_shapes(tiny_cfg):
    """Tests the tensor names and shapes of a tiny model."""

    shapes = expected_shapes(tiny_cfg, PatchGeometry(2, 2, 2))
    assert len(shapes) == 3 + 2 * 12 + 2 + 2 + 2
    assert shapes["proj.w"] == (768, 8)
    assert shapes[POS_PATCH] == (2, 2, 2, 8)
    assert shapes["blk1.mlp.fc1.w"] == (8, 32)
    assert shapes["head.w"] == (8, 1)
    assert list(shapes) == sorted(shapes)


def test_imported_params_validate(tiny_cfg, tiny_params):
    """Tests that imported parameters pass validation and expose their geometry."""

    tiny_params.validate(tiny_cfg)
    assert tiny_params.geometry == PatchGeometry(2, 2, 2)
    assert tiny_params.dtype == np.float32
    assert set(tiny_params.block(0)) == {
        "ln1.g",
        "ln1.b",
        "attn.qkv.w",
        "attn.qkv.b",
        "attn.out.w",
        "attn.out.b",
        "ln2.g",
        "ln2.b",
        "mlp.fc1.w",
        "mlp.fc1.b",
        "mlp.fc2.w",
        "mlp.fc2.b",
    }


def test_missing_and_extra_tensors(tiny_cfg, tiny_params):
    """Tests that missing and unexpected tensors are named."""

    tensors = dict(tiny_params.tensors)
    del tensors["ln_f.g"]
    with pytest.raises(ArchiveError) as err:
        ModelParams.from_tensors(tensors, tiny_cfg)
    assert err.value.code == ArchiveErrorCode.MISSING
    assert err.value.tensor == "ln_f.g"

    tensors = dict(tiny_params.tensors)
    tensors["extra"] = np.zeros(1, dtype=np.float32)
    with pytest.raises(ArchiveError) as err:
        ModelParams.from_tensors(tensors, tiny_cfg)
    assert err.value.code == ArchiveErrorCode.CONSISTENCY


def test_wrong_shape(tiny_cfg, tiny_params):
    """Tests that a misshapen tensor raises a ShapeError."""

    tensors = dict(tiny_params.tensors)
    tensors["head.w"] = np.zeros((8, 2), dtype=np.float32)
    with pytest.raises(ShapeError):
        ModelParams.from_tensors(tensors, tiny_cfg)


def test_non_finite_tensor(tiny_cfg, tiny_params):
    """Tests that NaN weights are refused."""

    params = tiny_params.copy()
    params["blk0.ln1.g"][0] = np.nan
    with pytest.raises(NumericError):
        params.validate(tiny_cfg)


def test_save_load(tmpdir, tiny_cfg, tiny_params):
    """Tests that parameters survive an archive bit for bit."""

    path = str(tmpdir.join("model.nta"))
    tiny_params.save(path)
    assert ModelParams.load(path, tiny_cfg).equals(tiny_params)


def test_copy_and_update(tiny_params):
    """Tests that copies are independent and add_ accumulates."""

    params = tiny_params.copy()
    grads = params.zeros_like()
    grads["head.b"][0] = 2.0
    params.add_(grads, scale=-0.5)
    assert params["head.b"][0] == tiny_params["head.b"][0] - 1.0
    assert not params.equals(tiny_params)
    assert tiny_params.copy().equals(tiny_params)
    assert not tiny_params.astype(np.float64).equals(tiny_params)
