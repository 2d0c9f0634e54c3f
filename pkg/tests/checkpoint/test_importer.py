# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for importing 2D checkpoints into volume models."""

import numpy as np
import pytest

from volformer.checkpoint.importer import import_2d_vit
from volformer.checkpoint.pretrained import convert_state_names, pretrained_tensors
from volformer.errors import ArchiveError, ArchiveErrorCode, ShapeError
from volformer.model.params import HEAD_TENSORS, POS_GRID, POS_PATCH, encoder_shapes
from volformer.model.tokenizer import PatchGeometry
from volformer.tensor.rng import SeededRng


def _deit_state(checkpoint, depth):
    dim = checkpoint["cls"].shape[1]
    grid = checkpoint[POS_GRID]
    state = {
        "patch_embed.proj.weight": checkpoint["proj.w"].T.reshape(dim, 3, 16, 16),
        "patch_embed.proj.bias": checkpoint["proj.b"],
        "cls_token": checkpoint["cls"].reshape(1, 1, dim),
        "pos_embed": np.concatenate([checkpoint["pos.cls"], grid.reshape(-1, dim)])[None],
        "norm.weight": checkpoint["ln_f.g"],
        "norm.bias": checkpoint["ln_f.b"],
        "head.weight": np.zeros((1000, dim), dtype=np.float32),
        "head.bias": np.zeros(1000, dtype=np.float32),
    }
    names = {
        "norm1.weight": "ln1.g",
        "norm1.bias": "ln1.b",
        "attn.qkv.weight": "attn.qkv.w",
        "attn.qkv.bias": "attn.qkv.b",
        "attn.proj.weight": "attn.out.w",
        "attn.proj.bias": "attn.out.b",
        "norm2.weight": "ln2.g",
        "norm2.bias": "ln2.b",
        "mlp.fc1.weight": "mlp.fc1.w",
        "mlp.fc1.bias": "mlp.fc1.b",
        "mlp.fc2.weight": "mlp.fc2.w",
        "mlp.fc2.bias": "mlp.fc2.b",
    }
    for index in range(depth):
        for deit, ours in names.items():
            value = checkpoint[f"blk{index}.{ours}"]
            state[f"blocks.{index}.{deit}"] = value.T if value.ndim == 2 else value
    return state


def test_pretrained_is_seeded(tiny_cfg):
    """Tests that one seed always generates the same checkpoint."""

    first = pretrained_tensors(tiny_cfg, (4, 4), 1)
    second = pretrained_tensors(tiny_cfg, (4, 4), 1)
    other = pretrained_tensors(tiny_cfg, (4, 4), 2)
    assert all(np.array_equal(first[name], second[name]) for name in first)
    assert not np.array_equal(first["proj.w"], other["proj.w"])
    assert first[POS_GRID].shape == (4, 4, 8)
    assert np.abs(first["proj.w"]).max() <= 0.04 + 1e-7
    with pytest.raises(ShapeError):
        pretrained_tensors(tiny_cfg, (1, 4), 1)


def test_import_copies_and_resizes(tiny_cfg, tiny_checkpoint):
    """Tests the report and tensors of an import onto a smaller slice grid."""

    params, report = import_2d_vit(tiny_checkpoint, PatchGeometry(3, 2, 2), tiny_cfg, SeededRng(0))
    assert report.copied == sorted(encoder_shapes(tiny_cfg))
    assert report.resized == [POS_PATCH]
    assert report.reinitialized == list(HEAD_TENSORS)
    assert report.source_grid == (4, 4)
    assert report.target_geometry == (3, 2, 2)
    for name in report.copied:
        assert np.array_equal(params[name], tiny_checkpoint[name])
    assert params[POS_PATCH].shape == (3, 2, 2, 8)
    assert np.array_equal(params[POS_PATCH][0], params[POS_PATCH][2])
    assert not params["head.b"].any()


def test_import_same_grid_replicates(tiny_cfg, tiny_checkpoint):
    """Tests that a matching slice grid copies the 2D table into every slice."""

    params, report = import_2d_vit(tiny_checkpoint, PatchGeometry(2, 4, 4), tiny_cfg, SeededRng(0))
    assert report.resized == []
    for depth in range(2):
        assert np.array_equal(params[POS_PATCH][depth], tiny_checkpoint[POS_GRID])


def test_import_is_deterministic(tiny_cfg, tiny_checkpoint):
    """Tests that the head draw depends only on the stream."""

    geometry = PatchGeometry(2, 2, 2)
    first, _ = import_2d_vit(tiny_checkpoint, geometry, tiny_cfg, SeededRng(5))
    second, _ = import_2d_vit(tiny_checkpoint, geometry, tiny_cfg, SeededRng(5))
    third, _ = import_2d_vit(tiny_checkpoint, geometry, tiny_cfg, SeededRng(6))
    assert first.equals(second)
    assert not first.equals(third)


def test_import_names_missing_tensor(tiny_cfg, tiny_checkpoint):
    """Tests that a missing checkpoint tensor is named."""

    checkpoint = dict(tiny_checkpoint)
    del checkpoint["blk1.attn.qkv.w"]
    with pytest.raises(ArchiveError) as err:
        import_2d_vit(checkpoint, PatchGeometry(2, 2, 2), tiny_cfg, SeededRng(0))
    assert err.value.code == ArchiveErrorCode.MISSING
    assert err.value.tensor == "blk1.attn.qkv.w"


def test_import_rejects_wrong_width(tiny_cfg, tiny_checkpoint):
    """Tests that a checkpoint of another width is refused."""

    checkpoint = dict(tiny_checkpoint)
    checkpoint["ln_f.g"] = np.ones(16, dtype=np.float32)
    with pytest.raises(ShapeError):
        import_2d_vit(checkpoint, PatchGeometry(2, 2, 2), tiny_cfg, SeededRng(0))


def test_convert_state_names(tiny_cfg, tiny_checkpoint):
    """Tests that a DeiT state dictionary converts back to archive names."""

    converted = convert_state_names(_deit_state(tiny_checkpoint, 2), tiny_cfg)
    assert sorted(converted) == sorted(tiny_checkpoint)
    for name, value in tiny_checkpoint.items():
        assert np.array_equal(converted[name], value), name


def test_convert_rejects_unknown_names(tiny_cfg):
    """Tests that unmapped names and non-square grids are refused."""

    with pytest.raises(ArchiveError):
        convert_state_names({"fc.weight": np.zeros((2, 2))}, tiny_cfg)
    with pytest.raises(ArchiveError) as err:
        convert_state_names({"pos_embed": np.zeros((1, 7, 8))}, tiny_cfg)
    assert err.value.code == ArchiveErrorCode.CONSISTENCY


def test_import_imagenet_grid_to_knee_depth(tiny_cfg):
    """Tests a 14x14 source: one slice keeps the 2D model exactly, 36 slices start identical
    whether the grid is kept or resized."""

    checkpoint = pretrained_tensors(tiny_cfg, (14, 14), 4)
    single, report = import_2d_vit(checkpoint, PatchGeometry(1, 14, 14), tiny_cfg, SeededRng(1))
    assert report.resized == []
    assert np.array_equal(single[POS_PATCH][0], checkpoint[POS_GRID])
    assert PatchGeometry(1, 14, 14).num_patches + 1 == 197

    for geometry in (PatchGeometry(36, 14, 14), PatchGeometry(36, 32, 32)):
        params, _ = import_2d_vit(checkpoint, geometry, tiny_cfg, SeededRng(1))
        table = params[POS_PATCH]
        assert table.shape == (36, geometry.grid_h, geometry.grid_w, tiny_cfg.dim)
        for depth in range(36):
            assert np.array_equal(table[depth], table[0])
        if geometry.grid_h == 14:
            assert np.array_equal(table[0], checkpoint[POS_GRID])
