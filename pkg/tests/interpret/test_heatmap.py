# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for heatmaps and their export."""

import os

import numpy as np
import pytest

from volformer.checkpoint import archive
from volformer.errors import ShapeError
from volformer.interpret.heatmap import (
    HEATMAP_TENSOR,
    VolumeHeatmap,
    class_heatmap,
    export_heatmap,
    mass_fraction,
    pgm_bytes,
)
from volformer.model.tokenizer import PatchGeometry


def _rollout(row) -> np.ndarray:
    tokens = len(row)
    rollout = np.eye(tokens)
    rollout[0] = row
    return rollout


def test_heatmap_normalized():
    """Tests the shape and range of a heatmap and where its peak lands."""

    geometry = PatchGeometry(2, 2, 2)
    row = np.array([0.2, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7])
    heatmap = class_heatmap(_rollout(row), geometry, 32, 32)
    assert heatmap.values.shape == (2, 32, 32)
    assert heatmap.values.dtype == np.float32
    assert heatmap.values.min() == 0.0
    assert heatmap.values.max() == 1.0
    assert heatmap.values[1, 31, 31] == 1.0
    assert heatmap.values[1, 0, 0] == 0.0


def test_constant_heatmap_is_zero():
    """Tests that equal patch weights give an all-zero heatmap."""

    row = np.array([0.2] + [0.1] * 8)
    heatmap = class_heatmap(_rollout(row), PatchGeometry(2, 2, 2), 32, 32)
    assert not heatmap.values.any()


def test_heatmap_shape_check():
    """Tests that the rollout must match the geometry."""

    with pytest.raises(ShapeError):
        class_heatmap(np.eye(5), PatchGeometry(2, 2, 2), 32, 32)


def test_pgm_header():
    """Tests the binary PGM layout."""

    data = pgm_bytes(np.array([[0.0, 1.0, 0.5]], dtype=np.float32))
    assert data == b"P5\n3 1\n255\n" + bytes([0, 255, 128])


def test_export(tmpdir):
    """Tests that the archive and one PGM per slice are written."""

    values = np.zeros((3, 4, 5), dtype=np.float32)
    values[2, 1, 1] = 1.0
    path = str(tmpdir.join("S00000.nta"))
    written = export_heatmap(VolumeHeatmap(values), path)
    expected = [path] + [str(tmpdir.join(f"S00000_slice{d:03d}.pgm")) for d in range(3)]
    assert written == expected
    assert all(os.path.exists(name) for name in written)
    assert np.array_equal(archive.load(path)[HEATMAP_TENSOR], values)
    with open(expected[3], "rb") as pgm_file:
        assert pgm_file.read().startswith(b"P5\n5 4\n255\n")


def test_mass_fraction():
    """Tests the share of mass inside a mask smaller than the padded volume."""

    values = np.zeros((1, 4, 4), dtype=np.float32)
    values[0, 0, 0] = 1.0
    values[0, 3, 3] = 3.0
    mask = np.zeros((1, 2, 2), dtype=np.float32)
    mask[0, 0, 0] = 1.0
    assert mass_fraction(VolumeHeatmap(values), mask) == 0.25
    assert mass_fraction(VolumeHeatmap(np.zeros((1, 4, 4))), mask) == 0.0
    with pytest.raises(ShapeError):
        mass_fraction(VolumeHeatmap(values), np.zeros((2, 2, 2)))
