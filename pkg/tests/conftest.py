# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Sets up some configuration for PyTest."""

from typing import List

import pytest

from volformer.checkpoint.archive import Tensors
from volformer.checkpoint.importer import import_2d_vit
from volformer.checkpoint.pretrained import pretrained_tensors
from volformer.model.config import ViTConfig
from volformer.model.params import ModelParams
from volformer.model.tokenizer import PatchGeometry
from volformer.tensor.rng import SeededRng

TINY_GRID = (4, 4)


def pytest_addoption(parser: pytest.Parser) -> None:
    """Adds the option that enables slow end to end tests."""

    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_collection_modifyitems(config: pytest.Config, items: List[pytest.Item]) -> None:
    """Skips tests marked slow unless --runslow is given."""

    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def tiny_cfg() -> ViTConfig:
    """A two block encoder small enough for exact gradient checks."""

    return ViTConfig(dim=8, heads=2, depth=2)


@pytest.fixture
def tiny_checkpoint(tiny_cfg: ViTConfig) -> Tensors:
    """A synthetic 2D checkpoint on a 4x4 patch grid."""

    return pretrained_tensors(tiny_cfg, TINY_GRID, 7)


@pytest.fixture
def tiny_params(tiny_cfg: ViTConfig, tiny_checkpoint: Tensors) -> ModelParams:
    """Volume parameters for two slices of 32x32, imported from the tiny checkpoint."""

    params, _ = import_2d_vit(tiny_checkpoint, PatchGeometry(2, 2, 2), tiny_cfg, SeededRng(3))
    return params
