# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for console helpers."""

import pytest

from volformer.util.console import format_table


def test_format_table():
    """Tests column alignment."""

    table = format_table(["model", "auc"], [["volformer", "0.91"], ["lesion_detector", "1.0"]])
    assert table == (
        "model             auc\n"
        + "---------------  ----\n"
        + "volformer        0.91\n"
        + "lesion_detector   1.0\n"
    )


def test_format_table_ragged_row():
    """Tests that rows must have a cell per column."""

    with pytest.raises(ValueError):
        format_table(["a", "b"], [["1"]])
