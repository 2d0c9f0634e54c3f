# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The EventType enum."""

from enum import Enum


class EventType(str, Enum):
    """A simple enum for Event naming"""

    ARTIFACT = "artifact"
    DEBUG = "debug"
    EPOCH = "epoch"
    FOLD = "fold"
    IMPORT = "import"
    SCRIPT_RUN = "script_run"
    VERBOSE = "verbose"
    WARNING = "warning"
