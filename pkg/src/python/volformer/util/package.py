# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Provides version information for run records."""

import platform
from importlib import metadata
from typing import Dict

import numpy
import scipy

import volformer


def get_versions() -> Dict[str, str]:
    """Gets the versions of volformer, its numeric libraries and the interpreter.

    Returns:
        Dict[str, str]: Versions by name.
    """

    try:
        installed = metadata.version("volformer")
    except metadata.PackageNotFoundError:
        installed = volformer.__version__
    return {
        "numpy": numpy.__version__,
        "python": platform.python_version(),
        "scipy": scipy.__version__,
        "volformer": installed,
    }
