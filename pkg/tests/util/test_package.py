# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for version reporting."""

import numpy

from volformer.util.package import get_versions


def test_versions():
    """Tests the libraries named in run records."""

    versions = get_versions()
    assert set(versions) == {"numpy", "python", "scipy", "volformer"}
    assert versions["numpy"] == numpy.__version__
