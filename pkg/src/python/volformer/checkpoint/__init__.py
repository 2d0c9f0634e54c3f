# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Named-tensor archives, 2D checkpoint import and synthetic pretrained checkpoints."""
