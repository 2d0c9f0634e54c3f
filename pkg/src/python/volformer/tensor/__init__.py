# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Dense numeric kernels over row-major numpy tensors. Tensors are stored as float32; every
reduction accumulates in float64 and the result keeps the dtype of its input, so float64
tensors stay float64 end to end."""
