# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""volformer adapts a 2D-pretrained vision transformer to 3D volumes. Every slice of a volume
is cut into 16x16 patches, the pretrained 2D position embeddings are replicated per slice (and
interpolated when the slice grid differs), and the resulting sequence is encoded by the
pretrained transformer. The package also carries the cohort protocol used to evaluate such a
model: case-control matching, six-fold cross-validation, ROC statistics and attention rollout.

For more information, see the README.
"""

__version__ = "0.1.0"
