# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Checks whether a model's attention falls on planted lesions."""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from volformer.interpret.heatmap import VolumeHeatmap, class_heatmap, mass_fraction
from volformer.interpret.rollout import attention_rollout
from volformer.model.config import ViTConfig
from volformer.model.encoder import forward
from volformer.model.params import ModelParams
from volformer.model.tokenizer import PatchGeometry, Volume
from volformer.tensor.ops import Tensor
from volformer.util.component import ComponentModel


class SubjectLocalization(ComponentModel):
    """How much of one subject's heatmap lies on its lesion.

    Attributes:
        subject_id (str): The subject.
        probability (float): The model's predicted probability.
        mass_fraction (Optional[float], optional): The heatmap mass inside the lesion.
            Defaults to None when the volume has no lesion mask.
        lesion_fraction (Optional[float], optional): The share of padded voxels inside the
            lesion. Defaults to None.
    """

    subject_id: str
    probability: float
    mass_fraction: Optional[float] = None
    lesion_fraction: Optional[float] = None

    @property
    def localized(self) -> bool:
        """Whether the lesion draws more than its share of heatmap mass."""

        if self.mass_fraction is None or self.lesion_fraction is None:
            return False
        return self.mass_fraction > self.lesion_fraction


class LocalizationSummary(ComponentModel):
    """The localization of every interpreted subject of a fold.

    Attributes:
        fold (int): The fold whose model was interpreted.
        subjects (List[SubjectLocalization]): The subjects.
        localized_share (Optional[float], optional): The share of subjects with a lesion
            mask whose lesion is localized. Defaults to None.
    """

    fold: int
    subjects: List[SubjectLocalization]
    localized_share: Optional[float] = None


def explain(
    volume: Volume, params: ModelParams, cfg: ViTConfig
) -> Tuple[float, VolumeHeatmap]:
    """Runs the model on a volume and projects the class token's rollout onto it.

    Args:
        volume (Volume): The volume.
        params (ModelParams): The parameters.
        cfg (ViTConfig): The encoder shape.

    Returns:
        Tuple[float, VolumeHeatmap]: The probability and the heatmap over the padded
            volume.
    """

    probability, stack = forward(volume, params, cfg)
    geometry = PatchGeometry.for_volume(volume, cfg.patch)
    _, height, width = geometry.padded_shape
    return probability, class_heatmap(attention_rollout(stack), geometry, height, width)


def localize(
    subject_id: str, probability: float, heatmap: VolumeHeatmap, lesion: Optional[Tensor]
) -> SubjectLocalization:
    """Measures a heatmap against a lesion mask.

    Args:
        subject_id (str): The subject.
        probability (float): The predicted probability.
        heatmap (VolumeHeatmap): The heatmap over the padded volume.
        lesion (Optional[Tensor]): The unpadded lesion mask, if the volume has one.

    Returns:
        SubjectLocalization: The measurements.
    """

    if lesion is None or not np.any(lesion):
        return SubjectLocalization(subject_id=subject_id, probability=probability)
    return SubjectLocalization(
        subject_id=subject_id,
        probability=probability,
        mass_fraction=mass_fraction(heatmap, lesion),
        lesion_fraction=float(np.count_nonzero(lesion)) / heatmap.values.size,
    )


def summarize_localization(
    fold: int, subjects: List[SubjectLocalization]
) -> LocalizationSummary:
    """Collects localizations, with the share localized among subjects with lesions.

    Args:
        fold (int): The fold.
        subjects (List[SubjectLocalization]): The measurements.

    Returns:
        LocalizationSummary: The summary.
    """

    measured = [subject for subject in subjects if subject.mass_fraction is not None]
    share = (
        sum(subject.localized for subject in measured) / len(measured) if measured else None
    )
    return LocalizationSummary(fold=fold, subjects=subjects, localized_share=share)
