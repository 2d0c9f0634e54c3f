# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""ROC analysis of a scored cohort. A subject is called positive when its score is at least
the threshold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy.stats import rankdata

from volformer.errors import DataError

SPEC_TARGET = 0.80
SENS_TARGET = 0.80


@dataclass(frozen=True)
class ScoredCohort:
    """Scores and labels of the same subjects.

    Attributes:
        scores (NDArray): The predicted probabilities.
        labels (NDArray): The labels, 1 for cases and 0 for controls.
    """

    scores: npt.NDArray[np.float64]
    labels: npt.NDArray[np.int64]

    @staticmethod
    def of(scores: Sequence[float], labels: Sequence[int]) -> ScoredCohort:
        """Builds a cohort from sequences.

        Args:
            scores (Sequence[float]): The scores.
            labels (Sequence[int]): The labels, each 0 or 1.

        Raises:
            DataError: If the lengths differ, a label is not 0 or 1 or a score is not
                finite.

        Returns:
            ScoredCohort: The cohort.
        """

        score_array = np.asarray(scores, dtype=np.float64).reshape(-1)
        label_array = np.asarray(labels, dtype=np.int64).reshape(-1)
        if score_array.shape != label_array.shape:
            raise DataError(
                message=f"{score_array.size} scores but {label_array.size} labels"
            )
        if not np.isin(label_array, (0, 1)).all():
            raise DataError(message="Labels must be 0 or 1")
        if not np.isfinite(score_array).all():
            raise DataError(message="Scores must be finite")
        return ScoredCohort(score_array, label_array)

    @property
    def cases(self) -> npt.NDArray[np.float64]:
        """The scores of label 1 subjects."""

        return self.scores[self.labels == 1]

    @property
    def controls(self) -> npt.NDArray[np.float64]:
        """The scores of label 0 subjects."""

        return self.scores[self.labels == 0]

    def require_both_classes(self) -> None:
        """Raises if either class is absent.

        Raises:
            DataError: If the cohort has no cases or no controls.
        """

        if self.cases.size == 0 or self.controls.size == 0:
            raise DataError(
                message=f"ROC analysis needs both classes, found {self.cases.size} cases "
                + f"and {self.controls.size} controls"
            )


def roc_auc(cohort: ScoredCohort) -> float:
    """The area under the ROC curve as the normalized Mann-Whitney U statistic, ties
    counted as one half.

    Args:
        cohort (ScoredCohort): The scored cohort.

    Raises:
        DataError: If a class is absent.

    Returns:
        float: The AUC in [0, 1].
    """

    cohort.require_both_classes()
    ranks = rankdata(cohort.scores, method="average")
    num_cases = cohort.cases.size
    num_controls = cohort.controls.size
    u_statistic = ranks[cohort.labels == 1].sum() - num_cases * (num_cases + 1) / 2.0
    return float(u_statistic / (num_cases * num_controls))


def _thresholds(cohort: ScoredCohort) -> npt.NDArray[np.float64]:
    return np.append(np.unique(cohort.scores), np.inf)


def operating_point(cohort: ScoredCohort, threshold: float) -> Tuple[float, float]:
    """Sensitivity and specificity when scores at or above threshold are called positive.

    Args:
        cohort (ScoredCohort): The scored cohort.
        threshold (float): The threshold.

    Returns:
        Tuple[float, float]: The sensitivity and the specificity.
    """

    cohort.require_both_classes()
    sensitivity = float(np.mean(cohort.cases >= threshold))
    specificity = float(np.mean(cohort.controls < threshold))
    return sensitivity, specificity


def sens_at_spec(cohort: ScoredCohort, spec_target: float = SPEC_TARGET) -> float:
    """The sensitivity at the smallest threshold whose specificity reaches the target.

    Args:
        cohort (ScoredCohort): The scored cohort.
        spec_target (float, optional): The specificity target. Defaults to 0.80.

    Raises:
        DataError: If a class is absent.

    Returns:
        float: The sensitivity.
    """

    cohort.require_both_classes()
    for threshold in _thresholds(cohort):
        sensitivity, specificity = operating_point(cohort, threshold)
        if specificity >= spec_target:
            return sensitivity
    return 0.0


def spec_at_sens(cohort: ScoredCohort, sens_target: float = SENS_TARGET) -> float:
    """The specificity at the largest threshold whose sensitivity reaches the target.

    Args:
        cohort (ScoredCohort): The scored cohort.
        sens_target (float, optional): The sensitivity target. Defaults to 0.80.

    Raises:
        DataError: If a class is absent.

    Returns:
        float: The specificity.
    """

    cohort.require_both_classes()
    for threshold in _thresholds(cohort)[::-1]:
        sensitivity, specificity = operating_point(cohort, threshold)
        if sensitivity >= sens_target:
            return specificity
    return 0.0
