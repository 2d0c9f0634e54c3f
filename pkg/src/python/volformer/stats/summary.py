# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Aggregation of a metric over the six cross-validation folds."""

from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from volformer.errors import DataError
from volformer.stats.ttest import NUM_FOLDS
from volformer.util.component import ComponentModel

T_CRITICAL_DF5 = 2.5706


class MetricSummary(ComponentModel):
    """A metric's per-fold values with their mean and 95% confidence half-width.

    Attributes:
        values (List[float]): The six fold values.
        mean (float): Their mean.
        ci95 (float): The half-width 2.5706 * sd / sqrt(6).
    """

    values: List[float]
    mean: float
    ci95: float


def summarize_folds(values: Sequence[float]) -> MetricSummary:
    """Summarizes six fold values with a t-based 95% confidence interval.

    Args:
        values (Sequence[float]): The fold values.

    Raises:
        DataError: If there are not exactly six finite values.

    Returns:
        MetricSummary: The summary.
    """

    array = np.asarray(values, dtype=np.float64)
    if array.shape != (NUM_FOLDS,) or not np.isfinite(array).all():
        raise DataError(message=f"Expected {NUM_FOLDS} finite fold values, got {list(values)}")
    fold_values = [float(value) for value in array]
    if min(fold_values) == max(fold_values):
        return MetricSummary(values=fold_values, mean=fold_values[0], ci95=0.0)
    mean = math.fsum(fold_values) / NUM_FOLDS
    spread = math.sqrt(math.fsum((value - mean) ** 2 for value in fold_values) / (NUM_FOLDS - 1))
    return MetricSummary(
        values=fold_values,
        mean=mean,
        ci95=T_CRITICAL_DF5 * spread / math.sqrt(NUM_FOLDS),
    )
