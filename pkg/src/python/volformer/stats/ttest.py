# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Student t distribution functions and the t tests used to compare models and cohorts."""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np
from scipy.special import betainc

from volformer.errors import DataError
from volformer.util.component import ComponentModel

NUM_FOLDS = 6


def student_t_cdf(t: float, df: float) -> float:
    """The Student t cumulative distribution through the regularized incomplete beta
    function.

    Args:
        t (float): The statistic.
        df (float): The degrees of freedom.

    Returns:
        float: P(T <= t).
    """

    if df <= 0:
        raise ValueError(f"Degrees of freedom must be positive, {df} provided")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return 1.0 - tail if t >= 0 else tail


def t_critical(df: float, level: float = 0.95) -> float:
    """The two-sided critical value, the t with P(|T| <= t) = level, found by bisection.

    Args:
        df (float): The degrees of freedom.
        level (float, optional): The coverage. Defaults to 0.95.

    Returns:
        float: The critical value.
    """

    if not 0 < level < 1:
        raise ValueError(f"Coverage must lie in (0, 1), {level} provided")
    target = 0.5 + level / 2.0
    low, high = 0.0, 1.0
    while student_t_cdf(high, df) < target:
        high *= 2.0
    for _ in range(200):
        mid = 0.5 * (low + high)
        if student_t_cdf(mid, df) < target:
            low = mid
        else:
            high = mid
        if high - low < 1e-12:
            break
    return 0.5 * (low + high)


class PairedTest(ComponentModel):
    """A one-sided paired t test of mean(a - b) > 0.

    Attributes:
        t (float): The statistic, infinite for zero-variance differences.
        df (int): The degrees of freedom.
        p (float): The one-sided p value.
    """

    t: float
    df: int
    p: float


def paired_t_one_sided(a: Sequence[float], b: Sequence[float]) -> PairedTest:
    """Tests whether a exceeds b on average over six paired folds. Differences with zero
    variance give p = 0 for a positive mean, p = 1 for a negative mean and p = 0.5 when
    every difference is zero.

    Args:
        a (Sequence[float]): Six values of the first model.
        b (Sequence[float]): Six values of the second model.

    Raises:
        DataError: If either input does not hold six values.

    Returns:
        PairedTest: The test.
    """

    if len(a) != NUM_FOLDS or len(b) != NUM_FOLDS:
        raise DataError(
            message=f"Paired tests need {NUM_FOLDS} values each, {len(a)} and {len(b)} provided"
        )
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    df = NUM_FOLDS - 1
    mean = float(diffs.mean())
    spread = float(diffs.std(ddof=1))
    if spread == 0.0:
        if mean == 0.0:
            return PairedTest(t=0.0, df=df, p=0.5)
        return PairedTest(t=math.copysign(math.inf, mean), df=df, p=0.0 if mean > 0 else 1.0)
    t = mean / (spread / math.sqrt(NUM_FOLDS))
    return PairedTest(t=t, df=df, p=1.0 - student_t_cdf(t, df))


def two_sample_t(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """The two-sided two-sample t test with pooled variance.

    Args:
        a (Sequence[float]): The first sample, at least one value.
        b (Sequence[float]): The second sample, at least one value.

    Raises:
        DataError: If the samples hold fewer than three values together.

    Returns:
        Tuple[float, float]: The statistic and the two-sided p value. Samples with zero
            pooled variance give (0, 1) for equal means and (inf, 0) otherwise.
    """

    first = np.asarray(a, dtype=np.float64)
    second = np.asarray(b, dtype=np.float64)
    df = first.size + second.size - 2
    if first.size < 1 or second.size < 1 or df < 1:
        raise DataError(message=f"Samples of {first.size} and {second.size} are too small")
    pooled = (
        ((first - first.mean()) ** 2).sum() + ((second - second.mean()) ** 2).sum()
    ) / df
    gap = float(first.mean() - second.mean())
    if pooled == 0.0:
        return (0.0, 1.0) if gap == 0.0 else (math.copysign(math.inf, gap), 0.0)
    t = gap / math.sqrt(pooled * (1.0 / first.size + 1.0 / second.size))
    return t, 2.0 * (1.0 - student_t_cdf(abs(t), df))
