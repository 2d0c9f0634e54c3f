# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for t tests and fold summaries."""

import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from volformer.errors import DataError
from volformer.stats.summary import T_CRITICAL_DF5, summarize_folds
from volformer.stats.ttest import (
    paired_t_one_sided,
    student_t_cdf,
    t_critical,
    two_sample_t,
)


def test_student_t_cdf():
    """Tests symmetry, the centre and agreement with scipy."""

    assert student_t_cdf(0.0, 5) == 0.5
    assert math.isclose(student_t_cdf(1.3, 5) + student_t_cdf(-1.3, 5), 1.0)
    for t in (-3.0, -0.4, 0.7, 2.2, 6.0):
        assert math.isclose(student_t_cdf(t, 5), scipy_stats.t.cdf(t, 5), abs_tol=1e-12)
    assert student_t_cdf(math.inf, 5) == 1.0


def test_t_critical():
    """Tests the tabulated two-sided 95% value for five degrees of freedom."""

    assert abs(t_critical(5) - T_CRITICAL_DF5) < 1e-4
    assert abs(t_critical(1000) - 1.96) < 1e-2
    with pytest.raises(ValueError):
        t_critical(5, 1.0)


def test_paired_t_known_value():
    """Tests differences 1 through 6."""

    test = paired_t_one_sided([1, 2, 3, 4, 5, 6], [0] * 6)
    assert test.df == 5
    assert abs(test.t - 4.583) < 1e-3
    assert abs(test.p - 0.0030) < 1e-4
    assert math.isclose(test.p, scipy_stats.t.sf(test.t, 5), rel_tol=1e-9)


def test_paired_t_degenerate():
    """Tests the conventions for zero-variance differences."""

    values = [0.7, 0.8, 0.75, 0.9, 0.85, 0.8]
    same = paired_t_one_sided(values, values)
    assert (same.t, same.p) == (0.0, 0.5)
    assert paired_t_one_sided([2] * 6, [1] * 6).p == 0.0
    assert paired_t_one_sided([1] * 6, [2] * 6).p == 1.0


def test_paired_t_complements():
    """Tests that swapping the models gives the complementary p value."""

    rng = np.random.default_rng(0)
    a, b = rng.uniform(size=6), rng.uniform(size=6)
    assert math.isclose(paired_t_one_sided(a, b).p + paired_t_one_sided(b, a).p, 1.0)


def test_paired_t_needs_six():
    """Tests that paired tests need six folds."""

    with pytest.raises(DataError):
        paired_t_one_sided([1] * 5, [1] * 5)


def test_two_sample_t_matches_scipy():
    """Tests the pooled variance test against scipy."""

    rng = np.random.default_rng(1)
    a, b = rng.normal(60, 8, size=40), rng.normal(62, 8, size=35)
    t, p = two_sample_t(a, b)
    reference = scipy_stats.ttest_ind(a, b, equal_var=True)
    assert math.isclose(t, reference.statistic, rel_tol=1e-9)
    assert math.isclose(p, reference.pvalue, rel_tol=1e-7)
    with pytest.raises(DataError):
        two_sample_t([1.0], [2.0])


def test_summarize_identical_values():
    """Tests that equal fold values have no spread."""

    for value in (0.8, 0.1, 0.7, 1.0 / 3.0):
        summary = summarize_folds([value] * 6)
        assert summary.mean == value
        assert summary.ci95 == 0.0
        assert summary.values == [value] * 6


def test_summarize_single_outlier():
    """Tests the confidence half-width of five zeros and a one."""

    summary = summarize_folds([0, 0, 0, 0, 0, 1])
    sd = math.sqrt(1 / 6 * (1 - 1 / 6) * 6 / 5)
    assert math.isclose(summary.mean, 1 / 6)
    assert math.isclose(summary.ci95, T_CRITICAL_DF5 * sd / math.sqrt(6))


def test_summarize_shift():
    """Tests that adding a constant moves the mean only."""

    values = [0.61, 0.72, 0.68, 0.8, 0.77, 0.7]
    base = summarize_folds(values)
    shifted = summarize_folds([value + 0.1 for value in values])
    assert math.isclose(shifted.mean, base.mean + 0.1)
    assert math.isclose(shifted.ci95, base.ci95, rel_tol=1e-9)


def test_summarize_needs_six():
    """Tests the fold count and finiteness checks."""

    with pytest.raises(DataError):
        summarize_folds([0.5] * 5)
    with pytest.raises(DataError):
        summarize_folds([0.5] * 5 + [math.nan])
