# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for ROC analysis."""

import numpy as np
import pytest

from volformer.errors import DataError
from volformer.stats.roc import (
    ScoredCohort,
    operating_point,
    roc_auc,
    sens_at_spec,
    spec_at_sens,
)

TEN_POINT = ScoredCohort.of(
    [0.9, 0.8, 0.8, 0.7, 0.6, 0.55, 0.5, 0.4, 0.3, 0.1],
    [1, 1, 0, 1, 0, 1, 0, 0, 1, 0],
)


def _concordance(cohort: ScoredCohort) -> float:
    total = 0.0
    for case in cohort.cases:
        for control in cohort.controls:
            total += 1.0 if case > control else 0.5 if case == control else 0.0
    return total / (cohort.cases.size * cohort.controls.size)


def _sweep(cohort: ScoredCohort):
    candidates = sorted(set(cohort.scores.tolist())) + [np.inf]
    return [operating_point(cohort, threshold) for threshold in candidates]


def test_auc_extremes():
    """Tests perfect separation and all ties."""

    assert roc_auc(ScoredCohort.of([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])) == 1.0
    assert roc_auc(ScoredCohort.of([0.5] * 4, [1, 0, 1, 0])) == 0.5
    assert roc_auc(ScoredCohort.of([0.1, 0.9], [1, 0])) == 0.0


def test_auc_matches_pairwise_concordance():
    """Tests the rank formula against counting concordant pairs, ties included."""

    rng = np.random.default_rng(0)
    scores = np.round(rng.uniform(size=200), 2)
    labels = rng.integers(0, 2, size=200)
    cohort = ScoredCohort.of(scores, labels)
    assert abs(roc_auc(cohort) - _concordance(cohort)) < 1e-12


def test_auc_monotone_invariance():
    """Tests that strictly increasing transforms keep the AUC."""

    rng = np.random.default_rng(1)
    scores = rng.uniform(size=50)
    labels = rng.integers(0, 2, size=50)
    labels[:2] = [0, 1]
    base = roc_auc(ScoredCohort.of(scores, labels))
    for transform in (np.exp, lambda x: x**3 + 2 * x, lambda x: np.log(x + 1e-3)):
        assert np.isclose(roc_auc(ScoredCohort.of(transform(scores), labels)), base)
    flipped = roc_auc(ScoredCohort.of(scores, 1 - labels))
    assert np.isclose(base + flipped, 1.0)


def test_single_class_fails():
    """Tests that ROC analysis needs both classes."""

    with pytest.raises(DataError):
        roc_auc(ScoredCohort.of([0.1, 0.2], [1, 1]))
    with pytest.raises(DataError):
        sens_at_spec(ScoredCohort.of([0.1, 0.2], [0, 0]))


def test_cohort_validation():
    """Tests mismatched lengths, bad labels and non-finite scores."""

    with pytest.raises(DataError):
        ScoredCohort.of([0.1], [1, 0])
    with pytest.raises(DataError):
        ScoredCohort.of([0.1, 0.2], [1, 2])
    with pytest.raises(DataError):
        ScoredCohort.of([np.nan, 0.2], [1, 0])


def test_operating_points_of_perfect_scorers():
    """Tests scores equal to the labels and fully separated scores."""

    labels = [1, 0, 1, 0, 0]
    exact = ScoredCohort.of(labels, labels)
    assert sens_at_spec(exact) == 1.0
    assert spec_at_sens(exact) == 1.0
    separated = ScoredCohort.of([0.9, 0.1, 0.8, 0.2, 0.3], labels)
    for target in (0.5, 0.8, 1.0):
        assert sens_at_spec(separated, target) == 1.0
        assert spec_at_sens(separated, target) == 1.0


def test_anti_perfect_scorer():
    """Tests that cases scored below every control give no specificity."""

    cohort = ScoredCohort.of([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])
    assert spec_at_sens(cohort) == 0.0
    assert sens_at_spec(cohort) == 0.0


def test_ten_point_cohort_against_sweep():
    """Tests both operating points against an exhaustive threshold sweep."""

    points = _sweep(TEN_POINT)
    for target in (0.2, 0.5, 0.8, 1.0):
        best_sens = max(sens for sens, spec in points if spec >= target)
        best_spec = max(spec for sens, spec in points if sens >= target)
        assert sens_at_spec(TEN_POINT, target) == best_sens
        assert spec_at_sens(TEN_POINT, target) == best_spec
    assert sens_at_spec(TEN_POINT) == 0.6
    assert spec_at_sens(TEN_POINT) == 0.6


def test_operating_points_antitone():
    """Tests that stricter targets never raise the other rate."""

    targets = np.linspace(0.0, 1.0, 11)
    sens = [sens_at_spec(TEN_POINT, target) for target in targets]
    spec = [spec_at_sens(TEN_POINT, target) for target in targets]
    assert all(a >= b for a, b in zip(sens, sens[1:]))
    assert all(a >= b for a, b in zip(spec, spec[1:]))


def test_auc_matches_concordance_on_random_cohorts():
    """Tests the rank formula against pairwise concordance on random cohorts with ties."""

    rng = np.random.default_rng(500)
    for _ in range(500):
        size = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, size=size)
        labels[:2] = [1, 0]
        levels = int(rng.integers(1, 20))
        scores = rng.integers(0, levels, size=size) / levels
        cohort = ScoredCohort.of(scores, labels)
        gaps = cohort.cases[:, None] - cohort.controls[None, :]
        concordance = ((gaps > 0) + 0.5 * (gaps == 0)).mean()
        assert abs(roc_auc(cohort) - concordance) < 1e-12
