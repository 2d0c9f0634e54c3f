# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for the fold split and the held-out test group."""

import pytest
from pydantic import ValidationError

from volformer.cohort.folds import (
    CohortSplit,
    FoldSplit,
    split_cohort,
    split_holdout,
    split_six_folds,
)
from volformer.cohort.subject import MatchedPair
from volformer.errors import DataError


def _pairs(count):
    return [MatchedPair(case_id=f"c{i}", control_id=f"k{i}") for i in range(count)]


def test_fold_sizes():
    """Tests the fold sizes of a 302 pair training group."""

    split = split_six_folds(_pairs(302), 0)
    assert sorted((len(fold) for fold in split.folds), reverse=True) == [51, 51, 50, 50, 50, 50]
    assert sorted(index for fold in split.folds for index in fold) == list(range(302))


def test_split_is_seeded():
    """Tests that a seed fixes the split and another seed changes it."""

    pairs = _pairs(30)
    assert split_six_folds(pairs, 4) == split_six_folds(pairs, 4)
    assert any(split_six_folds(pairs, 4) != split_six_folds(pairs, seed) for seed in range(5, 10))


def test_training_and_validation_indices():
    """Tests that a fold's training pairs are every pair outside it."""

    split = split_six_folds(_pairs(13), 1)
    for fold in range(split.num_folds):
        held_out = split.validation_indices(fold)
        training = split.training_indices(fold)
        assert sorted(held_out + training) == list(range(13))
        assert not set(held_out) & set(training)
        assert training == sorted(training)


def test_too_few_pairs():
    """Tests that six folds need six pairs."""

    with pytest.raises(DataError):
        split_six_folds(_pairs(5), 0)


def test_fold_split_validation():
    """Tests that overlapping or unbalanced folds are refused."""

    with pytest.raises(ValidationError):
        FoldSplit(folds=[[0, 1], [1]], num_pairs=2)
    with pytest.raises(ValidationError):
        FoldSplit(folds=[[0, 1, 2], [3]], num_pairs=4)


def test_holdout_keeps_whole_pairs():
    """Tests that the test group is drawn from whole pairs in input order."""

    pairs = _pairs(20)
    training, testing = split_holdout(pairs, 4, 3)
    assert len(training) == 16
    assert len(testing) == 4
    assert not {p.case_id for p in training} & {p.case_id for p in testing}
    assert testing == sorted(testing, key=pairs.index)
    assert split_holdout(pairs, 0, 3) == (pairs, [])
    with pytest.raises(DataError):
        split_holdout(pairs, 15, 3)


def test_split_cohort():
    """Tests that the folds index the training group."""

    split = split_cohort(_pairs(20), 2, 9)
    assert split.folds.num_pairs == 18
    assert len(split.testing) == 2
    assert CohortSplit.from_json(split.to_json()) == split
    with pytest.raises(ValidationError):
        CohortSplit(training=_pairs(7), testing=[], folds=split.folds)
