# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Pair-atomic cross-validation folds and the held-out test group."""

from __future__ import annotations

from typing import List, Sequence, Tuple

from pydantic import model_validator

from volformer.cohort.subject import MatchedPair
from volformer.errors import DataError
from volformer.tensor.rng import SeededRng
from volformer.util.component import ComponentModel

NUM_FOLDS = 6
HOLDOUT_STREAM = 0x686F6C64


class FoldSplit(ComponentModel):
    """Disjoint folds of pair indices. Pairs are never split across folds.

    Attributes:
        folds (List[List[int]]): The pair indices of every fold.
        num_pairs (int): The number of pairs the folds partition.
    """

    folds: List[List[int]]
    num_pairs: int

    @model_validator(mode="after")
    def is_partition(self) -> FoldSplit:
        """Validates that the folds cover every pair exactly once with sizes differing by at
        most one.

        Raises:
            ValueError: Raised if the folds are not a balanced partition.

        Returns:
            FoldSplit: The unmodified split.
        """

        flat = sorted(index for fold in self.folds for index in fold)
        if flat != list(range(self.num_pairs)):
            raise ValueError(f"Folds do not partition {self.num_pairs} pairs")
        sizes = [len(fold) for fold in self.folds]
        if sizes and max(sizes) - min(sizes) > 1:
            raise ValueError(f"Fold sizes {sizes} differ by more than 1")
        return self

    @property
    def num_folds(self) -> int:
        """The number of folds."""

        return len(self.folds)

    def validation_indices(self, fold: int) -> List[int]:
        """The pairs held out in a fold.

        Args:
            fold (int): The fold index.

        Returns:
            List[int]: The pair indices.
        """

        return list(self.folds[fold])

    def training_indices(self, fold: int) -> List[int]:
        """The pairs a fold trains on, in ascending order.

        Args:
            fold (int): The fold index.

        Returns:
            List[int]: The pair indices of every other fold.
        """

        held_out = set(self.folds[fold])
        return [index for index in range(self.num_pairs) if index not in held_out]


def split_six_folds(pairs: Sequence[MatchedPair], seed: int) -> FoldSplit:
    """Shuffles the pair indices with SeededRng(seed) and deals them round-robin into six
    folds.

    Args:
        pairs (Sequence[MatchedPair]): The matched pairs.
        seed (int): The seed.

    Raises:
        DataError: If there are fewer than six pairs.

    Returns:
        FoldSplit: The split.
    """

    if len(pairs) < NUM_FOLDS:
        raise DataError(
            message=f"Six-fold cross-validation needs at least {NUM_FOLDS} pairs, "
            + f"{len(pairs)} provided"
        )
    order = list(range(len(pairs)))
    SeededRng(seed).shuffle(order)
    return FoldSplit(
        folds=[order[fold::NUM_FOLDS] for fold in range(NUM_FOLDS)], num_pairs=len(pairs)
    )


def split_holdout(
    pairs: Sequence[MatchedPair], test_pairs: int, seed: int
) -> Tuple[List[MatchedPair], List[MatchedPair]]:
    """Sets aside a held-out test group of whole pairs before cross-validation.

    Args:
        pairs (Sequence[MatchedPair]): The matched pairs.
        test_pairs (int): The number of pairs to hold out, possibly 0.
        seed (int): The seed.

    Raises:
        DataError: If fewer than six pairs would remain for cross-validation.

    Returns:
        Tuple[List[MatchedPair], List[MatchedPair]]: The training group and the test group,
            each in input order.
    """

    if test_pairs < 0 or len(pairs) - test_pairs < NUM_FOLDS:
        raise DataError(
            message=f"Cannot hold out {test_pairs} of {len(pairs)} pairs and keep "
            + f"{NUM_FOLDS} for cross-validation"
        )
    order = list(range(len(pairs)))
    SeededRng(seed).derive(HOLDOUT_STREAM).shuffle(order)
    held_out = set(order[:test_pairs])
    training = [pair for index, pair in enumerate(pairs) if index not in held_out]
    testing = [pair for index, pair in enumerate(pairs) if index in held_out]
    return training, testing


class CohortSplit(ComponentModel):
    """The pairs used for cross-validation, their folds and the held-out test group, stored
    as folds.json.

    Attributes:
        training (List[MatchedPair]): The cross-validation pairs.
        testing (List[MatchedPair]): The held-out test pairs, possibly empty.
        folds (FoldSplit): Folds over indices of training.
    """

    training: List[MatchedPair]
    testing: List[MatchedPair]
    folds: FoldSplit

    @model_validator(mode="after")
    def folds_cover_training(self) -> CohortSplit:
        """Validates that the folds index the training pairs.

        Raises:
            ValueError: Raised if the fold split covers a different number of pairs.

        Returns:
            CohortSplit: The unmodified split.
        """

        if self.folds.num_pairs != len(self.training):
            raise ValueError(
                f"Folds cover {self.folds.num_pairs} pairs but {len(self.training)} train"
            )
        return self


def split_cohort(pairs: Sequence[MatchedPair], test_pairs: int, seed: int) -> CohortSplit:
    """Holds out the test group, then splits the rest into six folds.

    Args:
        pairs (Sequence[MatchedPair]): The matched pairs.
        test_pairs (int): The number of pairs to hold out.
        seed (int): The seed.

    Returns:
        CohortSplit: The split.
    """

    training, testing = split_holdout(pairs, test_pairs, seed)
    return CohortSplit(
        training=training, testing=testing, folds=split_six_folds(training, seed)
    )
