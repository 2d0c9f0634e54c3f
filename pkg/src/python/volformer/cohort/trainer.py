# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Training and six-fold cross-validation of volume models."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import field_validator

from volformer.checkpoint.importer import import_2d_vit
from volformer.cohort.folds import FoldSplit, split_six_folds
from volformer.cohort.optimizer import AdamW, Schedule, scheduled_lr
from volformer.cohort.subject import MatchedPair
from volformer.errors import NumericError
from volformer.event.handler import EventHandler
from volformer.event.training import EpochEvent, FoldEvent, FoldEventData
from volformer.model.config import ViTConfig
from volformer.model.encoder import forward, loss_and_grads
from volformer.model.params import ModelParams
from volformer.model.tokenizer import PatchGeometry, Volume
from volformer.stats.roc import ScoredCohort, roc_auc
from volformer.tensor.ops import Tensor
from volformer.tensor.rng import SeededRng
from volformer.util.component import ComponentModel

VolumeSource = Callable[[str], Volume]

CROSS_VALIDATION_STREAM = 0x666F6C64
TRAIN_STREAM = 1


class TrainSettings(ComponentModel):
    """Optimizer and schedule settings.

    Attributes:
        lr (float, optional): The learning rate. Defaults to 1e-3.
        epochs (int, optional): Passes over the training pairs. Defaults to 20.
        batch_size (int, optional): Volumes per batch, even so that every batch holds as
            many cases as controls. Defaults to 8.
        weight_decay (float, optional): The decoupled weight decay. Defaults to 0.05.
        beta1 (float, optional): The AdamW first moment decay. Defaults to 0.9.
        beta2 (float, optional): The AdamW second moment decay. Defaults to 0.999.
        eps (float, optional): The AdamW epsilon. Defaults to 1e-8.
        schedule (Schedule, optional): The learning rate shape after warmup.
            Defaults to COSINE.
        warmup_epochs (int, optional): Epochs over which the learning rate ramps up from
            zero. Defaults to 1.
    """

    lr: float = 1e-3
    epochs: int = 20
    batch_size: int = 8
    weight_decay: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    schedule: Schedule = Schedule.COSINE
    warmup_epochs: int = 1

    # pylint: disable=invalid-name
    @field_validator("lr", "weight_decay")
    @classmethod
    def is_non_negative(cls, v: float) -> float:
        """Validates that a rate is not negative.

        Args:
            v (float): The rate.

        Raises:
            ValueError: Raised if the rate is negative.

        Returns:
            float: The unmodified rate.
        """

        if v < 0:
            raise ValueError(f"Rates must not be negative, {v} provided")
        return v

    @field_validator("warmup_epochs")
    @classmethod
    def warmup_not_negative(cls, v: int) -> int:
        """Validates the warmup length.

        Args:
            v (int): The number of warmup epochs.

        Raises:
            ValueError: Raised if the number is negative.

        Returns:
            int: The unmodified number.
        """

        if v < 0:
            raise ValueError(f"warmup_epochs must not be negative, {v} provided")
        return v

    @field_validator("epochs", "eps")
    @classmethod
    def is_positive(cls, v: float) -> float:
        """Validates that a setting is positive.

        Args:
            v (float): The setting.

        Raises:
            ValueError: Raised if the setting is not positive.

        Returns:
            float: The unmodified setting.
        """

        if not v > 0:
            raise ValueError(f"Setting must be positive, {v} provided")
        return v

    @field_validator("batch_size")
    @classmethod
    def is_even(cls, v: int) -> int:
        """Validates that batches can hold whole pairs.

        Args:
            v (int): The batch size.

        Raises:
            ValueError: Raised if the batch size is not a positive even number.

        Returns:
            int: The unmodified batch size.
        """

        if v < 2 or v % 2:
            raise ValueError(f"Batch size must be a positive even number, {v} provided")
        return v

    @field_validator("beta1", "beta2")
    @classmethod
    def is_decay(cls, v: float) -> float:
        """Validates a moment decay.

        Args:
            v (float): The decay.

        Raises:
            ValueError: Raised if the decay is outside [0, 1).

        Returns:
            float: The unmodified decay.
        """

        if not 0 <= v < 1:
            raise ValueError(f"Moment decays must lie in [0, 1), {v} provided")
        return v


class TrainConfig(TrainSettings):
    """Training settings together with the seed that fixes batch order.

    Attributes:
        seed (int): The seed.
    """

    seed: int


@dataclass
class FoldResult:
    """The outcome of one cross-validation fold.

    Attributes:
        fold (int): The fold index.
        params (ModelParams): The trained parameters.
        history (List[float]): The mean training loss of every epoch.
        subject_ids (List[str]): The validation subjects, case then control of each pair.
        scores (List[float]): Their predicted probabilities.
        labels (List[int]): Their labels.
        test_scores (Dict[str, float]): Probabilities of the held-out test subjects.
    """

    fold: int
    params: ModelParams
    history: List[float]
    subject_ids: List[str]
    scores: List[float]
    labels: List[int]
    test_scores: Dict[str, float] = field(default_factory=dict)

    def cohort(self) -> ScoredCohort:
        """The validation scores as a cohort.

        Returns:
            ScoredCohort: The cohort.
        """

        return ScoredCohort.of(self.scores, self.labels)

    def scores_record(self) -> FoldScores:
        """The scores of the fold without its parameters.

        Returns:
            FoldScores: The record.
        """

        return FoldScores(
            fold=self.fold,
            history=self.history,
            subject_ids=self.subject_ids,
            scores=self.scores,
            labels=self.labels,
            test_scores=self.test_scores,
        )


class FoldScores(ComponentModel):
    """The stored scores of one fold, written as fold<f>_scores.json.

    Attributes:
        fold (int): The fold index.
        history (List[float]): The mean training loss of every epoch.
        subject_ids (List[str]): The validation subjects.
        scores (List[float]): Their predicted probabilities.
        labels (List[int]): Their labels.
        test_scores (Dict[str, float], optional): Probabilities of held-out test subjects.
            Defaults to {}.
    """

    fold: int
    history: List[float]
    subject_ids: List[str]
    scores: List[float]
    labels: List[int]
    test_scores: Dict[str, float] = {}

    def cohort(self) -> ScoredCohort:
        """The validation scores as a cohort.

        Returns:
            ScoredCohort: The cohort.
        """

        return ScoredCohort.of(self.scores, self.labels)


def pair_members(pairs: Sequence[MatchedPair]) -> List[Tuple[str, int]]:
    """Every subject of the pairs with its label, case before control.

    Args:
        pairs (Sequence[MatchedPair]): The pairs.

    Returns:
        List[Tuple[str, int]]: (subject id, label) in pair order.
    """

    return [member for pair in pairs for member in ((pair.case_id, 1), (pair.control_id, 0))]


# pylint: disable=too-many-arguments,too-many-locals
def train(
    params: ModelParams,
    pairs: Sequence[MatchedPair],
    cfg: TrainConfig,
    model_cfg: ViTConfig,
    volumes: VolumeSource,
    rng: Optional[SeededRng] = None,
    fold: int = 0,
) -> Tuple[ModelParams, List[float]]:
    """Mini-batch AdamW over the binary cross-entropy loss. Every epoch shuffles the pairs
    and each batch holds batch_size / 2 whole pairs, so cases and controls are balanced.
    The learning rate warms up over cfg.warmup_epochs and then follows cfg.schedule.

    Args:
        params (ModelParams): The starting parameters, left unchanged.
        pairs (Sequence[MatchedPair]): The training pairs.
        cfg (TrainConfig): The training settings.
        model_cfg (ViTConfig): The encoder shape.
        volumes (VolumeSource): Resolves subject ids to volumes.
        rng (Optional[SeededRng], optional): The stream batch order is drawn from.
            Defaults to None, which uses SeededRng(cfg.seed).
        fold (int, optional): The fold index reported in events. Defaults to 0.

    Raises:
        NumericError: If the loss or a gradient becomes non-finite, naming the epoch and
            batch.

    Returns:
        Tuple[ModelParams, List[float]]: The trained parameters and the mean loss of every
            epoch.
    """

    rng = SeededRng(cfg.seed) if rng is None else rng
    params = params.copy()
    optimizer = AdamW(
        params,
        lr=cfg.lr,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        weight_decay=cfg.weight_decay,
    )
    pairs_per_batch = cfg.batch_size // 2
    steps_per_epoch = -(-len(pairs) // pairs_per_batch)
    total_steps = cfg.epochs * steps_per_epoch
    warmup_steps = cfg.warmup_epochs * steps_per_epoch
    history = []
    for epoch in range(cfg.epochs):
        order = list(range(len(pairs)))
        rng.shuffle(order)
        total_loss = 0.0
        total_samples = 0
        for batch, start in enumerate(range(0, len(order), pairs_per_batch)):
            batch_pairs = [pairs[index] for index in order[start : start + pairs_per_batch]]
            members = pair_members(batch_pairs)
            grads = params.zeros_like()
            try:
                for subject_id, label in members:
                    loss, sample_grads = loss_and_grads(
                        volumes(subject_id), label, params, model_cfg
                    )
                    if not np.isfinite(loss):
                        raise NumericError(message="Non-finite loss", where="loss")
                    grads.add_(sample_grads, 1.0 / len(members))
                    total_loss += loss
            except NumericError as err:
                where = f"epoch {epoch}, batch {batch}"
                raise NumericError(message=f"{where}: {err.message}", where=where) from err
            total_samples += len(members)
            step = epoch * steps_per_epoch + batch
            lr = scheduled_lr(cfg.lr, step, total_steps, warmup_steps, cfg.schedule)
            optimizer.step(params, grads, lr=lr)
        mean_loss = total_loss / max(total_samples, 1)
        history.append(mean_loss)
        EventHandler.get().handle(
            EpochEvent({"fold": fold, "epoch": epoch, "mean_loss": mean_loss})
        )
    return params, history


def score_subjects(
    params: ModelParams, subject_ids: Sequence[str], model_cfg: ViTConfig, volumes: VolumeSource
) -> List[float]:
    """Predicted probabilities of subjects.

    Args:
        params (ModelParams): The parameters.
        subject_ids (Sequence[str]): The subjects.
        model_cfg (ViTConfig): The encoder shape.
        volumes (VolumeSource): Resolves subject ids to volumes.

    Returns:
        List[float]: The probabilities in subject order.
    """

    return [forward(volumes(subject_id), params, model_cfg)[0] for subject_id in subject_ids]


def _run_fold(
    fold: int,
    checkpoint: Mapping[str, Tensor],
    pairs: Sequence[MatchedPair],
    split: FoldSplit,
    cfg: TrainConfig,
    model_cfg: ViTConfig,
    geometry: PatchGeometry,
    volumes: VolumeSource,
    test_pairs: Sequence[MatchedPair],
) -> FoldResult:
    fold_rng = SeededRng(cfg.seed).derive(CROSS_VALIDATION_STREAM).derive(fold)
    params, _ = import_2d_vit(checkpoint, geometry, model_cfg, fold_rng)
    training = [pairs[index] for index in split.training_indices(fold)]
    params, history = train(
        params, training, cfg, model_cfg, volumes, rng=fold_rng.derive(TRAIN_STREAM), fold=fold
    )
    members = pair_members([pairs[index] for index in split.validation_indices(fold)])
    subject_ids = [subject_id for subject_id, _ in members]
    scores = score_subjects(params, subject_ids, model_cfg, volumes)
    test_ids = [subject_id for subject_id, _ in pair_members(test_pairs)]
    test_scores = dict(zip(test_ids, score_subjects(params, test_ids, model_cfg, volumes)))
    result = FoldResult(
        fold=fold,
        params=params,
        history=history,
        subject_ids=subject_ids,
        scores=scores,
        labels=[label for _, label in members],
        test_scores=test_scores,
    )
    data: FoldEventData = {"fold": fold, "validation_size": len(subject_ids)}
    if 0 < sum(result.labels) < len(result.labels):
        data["auc"] = roc_auc(result.cohort())
    EventHandler.get().handle(FoldEvent(data))
    return result


def cross_validate(
    checkpoint: Mapping[str, Tensor],
    pairs: Sequence[MatchedPair],
    cfg: TrainConfig,
    model_cfg: ViTConfig,
    geometry: PatchGeometry,
    volumes: VolumeSource,
    split: Optional[FoldSplit] = None,
    test_pairs: Sequence[MatchedPair] = (),
    threads: int = 1,
) -> List[FoldResult]:
    """Six-fold cross-validation. Every fold imports the checkpoint afresh, trains on the
    other five folds and scores its own pairs and the held-out test pairs. Folds run on up
    to threads worker threads; results do not depend on the thread count.

    Args:
        checkpoint (Mapping[str, Tensor]): The decoded 2D checkpoint, shared read-only.
        pairs (Sequence[MatchedPair]): The training group.
        cfg (TrainConfig): The training settings.
        model_cfg (ViTConfig): The encoder shape.
        geometry (PatchGeometry): The padded volume geometry.
        volumes (VolumeSource): Resolves subject ids to volumes.
        split (Optional[FoldSplit], optional): The folds. Defaults to None, which splits
            with cfg.seed.
        test_pairs (Sequence[MatchedPair], optional): The held-out test group.
            Defaults to ().
        threads (int, optional): The number of worker threads. Defaults to 1.

    Returns:
        List[FoldResult]: The results in fold order.
    """

    split = split_six_folds(pairs, cfg.seed) if split is None else split

    def run(fold: int) -> FoldResult:
        return _run_fold(
            fold, checkpoint, pairs, split, cfg, model_cfg, geometry, volumes, test_pairs
        )

    if threads <= 1:
        return [run(fold) for fold in range(split.num_folds)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(run, range(split.num_folds)))


def score_test_group(results: Sequence[FoldResult]) -> Dict[str, float]:
    """The test score of every held-out subject: the mean probability over the fold models.

    Args:
        results (Sequence[FoldResult]): The fold results.

    Returns:
        Dict[str, float]: Mean probabilities by subject id, sorted by id.
    """

    if not results:
        return {}
    subject_ids = sorted(results[0].test_scores)
    return {
        subject_id: float(np.mean([result.test_scores[subject_id] for result in results]))
        for subject_id in subject_ids
    }


class HeldOutScores(ComponentModel):
    """The mean fold-model probability of every held-out test subject, stored as
    test_scores.json.

    Attributes:
        scores (Dict[str, float]): Probabilities by subject id.
    """

    scores: Dict[str, float]
