# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for training and cross-validation."""

import numpy as np
import pytest
from pydantic import ValidationError

from volformer.checkpoint.importer import IMPORT_STREAM
from volformer.cohort.folds import HOLDOUT_STREAM
from volformer.cohort.optimizer import Schedule
from volformer.cohort.subject import MatchedPair
from volformer.cohort.trainer import (
    CROSS_VALIDATION_STREAM,
    TRAIN_STREAM,
    FoldScores,
    TrainConfig,
    TrainSettings,
    cross_validate,
    pair_members,
    score_test_group,
    train,
)
from volformer.errors import NumericError
from volformer.model.tokenizer import PatchGeometry, Volume
from volformer.synth.generator import DEMOGRAPHICS_STREAM, VOLUME_STREAM
from volformer.tensor.rng import SeededRng


def _volumes(count):
    """Cases are bright, controls dark, with a little noise."""

    rng = np.random.default_rng(0)
    volumes = {}
    for index in range(count):
        base = 0.7 if index % 2 == 0 else 0.3
        noise = rng.uniform(-0.05, 0.05, size=(2, 32, 32))
        volumes[f"s{index}"] = Volume.of(base + noise)
    return volumes


def _pairs(count):
    return [MatchedPair(case_id=f"s{2 * i}", control_id=f"s{2 * i + 1}") for i in range(count)]


def test_settings_validation():
    """Tests that batches hold whole pairs and rates are not negative."""

    with pytest.raises(ValidationError):
        TrainSettings(batch_size=3)
    with pytest.raises(ValidationError):
        TrainSettings(lr=-0.1)
    with pytest.raises(ValidationError):
        TrainSettings(epochs=0)
    with pytest.raises(ValidationError):
        TrainSettings(warmup_epochs=-1)
    with pytest.raises(ValidationError):
        TrainSettings(schedule="linear")
    assert TrainSettings(schedule="constant", warmup_epochs=0).schedule is Schedule.CONSTANT
    with pytest.raises(ValidationError):
        TrainConfig()


def test_pair_members():
    """Tests that cases come before their controls."""

    assert pair_members(_pairs(2)) == [("s0", 1), ("s1", 0), ("s2", 1), ("s3", 0)]


def test_zero_lr_keeps_params(tiny_cfg, tiny_params):
    """Tests that training with a zero learning rate returns identical parameters."""

    volumes = _volumes(4)
    cfg = TrainConfig(seed=1, lr=0.0, epochs=2, batch_size=2)
    trained, history = train(tiny_params, _pairs(2), cfg, tiny_cfg, volumes.__getitem__)
    assert trained.equals(tiny_params)
    assert trained is not tiny_params
    assert len(history) == 2


def test_training_is_deterministic(tiny_cfg, tiny_params):
    """Tests that one seed gives the same history and parameters."""

    volumes = _volumes(8)
    cfg = TrainConfig(seed=3, lr=1e-3, epochs=2, batch_size=4)
    first = train(tiny_params, _pairs(4), cfg, tiny_cfg, volumes.__getitem__)
    second = train(tiny_params, _pairs(4), cfg, tiny_cfg, volumes.__getitem__)
    assert first[1] == second[1]
    assert first[0].equals(second[0])


def test_overfits_one_pair(tiny_cfg, tiny_params):
    """Tests that a single separable pair is learned within 200 steps."""

    volumes = _volumes(2)
    cfg = TrainConfig(seed=0, lr=1e-2, epochs=200, batch_size=2, weight_decay=0.0)
    _, history = train(tiny_params, _pairs(1), cfg, tiny_cfg, volumes.__getitem__)
    assert history[-1] < 0.1
    assert history[-1] < history[0]


def test_divergence_names_batch(tiny_cfg, tiny_params):
    """Tests that non-finite losses report the epoch and batch."""

    params = tiny_params.copy()
    params["ln_f.b"][0] = np.nan
    cfg = TrainConfig(seed=0, epochs=1, batch_size=2)
    with pytest.raises(NumericError) as err:
        train(params, _pairs(1), cfg, tiny_cfg, _volumes(2).__getitem__)
    assert err.value.where == "epoch 0, batch 0"


def test_cross_validate(tiny_cfg, tiny_checkpoint):
    """Tests that every subject is scored once and threads do not change results."""

    volumes = _volumes(14)
    pairs = _pairs(6)
    test_pairs = [MatchedPair(case_id="s12", control_id="s13")]
    cfg = TrainConfig(seed=2, lr=1e-3, epochs=1, batch_size=2)
    geometry = PatchGeometry(2, 2, 2)
    results = cross_validate(
        tiny_checkpoint, pairs, cfg, tiny_cfg, geometry, volumes.__getitem__, test_pairs=test_pairs
    )
    assert [result.fold for result in results] == list(range(6))
    scored = sorted(subject for result in results for subject in result.subject_ids)
    assert scored == sorted(f"s{index}" for index in range(12))
    for result in results:
        assert all(0.0 < score < 1.0 for score in result.scores)
        assert result.labels == [1, 0]
        assert sorted(result.test_scores) == ["s12", "s13"]

    threaded = cross_validate(
        tiny_checkpoint,
        pairs,
        cfg,
        tiny_cfg,
        geometry,
        volumes.__getitem__,
        test_pairs=test_pairs,
        threads=3,
    )
    for serial, parallel in zip(results, threaded):
        assert serial.scores == parallel.scores
        assert serial.params.equals(parallel.params)

    group = score_test_group(results)
    assert list(group) == ["s12", "s13"]
    assert np.isclose(group["s12"], np.mean([r.test_scores["s12"] for r in results]))


def test_fold_scores_record(tiny_cfg, tiny_checkpoint):
    """Tests that fold scores survive JSON without the parameters."""

    volumes = _volumes(12)
    cfg = TrainConfig(seed=2, lr=0.0, epochs=1, batch_size=2)
    result = cross_validate(
        tiny_checkpoint, _pairs(6), cfg, tiny_cfg, PatchGeometry(2, 2, 2), volumes.__getitem__
    )[0]
    record = FoldScores.from_json(result.scores_record().to_json())
    assert record.scores == result.scores
    assert record.subject_ids == result.subject_ids
    assert record.cohort().labels.tolist() == [1, 0]
    assert score_test_group([]) == {}


def test_random_streams_are_disjoint():
    """Tests that the training stream of fold f differs from the volume stream of subject f."""

    tags = [
        CROSS_VALIDATION_STREAM,
        IMPORT_STREAM,
        HOLDOUT_STREAM,
        DEMOGRAPHICS_STREAM,
        VOLUME_STREAM,
    ]
    assert len(set(tags)) == len(tags)
    for seed in (0, 13, 2024):
        for index in range(6):
            fold = SeededRng(seed).derive(CROSS_VALIDATION_STREAM).derive(index)
            subject = SeededRng(seed).derive(VOLUME_STREAM).derive(index)
            assert fold.derive(TRAIN_STREAM).next_u64() != subject.next_u64()
            assert fold.derive(TRAIN_STREAM).next_u64() != subject.derive(TRAIN_STREAM).next_u64()
