# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The eval command summarizes the stored fold scores of the trained model and any
comparison models into a report."""

import os
from argparse import ArgumentParser, Namespace
from typing import Dict, List

from volformer.cohort.folds import NUM_FOLDS
from volformer.cohort.trainer import FoldScores, HeldOutScores
from volformer.config.config import DETECTOR_NAME, MODEL_NAME, RunConfig
from volformer.scripts.commands import common
from volformer.stats.report import build_report, held_out_report
from volformer.stats.roc import ScoredCohort
from volformer.synth.generator import detector_score
from volformer.util.cachedfile import VolumeStore
from volformer.util.console import info

COMMAND = "eval"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to evaluate.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=eval_command_main)


def score_files(directory: str) -> List[str]:
    """The fold score files of a model directory.

    Args:
        directory (str): The directory.

    Returns:
        List[str]: fold0_scores.json through fold5_scores.json.
    """

    return [os.path.join(directory, f"fold{fold}_scores.json") for fold in range(NUM_FOLDS)]


def read_folds(directory: str) -> List[FoldScores]:
    """Reads a model's six fold score files.

    Args:
        directory (str): The directory holding them.

    Returns:
        List[FoldScores]: The folds in order.
    """

    paths = score_files(directory)
    common.require_files(*paths)
    return [FoldScores.read(path) for path in paths]


def detector_folds(cfg: RunConfig, folds: List[FoldScores]) -> List[ScoredCohort]:
    """Scores the subjects of every fold with the lesion-region mean detector.

    Args:
        cfg (RunConfig): The config.
        folds (List[FoldScores]): The trained model's folds, fixing subjects and order.

    Returns:
        List[ScoredCohort]: The detector's folds.
    """

    volumes = VolumeStore(common.read_manifest(cfg))
    return [
        ScoredCohort.of(
            [detector_score(volumes(subject_id), cfg.data) for subject_id in fold.subject_ids],
            fold.labels,
        )
        for fold in folds
    ]


def eval_command_main(args: Namespace) -> None:
    """Writes report.json and report.txt, and test_report.json when a test group was held
    out, under <out>/eval.

    Args:
        args (Namespace): The arguments supplied to the command.
    """

    cfg = common.start(args, COMMAND)
    train_dir = common.stage_path(cfg, common.TRAIN_DIR)
    folds = read_folds(train_dir)
    models: Dict[str, List[ScoredCohort]] = {MODEL_NAME: [fold.cohort() for fold in folds]}
    for name, directory in sorted(cfg.eval.models.items()):
        models[name] = [fold.cohort() for fold in read_folds(directory)]
    if cfg.eval.detector_baseline:
        models[DETECTOR_NAME] = detector_folds(cfg, folds)
    report = build_report(
        models,
        cfg.eval.reference,
        spec_target=cfg.eval.spec_target,
        sens_target=cfg.eval.sens_target,
        contrast=cfg.data.contrast.value,
    )
    if args.dry_run:
        return

    outputs = [
        common.write_component(
            report, common.stage_path(cfg, common.EVAL_DIR, "report.json"), "report"
        ),
        common.write_text(
            report.to_text(), common.stage_path(cfg, common.EVAL_DIR, "report.txt"), "report"
        ),
    ]
    test_path = os.path.join(train_dir, "test_scores.json")
    if os.path.isfile(test_path):
        scores = HeldOutScores.read(test_path).scores
        subjects = common.read_manifest(cfg).by_id()
        labels = {subject_id: subjects[subject_id].label.value_int for subject_id in scores}
        held_out = held_out_report(
            scores, labels, spec_target=cfg.eval.spec_target, sens_target=cfg.eval.sens_target
        )
        outputs.append(
            common.write_component(
                held_out, common.stage_path(cfg, common.EVAL_DIR, "test_report.json"), "report"
            )
        )
    info(report.to_text())
    common.finish(cfg, COMMAND, outputs)
