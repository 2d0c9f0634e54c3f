# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The rollout command exports attention heatmaps of one fold model for its validation
cases and measures how well they find planted lesions."""

from argparse import ArgumentParser, Namespace

from volformer.checkpoint import archive
from volformer.cohort.trainer import FoldScores
from volformer.errors import ConfigError
from volformer.interpret.heatmap import export_heatmap
from volformer.interpret.localization import explain, localize, summarize_localization
from volformer.model.params import ModelParams
from volformer.scripts.commands import common
from volformer.synth.generator import LESION_TENSOR
from volformer.util.cachedfile import VolumeStore
from volformer.util.console import info

COMMAND = "rollout"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to export heatmaps.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=rollout_command_main)


def rollout_command_main(args: Namespace) -> None:
    """Writes <id>.nta and <id>_slice<d>.pgm heatmaps for the fold's validation cases and
    summary.json under <out>/rollout.

    Args:
        args (Namespace): The arguments supplied to the command.

    Raises:
        ConfigError: If eval.rollout_fold names no fold.
    """

    cfg = common.start(args, COMMAND)
    fold = cfg.eval.rollout_fold
    split = common.read_split(cfg)
    if fold >= split.folds.num_folds:
        raise ConfigError(message=f"rollout_fold {fold} exceeds {split.folds.num_folds} folds")
    model_path = common.stage_path(cfg, common.TRAIN_DIR, f"fold{fold}.nta")
    scores_path = common.stage_path(cfg, common.TRAIN_DIR, f"fold{fold}_scores.json")
    common.require_files(model_path, scores_path)
    vit = cfg.model.vit_config()
    params = ModelParams.load(model_path, vit)
    scored = FoldScores.read(scores_path)
    cases = [
        subject_id for subject_id, label in zip(scored.subject_ids, scored.labels) if label == 1
    ]
    if cfg.eval.rollout_subjects:
        cases = cases[: cfg.eval.rollout_subjects]
    volumes = VolumeStore(common.read_manifest(cfg))
    if args.dry_run:
        return

    outputs = []
    subjects = []
    for subject_id in cases:
        probability, heatmap = explain(volumes(subject_id), params, vit)
        lesion = archive.load(volumes.path(subject_id)).get(LESION_TENSOR)
        written = export_heatmap(
            heatmap, common.stage_path(cfg, common.ROLLOUT_DIR, f"{subject_id}.nta")
        )
        outputs.extend(common.artifact(written_path, "heatmap") for written_path in written)
        subjects.append(localize(subject_id, probability, heatmap, lesion))
    summary = summarize_localization(fold, subjects)
    outputs.append(
        common.write_component(
            summary, common.stage_path(cfg, common.ROLLOUT_DIR, "summary.json"), "localization"
        )
    )
    if summary.localized_share is not None:
        info(f"Lesions localized in {summary.localized_share:.1%} of {len(subjects)} cases")
    common.finish(cfg, COMMAND, outputs)
