# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The train command runs six-fold cross-validation and stores every fold's model and
scores."""

from argparse import ArgumentParser, Namespace

from volformer.cohort.trainer import HeldOutScores, cross_validate, score_test_group
from volformer.config.environment import get_thread_limit
from volformer.event.handler import EventHandler
from volformer.event.verbose import VerboseEvent
from volformer.scripts.commands import common
from volformer.util.cachedfile import VolumeStore

COMMAND = "train"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to train.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=train_command_main)


def train_command_main(args: Namespace) -> None:
    """Writes fold<f>.nta and fold<f>_scores.json for every fold under <out>/train, plus
    test_scores.json when a test group is held out.

    Args:
        args (Namespace): The arguments supplied to the command.
    """

    cfg = common.start(args, COMMAND)
    train_cfg = cfg.train_config()
    vit = cfg.model.vit_config()
    split = common.read_split(cfg)
    manifest = common.read_manifest(cfg)
    manifest.check_pairs(split.training + split.testing)
    common.require_files(common.pretrained_path(cfg))
    common.require_volumes(manifest)
    threads = get_thread_limit()
    EventHandler.get().handle(
        VerboseEvent(
            {
                "message": f"Training {split.folds.num_folds} folds over "
                + f"{len(split.training)} pairs on {threads} thread(s)"
            }
        )
    )
    if args.dry_run:
        return

    results = cross_validate(
        common.read_checkpoint(cfg),
        split.training,
        train_cfg,
        vit,
        common.volume_geometry(cfg),
        VolumeStore(manifest),
        split=split.folds,
        test_pairs=split.testing,
        threads=threads,
    )
    outputs = []
    for result in results:
        model_path = common.stage_path(cfg, common.TRAIN_DIR, f"fold{result.fold}.nta")
        result.params.save(model_path)
        outputs.append(common.artifact(model_path, "model"))
        outputs.append(
            common.write_component(
                result.scores_record(),
                common.stage_path(cfg, common.TRAIN_DIR, f"fold{result.fold}_scores.json"),
                "scores",
            )
        )
    if split.testing:
        outputs.append(
            common.write_component(
                HeldOutScores(scores=score_test_group(results)),
                common.stage_path(cfg, common.TRAIN_DIR, "test_scores.json"),
                "scores",
            )
        )
    common.finish(cfg, COMMAND, outputs)
