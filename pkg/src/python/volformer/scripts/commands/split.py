# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The split command holds out the test group and assigns the rest to six folds."""

from argparse import ArgumentParser, Namespace

from volformer.cohort.folds import split_cohort
from volformer.scripts.commands import common

COMMAND = "split"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to split a cohort.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=split_command_main)


def split_command_main(args: Namespace) -> None:
    """Writes <out>/split/folds.json.

    Args:
        args (Namespace): The arguments supplied to the command.
    """

    cfg = common.start(args, COMMAND)
    pairs = common.read_pairs(cfg).pairs
    split = split_cohort(pairs, cfg.data.test_pairs, cfg.seed)
    if args.dry_run:
        return
    path = common.write_component(
        split, common.stage_path(cfg, common.SPLIT_DIR, "folds.json"), "folds"
    )
    common.finish(cfg, COMMAND, [path])
