# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The synth command generates a synthetic case-control dataset."""

from argparse import ArgumentParser, Namespace

from volformer.event.handler import EventHandler
from volformer.event.verbose import VerboseEvent
from volformer.scripts.commands import common
from volformer.synth.generator import generate_cohort

COMMAND = "synth"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to generate a dataset.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=synth_command_main)


def synth_command_main(args: Namespace) -> None:
    """Writes one archive per subject and the manifest under <out>/data.

    Args:
        args (Namespace): The arguments supplied to the command.
    """

    cfg = common.start(args, COMMAND)
    data_dir = common.stage_path(cfg, common.DATA_DIR)
    EventHandler.get().handle(
        VerboseEvent(
            {
                "message": f"Generating {cfg.data.n_pairs} pairs of "
                + f"{cfg.data.depth}x{cfg.data.height}x{cfg.data.width} volumes in {data_dir}"
            }
        )
    )
    if args.dry_run:
        return
    manifest = generate_cohort(cfg.data, cfg.seed, data_dir)
    outputs = [common.stage_path(cfg, common.DATA_DIR, "manifest.json")]
    outputs.extend(manifest.volume_path(subject) for subject in manifest.subjects)
    common.finish(cfg, COMMAND, outputs)
