# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The match command selects the cohort and pairs cases with controls."""

from argparse import ArgumentParser, Namespace

from volformer.cohort.matching import select_cohort
from volformer.cohort.subject import PairSet
from volformer.scripts.commands import common
from volformer.stats.demographics import demographics_table
from volformer.util.console import info

COMMAND = "match"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to match a cohort.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=match_command_main)


def match_command_main(args: Namespace) -> None:
    """Writes pairs.json, the selection counts and the demographics table under
    <out>/match.

    Args:
        args (Namespace): The arguments supplied to the command.
    """

    cfg = common.start(args, COMMAND)
    manifest = common.read_manifest(cfg)
    pairs, flow = select_cohort(manifest.subjects, cfg.data.age_caliper, cfg.data.bmi_caliper)
    manifest.check_pairs(pairs)
    table = demographics_table(manifest.subjects, pairs)
    if args.dry_run:
        return
    outputs = [
        common.write_component(
            PairSet(pairs=pairs), common.stage_path(cfg, common.MATCH_DIR, "pairs.json"), "pairs"
        ),
        common.write_component(
            flow, common.stage_path(cfg, common.MATCH_DIR, "flowchart.json"), "flowchart"
        ),
        common.write_component(
            table, common.stage_path(cfg, common.MATCH_DIR, "demographics.json"), "demographics"
        ),
        common.write_text(
            table.to_text(),
            common.stage_path(cfg, common.MATCH_DIR, "demographics.txt"),
            "demographics",
        ),
    ]
    info(f"Matched {flow.pairs} pairs, {flow.unmatched} subjects unmatched")
    common.finish(cfg, COMMAND, outputs)
