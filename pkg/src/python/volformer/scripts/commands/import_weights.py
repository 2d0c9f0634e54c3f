# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The import command adapts a 2D checkpoint to the dataset's volume geometry. Without
paths.pretrained it first generates a synthetic 2D checkpoint."""

from argparse import ArgumentParser, Namespace

from volformer.checkpoint import archive
from volformer.checkpoint.importer import IMPORT_STREAM, import_2d_vit
from volformer.checkpoint.pretrained import pretrained_tensors
from volformer.errors import ConfigError
from volformer.scripts.commands import common
from volformer.tensor.rng import SeededRng

COMMAND = "import"


def add_args(parser: ArgumentParser) -> None:
    """Adds the args to a subparser that are required to import a checkpoint.

    Args:
        parser (ArgumentParser): The parser for the command.
    """

    common.add_args(parser)
    parser.set_defaults(func=import_command_main)


def import_command_main(args: Namespace) -> None:
    """Writes the 2D checkpoint (when synthetic), the imported model and the import report
    under <out>/import. The imported model is the initialization of fold 0.

    Args:
        args (Namespace): The arguments supplied to the command.

    Raises:
        ConfigError: If no checkpoint is configured and synthetic checkpoints are disabled.
    """

    cfg = common.start(args, COMMAND)
    vit = cfg.model.vit_config()
    outputs = []
    if cfg.paths.pretrained is not None:
        checkpoint = common.read_checkpoint(cfg)
    elif cfg.model.synthetic_pretrained:
        grid = (cfg.model.pretrain_grid, cfg.model.pretrain_grid)
        checkpoint = pretrained_tensors(vit, grid, cfg.seed)
        if not args.dry_run:
            path = common.pretrained_path(cfg)
            archive.save(path, checkpoint)
            outputs.append(common.artifact(path, "checkpoint"))
    else:
        raise ConfigError(
            message="No pretrained checkpoint: set paths.pretrained or model.synthetic_pretrained"
        )

    params, report = import_2d_vit(
        checkpoint, common.volume_geometry(cfg), vit, SeededRng(cfg.seed).derive(IMPORT_STREAM)
    )
    if args.dry_run:
        return
    model_path = common.stage_path(cfg, common.IMPORT_DIR, "model_init.nta")
    params.save(model_path)
    outputs.append(common.artifact(model_path, "model"))
    outputs.append(
        common.write_component(
            report, common.stage_path(cfg, common.IMPORT_DIR, "import_report.json"), "report"
        )
    )
    common.finish(cfg, COMMAND, outputs)
