# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The volformer script, responsible for handling volformer CLI invocations.
Different CLI commands are handled as subparsers."""

import json
import sys
from argparse import ArgumentParser
from typing import List, Optional

from pydantic import ValidationError

from volformer.errors import ExitCode, VolformerError
from volformer.scripts.commands import (
    evaluate,
    import_weights,
    match,
    rollout,
    split,
    synth,
    train,
)
from volformer.util.console import error


def get_arg_parser() -> ArgumentParser:
    """Gets the argument parser for volformer. Sets up each command as a sub parser.

    Returns:
        ArgumentParser: The arg parser with all args set up.
    """

    parser = ArgumentParser(
        description="volformer adapts pretrained 2D vision transformers to 3D volumes",
        prog="volformer",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    synth.add_args(subparsers.add_parser("synth", help="Generate a synthetic dataset"))
    match.add_args(subparsers.add_parser("match", help="Match cases with controls"))
    split.add_args(
        subparsers.add_parser("split", help="Hold out a test group and assign six folds")
    )
    import_weights.add_args(
        subparsers.add_parser("import", help="Adapt a 2D checkpoint to the volume geometry")
    )
    train.add_args(subparsers.add_parser("train", help="Run six-fold cross-validation"))
    evaluate.add_args(subparsers.add_parser("eval", help="Summarize fold scores in a report"))
    rollout.add_args(
        subparsers.add_parser("rollout", help="Export attention rollout heatmaps")
    )

    return parser


def run(argv: Optional[List[str]] = None) -> ExitCode:
    """Parses arguments and executes the invoked command.

    Args:
        argv (Optional[List[str]], optional): The arguments, sys.argv[1:] when None.
            Defaults to None.

    Returns:
        ExitCode: The process exit code.
    """

    parser = get_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return ExitCode.SUCCESS if exit_request.code == 0 else ExitCode.USAGE
    try:
        args.func(args)
    except ValidationError as err:
        error(f"Invalid config: {err}")
        return ExitCode.USAGE
    except json.JSONDecodeError as err:
        error(f"Config is not valid JSON: {err}")
        return ExitCode.USAGE
    except VolformerError as err:
        error(f"{type(err).__name__}: {err.message}")
        return err.exit_code
    except OSError as err:
        error(f"Cannot access {err.filename or 'an input'}: {err.strerror or err}")
        return ExitCode.DATA
    return ExitCode.SUCCESS


def main() -> None:
    """Parse the arguments of a script run and execute the command invoked."""

    sys.exit(int(run()))


if __name__ == "__main__":
    main()
