# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Arguments, config loading, run records and file layout shared by every command."""

from __future__ import annotations

import os
from argparse import ArgumentParser, Namespace
from typing import Any, Dict, List, Optional

import numpy as np

from volformer.checkpoint import archive
from volformer.checkpoint.pretrained import convert_state_names
from volformer.cohort.folds import CohortSplit
from volformer.cohort.subject import Manifest, PairSet
from volformer.config.config import RunConfig
from volformer.errors import ConfigError, DataError
from volformer.event.checkpoint import ArtifactEvent
from volformer.event.debug import DebugEvent
from volformer.event.handler import EventHandler
from volformer.event.logginglevel import LoggingLevel
from volformer.event.run import ScriptRunEvent
from volformer.model.tokenizer import PatchGeometry
from volformer.tensor.ops import Tensor
from volformer.util.component import ComponentModel
from volformer.util.package import get_versions

DATA_DIR = "data"
MATCH_DIR = "match"
SPLIT_DIR = "split"
IMPORT_DIR = "import"
TRAIN_DIR = "train"
EVAL_DIR = "eval"
ROLLOUT_DIR = "rollout"

PRETRAINED_FILE = "pretrained_2d.nta"
NPZ_SUFFIX = ".npz"


class RunRecord(ComponentModel):
    """What a command needs to be rerun: the full config, its hash, the seed and the
    library versions. Written as <out>/<command>.run.json.

    Attributes:
        command (str): The command name.
        config_hash (str): The sha256 of the canonical config JSON.
        seed (int): The seed.
        versions (Dict[str, str]): Library versions.
        config (Dict[str, Any]): The full config.
        outputs (List[str]): The files the command wrote, relative to out.
    """

    command: str
    config_hash: str
    seed: int
    versions: Dict[str, str]
    config: Dict[str, Any]
    outputs: List[str]


def add_args(parser: ArgumentParser) -> None:
    """Adds the arguments every command accepts.

    Args:
        parser (ArgumentParser): The command's parser.
    """

    parser.add_argument(
        "--config",
        metavar="config",
        type=str,
        required=True,
        help="The JSON RunConfig file.",
    )
    parser.add_argument(
        "--seed",
        metavar="seed",
        type=int,
        help="Overrides the config's seed.",
    )
    parser.add_argument(
        "--out",
        metavar="out",
        type=str,
        help="Overrides the config's output directory.",
    )
    parser.add_argument(
        "--dry-run",
        dest="dry_run",
        action="store_true",
        required=False,
        help="Validates the config and inputs without writing anything.",
    )

    logging_level = parser.add_mutually_exclusive_group()
    logging_level.add_argument(
        "-v",
        "--verbose",
        dest="verbose",
        action="store_true",
        required=False,
        help="Tells the script to output verbose logs.",
    )
    logging_level.add_argument(
        "-d",
        "--debug",
        dest="debug",
        action="store_true",
        required=False,
        help="Tells the script to output debug logs.",
    )


def start(args: Namespace, command: str) -> RunConfig:
    """Sets the logging level, loads the config with overrides and logs the run.

    Args:
        args (Namespace): The parsed arguments.
        command (str): The command name.

    Raises:
        ConfigError: If the config file does not exist.

    Returns:
        RunConfig: The config.
    """

    event_handler = EventHandler.get()
    if getattr(args, "verbose", False):
        event_handler.set_logging_level(LoggingLevel.VERBOSE)
    if getattr(args, "debug", False):
        event_handler.set_logging_level(LoggingLevel.DEBUG)
    if not os.path.isfile(args.config):
        raise ConfigError(message=f"Config file {args.config} does not exist")
    cfg = RunConfig.read(args.config).merge(seed=args.seed, out=args.out)
    event_handler.handle(
        ScriptRunEvent(
            {
                "script": command,
                "args": {
                    "config": args.config,
                    "seed": str(cfg.seed),
                    "out": cfg.paths.out,
                    "dry_run": str(args.dry_run),
                },
            }
        )
    )
    event_handler.handle(DebugEvent({"message": f"Config hash: {cfg.config_hash()}"}))
    return cfg


def stage_path(cfg: RunConfig, stage: str, *parts: str) -> str:
    """A path under a stage's output directory.

    Args:
        cfg (RunConfig): The config.
        stage (str): The stage directory name.
        *parts (str): Path components below it.

    Returns:
        str: The path.
    """

    return os.path.join(cfg.paths.out, stage, *parts)


def manifest_path(cfg: RunConfig) -> str:
    """The dataset manifest: paths.manifest, or the synthetic one under out.

    Args:
        cfg (RunConfig): The config.

    Returns:
        str: The path.
    """

    return cfg.paths.manifest or stage_path(cfg, DATA_DIR, "manifest.json")


def pretrained_path(cfg: RunConfig) -> str:
    """The 2D checkpoint: paths.pretrained, or the one import writes under out.

    Args:
        cfg (RunConfig): The config.

    Returns:
        str: The path.
    """

    return cfg.paths.pretrained or stage_path(cfg, IMPORT_DIR, PRETRAINED_FILE)


def require_files(*paths: str) -> None:
    """Checks that a command's inputs exist.

    Args:
        *paths (str): The input files.

    Raises:
        DataError: If a file is missing, naming it.
    """

    for path in paths:
        if not os.path.isfile(path):
            raise DataError(message=f"Required input {path} does not exist")


def require_volumes(manifest: Manifest) -> None:
    """Checks that every subject in a manifest has its volume on disk.

    Args:
        manifest (Manifest): The dataset.

    Raises:
        DataError: If a volume is missing, naming the subject.
    """

    for subject in manifest.subjects:
        path = manifest.volume_path(subject)
        if not os.path.isfile(path):
            raise DataError(message=f"Volume {path} of subject {subject.id} does not exist")


def read_manifest(cfg: RunConfig) -> Manifest:
    """Reads the dataset manifest.

    Args:
        cfg (RunConfig): The config.

    Returns:
        Manifest: The manifest.
    """

    path = manifest_path(cfg)
    require_files(path)
    return Manifest.read(path)


def read_pairs(cfg: RunConfig) -> PairSet:
    """Reads the matched pairs written by the match command.

    Args:
        cfg (RunConfig): The config.

    Returns:
        PairSet: The pairs.
    """

    path = stage_path(cfg, MATCH_DIR, "pairs.json")
    require_files(path)
    return PairSet.read(path)


def read_split(cfg: RunConfig) -> CohortSplit:
    """Reads the split written by the split command.

    Args:
        cfg (RunConfig): The config.

    Returns:
        CohortSplit: The split.
    """

    path = stage_path(cfg, SPLIT_DIR, "folds.json")
    require_files(path)
    return CohortSplit.read(path)


def read_checkpoint(cfg: RunConfig) -> Dict[str, Tensor]:
    """Reads the 2D checkpoint. An .npz file holds a DeiT state dictionary and is renamed to
    archive names, anything else is read as an archive.

    Args:
        cfg (RunConfig): The config.

    Returns:
        Dict[str, Tensor]: The checkpoint tensors.
    """

    path = pretrained_path(cfg)
    require_files(path)
    if path.endswith(NPZ_SUFFIX):
        with np.load(path) as state:
            return convert_state_names(dict(state), cfg.model.vit_config())
    return archive.load(path)


def volume_geometry(cfg: RunConfig) -> PatchGeometry:
    """The padded patch grid of the dataset's volumes.

    Args:
        cfg (RunConfig): The config.

    Returns:
        PatchGeometry: The geometry.
    """

    vit = cfg.model.vit_config()
    return PatchGeometry.for_shape(cfg.data.depth, cfg.data.height, cfg.data.width, vit.patch)


def artifact(path: str, kind: str) -> str:
    """Logs a written file.

    Args:
        path (str): The file.
        kind (str): What it holds.

    Returns:
        str: The unmodified path.
    """

    EventHandler.get().handle(ArtifactEvent({"path": path, "kind": kind}))
    return path


def write_component(component: ComponentModel, path: str, kind: str) -> str:
    """Writes a component as canonical JSON and logs it.

    Args:
        component (ComponentModel): The component.
        path (str): The file.
        kind (str): What it holds.

    Returns:
        str: The path.
    """

    component.write(path)
    return artifact(path, kind)


def write_text(text: str, path: str, kind: str) -> str:
    """Writes a text file and logs it.

    Args:
        text (str): The contents.
        path (str): The file.
        kind (str): What it holds.

    Returns:
        str: The path.
    """

    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="UTF-8") as out_file:
        out_file.write(text)
    return artifact(path, kind)


def finish(cfg: RunConfig, command: str, outputs: Optional[List[str]] = None) -> str:
    """Writes the command's run record.

    Args:
        cfg (RunConfig): The config.
        command (str): The command name.
        outputs (Optional[List[str]], optional): The files the command wrote.
            Defaults to None.

    Returns:
        str: The run record path.
    """

    record = RunRecord(
        command=command,
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        versions=get_versions(),
        config=cfg.full_bundle(),
        outputs=sorted(os.path.relpath(path, cfg.paths.out) for path in outputs or []),
    )
    return write_component(record, os.path.join(cfg.paths.out, f"{command}.run.json"), "run")
