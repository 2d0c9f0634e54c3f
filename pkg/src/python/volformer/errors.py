# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The errors raised by volformer. Every error carries the exit code the CLI reports for it."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Optional, Sequence, Tuple


class ExitCode(int, Enum):
    """Process exit codes of the volformer CLI."""

    SUCCESS = 0
    USAGE = 1
    DATA = 2
    NUMERIC = 3


@dataclass(kw_only=True, eq=False)
class VolformerError(Exception):
    """The base for all volformer errors.

    Attributes:
        message (str): A message describing the failure.
        exit_code (ClassVar[ExitCode]): The CLI exit code for this kind of failure.
    """

    message: str

    exit_code: ClassVar[ExitCode] = ExitCode.DATA

    def __str__(self) -> str:
        return self.message


@dataclass(kw_only=True, eq=False)
class ConfigError(VolformerError):
    """Raised when a RunConfig or command line is invalid."""

    exit_code: ClassVar[ExitCode] = ExitCode.USAGE


@dataclass(kw_only=True, eq=False)
class ShapeError(VolformerError):
    """Raised when tensor shapes do not agree.

    Attributes:
        shapes (Tuple[Tuple[int, ...], ...]): The shapes involved in the failure.
    """

    shapes: Tuple[Tuple[int, ...], ...] = field(default_factory=tuple)

    @staticmethod
    def mismatch(what: str, *shapes: Sequence[int]) -> ShapeError:
        """Builds a ShapeError that names every shape involved.

        Args:
            what (str): The operation or tensor that failed.
            *shapes (Sequence[int]): The shapes involved.

        Returns:
            ShapeError: The error.
        """

        shape_tuples = tuple(tuple(int(dim) for dim in shape) for shape in shapes)
        listed = " vs ".join(str(list(shape)) for shape in shape_tuples)
        return ShapeError(message=f"{what}: shape mismatch {listed}", shapes=shape_tuples)


class ArchiveErrorCode(str, Enum):
    """The distinct failure classes of archive reading and writing."""

    FORMAT = "format"
    TRUNCATED = "truncated"
    OVERLAP = "overlap"
    DTYPE = "dtype"
    CONSISTENCY = "consistency"
    DUPLICATE = "duplicate"
    EMPTY = "empty"
    MISSING = "missing"


@dataclass(kw_only=True, eq=False)
class ArchiveError(VolformerError):
    """Raised for malformed or incomplete named-tensor archives.

    Attributes:
        code (ArchiveErrorCode): The failure class.
        tensor (Optional[str], optional): The tensor involved, if any. Defaults to None.
    """

    code: ArchiveErrorCode
    tensor: Optional[str] = None


@dataclass(kw_only=True, eq=False)
class NumericError(VolformerError):
    """Raised when a computation produces non-finite values.

    Attributes:
        where (str): The location of the failure, such as a block index or tensor name.
    """

    where: str

    exit_code: ClassVar[ExitCode] = ExitCode.NUMERIC


@dataclass(kw_only=True, eq=False)
class DataError(VolformerError):
    """Raised for invalid cohorts, folds or score files."""
