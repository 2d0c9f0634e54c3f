# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Events emitted when importing checkpoints and writing artifacts."""

from typing import List, Tuple, TypedDict

from volformer.event.base import Event
from volformer.event.logginglevel import LoggingLevel
from volformer.event.type import EventType


class ImportEventData(TypedDict):
    """The data for an ImportEvent."""

    source_grid: Tuple[int, int]
    target_geometry: Tuple[int, int, int]
    copied: int
    resized: List[str]


class ImportEvent(Event[ImportEventData]):
    """Triggered when a 2D checkpoint is adapted to a volume geometry."""

    @staticmethod
    def get_type() -> EventType:
        """Used to represent the type of Event, output to logs.

        Returns:
            EventType: The unique type associated with this Event.
        """

        return EventType.IMPORT

    @staticmethod
    def get_logging_level() -> LoggingLevel:
        """The logging level for events of this type.

        Returns:
            LoggingLevel: The logging detail required to log this event.
        """

        return LoggingLevel.VERBOSE

    def _get_message(self) -> str:
        grid_h, grid_w = self.data["source_grid"]
        depth, target_h, target_w = self.data["target_geometry"]
        resized = ", ".join(self.data["resized"]) or "nothing"
        return (
            f"Imported {self.data['copied']} tensors from a {grid_h}x{grid_w} grid to "
            + f"{depth}x{target_h}x{target_w}, resized {resized}"
        )


class ArtifactEventData(TypedDict):
    """The data for an ArtifactEvent."""

    path: str
    kind: str


class ArtifactEvent(Event[ArtifactEventData]):
    """Triggered whenever a command writes an output file."""

    @staticmethod
    def get_type() -> EventType:
        """Used to represent the type of Event, output to logs.

        Returns:
            EventType: The unique type associated with this Event.
        """

        return EventType.ARTIFACT

    @staticmethod
    def get_logging_level() -> LoggingLevel:
        """The logging level for events of this type.

        Returns:
            LoggingLevel: The logging detail required to log this event.
        """

        return LoggingLevel.DEBUG

    def _get_message(self) -> str:
        return f"Wrote {self.data['kind']} {self.data['path']}"
