# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Events emitted while training folds."""

from typing import TypedDict

from typing_extensions import NotRequired

from volformer.event.base import Event
from volformer.event.logginglevel import LoggingLevel
from volformer.event.type import EventType


class EpochEventData(TypedDict):
    """The data for an EpochEvent."""

    fold: int
    epoch: int
    mean_loss: float


class EpochEvent(Event[EpochEventData]):
    """Triggered after every training epoch of a fold."""

    @staticmethod
    def get_type() -> EventType:
        """Used to represent the type of Event, output to logs.

        Returns:
            EventType: The unique type associated with this Event.
        """

        return EventType.EPOCH

    @staticmethod
    def get_logging_level() -> LoggingLevel:
        """The logging level for events of this type.

        Returns:
            LoggingLevel: The logging detail required to log this event.
        """

        return LoggingLevel.VERBOSE

    def _get_message(self) -> str:
        return (
            f"[fold {self.data['fold']}] epoch {self.data['epoch']} "
            + f"mean loss {self.data['mean_loss']:.6f}"
        )


class FoldEventData(TypedDict):
    """The data for a FoldEvent. The AUC is absent when the validation fold holds a single
    class."""

    fold: int
    validation_size: int
    auc: NotRequired[float]


class FoldEvent(Event[FoldEventData]):
    """Triggered when a fold finishes training and has scored its validation subjects."""

    @staticmethod
    def get_type() -> EventType:
        """Used to represent the type of Event, output to logs.

        Returns:
            EventType: The unique type associated with this Event.
        """

        return EventType.FOLD

    @staticmethod
    def get_logging_level() -> LoggingLevel:
        """The logging level for events of this type.

        Returns:
            LoggingLevel: The logging detail required to log this event.
        """

        return LoggingLevel.INFO

    def _get_message(self) -> str:
        auc = self.data.get("auc")
        auc_text = "n/a" if auc is None else f"{auc:.4f}"
        return (
            f"[fold {self.data['fold']}] scored {self.data['validation_size']} "
            + f"validation subjects, AUC {auc_text}"
        )
