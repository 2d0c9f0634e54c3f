# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Settings read from environment variables."""

import os

from volformer.event.handler import EventHandler
from volformer.event.warning import WarningEvent

THREADS_VARIABLE = "VOLFORMER_THREADS"


def get_thread_limit() -> int:
    """The number of worker threads folds may use, from VOLFORMER_THREADS. Unset means 1;
    values that are not positive integers fall back to 1 with a warning.

    Returns:
        int: The thread limit.
    """

    raw = os.getenv(THREADS_VARIABLE)
    if raw is None or raw.strip() == "":
        return 1
    try:
        threads = int(raw)
    except ValueError:
        threads = 0
    if threads < 1:
        EventHandler.get().handle(
            WarningEvent({"message": f"Ignoring {THREADS_VARIABLE}={raw!r}, using 1 thread"})
        )
        return 1
    return threads
