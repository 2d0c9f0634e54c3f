# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""VolumeStore caches decoded volumes so that every fold and epoch reads each archive only
once. The VOLUME_CACHE variable stores decoded volumes by path, stamped with the file's
modification time and size so that a rewritten archive is read again; a VolumeStore resolves
subject ids to paths through a manifest and goes through the cache."""

from __future__ import annotations

import os
import threading
from typing import Dict, Tuple

from volformer.cohort.subject import Manifest
from volformer.errors import DataError
from volformer.model.tokenizer import Volume

FileStamp = Tuple[int, int]

VOLUME_CACHE: Dict[str, Tuple[FileStamp, Volume]] = {}
_CACHE_LOCK = threading.Lock()


class VolumeStore:
    """A read-only view of a manifest's volumes. Safe to share between fold threads.

    Attributes:
        manifest (Manifest): The dataset manifest.
    """

    manifest: Manifest

    def __init__(self, manifest: Manifest):
        """A simple constructor.

        Args:
            manifest (Manifest): The dataset manifest.
        """

        self.manifest = manifest
        self._subjects = manifest.by_id()

    @staticmethod
    def _stamp(path: str) -> FileStamp:
        """The modification time and size of a volume file.

        Args:
            path (str): The archive path.

        Raises:
            DataError: If the file cannot be examined.

        Returns:
            FileStamp: The modification time in nanoseconds and the size in bytes.
        """

        try:
            status = os.stat(path)
        except OSError as err:
            raise DataError(message=f"Cannot read volume {path}: {err.strerror or err}") from err
        return status.st_mtime_ns, status.st_size

    @staticmethod
    def _read(path: str) -> Volume:
        """Reads a volume from disk without touching the cache. Used as a hook for testing.

        Args:
            path (str): The archive path.

        Returns:
            Volume: The volume.
        """

        return Volume.load(path)

    def path(self, subject_id: str) -> str:
        """The resolved volume path of a subject.

        Args:
            subject_id (str): The subject id.

        Raises:
            DataError: If the subject is not in the manifest.

        Returns:
            str: The path.
        """

        if subject_id not in self._subjects:
            raise DataError(message=f"Subject {subject_id} is not in the manifest")
        return self.manifest.volume_path(self._subjects[subject_id])

    def __call__(self, subject_id: str) -> Volume:
        """Gets a subject's volume, reading and caching it on first use and again whenever
        the file has changed since it was cached.

        Args:
            subject_id (str): The subject id.

        Returns:
            Volume: The volume.
        """

        path = self.path(subject_id)
        stamp = self._stamp(path)
        with _CACHE_LOCK:
            cached = VOLUME_CACHE.get(path)
        if cached is not None and cached[0] == stamp:
            return cached[1]
        volume = self._read(path)
        with _CACHE_LOCK:
            VOLUME_CACHE[path] = (stamp, volume)
        return volume


def clear_cache() -> None:
    """Forgets every cached volume."""

    with _CACHE_LOCK:
        VOLUME_CACHE.clear()
