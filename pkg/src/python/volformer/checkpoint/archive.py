# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Reading and writing named-tensor archives (NTA). An archive is the 4 byte magic
b"NTA1", a little-endian u64 giving the header length, a UTF-8 JSON header and the
payload. The header maps each tensor name to its dtype, shape, byte offset within the
payload and byte count. Payload values are little-endian float32."""

from __future__ import annotations

import json
import math
import os
import struct
from typing import Any, Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np

from volformer.errors import ArchiveError, ArchiveErrorCode, DataError
from volformer.tensor.ops import Tensor

MAGIC = b"NTA1"
DTYPE = "f32"
_PREFIX = struct.Struct("<4sQ")
_WIRE = np.dtype("<f4")

Tensors = Dict[str, Tensor]
TensorSource = Union[Mapping[str, Any], Iterable[Tuple[str, Any]]]


def _items(tensors: TensorSource) -> List[Tuple[str, Any]]:
    if isinstance(tensors, Mapping):
        return list(tensors.items())
    return list(tensors)


def write_archive(tensors: TensorSource) -> bytes:
    """Encodes tensors as an archive. Tensors are stored in name order.

    Args:
        tensors (TensorSource): A mapping or sequence of (name, tensor) pairs.

    Raises:
        ArchiveError: If the set is empty, a name repeats, a tensor is not floating point,
            has no elements or holds values that are not finite once stored as float32.

    Returns:
        bytes: The archive.
    """

    items = _items(tensors)
    if not items:
        raise ArchiveError(message="Cannot write an empty archive", code=ArchiveErrorCode.EMPTY)
    seen: Dict[str, np.ndarray] = {}
    for name, value in items:
        if name in seen:
            raise ArchiveError(
                message=f"Tensor {name} appears more than once",
                code=ArchiveErrorCode.DUPLICATE,
                tensor=name,
            )
        array = np.asarray(value)
        if not np.issubdtype(array.dtype, np.floating):
            raise ArchiveError(
                message=f"Tensor {name} has dtype {array.dtype}, only floats are stored",
                code=ArchiveErrorCode.DTYPE,
                tensor=name,
            )
        if array.ndim < 1 or array.size == 0:
            raise ArchiveError(
                message=f"Tensor {name} of shape {list(array.shape)} has no elements",
                code=ArchiveErrorCode.EMPTY,
                tensor=name,
            )
        with np.errstate(over="ignore"):
            array = np.ascontiguousarray(array, dtype=_WIRE)
        if not np.isfinite(array).all():
            raise ArchiveError(
                message=f"Tensor {name} holds values that are not finite as float32",
                code=ArchiveErrorCode.CONSISTENCY,
                tensor=name,
            )
        seen[name] = array

    header: Dict[str, Any] = {}
    chunks: List[bytes] = []
    offset = 0
    for name in sorted(seen):
        array = seen[name]
        data = array.tobytes()
        header[name] = {
            "dtype": DTYPE,
            "shape": [int(dim) for dim in array.shape],
            "offset": offset,
            "nbytes": len(data),
        }
        chunks.append(data)
        offset += len(data)
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _PREFIX.pack(MAGIC, len(header_bytes)) + header_bytes + b"".join(chunks)


def _unique_keys(pairs: List[Tuple[str, Any]]) -> Dict[str, Any]:
    seen: Dict[str, Any] = {}
    for name, value in pairs:
        if name in seen:
            raise ArchiveError(
                message=f"Header names {name} more than once",
                code=ArchiveErrorCode.DUPLICATE,
                tensor=name,
            )
        seen[name] = value
    return seen


def _parse_header(data: bytes) -> Tuple[Dict[str, Any], int]:
    if len(data) < _PREFIX.size:
        raise ArchiveError(
            message=f"Archive of {len(data)} bytes is too short for a header",
            code=ArchiveErrorCode.TRUNCATED,
        )
    magic, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise ArchiveError(message=f"Bad archive magic {magic!r}", code=ArchiveErrorCode.FORMAT)
    payload_start = _PREFIX.size + header_len
    if payload_start > len(data):
        raise ArchiveError(
            message=f"Header of {header_len} bytes runs past the end of the archive",
            code=ArchiveErrorCode.TRUNCATED,
        )
    try:
        header = json.loads(
            data[_PREFIX.size : payload_start].decode("utf-8"), object_pairs_hook=_unique_keys
        )
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise ArchiveError(
            message=f"Archive header is not valid JSON: {err}", code=ArchiveErrorCode.FORMAT
        ) from err
    if not isinstance(header, dict):
        raise ArchiveError(message="Archive header is not an object", code=ArchiveErrorCode.FORMAT)
    return header, payload_start


def _entry_range(name: str, entry: Any) -> Tuple[Tuple[int, ...], int, int]:
    if not isinstance(entry, dict) or set(entry) != {"dtype", "shape", "offset", "nbytes"}:
        raise ArchiveError(
            message=f"Header entry for {name} is malformed",
            code=ArchiveErrorCode.FORMAT,
            tensor=name,
        )
    if entry["dtype"] != DTYPE:
        raise ArchiveError(
            message=f"Tensor {name} has unsupported dtype {entry['dtype']}",
            code=ArchiveErrorCode.DTYPE,
            tensor=name,
        )
    shape, offset, nbytes = entry["shape"], entry["offset"], entry["nbytes"]
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(dim, int) and dim >= 0 for dim in shape)
        or not all(isinstance(value, int) and value >= 0 for value in (offset, nbytes))
    ):
        raise ArchiveError(
            message=f"Tensor {name} has an invalid shape or offsets",
            code=ArchiveErrorCode.FORMAT,
            tensor=name,
        )
    if nbytes != _WIRE.itemsize * math.prod(shape):
        raise ArchiveError(
            message=f"Tensor {name} covers {nbytes} bytes, shape {shape} needs "
            + f"{_WIRE.itemsize * math.prod(shape)}",
            code=ArchiveErrorCode.CONSISTENCY,
            tensor=name,
        )
    return tuple(shape), offset, offset + nbytes


def read_archive(data: bytes) -> Tensors:
    """Decodes an archive.

    Args:
        data (bytes): The archive bytes.

    Raises:
        ArchiveError: For a bad magic, a truncated header or payload, overlapping byte
            ranges, a size that disagrees with a shape, an unsupported dtype, or payload
            bytes that no tensor covers.

    Returns:
        Tensors: The float32 tensors by name.
    """

    header, payload_start = _parse_header(data)
    payload_len = len(data) - payload_start
    ranges: List[Tuple[int, int, str, Tuple[int, ...]]] = []
    for name, entry in header.items():
        shape, start, end = _entry_range(name, entry)
        if end > payload_len:
            raise ArchiveError(
                message=f"Tensor {name} ends at byte {end} of a {payload_len} byte payload",
                code=ArchiveErrorCode.TRUNCATED,
                tensor=name,
            )
        ranges.append((start, end, name, shape))

    ranges.sort()
    covered = 0
    for index, (start, end, name, _) in enumerate(ranges):
        if index and start < ranges[index - 1][1]:
            raise ArchiveError(
                message=f"Tensors {ranges[index - 1][2]} and {name} overlap",
                code=ArchiveErrorCode.OVERLAP,
                tensor=name,
            )
        covered += end - start
    if covered != payload_len:
        raise ArchiveError(
            message=f"Payload has {payload_len} bytes but tensors cover {covered}",
            code=ArchiveErrorCode.CONSISTENCY,
        )

    payload = memoryview(data)[payload_start:]
    tensors: Tensors = {}
    for start, end, name, shape in ranges:
        values = np.frombuffer(payload[start:end], dtype=_WIRE).reshape(shape)
        tensors[name] = values.astype(np.float32)
    return dict(sorted(tensors.items()))


def save(path: str, tensors: TensorSource) -> None:
    """Writes tensors to an archive file, creating parent directories.

    Args:
        path (str): The file path.
        tensors (TensorSource): The tensors.
    """

    data = write_archive(tensors)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "wb") as archive_file:
        archive_file.write(data)


def load(path: str) -> Tensors:
    """Reads an archive file.

    Args:
        path (str): The file path.

    Raises:
        DataError: If the file cannot be read.
        ArchiveError: If the file is not a valid archive.

    Returns:
        Tensors: The tensors by name.
    """

    try:
        with open(path, "rb") as archive_file:
            data = archive_file.read()
    except OSError as err:
        raise DataError(message=f"Cannot read archive {path}: {err.strerror or err}") from err
    return read_archive(data)
