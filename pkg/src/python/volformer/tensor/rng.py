# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""A seeded, platform-independent random stream: splitmix64 seeding into xoshiro256**.

Scalar draws (shuffles, choices, single normals) advance one xoshiro256** generator. Array
draws seed LANES independent xoshiro256** generators from the next LANES outputs of the
scalar stream (each expanded through splitmix64) and advance them together in numpy uint64
arithmetic, writing values step-major. Both paths are fully determined by the seed.
"""

from __future__ import annotations

import math
from typing import List, MutableSequence, Sequence, Tuple, TypeVar

import numpy as np
import numpy.typing as npt

from volformer.tensor.ops import DEFAULT_DTYPE, Tensor

MASK64 = (1 << 64) - 1
LANES = 256
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_53 = float(1 << 53)

T = TypeVar("T")


def splitmix64(state: int) -> Tuple[int, int]:
    """Advances a splitmix64 state.

    Args:
        state (int): The current state.

    Returns:
        Tuple[int, int]: The next state and the output value.
    """

    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def _rotl_lanes(x: npt.NDArray[np.uint64], k: int) -> npt.NDArray[np.uint64]:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class SeededRng:
    """A reproducible random stream.

    Attributes:
        seed (int): The 64-bit seed the stream was created from.
        _state (List[int]): The four xoshiro256** state words.
    """

    seed: int
    _state: List[int]

    def __init__(self, seed: int):
        """Seeds the stream.

        Args:
            seed (int): A non-negative seed, reduced modulo 2^64.
        """

        if seed < 0:
            raise ValueError(f"Seed must be non-negative, {seed} provided")
        self.seed = seed & MASK64
        self._state = []
        mix = self.seed
        for _ in range(4):
            mix, word = splitmix64(mix)
            self._state.append(word)

    def derive(self, stream: int) -> SeededRng:
        """Builds an independent stream for a numbered sub-task, such as a fold. Depends only
        on the seed and the stream number, never on how far this stream has advanced.

        Args:
            stream (int): The sub-task number.

        Returns:
            SeededRng: The derived stream.
        """

        _, mixed = splitmix64((self.seed ^ ((stream + 1) * _GOLDEN)) & MASK64)
        return SeededRng(mixed)

    def next_u64(self) -> int:
        """Draws the next 64-bit output.

        Returns:
            int: A value in [0, 2^64).
        """

        s0, s1, s2, s3 = self._state
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._state = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Draws a float in [0, 1) with 53 random bits.

        Returns:
            float: The draw.
        """

        return (self.next_u64() >> 11) / _TWO_POW_53

    def randbelow(self, bound: int) -> int:
        """Draws an integer uniformly from [0, bound) by rejection.

        Args:
            bound (int): The exclusive upper bound, at least 1.

        Returns:
            int: The draw.
        """

        if bound < 1:
            raise ValueError(f"Bound must be positive, {bound} provided")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def shuffle(self, items: MutableSequence[T]) -> None:
        """Shuffles a sequence in place with Fisher-Yates.

        Args:
            items (MutableSequence[T]): The sequence to shuffle.
        """

        for idx in range(len(items) - 1, 0, -1):
            swap = self.randbelow(idx + 1)
            items[idx], items[swap] = items[swap], items[idx]

    def choice(self, options: Sequence[T], weights: Sequence[float]) -> T:
        """Draws one option with the given relative weights.

        Args:
            options (Sequence[T]): The options.
            weights (Sequence[float]): Non-negative weights, one per option.

        Returns:
            T: The chosen option.
        """

        target = self.uniform() * sum(weights)
        running = 0.0
        for option, weight in zip(options, weights):
            running += weight
            if target < running:
                return option
        return options[-1]

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        """Draws a normal value with Box-Muller, consuming two uniforms.

        Args:
            mean (float, optional): The mean. Defaults to 0.0.
            std (float, optional): The standard deviation. Defaults to 1.0.

        Returns:
            float: The draw.
        """

        radius = math.sqrt(-2.0 * math.log(1.0 - self.uniform()))
        return mean + std * radius * math.cos(2.0 * math.pi * self.uniform())

    def _lane_u64(self, count: int) -> npt.NDArray[np.uint64]:
        """Draws count 64-bit values from LANES generators advanced together."""

        seeds = [self.next_u64() for _ in range(LANES)]
        words = np.empty((4, LANES), dtype=np.uint64)
        for lane, seed in enumerate(seeds):
            mix = seed
            for word in range(4):
                mix, value = splitmix64(mix)
                words[word, lane] = value
        s0, s1, s2, s3 = words
        steps = -(-count // LANES)
        out = np.empty((steps, LANES), dtype=np.uint64)
        with np.errstate(over="ignore"):
            for step in range(steps):
                out[step] = _rotl_lanes(s1 * np.uint64(5), 7) * np.uint64(9)
                t = s1 << np.uint64(17)
                s2 = s2 ^ s0
                s3 = s3 ^ s1
                s1 = s1 ^ s2
                s0 = s0 ^ s3
                s2 = s2 ^ t
                s3 = _rotl_lanes(s3, 45)
        return out.reshape(-1)[:count]

    def uniform_array(self, shape: Sequence[int]) -> npt.NDArray[np.float64]:
        """Draws an array of floats in [0, 1).

        Args:
            shape (Sequence[int]): The shape of the array.

        Returns:
            NDArray: The draws, float64.
        """

        count = int(np.prod(shape, dtype=np.int64))
        bits = self._lane_u64(count) >> np.uint64(11)
        return (bits.astype(np.float64) / _TWO_POW_53).reshape(tuple(shape))

    def normal_array(
        self, shape: Sequence[int], std: float = 1.0, dtype: npt.DTypeLike = DEFAULT_DTYPE
    ) -> Tensor:
        """Draws an array of zero-mean normal values with Box-Muller.

        Args:
            shape (Sequence[int]): The shape of the array.
            std (float, optional): The standard deviation. Defaults to 1.0.
            dtype (npt.DTypeLike, optional): The output dtype. Defaults to float32.

        Returns:
            Tensor: The draws.
        """

        count = int(np.prod(shape, dtype=np.int64))
        uniforms = self.uniform_array((2, count))
        radius = np.sqrt(-2.0 * np.log1p(-uniforms[0]))
        values = std * radius * np.cos(2.0 * np.pi * uniforms[1])
        return values.reshape(tuple(shape)).astype(dtype)

    def truncated_normal_array(
        self,
        shape: Sequence[int],
        std: float = 0.02,
        bound: float = 2.0,
        dtype: npt.DTypeLike = DEFAULT_DTYPE,
    ) -> Tensor:
        """Draws normal values truncated to [-bound * std, bound * std] by redrawing the
        values that fall outside.

        Args:
            shape (Sequence[int]): The shape of the array.
            std (float, optional): The standard deviation. Defaults to 0.02.
            bound (float, optional): The truncation bound in standard deviations.
                Defaults to 2.0.
            dtype (npt.DTypeLike, optional): The output dtype. Defaults to float32.

        Returns:
            Tensor: The draws.
        """

        values = self.normal_array(shape, std=1.0, dtype=np.float64).reshape(-1)
        outside = np.flatnonzero(np.abs(values) > bound)
        while outside.size:
            values[outside] = self.normal_array((outside.size,), std=1.0, dtype=np.float64)
            outside = outside[np.abs(values[outside]) > bound]
        return (std * values).reshape(tuple(shape)).astype(dtype)
