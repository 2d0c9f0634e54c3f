# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Generates synthetic case-control cohorts. Every subject's volume is a smooth background
plus Gaussian noise; case volumes also carry an ellipsoidal lesion of raised intensity
near the centre of the joint region. Controls copy their case's sex and ethnicity and
stay close in age and BMI, so matching pairs them up."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from pydantic import field_validator

from volformer.cohort.subject import Contrast, Label, Manifest, Sex, Subject
from volformer.event.checkpoint import ArtifactEvent
from volformer.event.handler import EventHandler
from volformer.model.tokenizer import Volume
from volformer.tensor.ops import Tensor
from volformer.tensor.rng import SeededRng
from volformer.util.component import ComponentModel

LESION_TENSOR = "lesion"
VOLUME_DIR = "volumes"

ETHNICITIES = ("asian", "black", "other", "white")
ETHNICITY_WEIGHTS = (0.05, 0.2, 0.05, 0.7)

BACKGROUND_LEVEL = 0.35
BACKGROUND_RIPPLE = 0.05
BACKGROUND_JITTER = 0.01

DEMOGRAPHICS_STREAM = 0
VOLUME_STREAM = 1


class SynthConfig(ComponentModel):
    """The shape and signal strength of a synthetic cohort.

    Attributes:
        n_pairs (int, optional): The number of case-control pairs. Defaults to 200.
        depth (int, optional): Slices per volume. Defaults to 8.
        height (int, optional): Slice height. Defaults to 64.
        width (int, optional): Slice width. Defaults to 64.
        lesion_delta (float, optional): The intensity added inside lesions. Defaults to 0.4.
        noise_sd (float, optional): The standard deviation of voxel noise. Defaults to 0.1.
        lesion_radius (float, optional): Lesion semi-axes as a fraction of each volume
            dimension. Defaults to 0.125.
    """

    n_pairs: int = 200
    depth: int = 8
    height: int = 64
    width: int = 64
    lesion_delta: float = 0.4
    noise_sd: float = 0.1
    lesion_radius: float = 0.125

    # pylint: disable=invalid-name
    @field_validator("n_pairs", "depth", "height", "width")
    @classmethod
    def is_positive(cls, v: int) -> int:
        """Validates that counts and sizes are positive.

        Args:
            v (int): The value.

        Raises:
            ValueError: Raised if the value is not positive.

        Returns:
            int: The unmodified value.
        """

        if v < 1:
            raise ValueError(f"Sizes and counts must be positive, {v} provided")
        return v

    @field_validator("lesion_delta", "noise_sd")
    @classmethod
    def is_non_negative(cls, v: float) -> float:
        """Validates that intensities are not negative.

        Args:
            v (float): The value.

        Raises:
            ValueError: Raised if the value is negative.

        Returns:
            float: The unmodified value.
        """

        if v < 0:
            raise ValueError(f"Intensities must not be negative, {v} provided")
        return v

    @field_validator("lesion_radius")
    @classmethod
    def is_fraction(cls, v: float) -> float:
        """Validates that the lesion fits in the volume.

        Args:
            v (float): The radius fraction.

        Raises:
            ValueError: Raised if the fraction is outside (0, 0.5].

        Returns:
            float: The unmodified fraction.
        """

        if not 0 < v <= 0.5:
            raise ValueError(f"Lesion radius must lie in (0, 0.5], {v} provided")
        return v

    @property
    def shape(self) -> Tuple[int, int, int]:
        """The (D, H, W) of every volume."""

        return (self.depth, self.height, self.width)


@dataclass(frozen=True)
class SyntheticVolume:
    """A generated volume with its lesion mask.

    Attributes:
        volume (Volume): The volume.
        lesion (Tensor): A [D, H, W] mask, 1 inside the lesion.
    """

    volume: Volume
    lesion: Tensor


def joint_core(cfg: SynthConfig) -> Tuple[slice, slice, slice]:
    """The central box, half of every dimension, that contains every lesion centre.

    Args:
        cfg (SynthConfig): The cohort settings.

    Returns:
        Tuple[slice, slice, slice]: The box as slices along D, H and W.
    """

    return tuple(slice(size // 4, size - size // 4) for size in cfg.shape)  # type: ignore


def _background(cfg: SynthConfig, rng: SeededRng) -> Tensor:
    depth, height, width = cfg.shape
    rows = np.sin(np.pi * (np.arange(height) + 0.5) / height)
    cols = np.sin(np.pi * (np.arange(width) + 0.5) / width)
    plane = BACKGROUND_LEVEL + BACKGROUND_RIPPLE * np.outer(rows, cols)
    offset = BACKGROUND_JITTER * (2.0 * rng.uniform() - 1.0)
    return np.broadcast_to(plane + offset, (depth, height, width)).astype(np.float64)


def lesion_mask(cfg: SynthConfig, rng: SeededRng) -> Tensor:
    """Draws an ellipsoidal lesion whose centre lies in the joint core.

    Args:
        cfg (SynthConfig): The cohort settings.
        rng (SeededRng): The stream the centre is drawn from.

    Returns:
        Tensor: A [D, H, W] float32 mask.
    """

    axes = [np.arange(size) + 0.5 for size in cfg.shape]
    centre = [
        size / 2.0 + (size / 8.0) * (2.0 * rng.uniform() - 1.0) for size in cfg.shape
    ]
    radii = [max(cfg.lesion_radius * size, 0.75) for size in cfg.shape]
    grid_d, grid_h, grid_w = np.meshgrid(*axes, indexing="ij")
    distance = (
        ((grid_d - centre[0]) / radii[0]) ** 2
        + ((grid_h - centre[1]) / radii[1]) ** 2
        + ((grid_w - centre[2]) / radii[2]) ** 2
    )
    return (distance <= 1.0).astype(np.float32)


def synthesize_volume(cfg: SynthConfig, is_case: bool, rng: SeededRng) -> SyntheticVolume:
    """Generates one subject's volume.

    Args:
        cfg (SynthConfig): The cohort settings.
        is_case (bool): Whether to plant a lesion.
        rng (SeededRng): The subject's stream.

    Returns:
        SyntheticVolume: The volume, clipped to [0, 1], and its lesion mask.
    """

    voxels = _background(cfg, rng)
    if is_case:
        mask = lesion_mask(cfg, rng)
        voxels = voxels + cfg.lesion_delta * mask
    else:
        mask = np.zeros(cfg.shape, dtype=np.float32)
    voxels = voxels + rng.normal_array(cfg.shape, std=cfg.noise_sd, dtype=np.float64)
    return SyntheticVolume(Volume(np.clip(voxels, 0.0, 1.0).astype(np.float32)), mask)


def synthesize_subjects(cfg: SynthConfig, seed: int) -> List[Subject]:
    """Draws the demographics of the cohort. Subject 2i is the case of pair i and subject
    2i + 1 its control.

    Args:
        cfg (SynthConfig): The cohort settings.
        seed (int): The seed.

    Returns:
        List[Subject]: The subjects, ids S00000, S00001, ...
    """

    rng = SeededRng(seed).derive(DEMOGRAPHICS_STREAM)
    subjects = []
    for index in range(cfg.n_pairs):
        sex = rng.choice([Sex.FEMALE, Sex.MALE], [0.6, 0.4])
        ethnicity = rng.choice(ETHNICITIES, ETHNICITY_WEIGHTS)
        age = float(np.clip(rng.normal(62.0, 8.0), 45.0, 79.0))
        bmi = float(np.clip(rng.normal(29.0, 4.5), 18.0, 45.0))
        for offset, label in ((0, Label.CASE), (1, Label.CONTROL)):
            subject_id = f"S{2 * index + offset:05d}"
            jitter_age = 0.0 if offset == 0 else 4.0 * rng.uniform() - 2.0
            jitter_bmi = 0.0 if offset == 0 else 2.0 * rng.uniform() - 1.0
            subjects.append(
                Subject(
                    id=subject_id,
                    age=round(age + jitter_age, 1),
                    sex=sex,
                    ethnicity=ethnicity,
                    bmi=round(max(bmi + jitter_bmi, 16.0), 1),
                    label=label,
                    volume=f"{VOLUME_DIR}/{subject_id}.nta",
                    contrast=Contrast.SYNTHETIC,
                )
            )
    return subjects


def subject_volume(cfg: SynthConfig, seed: int, subject_index: int) -> SyntheticVolume:
    """Generates the volume of the subject at an index of synthesize_subjects's output.

    Args:
        cfg (SynthConfig): The cohort settings.
        seed (int): The seed.
        subject_index (int): The subject's index.

    Returns:
        SyntheticVolume: The volume.
    """

    rng = SeededRng(seed).derive(VOLUME_STREAM).derive(subject_index)
    return synthesize_volume(cfg, subject_index % 2 == 0, rng)


def generate_cohort(cfg: SynthConfig, seed: int, out_dir: str) -> Manifest:
    """Writes a synthetic cohort: one archive per subject with tensors "volume" and
    "lesion", plus manifest.json.

    Args:
        cfg (SynthConfig): The cohort settings.
        seed (int): The seed.
        out_dir (str): The dataset directory.

    Returns:
        Manifest: The manifest, resolvable against out_dir.
    """

    subjects = synthesize_subjects(cfg, seed)
    os.makedirs(os.path.join(out_dir, VOLUME_DIR), exist_ok=True)
    for index, subject in enumerate(subjects):
        generated = subject_volume(cfg, seed, index)
        path = os.path.join(out_dir, subject.volume)
        generated.volume.save(path, **{LESION_TENSOR: generated.lesion})
        EventHandler.get().handle(ArtifactEvent({"path": path, "kind": "volume"}))
    manifest = Manifest(subjects=subjects)
    manifest_path = os.path.join(out_dir, "manifest.json")
    manifest.write(manifest_path)
    return Manifest.read(manifest_path)


def detector_score(volume: Volume, cfg: SynthConfig) -> float:
    """The mean intensity over the joint core, a near-optimal lesion detector for this
    cohort.

    Args:
        volume (Volume): The volume.
        cfg (SynthConfig): The cohort settings.

    Returns:
        float: The score.
    """

    return float(volume.voxels[joint_core(cfg)].astype(np.float64).mean())
