# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The RunConfig holds every setting of a volformer run. It is read from a JSON document
whose sections mirror the stages of a run; unknown keys are rejected at every level."""

from __future__ import annotations

from typing import Dict, Optional

from pydantic import Field, field_validator, model_validator

from volformer.cohort.matching import AGE_CALIPER, BMI_CALIPER
from volformer.cohort.subject import Contrast
from volformer.cohort.trainer import TrainConfig, TrainSettings
from volformer.model.config import ViTConfig
from volformer.stats.roc import SENS_TARGET, SPEC_TARGET
from volformer.synth.generator import SynthConfig
from volformer.util.component import ComponentModel

MODEL_NAME = "volformer"
DETECTOR_NAME = "lesion_detector"
_MAX_SEED = 2**64


class DataConfig(SynthConfig):
    """Dataset settings: the synthetic cohort plus how it is matched and split.

    Attributes:
        test_pairs (int, optional): Pairs held out from cross-validation as a test group.
            Defaults to 0.
        age_caliper (float, optional): The largest age gap of a matched pair.
            Defaults to 5.0.
        bmi_caliper (float, optional): The largest BMI gap of a matched pair.
            Defaults to 3.0.
        contrast (Contrast, optional): The MR sequence reports are labelled with.
            Defaults to SYNTHETIC.
    """

    test_pairs: int = 0
    age_caliper: float = AGE_CALIPER
    bmi_caliper: float = BMI_CALIPER
    contrast: Contrast = Contrast.SYNTHETIC

    # pylint: disable=invalid-name
    @field_validator("test_pairs")
    @classmethod
    def test_pairs_not_negative(cls, v: int) -> int:
        """Validates the size of the test group.

        Args:
            v (int): The number of held-out pairs.

        Raises:
            ValueError: Raised if the number is negative.

        Returns:
            int: The unmodified number.
        """

        if v < 0:
            raise ValueError(f"test_pairs must not be negative, {v} provided")
        return v

    @field_validator("age_caliper", "bmi_caliper")
    @classmethod
    def caliper_is_positive(cls, v: float) -> float:
        """Validates a matching caliper.

        Args:
            v (float): The caliper.

        Raises:
            ValueError: Raised if the caliper is not positive.

        Returns:
            float: The unmodified caliper.
        """

        if not v > 0:
            raise ValueError(f"Calipers must be positive, {v} provided")
        return v


class ModelConfig(ComponentModel):
    """The encoder shape and where its pretrained weights come from.

    Attributes:
        dim (int, optional): The token width. Defaults to 64.
        heads (int, optional): The number of attention heads. Defaults to 2.
        depth (int, optional): The number of blocks. Defaults to 4.
        mlp_ratio (int, optional): The MLP width multiple. Defaults to 4.
        pretrain_grid (int, optional): The side of the 2D checkpoint's patch grid.
            Defaults to 14.
        synthetic_pretrained (bool, optional): Whether import may generate a synthetic 2D
            checkpoint when paths.pretrained is not set. Defaults to True.
    """

    dim: int = 64
    heads: int = 2
    depth: int = 4
    mlp_ratio: int = 4
    pretrain_grid: int = 14
    synthetic_pretrained: bool = True

    # pylint: disable=invalid-name
    @field_validator("pretrain_grid")
    @classmethod
    def grid_can_interpolate(cls, v: int) -> int:
        """Validates that the pretrained grid can be resized.

        Args:
            v (int): The grid side.

        Raises:
            ValueError: Raised if the side is below 2.

        Returns:
            int: The unmodified side.
        """

        if v < 2:
            raise ValueError(f"pretrain_grid must be at least 2, {v} provided")
        return v

    @model_validator(mode="after")
    def is_valid_encoder(self) -> ModelConfig:
        """Validates the encoder shape by building it.

        Returns:
            ModelConfig: The unmodified config.
        """

        self.vit_config()
        return self

    def vit_config(self) -> ViTConfig:
        """The encoder shape.

        Returns:
            ViTConfig: The shape.
        """

        return ViTConfig(
            dim=self.dim, heads=self.heads, depth=self.depth, mlp_ratio=self.mlp_ratio
        )


class EvalConfig(ComponentModel):
    """Evaluation and interpretation settings.

    Attributes:
        spec_target (float, optional): The specificity at which sensitivity is reported.
            Defaults to 0.8.
        sens_target (float, optional): The sensitivity at which specificity is reported.
            Defaults to 0.8.
        reference (str, optional): The model other models are tested against.
            Defaults to "volformer".
        models (Dict[str, str], optional): Extra models to report, by name, each a directory
            of fold score files. Defaults to {}.
        detector_baseline (bool, optional): Whether to report the lesion-region mean
            detector alongside the trained model. Defaults to True.
        rollout_fold (int, optional): The fold whose model is interpreted. Defaults to 0.
        rollout_subjects (int, optional): The most validation cases to interpret, 0 for
            all. Defaults to 0.
    """

    spec_target: float = SPEC_TARGET
    sens_target: float = SENS_TARGET
    reference: str = MODEL_NAME
    models: Dict[str, str] = {}
    detector_baseline: bool = True
    rollout_fold: int = 0
    rollout_subjects: int = 0

    # pylint: disable=invalid-name
    @field_validator("spec_target", "sens_target")
    @classmethod
    def is_rate(cls, v: float) -> float:
        """Validates an operating point target.

        Args:
            v (float): The target.

        Raises:
            ValueError: Raised if the target is outside [0, 1].

        Returns:
            float: The unmodified target.
        """

        if not 0.0 <= v <= 1.0:
            raise ValueError(f"Targets must lie in [0, 1], {v} provided")
        return v

    @field_validator("rollout_fold", "rollout_subjects")
    @classmethod
    def is_not_negative(cls, v: int) -> int:
        """Validates an index or count.

        Args:
            v (int): The value.

        Raises:
            ValueError: Raised if the value is negative.

        Returns:
            int: The unmodified value.
        """

        if v < 0:
            raise ValueError(f"Rollout settings must not be negative, {v} provided")
        return v


class PathsConfig(ComponentModel):
    """Where a run reads and writes files.

    Attributes:
        out (str, optional): The output directory. Defaults to "out".
        manifest (Optional[str], optional): A dataset manifest to use instead of the
            synthetic one under out. Defaults to None.
        pretrained (Optional[str], optional): A 2D checkpoint archive to import.
            Defaults to None.
    """

    out: str = "out"
    manifest: Optional[str] = None
    pretrained: Optional[str] = None


class RunConfig(ComponentModel):
    """Every setting of a run. Only the seed is required.

    Attributes:
        seed (int): The seed every random choice derives from.
        data (DataConfig, optional): Dataset settings.
        model (ModelConfig, optional): Encoder settings.
        train (TrainSettings, optional): Optimizer settings.
        eval (EvalConfig, optional): Evaluation settings.
        paths (PathsConfig, optional): File locations.
    """

    seed: int
    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainSettings = Field(default_factory=TrainSettings)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    # pylint: disable=invalid-name
    @field_validator("seed")
    @classmethod
    def seed_is_u64(cls, v: int) -> int:
        """Validates that the seed fits in 64 unsigned bits.

        Args:
            v (int): The seed.

        Raises:
            ValueError: Raised if the seed is out of range.

        Returns:
            int: The unmodified seed.
        """

        if not 0 <= v < _MAX_SEED:
            raise ValueError(f"seed must lie in [0, 2^64), {v} provided")
        return v

    def config_hash(self) -> str:
        """The sha256 of the canonical JSON of the full config.

        Returns:
            str: The hex digest.
        """

        return self.digest()

    def merge(self, seed: Optional[int] = None, out: Optional[str] = None) -> RunConfig:
        """Applies command line overrides, returning a new config.

        Args:
            seed (Optional[int], optional): Replaces the seed when set. Defaults to None.
            out (Optional[str], optional): Replaces paths.out when set. Defaults to None.

        Returns:
            RunConfig: The merged config.
        """

        data = self.full_bundle()
        if seed is not None:
            data["seed"] = seed
        if out is not None:
            data["paths"]["out"] = out
        return RunConfig.from_data(data)

    def train_config(self) -> TrainConfig:
        """The training settings with the run's seed.

        Returns:
            TrainConfig: The settings.
        """

        return TrainConfig(seed=self.seed, **self.train.full_bundle())
