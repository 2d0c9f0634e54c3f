# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""The records of a study cohort: subjects, matched pairs and the dataset manifest."""

from __future__ import annotations

import json
import os
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import PrivateAttr, field_validator, model_validator

from volformer.errors import DataError
from volformer.util.component import ComponentModel


class Sex(str, Enum):
    """A subject's sex."""

    MALE = "M"
    FEMALE = "F"


class Label(str, Enum):
    """Whether a subject went on to the outcome (case) or not (control)."""

    CASE = "case"
    CONTROL = "control"

    @property
    def value_int(self) -> int:
        """The label as 1 for cases and 0 for controls."""

        return 1 if self is Label.CASE else 0


class Contrast(str, Enum):
    """The MR sequence a volume was acquired with."""

    COR_IW_TSE = "COR_IW_TSE"
    SAG_IW_TSE_FS = "SAG_IW_TSE_FS"
    COR_STIR = "COR_STIR"
    SAG_PD_FAT_SAT = "SAG_PD_FAT_SAT"
    SYNTHETIC = "SYNTHETIC"


class Subject(ComponentModel):
    """One subject of the cohort.

    Attributes:
        id (str): The subject identifier.
        age (float): Age in years.
        sex (Sex): The subject's sex.
        ethnicity (str): The ethnicity category.
        bmi (float): Body mass index in kg/m^2.
        label (Label): Case or control.
        volume (str): The path of the subject's volume archive, relative to the manifest.
        contrast (Contrast, optional): The MR sequence. Defaults to SYNTHETIC.
        tkr_at_baseline (bool, optional): Whether the knee was replaced before the study
            started. Defaults to False.
        partial_replacement (bool, optional): Whether the outcome was a partial replacement.
            Defaults to False.
        missing_followup (bool, optional): Whether follow-up data is missing.
            Defaults to False.
    """

    id: str
    age: float
    sex: Sex
    ethnicity: str
    bmi: float
    label: Label
    volume: str
    contrast: Contrast = Contrast.SYNTHETIC
    tkr_at_baseline: bool = False
    partial_replacement: bool = False
    missing_followup: bool = False

    # pylint: disable=invalid-name
    @field_validator("age", "bmi")
    @classmethod
    def is_positive(cls, v: float) -> float:
        """Validates that age and BMI are positive.

        Args:
            v (float): The value.

        Raises:
            ValueError: Raised if the value is not positive.

        Returns:
            float: The unmodified value.
        """

        if not v > 0:
            raise ValueError(f"Age and BMI must be positive, {v} provided")
        return v

    @field_validator("id")
    @classmethod
    def id_is_not_empty(cls, v: str) -> str:
        """Validates that the id is a non-empty string.

        Args:
            v (str): The id.

        Raises:
            ValueError: Raised if the id is empty.

        Returns:
            str: The unmodified id.
        """

        if not v:
            raise ValueError("Subject ids must not be empty")
        return v


class MatchedPair(ComponentModel):
    """A case and the control matched to it.

    Attributes:
        case_id (str): The case's id.
        control_id (str): The control's id.
    """

    case_id: str
    control_id: str

    @model_validator(mode="after")
    def distinct_subjects(self) -> MatchedPair:
        """Validates that a subject is not matched to itself.

        Raises:
            ValueError: Raised if both ids are equal.

        Returns:
            MatchedPair: The unmodified pair.
        """

        if self.case_id == self.control_id:
            raise ValueError(f"Subject {self.case_id} cannot be matched to itself")
        return self


class Manifest(ComponentModel):
    """A dataset: the list of subjects and where their volumes live. Encoded as a JSON list
    of subjects.

    Attributes:
        subjects (List[Subject]): The subjects, ids unique.
        _root (Optional[str]): The directory volume paths are relative to, set when the
            manifest is read from a file.
    """

    subjects: List[Subject]
    _root: Optional[str] = PrivateAttr(default=None)

    @field_validator("subjects")
    @classmethod
    def ids_are_unique(cls, v: List[Subject]) -> List[Subject]:
        """Validates that no two subjects share an id.

        Args:
            v (List[Subject]): The subjects.

        Raises:
            ValueError: Raised if an id repeats.

        Returns:
            List[Subject]: The unmodified subjects.
        """

        seen = set()
        for subject in v:
            if subject.id in seen:
                raise ValueError(f"Subject id {subject.id} appears more than once")
            seen.add(subject.id)
        return v

    @classmethod
    def from_data(cls, data: Any) -> Manifest:
        """Builds a manifest from a decoded JSON list of subjects.

        Args:
            data (Any): The list of subjects, or an object with a subjects key.

        Returns:
            Manifest: The manifest.
        """

        if isinstance(data, list):
            data = {"subjects": data}
        return cls.model_validate(data)

    def to_json(self, indent: int = 4) -> str:
        """Encodes the subjects as a JSON list.

        Args:
            indent (int, optional): The indentation. Defaults to 4.

        Returns:
            str: The JSON text.
        """

        return json.dumps(
            [subject.full_bundle() for subject in self.subjects], indent=indent, sort_keys=True
        )

    @classmethod
    def read(cls, file_path: str) -> Manifest:
        """Reads a manifest and records its directory as the volume root.

        Args:
            file_path (str): The manifest path.

        Returns:
            Manifest: The manifest.
        """

        manifest = super().read(file_path)
        manifest._root = os.path.dirname(  # pylint: disable=protected-access
            os.path.abspath(file_path)
        )
        return manifest

    def by_id(self) -> Dict[str, Subject]:
        """The subjects keyed by id.

        Returns:
            Dict[str, Subject]: The subjects.
        """

        return {subject.id: subject for subject in self.subjects}

    def volume_path(self, subject: Subject) -> str:
        """The resolved path of a subject's volume.

        Args:
            subject (Subject): The subject.

        Returns:
            str: The path.
        """

        if self._root is None or os.path.isabs(subject.volume):
            return subject.volume
        return os.path.join(self._root, subject.volume)

    def check_pairs(self, pairs: List[MatchedPair]) -> None:
        """Checks that every pair joins a known case with a known control.

        Args:
            pairs (List[MatchedPair]): The pairs.

        Raises:
            DataError: If an id is unknown, a label is wrong or a subject is paired twice.
        """

        subjects = self.by_id()
        used = set()
        for pair in pairs:
            members = ((pair.case_id, Label.CASE), (pair.control_id, Label.CONTROL))
            for subject_id, label in members:
                if subject_id not in subjects:
                    raise DataError(message=f"Pair refers to unknown subject {subject_id}")
                if subjects[subject_id].label is not label:
                    raise DataError(message=f"Subject {subject_id} is not a {label.value}")
                if subject_id in used:
                    raise DataError(message=f"Subject {subject_id} appears in two pairs")
                used.add(subject_id)


class PairSet(ComponentModel):
    """The matched pairs of a cohort, stored as pairs.json.

    Attributes:
        pairs (List[MatchedPair]): The pairs in case order.
    """

    pairs: List[MatchedPair]
