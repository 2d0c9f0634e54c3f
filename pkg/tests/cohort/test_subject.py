# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for subjects, pairs and manifests."""

import json
import os

import pytest
from pydantic import ValidationError

from volformer.cohort.subject import Label, Manifest, MatchedPair, Sex, Subject
from volformer.errors import DataError


def _subject(subject_id, label=Label.CASE, **kwargs) -> Subject:
    fields = {
        "id": subject_id,
        "age": 60.0,
        "sex": Sex.FEMALE,
        "ethnicity": "white",
        "bmi": 28.0,
        "label": label,
        "volume": f"volumes/{subject_id}.nta",
    }
    fields.update(kwargs)
    return Subject(**fields)


def test_subject_validation():
    """Tests that ages and BMIs must be positive and unknown keys are refused."""

    with pytest.raises(ValidationError):
        _subject("a", age=0.0)
    with pytest.raises(ValidationError):
        _subject("a", bmi=-1.0)
    with pytest.raises(ValidationError):
        _subject("", age=50.0)
    with pytest.raises(ValidationError):
        Subject.from_data({**_subject("a").full_bundle(), "weight": 80})


def test_label_values():
    """Tests the integer labels."""

    assert Label.CASE.value_int == 1
    assert Label.CONTROL.value_int == 0


def test_pair_needs_two_subjects():
    """Tests that a subject cannot be its own control."""

    with pytest.raises(ValidationError):
        MatchedPair(case_id="a", control_id="a")


def test_manifest_ids_unique():
    """Tests that repeated ids are refused."""

    with pytest.raises(ValidationError):
        Manifest(subjects=[_subject("a"), _subject("a", Label.CONTROL)])


def test_manifest_is_a_list(tmpdir):
    """Tests that manifests are written as JSON lists and resolve paths against their
    directory."""

    path = str(tmpdir.join("manifest.json"))
    Manifest(subjects=[_subject("a"), _subject("b", Label.CONTROL)]).write(path)
    with open(path, "r", encoding="UTF-8") as manifest_file:
        data = json.load(manifest_file)
    assert isinstance(data, list)
    assert [entry["id"] for entry in data] == ["a", "b"]

    manifest = Manifest.read(path)
    subject = manifest.by_id()["b"]
    assert manifest.volume_path(subject) == os.path.join(str(tmpdir), "volumes", "b.nta")
    assert Manifest.from_data(data).volume_path(subject) == "volumes/b.nta"


def test_check_pairs():
    """Tests that pairs must join a known case to a known control, each used once."""

    manifest = Manifest(
        subjects=[_subject("a"), _subject("b", Label.CONTROL), _subject("c", Label.CONTROL)]
    )
    manifest.check_pairs([MatchedPair(case_id="a", control_id="b")])
    bad_pairs = [
        [MatchedPair(case_id="a", control_id="z")],
        [MatchedPair(case_id="b", control_id="c")],
        [MatchedPair(case_id="a", control_id="b"), MatchedPair(case_id="a", control_id="c")],
    ]
    for pairs in bad_pairs:
        with pytest.raises(DataError):
            manifest.check_pairs(pairs)
