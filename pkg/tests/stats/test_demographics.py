# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for the matched cohort demographics table."""

import math

import pytest

from volformer.cohort.subject import Label, MatchedPair, Sex, Subject
from volformer.errors import DataError
from volformer.stats.demographics import demographics_table, summarize_group


def _subject(subject_id, label, sex, age, bmi, ethnicity="white") -> Subject:
    return Subject(
        id=subject_id,
        age=age,
        sex=sex,
        ethnicity=ethnicity,
        bmi=bmi,
        label=label,
        volume=f"{subject_id}.nta",
    )


SUBJECTS = [
    _subject("f1", Label.CASE, Sex.FEMALE, 60.0, 30.0),
    _subject("f2", Label.CONTROL, Sex.FEMALE, 61.0, 29.0),
    _subject("f3", Label.CASE, Sex.FEMALE, 70.0, 25.0, "black"),
    _subject("f4", Label.CONTROL, Sex.FEMALE, 68.0, 26.0, "black"),
    _subject("m1", Label.CASE, Sex.MALE, 55.0, 27.0),
    _subject("m2", Label.CONTROL, Sex.MALE, 56.0, 27.5),
]
PAIRS = [
    MatchedPair(case_id="f1", control_id="f2"),
    MatchedPair(case_id="f3", control_id="f4"),
    MatchedPair(case_id="m1", control_id="m2"),
]


def test_summarize_group():
    """Tests the covariate summary of a group."""

    summary = summarize_group(SUBJECTS[:4:2])
    assert summary.count == 2
    assert (summary.age_min, summary.age_max, summary.age_mean) == (60.0, 70.0, 65.0)
    assert math.isclose(summary.age_sd, math.sqrt(50.0))
    assert summary.ethnicity == {"black": 1, "white": 1}
    assert summarize_group(SUBJECTS[:1]).age_sd == 0.0


def test_table_by_sex():
    """Tests that comparisons run per sex, females first."""

    table = demographics_table(SUBJECTS, PAIRS)
    assert [comparison.sex for comparison in table.comparisons] == [Sex.FEMALE, Sex.MALE]
    female = table.comparisons[0]
    assert female.cases.count == 2
    assert 0.0 <= female.p_age <= 1.0
    male = table.comparisons[1]
    assert (male.p_age, male.p_bmi) == (1.0, 1.0)
    text = table.to_text()
    assert "F cases" in text
    assert "M controls" in text


def test_unknown_subject():
    """Tests that pairs must refer to known subjects."""

    with pytest.raises(DataError):
        demographics_table(SUBJECTS, [MatchedPair(case_id="x", control_id="f2")])
