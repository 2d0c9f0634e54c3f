# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Tests for case-control matching."""

import itertools

from volformer.cohort.matching import (
    apply_exclusions,
    match_case_controls,
    select_cohort,
)
from volformer.cohort.subject import Label, MatchedPair, Sex, Subject
from volformer.stats.ttest import two_sample_t
from volformer.synth.generator import SynthConfig, synthesize_subjects


def _subject(subject_id, label, age=60.0, bmi=28.0, sex=Sex.FEMALE, **kwargs) -> Subject:
    return Subject(
        id=subject_id,
        age=age,
        sex=sex,
        ethnicity=kwargs.pop("ethnicity", "white"),
        bmi=bmi,
        label=label,
        volume=f"{subject_id}.nta",
        **kwargs,
    )


def test_identical_subjects_match():
    """Tests that a case and a control with equal covariates form a pair."""

    pairs, unmatched = match_case_controls(
        [_subject("a", Label.CASE), _subject("b", Label.CONTROL)]
    )
    assert pairs == [MatchedPair(case_id="a", control_id="b")]
    assert unmatched == []


def test_exact_match_on_sex_and_ethnicity():
    """Tests that cases without a same-sex, same-ethnicity control go unmatched."""

    subjects = [
        _subject("a", Label.CASE, sex=Sex.MALE),
        _subject("b", Label.CONTROL, sex=Sex.FEMALE),
        _subject("c", Label.CASE, ethnicity="black"),
    ]
    pairs, unmatched = match_case_controls(subjects)
    assert pairs == []
    assert unmatched == ["a", "b", "c"]


def test_calipers():
    """Tests that age and BMI gaps beyond the calipers prevent a match."""

    far_age = [_subject("a", Label.CASE, age=50.0), _subject("b", Label.CONTROL, age=55.5)]
    far_bmi = [_subject("a", Label.CASE, bmi=25.0), _subject("b", Label.CONTROL, bmi=28.5)]
    assert match_case_controls(far_age)[0] == []
    assert match_case_controls(far_bmi)[0] == []
    assert len(match_case_controls(far_age, age_caliper=6.0)[0]) == 1


def test_empty_input():
    """Tests that no subjects give no pairs."""

    assert match_case_controls([]) == ([], [])


def test_ties_go_to_lower_id():
    """Tests that equally close controls resolve to the lower id."""

    subjects = [
        _subject("case", Label.CASE, age=60.0),
        _subject("z", Label.CONTROL, age=61.0),
        _subject("y", Label.CONTROL, age=59.0),
    ]
    pairs, unmatched = match_case_controls(subjects)
    assert pairs == [MatchedPair(case_id="case", control_id="y")]
    assert unmatched == ["z"]


def _greedy_oracle(subjects, caliper):
    cases = sorted((s for s in subjects if s.label is Label.CASE), key=lambda s: s.id)
    controls = sorted((s for s in subjects if s.label is Label.CONTROL), key=lambda s: s.id)
    used = set()
    pairs = []
    for case in cases:
        options = [
            (abs(case.age - control.age), control.id)
            for control in controls
            if control.id not in used and abs(case.age - control.age) <= caliper
        ]
        if options:
            _, control_id = min(options)
            used.add(control_id)
            pairs.append((case.id, control_id))
    return pairs


def test_greedy_differs_from_optimal():
    """Tests a cohort where greedy matching leaves a case the optimal assignment would pair,
    against a brute force oracle."""

    subjects = [
        _subject("c1", Label.CASE, age=50.0),
        _subject("c2", Label.CASE, age=53.0),
        _subject("k1", Label.CONTROL, age=51.0),
        _subject("k2", Label.CONTROL, age=47.0),
    ]
    pairs, unmatched = match_case_controls(subjects)
    assert pairs == [MatchedPair(case_id="c1", control_id="k1")]
    assert unmatched == ["c2", "k2"]
    assert [(p.case_id, p.control_id) for p in pairs] == _greedy_oracle(subjects, 5.0)

    feasible = [
        assignment
        for assignment in itertools.permutations(["k1", "k2"])
        if all(
            abs(case.age - control.age) <= 5.0
            for case, control in zip(
                subjects[:2], [s for name in assignment for s in subjects if s.id == name]
            )
        )
    ]
    assert feasible == [("k2", "k1")]


def test_exclusions():
    """Tests that excluded subjects are recorded under their first reason."""

    subjects = [
        _subject("a", Label.CASE, tkr_at_baseline=True, missing_followup=True),
        _subject("b", Label.CASE, partial_replacement=True),
        _subject("c", Label.CONTROL),
    ]
    eligible, excluded = apply_exclusions(subjects)
    assert [subject.id for subject in eligible] == ["c"]
    assert excluded == {"a": "tkr_at_baseline", "b": "partial_replacement"}


def test_select_cohort_flow():
    """Tests the counts reported at every selection stage."""

    subjects = [
        _subject("a", Label.CASE),
        _subject("b", Label.CONTROL),
        _subject("c", Label.CASE, missing_followup=True),
        _subject("d", Label.CONTROL, age=80.0),
    ]
    pairs, flow = select_cohort(subjects)
    assert len(pairs) == 1
    assert flow.subjects == 4
    assert flow.excluded == {
        "tkr_at_baseline": 0,
        "partial_replacement": 0,
        "missing_followup": 1,
    }
    assert (flow.eligible_cases, flow.eligible_controls) == (1, 2)
    assert (flow.pairs, flow.unmatched) == (1, 1)


def test_matched_cohort_is_balanced():
    """Tests that matched cases and controls do not differ in mean age or BMI."""

    subjects = synthesize_subjects(SynthConfig(n_pairs=120), 17)
    pairs, _ = select_cohort(subjects)
    assert len(pairs) >= 100
    by_id = {subject.id: subject for subject in subjects}
    for field in ("age", "bmi"):
        cases = [getattr(by_id[pair.case_id], field) for pair in pairs]
        controls = [getattr(by_id[pair.control_id], field) for pair in pairs]
        _, p_value = two_sample_t(cases, controls)
        assert p_value > 0.05
