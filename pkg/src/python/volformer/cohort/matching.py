# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Cohort selection: exclusion criteria and greedy case-control matching."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from volformer.cohort.subject import Label, MatchedPair, Subject
from volformer.util.component import ComponentModel

AGE_CALIPER = 5.0
BMI_CALIPER = 3.0

EXCLUSION_REASONS = ("tkr_at_baseline", "partial_replacement", "missing_followup")


class CohortFlow(ComponentModel):
    """Subject counts at every stage of cohort selection.

    Attributes:
        subjects (int): Subjects in the manifest.
        excluded (Dict[str, int]): Excluded subjects by reason.
        eligible_cases (int): Cases left after exclusions.
        eligible_controls (int): Controls left after exclusions.
        pairs (int): Matched pairs.
        unmatched (int): Eligible subjects left without a partner.
    """

    subjects: int
    excluded: Dict[str, int]
    eligible_cases: int
    eligible_controls: int
    pairs: int
    unmatched: int


def apply_exclusions(subjects: Sequence[Subject]) -> Tuple[List[Subject], Dict[str, str]]:
    """Removes subjects that fail the cohort's inclusion criteria. A subject failing several
    criteria is recorded under the first of tkr_at_baseline, partial_replacement and
    missing_followup.

    Args:
        subjects (Sequence[Subject]): The candidate subjects.

    Returns:
        Tuple[List[Subject], Dict[str, str]]: The eligible subjects in input order and the
            excluded ids mapped to their reason.
    """

    eligible = []
    excluded = {}
    for subject in subjects:
        reason = next((name for name in EXCLUSION_REASONS if getattr(subject, name)), None)
        if reason is None:
            eligible.append(subject)
        else:
            excluded[subject.id] = reason
    return eligible, excluded


def _spread(values: Sequence[float]) -> float:
    if not values:
        return 1.0
    spread = float(np.std(np.asarray(values, dtype=np.float64)))
    return spread if spread > 0 else 1.0


def match_case_controls(
    subjects: Sequence[Subject],
    age_caliper: float = AGE_CALIPER,
    bmi_caliper: float = BMI_CALIPER,
) -> Tuple[List[MatchedPair], List[str]]:
    """Greedy nearest-neighbor matching of cases to controls. Sex and ethnicity must agree
    exactly and the age and BMI differences must lie within the calipers. The distance is
    |age difference| / sd(age) + |BMI difference| / sd(BMI), with population standard
    deviations over the whole input (1 when a deviation is 0). Cases are matched in
    ascending id order, each to the closest unused control; equal distances go to the
    control with the lower id.

    Args:
        subjects (Sequence[Subject]): The cohort.
        age_caliper (float, optional): The largest allowed age difference in years.
            Defaults to 5.
        bmi_caliper (float, optional): The largest allowed BMI difference. Defaults to 3.

    Returns:
        Tuple[List[MatchedPair], List[str]]: The pairs in case order and the sorted ids of
            subjects left unmatched.
    """

    age_sd = _spread([subject.age for subject in subjects])
    bmi_sd = _spread([subject.bmi for subject in subjects])
    cases = sorted((s for s in subjects if s.label is Label.CASE), key=lambda s: s.id)
    available = sorted((s for s in subjects if s.label is Label.CONTROL), key=lambda s: s.id)

    pairs = []
    unmatched = []
    for case in cases:
        best: Optional[Tuple[float, str, int]] = None
        for index, control in enumerate(available):
            if control.sex is not case.sex or control.ethnicity != case.ethnicity:
                continue
            age_gap = abs(case.age - control.age)
            bmi_gap = abs(case.bmi - control.bmi)
            if age_gap > age_caliper or bmi_gap > bmi_caliper:
                continue
            candidate = (age_gap / age_sd + bmi_gap / bmi_sd, control.id, index)
            if best is None or candidate < best:
                best = candidate
        if best is None:
            unmatched.append(case.id)
            continue
        control = available.pop(best[2])
        pairs.append(MatchedPair(case_id=case.id, control_id=control.id))
    unmatched.extend(control.id for control in available)
    return pairs, sorted(unmatched)


def select_cohort(
    subjects: Sequence[Subject],
    age_caliper: float = AGE_CALIPER,
    bmi_caliper: float = BMI_CALIPER,
) -> Tuple[List[MatchedPair], CohortFlow]:
    """Applies the exclusion criteria and matches the eligible subjects.

    Args:
        subjects (Sequence[Subject]): The cohort.
        age_caliper (float, optional): The age caliper. Defaults to 5.
        bmi_caliper (float, optional): The BMI caliper. Defaults to 3.

    Returns:
        Tuple[List[MatchedPair], CohortFlow]: The pairs and the selection counts.
    """

    eligible, excluded = apply_exclusions(subjects)
    pairs, unmatched = match_case_controls(eligible, age_caliper, bmi_caliper)
    reasons = {reason: 0 for reason in EXCLUSION_REASONS}
    for reason in excluded.values():
        reasons[reason] += 1
    flow = CohortFlow(
        subjects=len(subjects),
        excluded=reasons,
        eligible_cases=sum(subject.label is Label.CASE for subject in eligible),
        eligible_controls=sum(subject.label is Label.CONTROL for subject in eligible),
        pairs=len(pairs),
        unmatched=len(unmatched),
    )
    return pairs, flow
