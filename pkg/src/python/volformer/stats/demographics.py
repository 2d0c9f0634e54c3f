# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Demographics of a matched cohort, cases against controls for each sex."""

from __future__ import annotations

from collections import Counter
from typing import Dict, List, Sequence

import numpy as np

from volformer.cohort.subject import Label, MatchedPair, Sex, Subject
from volformer.errors import DataError
from volformer.stats.ttest import two_sample_t
from volformer.util.component import ComponentModel
from volformer.util.console import format_table


class GroupSummary(ComponentModel):
    """Covariate summary of one group of subjects.

    Attributes:
        count (int): The number of subjects.
        age_min (float): The youngest age.
        age_max (float): The oldest age.
        age_mean (float): The mean age.
        age_sd (float): The sample standard deviation of age.
        bmi_mean (float): The mean BMI.
        bmi_sd (float): The sample standard deviation of BMI.
        ethnicity (Dict[str, int]): Subjects per ethnicity.
    """

    count: int
    age_min: float
    age_max: float
    age_mean: float
    age_sd: float
    bmi_mean: float
    bmi_sd: float
    ethnicity: Dict[str, int]


class SexComparison(ComponentModel):
    """Cases against controls for one sex.

    Attributes:
        sex (Sex): The sex.
        cases (GroupSummary): The matched cases.
        controls (GroupSummary): The matched controls.
        p_age (float): The two-sided two-sample t test p value for age.
        p_bmi (float): The two-sided two-sample t test p value for BMI.
    """

    sex: Sex
    cases: GroupSummary
    controls: GroupSummary
    p_age: float
    p_bmi: float


class DemographicsTable(ComponentModel):
    """The demographics of a matched cohort.

    Attributes:
        comparisons (List[SexComparison]): One comparison per sex present.
    """

    comparisons: List[SexComparison]

    def to_text(self) -> str:
        """Renders the table as aligned plain text.

        Returns:
            str: The table.
        """

        header = ["Group", "N", "Age range", "Age", "BMI", "p(age)", "p(BMI)"]
        rows = []
        for comparison in self.comparisons:
            for name, group in (("cases", comparison.cases), ("controls", comparison.controls)):
                is_case = name == "cases"
                rows.append(
                    [
                        f"{comparison.sex.value} {name}",
                        str(group.count),
                        f"{group.age_min:.0f}-{group.age_max:.0f}",
                        f"{group.age_mean:.1f}±{group.age_sd:.1f}",
                        f"{group.bmi_mean:.1f}±{group.bmi_sd:.1f}",
                        f"{comparison.p_age:.3f}" if is_case else "",
                        f"{comparison.p_bmi:.3f}" if is_case else "",
                    ]
                )
        return format_table(header, rows)


def _sd(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if values.size > 1 else 0.0


def summarize_group(subjects: Sequence[Subject]) -> GroupSummary:
    """Summarizes the covariates of a non-empty group.

    Args:
        subjects (Sequence[Subject]): The group.

    Returns:
        GroupSummary: The summary.
    """

    ages = np.array([subject.age for subject in subjects], dtype=np.float64)
    bmis = np.array([subject.bmi for subject in subjects], dtype=np.float64)
    return GroupSummary(
        count=len(subjects),
        age_min=float(ages.min()),
        age_max=float(ages.max()),
        age_mean=float(ages.mean()),
        age_sd=_sd(ages),
        bmi_mean=float(bmis.mean()),
        bmi_sd=_sd(bmis),
        ethnicity=dict(sorted(Counter(subject.ethnicity for subject in subjects).items())),
    )


def demographics_table(
    subjects: Sequence[Subject], pairs: Sequence[MatchedPair]
) -> DemographicsTable:
    """Compares matched cases with matched controls, separately for each sex.

    Args:
        subjects (Sequence[Subject]): The cohort.
        pairs (Sequence[MatchedPair]): The matched pairs.

    Raises:
        DataError: If a pair refers to an unknown subject.

    Returns:
        DemographicsTable: The table, sexes in F, M order.
    """

    by_id = {subject.id: subject for subject in subjects}
    matched: List[Subject] = []
    for pair in pairs:
        for subject_id in (pair.case_id, pair.control_id):
            if subject_id not in by_id:
                raise DataError(message=f"Pair refers to unknown subject {subject_id}")
            matched.append(by_id[subject_id])

    comparisons = []
    for sex in sorted(Sex, key=lambda value: value.value):
        cases = [s for s in matched if s.sex is sex and s.label is Label.CASE]
        controls = [s for s in matched if s.sex is sex and s.label is Label.CONTROL]
        if not cases or not controls:
            continue
        p_age, p_bmi = 1.0, 1.0
        if len(cases) + len(controls) > 2:
            _, p_age = two_sample_t([s.age for s in cases], [s.age for s in controls])
            _, p_bmi = two_sample_t([s.bmi for s in cases], [s.bmi for s in controls])
        comparisons.append(
            SexComparison(
                sex=sex,
                cases=summarize_group(cases),
                controls=summarize_group(controls),
                p_age=p_age,
                p_bmi=p_bmi,
            )
        )
    return DemographicsTable(comparisons=comparisons)
