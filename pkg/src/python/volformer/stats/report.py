# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Cross-validation reports comparing models fold by fold against a reference model."""

from __future__ import annotations

from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from volformer.errors import DataError
from volformer.stats.roc import (
    SENS_TARGET,
    SPEC_TARGET,
    ScoredCohort,
    roc_auc,
    sens_at_spec,
    spec_at_sens,
)
from volformer.stats.summary import MetricSummary, summarize_folds
from volformer.stats.ttest import NUM_FOLDS, paired_t_one_sided
from volformer.util.component import ComponentModel
from volformer.util.console import format_table


class Metric(str, Enum):
    """The metrics a report summarizes."""

    AUC = "auc"
    SENS_AT_SPEC = "sens_at_spec"
    SPEC_AT_SENS = "spec_at_sens"


class ReportRow(ComponentModel):
    """One model's summary of one metric.

    Attributes:
        model (str): The model name.
        metric (Metric): The metric.
        summary (MetricSummary): The fold values, mean and confidence half-width.
        p_value (float): The one-sided paired p value of reference > model.
    """

    model: str
    metric: Metric
    summary: MetricSummary
    p_value: float


class FoldReport(ComponentModel):
    """A table of metric summaries for several models over the same six folds.

    Attributes:
        reference (str): The model the paired tests compare against.
        spec_target (float): The specificity of the sensitivity operating point.
        sens_target (float): The sensitivity of the specificity operating point.
        rows (List[ReportRow]): One row per model and metric, models in input order.
        contrast (Optional[str], optional): The MR sequence the models were evaluated on.
            Defaults to None.
    """

    reference: str
    spec_target: float
    sens_target: float
    rows: List[ReportRow]
    contrast: Optional[str] = None

    def row(self, model: str, metric: Metric) -> ReportRow:
        """Finds a row.

        Args:
            model (str): The model name.
            metric (Metric): The metric.

        Raises:
            KeyError: If no such row exists.

        Returns:
            ReportRow: The row.
        """

        for candidate in self.rows:
            if candidate.model == model and candidate.metric is metric:
                return candidate
        raise KeyError(f"No {metric.value} row for model {model}")

    def to_text(self) -> str:
        """Renders the report as an aligned plain-text table. The reference model's rows
        are marked with *.

        Returns:
            str: The table.
        """

        header = ["Model", "Metric", "Mean", "95% CI", "p"]
        cells = []
        for row in self.rows:
            name = f"{row.model}*" if row.model == self.reference else row.model
            cells.append(
                [
                    name,
                    row.metric.value,
                    f"{row.summary.mean:.4f}",
                    f"±{row.summary.ci95:.4f}",
                    f"{row.p_value:.4f}",
                ]
            )
        title = "Six-fold cross-validation"
        if self.contrast:
            title += f" ({self.contrast})"
        return f"{title}\n" + format_table(header, cells)


def _fold_signature(folds: Sequence[ScoredCohort]) -> List[List[int]]:
    return [fold.labels.tolist() for fold in folds]


def build_report(
    models: Mapping[str, Sequence[ScoredCohort]],
    reference: str,
    spec_target: float = SPEC_TARGET,
    sens_target: float = SENS_TARGET,
    contrast: Optional[str] = None,
) -> FoldReport:
    """Summarizes AUC, sensitivity at the specificity target and specificity at the
    sensitivity target for every model, and tests the reference against each model fold by
    fold.

    Args:
        models (Mapping[str, Sequence[ScoredCohort]]): Six scored folds per model.
        reference (str): The reference model's name.
        spec_target (float, optional): The specificity target. Defaults to 0.80.
        sens_target (float, optional): The sensitivity target. Defaults to 0.80.
        contrast (Optional[str], optional): The MR sequence label. Defaults to None.

    Raises:
        DataError: If the reference is unknown, a model does not have six folds or the
            models' folds hold different subjects.

    Returns:
        FoldReport: The report.
    """

    if reference not in models:
        raise DataError(message=f"Reference model {reference} has no scores")
    signature = _fold_signature(models[reference])
    for name, folds in models.items():
        if len(folds) != NUM_FOLDS:
            raise DataError(message=f"Model {name} has {len(folds)} folds, expected {NUM_FOLDS}")
        if _fold_signature(folds) != signature:
            raise DataError(message=f"Model {name} does not share the reference's folds")

    metrics: Dict[Metric, Callable[[ScoredCohort], float]] = {
        Metric.AUC: roc_auc,
        Metric.SENS_AT_SPEC: lambda cohort: sens_at_spec(cohort, spec_target),
        Metric.SPEC_AT_SENS: lambda cohort: spec_at_sens(cohort, sens_target),
    }
    values = {
        name: {metric: [fn(fold) for fold in folds] for metric, fn in metrics.items()}
        for name, folds in models.items()
    }
    rows = []
    for name in models:
        for metric in metrics:
            test = paired_t_one_sided(values[reference][metric], values[name][metric])
            rows.append(
                ReportRow(
                    model=name,
                    metric=metric,
                    summary=summarize_folds(values[name][metric]),
                    p_value=test.p,
                )
            )
    return FoldReport(
        reference=reference,
        spec_target=spec_target,
        sens_target=sens_target,
        rows=rows,
        contrast=contrast,
    )


def folds_from_scores(
    scores: Mapping[str, float], labels: Mapping[str, int], folds: Sequence[Sequence[str]]
) -> List[ScoredCohort]:
    """Groups per-subject scores into per-fold cohorts.

    Args:
        scores (Mapping[str, float]): Scores by subject id.
        labels (Mapping[str, int]): Labels by subject id.
        folds (Sequence[Sequence[str]]): The subject ids of every fold.

    Raises:
        DataError: If a subject has no score.

    Returns:
        List[ScoredCohort]: One cohort per fold, subjects in the given order.
    """

    cohorts = []
    for fold in folds:
        missing = [subject for subject in fold if subject not in scores]
        if missing:
            raise DataError(message=f"No scores for subjects {missing[:5]}")
        cohorts.append(
            ScoredCohort.of(
                np.array([scores[subject] for subject in fold]),
                [labels[subject] for subject in fold],
            )
        )
    return cohorts


class HeldOutReport(ComponentModel):
    """Metrics of the held-out test group scored by the mean of the fold models.

    Attributes:
        size (int): The number of test subjects.
        auc (float): The area under the ROC curve.
        sens_at_spec (float): Sensitivity at the specificity target.
        spec_at_sens (float): Specificity at the sensitivity target.
    """

    size: int
    auc: float
    sens_at_spec: float
    spec_at_sens: float


def held_out_report(
    scores: Mapping[str, float],
    labels: Mapping[str, int],
    spec_target: float = SPEC_TARGET,
    sens_target: float = SENS_TARGET,
) -> HeldOutReport:
    """Evaluates the held-out test group.

    Args:
        scores (Mapping[str, float]): Mean fold-model scores by subject id.
        labels (Mapping[str, int]): Labels by subject id.
        spec_target (float, optional): The specificity target. Defaults to 0.80.
        sens_target (float, optional): The sensitivity target. Defaults to 0.80.

    Returns:
        HeldOutReport: The metrics.
    """

    cohort = folds_from_scores(scores, labels, [sorted(scores)])[0]
    return HeldOutReport(
        size=int(cohort.scores.size),
        auc=roc_auc(cohort),
        sens_at_spec=sens_at_spec(cohort, spec_target),
        spec_at_sens=spec_at_sens(cohort, sens_target),
    )
