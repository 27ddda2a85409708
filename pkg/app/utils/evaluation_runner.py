#!/usr/bin/env python3
"""
Evaluation runner

Classifies exams with known ground truth and scores both tasks. Abstentions
are split the way clinical evaluation reports them: presentation abstains
when no sweep detected a head (detection failure), lie abstains when no
frame had a usable segmentation (segmentation failure). Every wrong label
and every abstention is logged with its reason.
"""

import asyncio
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from app.core.config import QualityCriteria
from app.core.exam_io import load_exam
from app.models import Exam, GroundTruth, LieLabel, PresentationLabel
from app.pipeline.classifier import ExamClassifier
from app.pipeline.report import ExamReport
from app.synth.generator import GROUND_TRUTH_NAME, SynthConfig, build_exam, read_ground_truth

SEGMENTATION_FAILURES = {"no_segmentation", "criteria_failed"}


@dataclass(frozen=True)
class CaseOutcome:
    exam_id: str
    truth_presentation: str
    truth_lie: str
    presentation: str
    presentation_status: str
    lie: str
    lie_status: str
    lie_abstention_reasons: Tuple[str, ...] = ()

    @property
    def presentation_correct(self) -> bool:
        return self.presentation == self.truth_presentation

    @property
    def lie_correct(self) -> bool:
        return self.lie == self.truth_lie


@dataclass
class EvaluationSummary:
    cases: List[CaseOutcome] = field(default_factory=list)

    @property
    def n_exams(self) -> int:
        return len(self.cases)

    @property
    def presentation_correct(self) -> int:
        return sum(c.presentation_correct for c in self.cases)

    @property
    def lie_correct(self) -> int:
        return sum(c.lie_correct for c in self.cases)

    @property
    def detection_failures(self) -> int:
        return sum(c.presentation_status == "no_head_detected" for c in self.cases)

    @property
    def segmentation_failures(self) -> int:
        return sum(c.lie_status in SEGMENTATION_FAILURES for c in self.cases)

    @property
    def presentation_abstentions(self) -> int:
        return sum(c.presentation == PresentationLabel.ABSTAIN for c in self.cases)

    @property
    def lie_abstentions(self) -> int:
        return sum(c.lie == LieLabel.ABSTAIN for c in self.cases)

    @property
    def presentation_accuracy(self) -> float:
        return self.presentation_correct / self.n_exams if self.cases else 0.0

    @property
    def lie_accuracy(self) -> float:
        return self.lie_correct / self.n_exams if self.cases else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_exams": self.n_exams,
            "presentation": {
                "accuracy": self.presentation_accuracy,
                "correct": self.presentation_correct,
                "abstentions": self.presentation_abstentions,
                "detection_failures": self.detection_failures,
            },
            "lie": {
                "accuracy": self.lie_accuracy,
                "correct": self.lie_correct,
                "abstentions": self.lie_abstentions,
                "segmentation_failures": self.segmentation_failures,
            },
            "cases": [
                {**asdict(c), "lie_abstention_reasons": list(c.lie_abstention_reasons)}
                for c in self.cases
            ],
        }


class EvaluationRunner:
    def __init__(self, criteria: Optional[QualityCriteria] = None, jobs: int = 1):
        self.criteria = criteria or QualityCriteria()
        self.jobs = jobs
        self.logger = logging.getLogger(__name__)

    def score(self, truth: GroundTruth, report: ExamReport) -> CaseOutcome:
        outcome = CaseOutcome(
            exam_id=report.exam_id,
            truth_presentation=str(truth.presentation),
            truth_lie=str(truth.lie),
            presentation=str(report.presentation.exam_label),
            presentation_status=report.presentation.status,
            lie=str(report.lie.exam_label),
            lie_status=report.lie.status,
            lie_abstention_reasons=tuple(sorted({a.reason for a in report.lie.abstentions})),
        )
        if not outcome.presentation_correct:
            self.logger.warning(
                f"Exam {outcome.exam_id}: presentation {outcome.presentation} "
                f"(expected {outcome.truth_presentation}, status {outcome.presentation_status})"
            )
        if not outcome.lie_correct:
            reasons = ", ".join(outcome.lie_abstention_reasons) or "none"
            self.logger.warning(
                f"Exam {outcome.exam_id}: lie {outcome.lie} (expected {outcome.truth_lie}, "
                f"status {outcome.lie_status}, frame abstentions: {reasons})"
            )
        return outcome

    async def evaluate(self, cases: Iterable[Tuple[Exam, GroundTruth]]) -> EvaluationSummary:
        summary = EvaluationSummary()
        async with ExamClassifier(self.criteria, jobs=self.jobs) as classifier:
            for exam, truth in cases:
                report = await classifier.classify(exam)
                summary.cases.append(self.score(truth, report))

        self.logger.info(
            f"Evaluated {summary.n_exams} exams: presentation {summary.presentation_correct}/"
            f"{summary.n_exams} ({summary.detection_failures} detection failures), lie "
            f"{summary.lie_correct}/{summary.n_exams} ({summary.segmentation_failures} segmentation failures)"
        )
        return summary


def discover_bundles(root: Union[str, Path]) -> List[Path]:
    """Bundle directories under `root` (root included) that carry ground truth"""
    root = Path(root)
    return sorted(path.parent for path in root.rglob(GROUND_TRUTH_NAME))


def _bundle_cases(paths: Iterable[Path]):
    for path in paths:
        yield load_exam(path), read_ground_truth(path)


def evaluate_directory(
    root: Union[str, Path], criteria: Optional[QualityCriteria] = None, jobs: int = 1
) -> EvaluationSummary:
    runner = EvaluationRunner(criteria, jobs)
    paths = discover_bundles(root)
    runner.logger.info(f"Found {len(paths)} bundles with ground truth under {root}")
    return asyncio.run(runner.evaluate(_bundle_cases(paths)))


def evaluate_synthetic(
    configs: Iterable[SynthConfig], criteria: Optional[QualityCriteria] = None, jobs: int = 1
) -> EvaluationSummary:
    """Score in-memory synthetic exams without writing bundles"""
    runner = EvaluationRunner(criteria, jobs)
    return asyncio.run(runner.evaluate(build_exam(cfg) for cfg in configs))
