#!/usr/bin/env python3
"""
Concurrent exam classification

`ExamClassifier` runs the per-sweep presentation matching and the per-frame
lie analysis on a thread pool and reassembles the results in exam order,
so the report does not depend on the number of workers.
"""

import asyncio
import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from app import __version__
from app.core.config import QualityCriteria
from app.core.errors import ConfigError
from app.models import Exam, LieResult, PresentationResult
from app.pipeline.lie import assess_frame, tally_lie
from app.pipeline.presentation import aggregate, classify_sweep_with
from app.pipeline.report import ExamReport


class ExamClassifier:
    def __init__(self, criteria: Optional[QualityCriteria] = None, jobs: int = 1):
        if jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {jobs}")
        self.criteria = (criteria or QualityCriteria()).validate()
        self.jobs = jobs
        self.executor: Optional[ThreadPoolExecutor] = None
        self.logger = logging.getLogger(__name__)

    async def __aenter__(self):
        self.executor = ThreadPoolExecutor(
            max_workers=self.jobs, thread_name_prefix="exam-classifier"
        )
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        if self.executor:
            self.executor.shutdown(wait=True)
            self.executor = None

    async def _run(self, func, *args):
        if self.executor is None:
            raise RuntimeError("ExamClassifier must be used as 'async with ExamClassifier(...)'")
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self.executor, functools.partial(func, *args))

    async def classify_presentation(self, exam: Exam) -> PresentationResult:
        per_sweep = await asyncio.gather(
            *(self._run(classify_sweep_with, sweep, self.criteria) for sweep in exam.sweeps)
        )
        return aggregate(per_sweep)

    async def classify_lie(self, exam: Exam) -> LieResult:
        assessments = await asyncio.gather(
            *(
                self._run(assess_frame, sweep.segmentations[t], self.criteria, sweep.sweep_id, t)
                for sweep in exam.sweeps
                for t in sorted(sweep.segmentations)
            )
        )
        return tally_lie(assessments)

    async def classify(self, exam: Exam) -> ExamReport:
        self.logger.info(f"Classifying exam {exam.exam_id} with {self.jobs} worker(s)")
        presentation, lie = await asyncio.gather(
            self.classify_presentation(exam), self.classify_lie(exam)
        )
        self.logger.info(
            f"Exam {exam.exam_id}: presentation={presentation.exam_label} "
            f"({presentation.votes_cephalic}-{presentation.votes_breech}), "
            f"lie={lie.exam_label} ({lie.votes_left}-{lie.votes_right})"
        )
        return ExamReport(
            exam_id=exam.exam_id,
            presentation=presentation,
            lie=lie,
            criteria_used=self.criteria,
            tool_version=__version__,
        )


def classify_exam(
    exam: Exam, criteria: Optional[QualityCriteria] = None, jobs: int = 1
) -> ExamReport:
    """Synchronous wrapper around ExamClassifier"""

    async def _classify() -> ExamReport:
        async with ExamClassifier(criteria, jobs=jobs) as classifier:
            return await classifier.classify(exam)

    return asyncio.run(_classify())
