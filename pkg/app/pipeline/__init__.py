"""
Classification pipeline

This package contains the two independent classifiers and their runner:
- Presentation by exponential template matching and sweep voting
- Lie from thalamus/CSP landmarks with a thalamus-only fallback
- Concurrent exam classifier producing JSON reports
"""

from .classifier import ExamClassifier, classify_exam
from .lie import aggregate_lie, check_fallback_criteria, classify_frame
from .presentation import aggregate, classify_sweep
from .report import ExamReport

__all__ = [
    "ExamClassifier",
    "classify_exam",
    "aggregate_lie",
    "check_fallback_criteria",
    "classify_frame",
    "aggregate",
    "classify_sweep",
    "ExamReport",
]
