"""
Utility tools

- Evaluation runner scoring exams against ground truth
"""

from .evaluation_runner import EvaluationRunner, EvaluationSummary, evaluate_directory, evaluate_synthetic

__all__ = ["EvaluationRunner", "EvaluationSummary", "evaluate_directory", "evaluate_synthetic"]
