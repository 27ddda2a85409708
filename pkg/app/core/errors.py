"""
Exception types raised by the orientation pipeline

Classification outcomes such as "no head detected" or "criteria not met"
are results, not errors; these exceptions cover malformed inputs, I/O
failures and requests that cannot be satisfied.
"""

from typing import List, Sequence


class OrientationError(Exception):
    """Base class for all package errors"""


class BundleValidationError(OrientationError):
    def __init__(self, message: str, violations: Sequence[str] = ()):
        self.violations: List[str] = list(violations)
        if self.violations:
            message = f"{message}: " + "; ".join(self.violations)
        super().__init__(message)


class BundleIOError(OrientationError):
    pass


class ConfigError(OrientationError):
    pass


class GeometryError(OrientationError):
    pass


class MorphologyError(OrientationError):
    pass


class FallbackRejectedError(OrientationError):
    def __init__(self, failed_rules: Sequence[str]):
        self.failed_rules: List[str] = list(failed_rules)
        super().__init__(
            f"thalamus fails fallback criteria: {', '.join(self.failed_rules)}"
        )


class PlotError(OrientationError):
    pass
