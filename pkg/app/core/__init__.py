"""
Core functionality

This package contains the fundamental components:
- Configuration classes and presets
- Exception types
- Exam bundle loading, validation and writing
- Binary-mask morphology
"""

from .config import PresetConfigs, QualityCriteria
from .errors import (
    BundleIOError,
    BundleValidationError,
    ConfigError,
    FallbackRejectedError,
    GeometryError,
    MorphologyError,
    OrientationError,
    PlotError,
)
from .exam_io import load_exam, validate_exam, write_exam

__all__ = [
    "PresetConfigs",
    "QualityCriteria",
    "OrientationError",
    "BundleIOError",
    "BundleValidationError",
    "ConfigError",
    "FallbackRejectedError",
    "GeometryError",
    "MorphologyError",
    "PlotError",
    "load_exam",
    "validate_exam",
    "write_exam",
]
