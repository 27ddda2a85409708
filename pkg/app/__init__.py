"""
Fetal Orientation from Blind-Sweep Ultrasound

Classifies fetal presentation (cephalic or breech) from per-frame head
probabilities and fetal lie (facing left or right) from thalamus and CSP
segmentations, for exams made of a few freehand caudal-to-cranial sweeps.

## Package Structure

- `core`: Configuration, errors, exam bundle I/O and mask morphology
- `pipeline`: Presentation and lie classifiers, concurrent exam runner, reports
- `synth`: Synthetic exams with known ground truth, brute-force oracles
- `plotting`: SVG figures for traces and lie overlays
- `utils`: Evaluation against ground truth
- `tests`: Test suite

## Quick Imports

```python
from app.core import QualityCriteria, PresetConfigs, load_exam
from app.pipeline import ExamClassifier, classify_exam
from app.synth import SynthConfig, make_exam
```
"""

__version__ = "0.1.0"

# Convenience imports for easy access to main classes
from .core import PresetConfigs, QualityCriteria, load_exam, validate_exam, write_exam
from .models import Exam, FrameSegmentation, Sweep, BinaryMask, LieResult, PresentationResult
from .pipeline import ExamClassifier, ExamReport, classify_exam
from .synth import SynthConfig, build_exam, make_exam

__all__ = [
    # Core
    "PresetConfigs",
    "QualityCriteria",
    "load_exam",
    "validate_exam",
    "write_exam",
    # Models
    "Exam",
    "Sweep",
    "FrameSegmentation",
    "BinaryMask",
    "PresentationResult",
    "LieResult",
    # Pipeline
    "ExamClassifier",
    "ExamReport",
    "classify_exam",
    # Synthetic data
    "SynthConfig",
    "build_exam",
    "make_exam",
]
