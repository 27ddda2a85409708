#!/usr/bin/env python3
"""
Shared data models for the orientation pipeline

This module contains the core data structures used across the package
to avoid circular import dependencies. The containers carry no validation
of their own; `app.core.exam_io.validate_exam` checks the invariants and
`load_exam` refuses to return an exam that violates them.

Coordinates are (row, col) with rows increasing downward and columns
increasing rightward. Frame indices are zero-based.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

Pixel = Tuple[int, int]
Vector = Tuple[float, float]


class SweepLabel(StrEnum):
    CEPHALIC = "cephalic"
    BREECH = "breech"
    NO_HEAD = "no_head"


class PresentationLabel(StrEnum):
    CEPHALIC = "cephalic"
    BREECH = "breech"
    ABSTAIN = "abstain"


class LieBin(StrEnum):
    LEFT = "left"
    RIGHT = "right"
    INDETERMINATE = "indeterminate"


class LieLabel(StrEnum):
    LEFT = "left"
    RIGHT = "right"
    ABSTAIN = "abstain"


class LieMethod(StrEnum):
    DUAL_LANDMARK = "dual"
    THALAMUS_ONLY = "fallback"


@dataclass(frozen=True)
class BinaryMask:
    width: int
    height: int
    pixels: FrozenSet[Pixel] = frozenset()

    @classmethod
    def from_array(cls, array: np.ndarray) -> "BinaryMask":
        height, width = array.shape
        rows, cols = np.nonzero(array)
        return cls(
            width=int(width),
            height=int(height),
            pixels=frozenset(zip(rows.tolist(), cols.tolist())),
        )

    def to_array(self) -> np.ndarray:
        array = np.zeros((self.height, self.width), dtype=bool)
        if self.pixels:
            rows, cols = zip(*self.pixels)
            array[list(rows), list(cols)] = True
        return array

    def with_pixels(self, pixels) -> "BinaryMask":
        return BinaryMask(self.width, self.height, frozenset(pixels))

    def flipped_horizontally(self) -> "BinaryMask":
        return self.with_pixels((r, self.width - 1 - c) for r, c in self.pixels)

    def translated(self, d_row: int, d_col: int) -> "BinaryMask":
        return self.with_pixels((r + d_row, c + d_col) for r, c in self.pixels)

    @property
    def is_empty(self) -> bool:
        return not self.pixels


@dataclass(frozen=True)
class FrameSegmentation:
    width: int
    height: int
    thalamus: Optional[BinaryMask] = None
    csp: Optional[BinaryMask] = None

    def masks(self) -> List[BinaryMask]:
        return [m for m in (self.thalamus, self.csp) if m is not None]


@dataclass(frozen=True)
class Sweep:
    sweep_id: str
    n_frames: int
    trace: Tuple[float, ...]  # head probability per frame
    segmentations: Dict[int, FrameSegmentation] = field(default_factory=dict)

    def trace_array(self) -> np.ndarray:
        return np.asarray(self.trace, dtype=float)


@dataclass(frozen=True)
class Exam:
    exam_id: str
    sweeps: Tuple[Sweep, ...]

    def sweep(self, sweep_id: str) -> Optional[Sweep]:
        return next((s for s in self.sweeps if s.sweep_id == sweep_id), None)


@dataclass(frozen=True)
class SweepPresentation:
    sweep_id: str
    sim_cephalic: float
    sim_breech: float
    label: SweepLabel


@dataclass(frozen=True)
class PresentationResult:
    per_sweep: Tuple[SweepPresentation, ...]
    exam_label: PresentationLabel
    votes_cephalic: int
    votes_breech: int
    status: str = "ok"  # 'ok', 'no_head_detected', 'tie'


@dataclass(frozen=True)
class FrameLie:
    frame_index: int
    vector: Vector  # unit (d_row, d_col)
    method: LieMethod
    bin: LieBin
    sweep_id: str = ""


@dataclass(frozen=True)
class FrameAbstention:
    sweep_id: str
    frame_index: int
    reason: str  # 'no_thalamus', 'criteria:<rule>', 'degenerate_geometry'


@dataclass(frozen=True)
class LieResult:
    frames: Tuple[FrameLie, ...]
    exam_label: LieLabel
    votes_left: int
    votes_right: int
    abstentions: Tuple[FrameAbstention, ...] = ()
    status: str = "ok"  # 'ok', 'no_segmentation', 'criteria_failed', 'indeterminate', 'tie'


@dataclass(frozen=True)
class GroundTruth:
    presentation: PresentationLabel
    lie: LieLabel
