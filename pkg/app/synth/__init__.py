"""
Synthetic exams

Generator for exams with known presentation and lie, and brute-force
reference implementations used to check the morphology measurements.
"""

from .generator import (
    SynthBundle,
    SynthConfig,
    build_exam,
    make_exam,
    make_frame_masks,
    make_trace,
    read_ground_truth,
)
from .oracles import oracle_geodesic_center, oracle_hull_pixel_count

__all__ = [
    "SynthBundle",
    "SynthConfig",
    "build_exam",
    "make_exam",
    "make_frame_masks",
    "make_trace",
    "read_ground_truth",
    "oracle_geodesic_center",
    "oracle_hull_pixel_count",
]
