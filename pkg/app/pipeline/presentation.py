#!/usr/bin/env python3
"""
Fetal presentation by exponential template matching

Each sweep runs caudal to cranial, so a cephalic head shows up early in the
head-probability trace and a breech head late. The trace is compared with
two templates by cosine similarity and the sweeps vote.

Templates, for frames t = 0..N-1:

    cephalic(t) = exp(N - t) / exp(N) = exp(-t)
    breech(t)   = exp(t) / exp(N)     = exp(t - N)

The shifted forms are what gets evaluated, so nothing overflows for long
sweeps.
"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from app.core.config import QualityCriteria
from app.core.errors import ConfigError
from app.models import (
    PresentationLabel,
    PresentationResult,
    Sweep,
    SweepLabel,
    SweepPresentation,
)

logger = logging.getLogger(__name__)

DEFAULT_DETECTION_THRESHOLD = 0.5


def _frame_axis(n_frames: int) -> np.ndarray:
    if n_frames < 1:
        raise ConfigError(f"template length must be at least 1, got {n_frames}")
    return np.arange(n_frames, dtype=float)


def template_cephalic(n_frames: int) -> np.ndarray:
    return np.exp(-_frame_axis(n_frames))


def template_breech(n_frames: int) -> np.ndarray:
    return np.exp(_frame_axis(n_frames) - n_frames)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vectors must have equal 1-D shapes, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise ValueError("vectors must not be empty")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(np.dot(a, b) / (norm_a * norm_b))


def detect_head(sweep: Sweep, threshold: float = DEFAULT_DETECTION_THRESHOLD) -> bool:
    """A head is present when the trace reaches the threshold anywhere (inclusive)"""
    if not sweep.trace:
        return False
    return max(sweep.trace) >= threshold


def gate_trace(trace: np.ndarray, noise_floor: float) -> np.ndarray:
    if noise_floor <= 0:
        return trace
    return np.where(trace < noise_floor, 0.0, trace)


def classify_sweep(
    sweep: Sweep,
    threshold: float = DEFAULT_DETECTION_THRESHOLD,
    noise_floor: float = 0.0,
) -> SweepPresentation:
    if not detect_head(sweep, threshold):
        logger.info(f"Sweep {sweep.sweep_id}: no head detected (max probability below {threshold})")
        return SweepPresentation(
            sweep_id=sweep.sweep_id,
            sim_cephalic=0.0,
            sim_breech=0.0,
            label=SweepLabel.NO_HEAD,
        )

    trace = gate_trace(sweep.trace_array(), noise_floor)
    sim_cephalic = cosine_similarity(trace, template_cephalic(sweep.n_frames))
    sim_breech = cosine_similarity(trace, template_breech(sweep.n_frames))
    # exact ties go to cephalic, the far more common presentation
    label = SweepLabel.CEPHALIC if sim_cephalic >= sim_breech else SweepLabel.BREECH

    logger.debug(
        f"Sweep {sweep.sweep_id}: sim_c={sim_cephalic:.6g} sim_b={sim_breech:.6g} -> {label}"
    )
    return SweepPresentation(
        sweep_id=sweep.sweep_id,
        sim_cephalic=sim_cephalic,
        sim_breech=sim_breech,
        label=label,
    )


def classify_sweep_with(sweep: Sweep, criteria: QualityCriteria) -> SweepPresentation:
    return classify_sweep(
        sweep,
        threshold=criteria.detection_threshold,
        noise_floor=criteria.trace_noise_floor,
    )


def aggregate(per_sweep: Iterable[SweepPresentation]) -> PresentationResult:
    """
    Majority vote over head-positive sweeps.

    An exact tie is broken by the larger summed similarity margin of each
    side's voters; if the margins tie too, or nobody voted, the exam abstains.
    """
    per_sweep = tuple(per_sweep)
    cephalic = [s for s in per_sweep if s.label == SweepLabel.CEPHALIC]
    breech = [s for s in per_sweep if s.label == SweepLabel.BREECH]
    votes_c, votes_b = len(cephalic), len(breech)

    status = "ok"
    label: Optional[PresentationLabel] = None
    if votes_c == 0 and votes_b == 0:
        label, status = PresentationLabel.ABSTAIN, "no_head_detected"
    elif votes_c > votes_b:
        label = PresentationLabel.CEPHALIC
    elif votes_b > votes_c:
        label = PresentationLabel.BREECH
    else:
        margin_c = sum(s.sim_cephalic - s.sim_breech for s in cephalic)
        margin_b = sum(s.sim_breech - s.sim_cephalic for s in breech)
        if margin_c > margin_b:
            label = PresentationLabel.CEPHALIC
        elif margin_b > margin_c:
            label = PresentationLabel.BREECH
        else:
            label, status = PresentationLabel.ABSTAIN, "tie"
        logger.info(
            f"Presentation vote tied {votes_c}-{votes_b}; margins "
            f"{margin_c:.6g} vs {margin_b:.6g} -> {label}"
        )

    return PresentationResult(
        per_sweep=per_sweep,
        exam_label=label,
        votes_cephalic=votes_c,
        votes_breech=votes_b,
        status=status,
    )
