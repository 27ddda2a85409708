#!/usr/bin/env python3
"""
Fetal lie from thalamus and CSP masks

The thalamus sits behind the CSP, so the vector from the thalamus geodesic
center to the CSP centroid points where the fetus faces. When only the
thalamus is usable, its crescent shape gives the direction instead: the
normal to the chord joining the two skeleton endpoints, pointing from the
arc toward the chord. That path only runs when the thalamus passes the
quality criteria; otherwise the frame abstains.

Image axes: rows grow downward, columns grow rightward. "Right" means a
positive column component unless `flip_lateral` is set.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from app.core.config import QualityCriteria
from app.core.errors import FallbackRejectedError, GeometryError, MorphologyError
from app.core.morphology import (
    Skeleton,
    centroid,
    connected_components,
    geodesic_center,
    label_pixel_groups,
    largest_component_mask,
    prune_skeleton,
    skeleton_endpoints,
    skeletonize,
    solidity,
)
from app.models import (
    BinaryMask,
    Exam,
    FrameAbstention,
    FrameLie,
    FrameSegmentation,
    LieBin,
    LieLabel,
    LieMethod,
    LieResult,
    Pixel,
    Vector,
)

logger = logging.getLogger(__name__)

DEFAULT_CRITERIA = QualityCriteria()

RULE_SINGLE_COMPONENT = "single_component"
RULE_MIN_PIXELS = "min_pixels"
RULE_MIN_SOLIDITY = "min_solidity"
RULE_ENDPOINT_COUNT = "endpoint_count"
RULE_MIN_MIDPOINT_DISTANCE = "min_midpoint_distance"


@dataclass(frozen=True)
class ThalamusLandmarks:
    mask: BinaryMask  # largest component of the thalamus
    skeleton: Skeleton
    geodesic_center: Pixel
    endpoints: Tuple[Pixel, ...]

    @property
    def midpoint(self) -> Optional[Tuple[float, float]]:
        if len(self.endpoints) != 2:
            return None
        (r1, c1), (r2, c2) = self.endpoints
        return (r1 + r2) / 2.0, (c1 + c2) / 2.0

    @property
    def midpoint_distance(self) -> Optional[float]:
        midpoint = self.midpoint
        if midpoint is None:
            return None
        g_row, g_col = self.geodesic_center
        return math.hypot(midpoint[0] - g_row, midpoint[1] - g_col)


@dataclass(frozen=True)
class CriteriaCheck:
    passed: bool
    failed: Tuple[str, ...] = ()
    component_count: int = 0
    pixel_count: int = 0
    solidity: Optional[float] = None
    endpoint_count: Optional[int] = None
    midpoint_distance: Optional[float] = None
    landmarks: Optional[ThalamusLandmarks] = None


@dataclass(frozen=True)
class FrameAssessment:
    sweep_id: str
    frame_index: int
    lie: Optional[FrameLie] = None
    reason: Optional[str] = None


def _unit(d_row: float, d_col: float) -> Vector:
    norm = math.hypot(d_row, d_col)
    if norm < 1e-12:
        raise GeometryError("facing vector has zero length")
    return d_row / norm, d_col / norm


def thalamus_landmarks(
    thalamus: BinaryMask, criteria: QualityCriteria = DEFAULT_CRITERIA
) -> ThalamusLandmarks:
    component = largest_component_mask(thalamus)
    if component.is_empty:
        raise MorphologyError("thalamus mask is empty")

    skeleton = prune_skeleton(skeletonize(component), criteria.max_spur_length)
    pieces = label_pixel_groups(skeleton.pixels)
    if len(pieces) > 1:
        # thinning of one component should give one piece; keep the largest
        logger.debug(f"Thalamus skeleton split into {len(pieces)} pieces")
        skeleton = Skeleton(pixels=pieces[0], source_dims=skeleton.source_dims)

    return ThalamusLandmarks(
        mask=component,
        skeleton=skeleton,
        geodesic_center=geodesic_center(skeleton),
        endpoints=tuple(skeleton_endpoints(skeleton)),
    )


def check_fallback_criteria(
    thalamus: BinaryMask, criteria: QualityCriteria = DEFAULT_CRITERIA
) -> CriteriaCheck:
    """
    Evaluate the thalamus-only criteria in order, stopping at the first
    failure: single component, pixel count, solidity, exactly two skeleton
    endpoints, chord midpoint to geodesic center distance. All thresholds
    are inclusive.
    """
    components = connected_components(thalamus)
    measured = {"component_count": len(components)}

    if criteria.require_single_component and len(components) != 1:
        return CriteriaCheck(passed=False, failed=(RULE_SINGLE_COMPONENT,), **measured)
    if not components:
        return CriteriaCheck(passed=False, failed=(RULE_MIN_PIXELS,), **measured)

    largest = components[0]
    measured["pixel_count"] = largest.pixel_count
    if largest.pixel_count < criteria.min_pixels:
        return CriteriaCheck(passed=False, failed=(RULE_MIN_PIXELS,), **measured)

    measured["solidity"] = solidity(largest)
    if measured["solidity"] < criteria.min_solidity:
        return CriteriaCheck(passed=False, failed=(RULE_MIN_SOLIDITY,), **measured)

    landmarks = thalamus_landmarks(thalamus, criteria)
    measured["landmarks"] = landmarks
    measured["endpoint_count"] = len(landmarks.endpoints)
    if len(landmarks.endpoints) != 2:
        return CriteriaCheck(passed=False, failed=(RULE_ENDPOINT_COUNT,), **measured)

    measured["midpoint_distance"] = landmarks.midpoint_distance
    if landmarks.midpoint_distance < criteria.min_midpoint_distance:
        return CriteriaCheck(passed=False, failed=(RULE_MIN_MIDPOINT_DISTANCE,), **measured)

    return CriteriaCheck(passed=True, **measured)


def facing_vector_dual(
    thalamus: BinaryMask, csp: BinaryMask, criteria: QualityCriteria = DEFAULT_CRITERIA
) -> Vector:
    """Unit vector from the thalamus geodesic center to the CSP centroid"""
    if thalamus.is_empty or csp.is_empty:
        raise GeometryError("dual-landmark facing needs non-empty thalamus and CSP masks")
    landmarks = thalamus_landmarks(thalamus, criteria)
    # a fragmented CSP contributes its largest fragment
    csp_row, csp_col = centroid(connected_components(csp)[0])
    g_row, g_col = landmarks.geodesic_center
    return _unit(csp_row - g_row, csp_col - g_col)


def fallback_direction(endpoints: Sequence[Pixel], center: Pixel) -> Vector:
    """
    Unit normal to the endpoint chord, on the side where the chord midpoint
    lies relative to the geodesic center (arc toward concavity).
    """
    if len(endpoints) != 2:
        raise GeometryError(f"fallback direction needs 2 endpoints, got {len(endpoints)}")
    (r1, c1), (r2, c2) = endpoints
    normal_row, normal_col = -(c2 - c1), (r2 - r1)
    toward_row = (r1 + r2) / 2.0 - center[0]
    toward_col = (c1 + c2) / 2.0 - center[1]
    side = normal_row * toward_row + normal_col * toward_col
    if side == 0:
        raise GeometryError("chord midpoint does not fix a side of the chord")
    if side < 0:
        normal_row, normal_col = -normal_row, -normal_col
    return _unit(normal_row, normal_col)


def facing_vector_fallback(
    thalamus: BinaryMask, criteria: QualityCriteria = DEFAULT_CRITERIA
) -> Vector:
    check = check_fallback_criteria(thalamus, criteria)
    if not check.passed:
        raise FallbackRejectedError(check.failed)
    landmarks = check.landmarks
    return fallback_direction(landmarks.endpoints, landmarks.geodesic_center)


def bin_direction(vector: Vector, criteria: QualityCriteria = DEFAULT_CRITERIA) -> LieBin:
    d_col = vector[1]
    if d_col >= criteria.min_lateral_ratio:
        result = LieBin.RIGHT
    elif d_col <= -criteria.min_lateral_ratio:
        result = LieBin.LEFT
    else:
        return LieBin.INDETERMINATE

    if criteria.flip_lateral:
        result = LieBin.LEFT if result == LieBin.RIGHT else LieBin.RIGHT
    return result


def assess_frame(
    seg: FrameSegmentation,
    criteria: QualityCriteria = DEFAULT_CRITERIA,
    sweep_id: str = "",
    frame_index: int = 0,
) -> FrameAssessment:
    """Classify one frame, keeping the abstention reason when there is no result"""
    thalamus = seg.thalamus if seg.thalamus is not None and not seg.thalamus.is_empty else None
    csp = seg.csp if seg.csp is not None and not seg.csp.is_empty else None
    if thalamus is None:
        return FrameAssessment(sweep_id, frame_index, reason="no_thalamus")

    vector, method = None, None
    if csp is not None:
        try:
            vector = facing_vector_dual(thalamus, csp, criteria)
            method = LieMethod.DUAL_LANDMARK
        except (GeometryError, MorphologyError) as e:
            logger.debug(f"Sweep {sweep_id} frame {frame_index}: dual landmark failed: {e}")

    if vector is None:
        check = check_fallback_criteria(thalamus, criteria)
        if not check.passed:
            return FrameAssessment(sweep_id, frame_index, reason=f"criteria:{check.failed[0]}")
        try:
            vector = fallback_direction(check.landmarks.endpoints, check.landmarks.geodesic_center)
        except GeometryError:
            return FrameAssessment(sweep_id, frame_index, reason="degenerate_geometry")
        method = LieMethod.THALAMUS_ONLY

    lie = FrameLie(
        frame_index=frame_index,
        vector=vector,
        method=method,
        bin=bin_direction(vector, criteria),
        sweep_id=sweep_id,
    )
    return FrameAssessment(sweep_id, frame_index, lie=lie)


def classify_frame(
    seg: FrameSegmentation,
    criteria: QualityCriteria = DEFAULT_CRITERIA,
    sweep_id: str = "",
    frame_index: int = 0,
) -> Optional[FrameLie]:
    return assess_frame(seg, criteria, sweep_id, frame_index).lie


def tally_lie(assessments: Iterable[FrameAssessment]) -> LieResult:
    """Frame-level majority vote; indeterminate bins and abstentions do not vote"""
    frames: List[FrameLie] = []
    abstentions: List[FrameAbstention] = []
    for assessment in assessments:
        if assessment.lie is not None:
            frames.append(assessment.lie)
        else:
            abstentions.append(
                FrameAbstention(assessment.sweep_id, assessment.frame_index, assessment.reason)
            )
            logger.info(
                f"Sweep {assessment.sweep_id} frame {assessment.frame_index}: "
                f"lie abstained ({assessment.reason})"
            )

    votes_left = sum(1 for f in frames if f.bin == LieBin.LEFT)
    votes_right = sum(1 for f in frames if f.bin == LieBin.RIGHT)

    status = "ok"
    if votes_right > votes_left:
        label = LieLabel.RIGHT
    elif votes_left > votes_right:
        label = LieLabel.LEFT
    else:
        label = LieLabel.ABSTAIN
        if votes_left:
            status = "tie"
        elif frames:
            status = "indeterminate"
        elif abstentions:
            status = "criteria_failed"
        else:
            status = "no_segmentation"

    return LieResult(
        frames=tuple(frames),
        exam_label=label,
        votes_left=votes_left,
        votes_right=votes_right,
        abstentions=tuple(abstentions),
        status=status,
    )


def frame_assessments(exam: Exam, criteria: QualityCriteria = DEFAULT_CRITERIA) -> List[FrameAssessment]:
    return [
        assess_frame(sweep.segmentations[t], criteria, sweep.sweep_id, t)
        for sweep in exam.sweeps
        for t in sorted(sweep.segmentations)
    ]


def aggregate_lie(exam: Exam, criteria: QualityCriteria = DEFAULT_CRITERIA) -> LieResult:
    return tally_lie(frame_assessments(exam, criteria))
