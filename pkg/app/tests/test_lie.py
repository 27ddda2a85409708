#!/usr/bin/env python3
"""
Unit tests for lie.py

Facing vectors from both landmark paths, the fallback criteria, binning and
the frame vote.
"""

import math
from dataclasses import replace

import pytest

from app.core.config import QualityCriteria
from app.core.errors import FallbackRejectedError, GeometryError
from app.core.morphology import Component, solidity
from app.models import (
    BinaryMask,
    Exam,
    FrameLie,
    FrameSegmentation,
    LieBin,
    LieLabel,
    LieMethod,
)
from app.pipeline.lie import (
    FrameAssessment,
    aggregate_lie,
    assess_frame,
    bin_direction,
    check_fallback_criteria,
    classify_frame,
    facing_vector_dual,
    facing_vector_fallback,
    fallback_direction,
    tally_lie,
    thalamus_landmarks,
)
from app.synth.generator import build_exam, crescent_mask, csp_mask
from app.synth.oracles import oracle_geodesic_center, oracle_hull_pixel_count
from app.tests.conftest import crescent, head_segmentation, mask_of

FACING_ANGLES = [0.0, 23.0, 45.0, 90.0, 135.0, 180.0, 211.0, 270.0, 315.0]


def block(row0, col0, rows, cols, size=100):
    return mask_of(
        [(r, c) for r in range(row0, row0 + rows) for c in range(col0, col0 + cols)],
        width=size,
        height=size,
    )


def flip_segmentation(seg: FrameSegmentation) -> FrameSegmentation:
    return FrameSegmentation(
        width=seg.width,
        height=seg.height,
        thalamus=seg.thalamus.flipped_horizontally() if seg.thalamus else None,
        csp=seg.csp.flipped_horizontally() if seg.csp else None,
    )


def flip_exam(exam: Exam) -> Exam:
    sweeps = tuple(
        replace(s, segmentations={t: flip_segmentation(seg) for t, seg in s.segmentations.items()})
        for s in exam.sweeps
    )
    return replace(exam, sweeps=sweeps)


def lie_at(bin_, frame_index=0):
    return FrameAssessment(
        "V1", frame_index, lie=FrameLie(frame_index, (0.0, 1.0), LieMethod.DUAL_LANDMARK, bin_, "V1")
    )


def abstained(frame_index=0, reason="criteria:min_pixels"):
    return FrameAssessment("V1", frame_index, reason=reason)


def angle_between(a, b):
    dot = max(-1.0, min(1.0, a[0] * b[0] + a[1] * b[1]))
    return math.degrees(math.acos(dot))


class TestThalamusLandmarks:
    """Test skeleton landmarks of the thalamus"""

    def test_crescent_has_two_endpoints(self):
        landmarks = thalamus_landmarks(crescent(0.0))
        assert len(landmarks.endpoints) == 2
        assert landmarks.geodesic_center in landmarks.skeleton.pixels

    def test_geodesic_center_sits_on_the_arc(self):
        """The center lies behind the head center, on the mask"""
        landmarks = thalamus_landmarks(crescent(0.0))
        row, col = landmarks.geodesic_center
        assert (row, col) in landmarks.mask.pixels
        assert col < 48 - 10

    def test_uses_largest_component(self):
        mask = crescent(0.0).with_pixels(crescent(0.0).pixels | {(2, 2), (2, 3)})
        landmarks = thalamus_landmarks(mask)
        assert (2, 2) not in landmarks.mask.pixels

    def test_midpoint_needs_two_endpoints(self):
        landmarks = thalamus_landmarks(mask_of({(5, 5)}))
        assert landmarks.midpoint is None
        assert landmarks.midpoint_distance is None


class TestCheckFallbackCriteria:
    """Test the thalamus-only quality criteria"""

    def test_fifty_four_pixel_blob_fails_on_pixel_count(self, criteria):
        check = check_fallback_criteria(block(10, 10, 6, 9), criteria)
        assert check.passed is False
        assert check.failed == ("min_pixels",)
        assert check.pixel_count == 54

    def test_fragmented_mask_fails_single_component(self, criteria):
        mask = block(10, 10, 8, 8).with_pixels(block(10, 10, 8, 8).pixels | {(40, 40)})
        check = check_fallback_criteria(mask, criteria)
        assert check.failed == ("single_component",)
        assert check.component_count == 2

    def test_empty_mask_fails(self, criteria):
        check = check_fallback_criteria(mask_of([]), criteria)
        assert check.passed is False

    def test_half_ring_fails_solidity(self, criteria):
        """A 180 degree crescent is too hollow"""
        check = check_fallback_criteria(crescent(0.0, outer=12, inner=7, span=180), criteria)
        assert check.failed == ("min_solidity",)
        assert check.solidity < 0.82

    def test_straight_line_fails_midpoint_distance(self, criteria):
        """The chord midpoint of a straight skeleton sits on its center"""
        line = mask_of([(10, c) for c in range(10, 70)], width=100, height=100)
        check = check_fallback_criteria(line, criteria)
        assert check.failed == ("min_midpoint_distance",)
        assert check.midpoint_distance == pytest.approx(0.5)

    @pytest.mark.parametrize("facing", FACING_ANGLES)
    def test_default_crescent_passes(self, criteria, facing):
        check = check_fallback_criteria(crescent(facing), criteria)
        assert check.passed, check.failed
        assert check.failed == ()
        assert check.endpoint_count == 2

    def test_default_crescent_passes_at_every_whole_degree(self, criteria):
        failures = {}
        for facing in range(360):
            check = check_fallback_criteria(crescent(float(facing)), criteria)
            if not check.passed or check.endpoint_count != 2:
                failures[facing] = (check.failed, check.endpoint_count)
        assert failures == {}

    def test_thresholds_are_inclusive(self):
        """A mask measuring exactly at every threshold passes"""
        mask = crescent(17.0)
        measured = check_fallback_criteria(mask, QualityCriteria())
        boundary = QualityCriteria(
            min_pixels=measured.pixel_count,
            min_solidity=measured.solidity,
            min_midpoint_distance=measured.midpoint_distance,
        )
        assert check_fallback_criteria(mask, boundary).passed

        for field_name, bump, rule in [
            ("min_pixels", measured.pixel_count + 1, "min_pixels"),
            ("min_solidity", measured.solidity + 1e-9, "min_solidity"),
            ("min_midpoint_distance", measured.midpoint_distance + 1e-9, "min_midpoint_distance"),
        ]:
            check = check_fallback_criteria(mask, replace(boundary, **{field_name: bump}))
            assert check.failed == (rule,)

    def test_small_crescent_agrees_with_oracles(self, criteria):
        """A 12/7 px, 90 degree crescent is judged on independently measured values"""
        mask = crescent(0.0, outer=12, inner=7, span=90)
        check = check_fallback_criteria(mask, criteria)
        pixels = set(mask.pixels)
        assert check.pixel_count == len(pixels)
        measured_solidity = solidity(Component(frozenset(pixels)))
        assert measured_solidity == pytest.approx(len(pixels) / oracle_hull_pixel_count(pixels))

        landmarks = thalamus_landmarks(mask, criteria)
        assert landmarks.geodesic_center == oracle_geodesic_center(landmarks.skeleton.pixels)
        expected = (
            len(pixels) >= criteria.min_pixels
            and measured_solidity >= criteria.min_solidity
            and len(landmarks.endpoints) == 2
            and landmarks.midpoint_distance >= criteria.min_midpoint_distance
        )
        assert check.passed == expected

    def test_raising_min_pixels_never_helps(self, rng):
        """Stricter pixel thresholds never turn a failure into a pass"""
        angles = rng.uniform(0, 360, 6)
        masks = [
            crescent(float(a), outer=o, inner=o - 9) for a, o in zip(angles, [16, 18, 20, 22, 24, 26])
        ]
        masks.append(block(10, 10, 6, 9))
        for mask in masks:
            failed_before = False
            for min_pixels in [10, 55, 100, 200, 300, 500, 1000]:
                passed = check_fallback_criteria(mask, QualityCriteria(min_pixels=min_pixels)).passed
                assert not (failed_before and passed)
                failed_before = failed_before or not passed


class TestFacingVectorDual:
    """Test the thalamus-to-CSP vector"""

    def test_points_along_columns(self):
        thalamus = mask_of([(r, 40) for r in range(45, 56)], width=100, height=100)
        csp = block(49, 59, 3, 3)
        assert facing_vector_dual(thalamus, csp) == pytest.approx((0.0, 1.0))

    def test_points_up(self):
        thalamus = mask_of([(r, 40) for r in range(45, 56)], width=100, height=100)
        csp = block(29, 39, 3, 3)
        assert facing_vector_dual(thalamus, csp) == pytest.approx((-1.0, 0.0))

    def test_coincident_points_raise(self):
        thalamus = mask_of([(r, 40) for r in range(45, 56)], width=100, height=100)
        with pytest.raises(GeometryError):
            facing_vector_dual(thalamus, mask_of({(50, 40)}, width=100, height=100))

    def test_empty_csp_raises(self):
        with pytest.raises(GeometryError):
            facing_vector_dual(crescent(0.0), mask_of([], width=96, height=96))

    def test_synthetic_head_facing_right(self, right_facing_head):
        d_row, d_col = facing_vector_dual(right_facing_head.thalamus, right_facing_head.csp)
        assert d_col > 0.9
        assert d_row ** 2 + d_col ** 2 == pytest.approx(1.0)

    def test_fragmented_csp_uses_largest_fragment(self, right_facing_head):
        csp = right_facing_head.csp.with_pixels(right_facing_head.csp.pixels | {(90, 2)})
        assert facing_vector_dual(right_facing_head.thalamus, csp) == pytest.approx(
            facing_vector_dual(right_facing_head.thalamus, right_facing_head.csp)
        )

    def test_translation_invariance(self, right_facing_head):
        base = facing_vector_dual(right_facing_head.thalamus, right_facing_head.csp)
        moved = facing_vector_dual(
            right_facing_head.thalamus.translated(3, -5), right_facing_head.csp.translated(3, -5)
        )
        assert moved == pytest.approx(base, abs=1e-9)


class TestFallbackDirection:
    """Test the chord normal"""

    def test_opening_right(self):
        assert fallback_direction([(0, 5), (10, 5)], (5, 0)) == pytest.approx((0.0, 1.0))

    def test_opening_left(self):
        assert fallback_direction([(0, 5), (10, 5)], (5, 10)) == pytest.approx((0.0, -1.0))

    def test_center_on_chord_raises(self):
        with pytest.raises(GeometryError):
            fallback_direction([(0, 5), (10, 5)], (5, 5))

    def test_needs_two_endpoints(self):
        with pytest.raises(GeometryError):
            fallback_direction([(0, 5)], (5, 0))

    def test_half_ring_opening_right(self):
        landmarks = thalamus_landmarks(crescent(0.0, outer=12, inner=7, span=180))
        d_row, d_col = fallback_direction(landmarks.endpoints, landmarks.geodesic_center)
        assert d_col > 0.9

    def test_mirrored_half_ring_opens_left(self):
        mask = crescent(0.0, outer=12, inner=7, span=180).flipped_horizontally()
        landmarks = thalamus_landmarks(mask)
        d_row, d_col = fallback_direction(landmarks.endpoints, landmarks.geodesic_center)
        assert d_col < -0.9

    def test_fallback_vector_rejects_failing_mask(self):
        with pytest.raises(FallbackRejectedError) as excinfo:
            facing_vector_fallback(block(10, 10, 6, 9))
        assert excinfo.value.failed_rules == ["min_pixels"]

    @pytest.mark.parametrize("facing", [0.0, 180.0])
    def test_fallback_follows_the_opening(self, facing):
        d_row, d_col = facing_vector_fallback(crescent(facing))
        assert math.copysign(1.0, d_col) == (1.0 if facing == 0.0 else -1.0)
        assert abs(d_col) > 0.9

    def test_translation_invariance(self):
        mask = crescent(33.0)
        assert facing_vector_fallback(mask.translated(-4, 6)) == pytest.approx(
            facing_vector_fallback(mask), abs=1e-9
        )

    def test_agrees_with_dual_landmark(self, rng):
        """Both paths point within 45 degrees of each other on random poses"""
        shape, center = (128, 128), (64, 64)
        agreeing, evaluated = 0, 0
        for _ in range(200):
            facing = float(rng.uniform(0, 360))
            scale = float(rng.uniform(1.0, 1.4))
            thalamus = BinaryMask.from_array(
                crescent_mask(shape, center, 24 * scale, 14 * scale, 90.0, facing)
            )
            csp = BinaryMask.from_array(csp_mask(shape, center, 30 * scale, (6.0, 4.0), facing))
            if not check_fallback_criteria(thalamus).passed:
                continue
            evaluated += 1
            dual = facing_vector_dual(thalamus, csp)
            fallback = facing_vector_fallback(thalamus)
            agreeing += angle_between(dual, fallback) < 45.0
        assert evaluated >= 100
        assert agreeing >= 0.95 * evaluated


class TestBinDirection:
    """Test left/right binning"""

    def test_right(self, criteria):
        assert bin_direction((0.0, 1.0), criteria) == LieBin.RIGHT

    def test_left(self, criteria):
        assert bin_direction((0.99, -0.141), criteria) == LieBin.LEFT

    def test_vertical_is_indeterminate(self, criteria):
        assert bin_direction((1.0, 0.0), criteria) == LieBin.INDETERMINATE

    def test_band_edge_is_inclusive(self, criteria):
        assert bin_direction((0.9987, 0.05), criteria) == LieBin.RIGHT
        assert bin_direction((0.9987, -0.05), criteria) == LieBin.LEFT

    def test_flip_lateral(self):
        flipped = QualityCriteria(flip_lateral=True)
        assert bin_direction((0.0, 1.0), flipped) == LieBin.LEFT
        assert bin_direction((0.0, -1.0), flipped) == LieBin.RIGHT
        assert bin_direction((1.0, 0.0), flipped) == LieBin.INDETERMINATE


class TestClassifyFrame:
    """Test per-frame dispatch between the two paths"""

    def test_both_masks_use_dual_landmark(self, right_facing_head, criteria):
        lie = classify_frame(right_facing_head, criteria)
        assert lie.method == LieMethod.DUAL_LANDMARK
        assert lie.bin == LieBin.RIGHT

    def test_left_facing_head(self, left_facing_head, criteria):
        assert classify_frame(left_facing_head, criteria).bin == LieBin.LEFT

    def test_thalamus_only_uses_fallback(self, criteria):
        lie = classify_frame(head_segmentation(0.0, with_csp=False), criteria)
        assert lie.method == LieMethod.THALAMUS_ONLY
        assert lie.bin == LieBin.RIGHT

    def test_small_thalamus_only_abstains(self, criteria):
        seg = FrameSegmentation(width=100, height=100, thalamus=block(10, 10, 5, 8))
        assert classify_frame(seg, criteria) is None
        assert assess_frame(seg, criteria).reason == "criteria:min_pixels"

    def test_csp_only_abstains(self, right_facing_head, criteria):
        seg = FrameSegmentation(width=96, height=96, csp=right_facing_head.csp)
        assessment = assess_frame(seg, criteria, "V2", 7)
        assert assessment.lie is None
        assert assessment.reason == "no_thalamus"
        assert (assessment.sweep_id, assessment.frame_index) == ("V2", 7)

    @pytest.mark.parametrize("facing", [0.0, 23.0, 45.0, 135.0, 180.0, 211.0, 315.0])
    def test_mirror_flips_bin(self, criteria, facing):
        seg = head_segmentation(facing)
        lie = classify_frame(seg, criteria)
        mirrored = classify_frame(flip_segmentation(seg), criteria)
        expected = {
            LieBin.LEFT: LieBin.RIGHT,
            LieBin.RIGHT: LieBin.LEFT,
            LieBin.INDETERMINATE: LieBin.INDETERMINATE,
        }[lie.bin]
        if lie.bin != LieBin.INDETERMINATE:
            assert mirrored.bin == expected
        assert mirrored.vector[1] == pytest.approx(-lie.vector[1], abs=0.15)

    def test_mirror_and_translation_on_random_poses(self, criteria, rng):
        swap = {LieBin.LEFT: LieBin.RIGHT, LieBin.RIGHT: LieBin.LEFT}
        checked = 0
        for facing in rng.uniform(0, 360, 150).tolist():
            if abs(math.cos(math.radians(facing))) < 0.3:
                continue
            seg = head_segmentation(facing)
            lie = classify_frame(seg, criteria)
            assert classify_frame(flip_segmentation(seg), criteria).bin == swap[lie.bin]

            d_row, d_col = (int(v) for v in rng.integers(-4, 5, 2))
            moved = FrameSegmentation(
                96, 96, thalamus=seg.thalamus.translated(d_row, d_col), csp=seg.csp.translated(d_row, d_col)
            )
            assert classify_frame(moved, criteria).vector == pytest.approx(lie.vector, abs=1e-9)
            checked += 1
        assert checked >= 100

    def test_fallback_mirror_and_translation_on_random_poses(self, criteria, rng):
        """Thalamus-only frames: mirroring swaps the bin, shifting keeps the vector"""
        swap = {LieBin.LEFT: LieBin.RIGHT, LieBin.RIGHT: LieBin.LEFT}
        checked = 0
        for facing in rng.uniform(0, 360, 150).tolist():
            if abs(math.cos(math.radians(facing))) < 0.3:
                continue
            seg = head_segmentation(facing, with_csp=False)
            lie = classify_frame(seg, criteria)
            assert lie.method == LieMethod.THALAMUS_ONLY
            assert classify_frame(flip_segmentation(seg), criteria).bin == swap[lie.bin]

            d_row, d_col = (int(v) for v in rng.integers(-4, 5, 2))
            moved = FrameSegmentation(96, 96, thalamus=seg.thalamus.translated(d_row, d_col))
            assert classify_frame(moved, criteria).vector == pytest.approx(lie.vector, abs=1e-9)
            checked += 1
        assert checked >= 100

    def test_translation_invariance(self, criteria):
        seg = head_segmentation(250.0)
        moved = FrameSegmentation(
            width=96, height=96, thalamus=seg.thalamus.translated(2, 3), csp=seg.csp.translated(2, 3)
        )
        assert classify_frame(moved, criteria).vector == pytest.approx(
            classify_frame(seg, criteria).vector, abs=1e-9
        )


class TestTallyLie:
    """Test the frame vote"""

    def test_majority(self):
        result = tally_lie([lie_at(LieBin.RIGHT, 0), lie_at(LieBin.RIGHT, 1), lie_at(LieBin.LEFT, 2)])
        assert result.exam_label == LieLabel.RIGHT
        assert (result.votes_left, result.votes_right) == (1, 2)
        assert result.status == "ok"

    def test_tie_abstains(self):
        result = tally_lie([lie_at(LieBin.RIGHT, 0), lie_at(LieBin.LEFT, 1)])
        assert result.exam_label == LieLabel.ABSTAIN
        assert result.status == "tie"

    def test_no_frames(self):
        result = tally_lie([])
        assert result.exam_label == LieLabel.ABSTAIN
        assert result.status == "no_segmentation"

    def test_only_indeterminate(self):
        result = tally_lie([lie_at(LieBin.INDETERMINATE)])
        assert result.exam_label == LieLabel.ABSTAIN
        assert result.status == "indeterminate"
        assert len(result.frames) == 1

    def test_all_abstained(self):
        result = tally_lie([abstained(0), abstained(1, "no_thalamus")])
        assert result.exam_label == LieLabel.ABSTAIN
        assert result.status == "criteria_failed"
        assert [a.reason for a in result.abstentions] == ["criteria:min_pixels", "no_thalamus"]

    def test_abstentions_do_not_vote(self):
        result = tally_lie([lie_at(LieBin.LEFT), abstained(1), abstained(2)])
        assert result.exam_label == LieLabel.LEFT
        assert (result.votes_left, result.votes_right) == (1, 0)

    def test_abstentions_are_logged(self, caplog):
        with caplog.at_level("INFO", logger="app.pipeline.lie"):
            tally_lie([abstained(4, "criteria:min_solidity")])
        assert "criteria:min_solidity" in caplog.text


class TestAggregateLie:
    """Test exam-level lie"""

    @pytest.mark.parametrize("lie", [LieLabel.LEFT, LieLabel.RIGHT])
    def test_synthetic_exam(self, small_synth_config, lie):
        exam, truth = build_exam(replace(small_synth_config, lie=lie))
        result = aggregate_lie(exam)
        assert result.exam_label == truth.lie
        assert result.abstentions == ()
        assert result.votes_left + result.votes_right == sum(len(s.segmentations) for s in exam.sweeps)

    def test_no_segmentations_abstain(self, small_synth_config):
        exam, _ = build_exam(replace(small_synth_config, head_sweep_indices=()))
        result = aggregate_lie(exam)
        assert result.exam_label == LieLabel.ABSTAIN
        assert result.status == "no_segmentation"

    def test_mirror_equivariance(self, small_synth_config):
        exam, _ = build_exam(replace(small_synth_config, facing_jitter_degrees=30.0, rng_seed=11))
        result = aggregate_lie(exam)
        mirrored = aggregate_lie(flip_exam(exam))
        swap = {LieLabel.LEFT: LieLabel.RIGHT, LieLabel.RIGHT: LieLabel.LEFT, LieLabel.ABSTAIN: LieLabel.ABSTAIN}
        assert mirrored.exam_label == swap[result.exam_label]
        assert (mirrored.votes_left, mirrored.votes_right) == (result.votes_right, result.votes_left)

    def test_deterministic(self, small_synth_config):
        exam, _ = build_exam(replace(small_synth_config, mask_jitter_px=1.0, csp_dropout=0.5))
        assert aggregate_lie(exam) == aggregate_lie(exam)

    def test_frames_in_exam_order(self, small_synth_config):
        exam, _ = build_exam(small_synth_config)
        result = aggregate_lie(exam)
        keys = [(f.sweep_id, f.frame_index) for f in result.frames]
        assert keys == sorted(keys, key=lambda k: ([s.sweep_id for s in exam.sweeps].index(k[0]), k[1]))
