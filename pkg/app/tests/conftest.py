#!/usr/bin/env python3
"""
Shared test fixtures for the orientation test suite
"""

from typing import Iterable, Optional

import numpy as np
import pytest

from app.core.config import QualityCriteria
from app.models import BinaryMask, FrameSegmentation, Pixel, Sweep
from app.synth.generator import SynthConfig, crescent_mask, csp_mask

HEAD_IMAGE = (96, 96)
HEAD_CENTER = (48, 48)


def mask_of(pixels: Iterable[Pixel], width: int = 32, height: int = 32) -> BinaryMask:
    return BinaryMask(width=width, height=height, pixels=frozenset(pixels))


def crescent(
    facing_degrees: float = 0.0,
    outer: float = 24.0,
    inner: float = 14.0,
    span: float = 90.0,
    shape=HEAD_IMAGE,
    center=HEAD_CENTER,
) -> BinaryMask:
    return BinaryMask.from_array(crescent_mask(shape, center, outer, inner, span, facing_degrees))


def head_segmentation(
    facing_degrees: float = 0.0, with_csp: bool = True, shape=HEAD_IMAGE, center=HEAD_CENTER
) -> FrameSegmentation:
    """Default synthetic head: 24/14 px crescent, 90 degree span, CSP 30 px ahead"""
    csp = None
    if with_csp:
        csp = BinaryMask.from_array(csp_mask(shape, center, 30.0, (6.0, 4.0), facing_degrees))
    return FrameSegmentation(
        width=shape[1],
        height=shape[0],
        thalamus=crescent(facing_degrees, shape=shape, center=center),
        csp=csp,
    )


def sweep_of(trace, sweep_id: str = "V1", segmentations: Optional[dict] = None) -> Sweep:
    trace = tuple(float(v) for v in trace)
    return Sweep(
        sweep_id=sweep_id,
        n_frames=len(trace),
        trace=trace,
        segmentations=segmentations or {},
    )


@pytest.fixture
def criteria():
    """Default quality criteria"""
    return QualityCriteria()


@pytest.fixture
def rng():
    """Seeded random generator"""
    return np.random.default_rng(20240607)


@pytest.fixture
def small_synth_config():
    """Fast synthetic exam: 3 sweeps of 40 frames on a 96x96 image"""
    return SynthConfig(n_sweeps=3, n_frames=40, image_size=HEAD_IMAGE, rng_seed=3)


@pytest.fixture
def right_facing_head():
    """Head facing +column with both landmarks"""
    return head_segmentation(0.0)


@pytest.fixture
def left_facing_head():
    """Head facing -column with both landmarks"""
    return head_segmentation(180.0)
