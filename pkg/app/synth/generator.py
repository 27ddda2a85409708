#!/usr/bin/env python3
"""
Synthetic exam generator

Stands in for the head detector and the clinical data: each exam gets
head-probability traces with a Gaussian bump early in the sweep (cephalic)
or late (breech), and, on frames where the bump is high enough, a thalamus
crescent plus a CSP ellipse whose layout encodes the lie.

Head geometry: the crescent is an annulus sector centered in the image,
with its arc behind the head center and its opening toward the facing
direction; the CSP sits `csp_offset` pixels in front along the facing
direction. Facing angle 0 degrees is +column (right), 180 is -column (left),
90 is +row (down).

Every exam draws from a single random stream seeded by `rng_seed`.
"""

import json
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import ndimage
from skimage.draw import ellipse

from app.core.errors import BundleIOError, BundleValidationError, ConfigError, GeometryError
from app.core.exam_io import write_exam
from app.models import (
    BinaryMask,
    Exam,
    FrameSegmentation,
    GroundTruth,
    LieLabel,
    PresentationLabel,
    Sweep,
)

logger = logging.getLogger(__name__)

GROUND_TRUTH_NAME = "ground_truth.json"
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class SynthConfig:
    presentation: PresentationLabel = PresentationLabel.CEPHALIC
    lie: LieLabel = LieLabel.RIGHT
    n_sweeps: int = 5
    n_frames: int = 100
    image_size: Tuple[int, int] = (256, 256)  # (height, width)
    head_sweep_indices: Optional[Tuple[int, ...]] = None  # None: every sweep
    bump_center_fraction: Optional[float] = None  # None: 0.2 cephalic, 0.8 breech
    bump_sigma_fraction: float = 0.05
    bump_peak: float = 0.95
    trace_noise_sigma: float = 0.0
    mask_jitter_px: float = 0.0
    outer_radius: float = 24.0
    inner_radius: float = 14.0
    span_degrees: float = 90.0
    csp_semi_axes: Tuple[float, float] = (6.0, 4.0)
    csp_offset: float = 30.0
    rng_seed: int = 0
    facing_jitter_degrees: float = 0.0
    csp_dropout: float = 0.0
    mask_threshold: float = 0.5
    exam_id: Optional[str] = None

    @property
    def head_sweeps(self) -> Tuple[int, ...]:
        if self.head_sweep_indices is None:
            return tuple(range(self.n_sweeps))
        return tuple(sorted(set(self.head_sweep_indices)))

    @property
    def center_fraction(self) -> float:
        if self.bump_center_fraction is not None:
            return self.bump_center_fraction
        return 0.2 if self.presentation == PresentationLabel.CEPHALIC else 0.8

    @property
    def base_facing_degrees(self) -> float:
        return 0.0 if self.lie == LieLabel.RIGHT else 180.0

    @property
    def resolved_exam_id(self) -> str:
        return self.exam_id or f"synth-{self.presentation}-{self.lie}-{self.rng_seed}"

    @property
    def head_center(self) -> Tuple[int, int]:
        height, width = self.image_size
        return height // 2, width // 2

    def parameter_problems(self) -> List[str]:
        issues = []
        if self.presentation not in (PresentationLabel.CEPHALIC, PresentationLabel.BREECH):
            issues.append(f"presentation must be cephalic or breech, got {self.presentation}")
        if self.lie not in (LieLabel.LEFT, LieLabel.RIGHT):
            issues.append(f"lie must be left or right, got {self.lie}")
        if self.n_sweeps < 1:
            issues.append("n_sweeps must be at least 1")
        if self.n_frames < 1:
            issues.append("n_frames must be at least 1")
        if any(not 0 <= i < self.n_sweeps for i in self.head_sweeps):
            issues.append(f"head_sweep_indices must lie in [0, {self.n_sweeps})")
        if not 0 <= self.center_fraction <= 1:
            issues.append("bump_center_fraction must be in [0, 1]")
        if self.bump_sigma_fraction <= 0:
            issues.append("bump_sigma_fraction must be positive")
        if not 0 < self.bump_peak <= 1:
            issues.append("bump_peak must be in (0, 1]")
        if self.trace_noise_sigma < 0:
            issues.append("trace_noise_sigma must be non-negative")
        if self.mask_jitter_px < 0:
            issues.append("mask_jitter_px must be non-negative")
        if self.facing_jitter_degrees < 0:
            issues.append("facing_jitter_degrees must be non-negative")
        if not 0 <= self.csp_dropout <= 1:
            issues.append("csp_dropout must be in [0, 1]")
        if not 0 < self.mask_threshold <= 1:
            issues.append("mask_threshold must be in (0, 1]")
        return issues

    def geometry_problems(self) -> List[str]:
        issues = []
        height, width = self.image_size
        if height < 1 or width < 1:
            return ["image_size must be positive"]
        if self.inner_radius <= 0 or self.outer_radius <= 0:
            issues.append("crescent radii must be positive")
        if self.inner_radius >= self.outer_radius:
            issues.append("inner_radius must be smaller than outer_radius")
        if not 0 < self.span_degrees <= 360:
            issues.append("span_degrees must be in (0, 360]")
        if min(self.csp_semi_axes) <= 0:
            issues.append("CSP semi-axes must be positive")

        # any facing angle must fit, so check the worst case radius
        margin = math.ceil(self.mask_jitter_px) + 1
        room = min(height, width) // 2 - margin
        if self.outer_radius > room:
            issues.append(f"crescent radius {self.outer_radius} does not fit a {height}x{width} image")
        if self.csp_offset + max(self.csp_semi_axes) > room:
            issues.append(f"CSP at offset {self.csp_offset} does not fit a {height}x{width} image")
        return issues

    def validate(self) -> "SynthConfig":
        issues = self.parameter_problems()
        if issues:
            raise ConfigError("invalid synthetic exam config: " + "; ".join(issues))
        issues = self.geometry_problems()
        if issues:
            raise GeometryError("invalid synthetic head geometry: " + "; ".join(issues))
        return self


@dataclass(frozen=True)
class SynthBundle:
    path: Path
    exam: Exam
    ground_truth: GroundTruth


def facing_unit(facing_degrees: float) -> Tuple[float, float]:
    angle = math.radians(facing_degrees)
    return math.sin(angle), math.cos(angle)


def make_trace(
    cfg: SynthConfig, sweep_index: int, rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """Gaussian head-probability bump plus optional noise, clamped to [0, 1]"""
    n_frames = cfg.n_frames
    if sweep_index not in cfg.head_sweeps:
        return np.zeros(n_frames)

    t = np.arange(n_frames, dtype=float)
    mu = cfg.center_fraction * n_frames
    sigma = cfg.bump_sigma_fraction * n_frames
    trace = cfg.bump_peak * np.exp(-0.5 * ((t - mu) / sigma) ** 2)
    if cfg.trace_noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng([cfg.rng_seed, sweep_index])
        trace = trace + rng.normal(0.0, cfg.trace_noise_sigma, n_frames)
    return np.clip(trace, 0.0, 1.0)


def crescent_mask(
    shape: Tuple[int, int],
    center: Tuple[float, float],
    outer_radius: float,
    inner_radius: float,
    span_degrees: float,
    facing_degrees: float,
) -> np.ndarray:
    """Annulus sector centered opposite the facing direction, opening toward it"""
    rows, cols = np.indices(shape, dtype=float)
    d_row = rows - center[0]
    d_col = cols - center[1]
    radius = np.hypot(d_row, d_col)
    angle = np.degrees(np.arctan2(d_row, d_col))
    behind = facing_degrees + 180.0
    offset = (angle - behind + 180.0) % 360.0 - 180.0
    return (radius >= inner_radius) & (radius <= outer_radius) & (np.abs(offset) <= span_degrees / 2.0)


def csp_mask(
    shape: Tuple[int, int],
    head_center: Tuple[float, float],
    offset: float,
    semi_axes: Tuple[float, float],
    facing_degrees: float,
) -> np.ndarray:
    d_row, d_col = facing_unit(facing_degrees)
    mask = np.zeros(shape, dtype=bool)
    rr, cc = ellipse(
        head_center[0] + offset * d_row,
        head_center[1] + offset * d_col,
        semi_axes[0],
        semi_axes[1],
        shape=shape,
        rotation=math.radians(facing_degrees),
    )
    mask[rr, cc] = True
    return mask


@lru_cache(maxsize=64)
def _head_arrays(cfg: SynthConfig, facing_degrees: float) -> Tuple[np.ndarray, np.ndarray]:
    center = cfg.head_center
    thalamus = crescent_mask(
        cfg.image_size, center, cfg.outer_radius, cfg.inner_radius, cfg.span_degrees, facing_degrees
    )
    csp = csp_mask(cfg.image_size, center, cfg.csp_offset, cfg.csp_semi_axes, facing_degrees)
    csp &= ~thalamus
    thalamus.setflags(write=False)
    csp.setflags(write=False)
    return thalamus, csp


def jitter_boundary(mask: np.ndarray, jitter_px: float, rng: np.random.Generator) -> np.ndarray:
    """
    Resample pixels within ceil(jitter_px) of the boundary: a fraction
    jitter_px / ceil(jitter_px) of them is redrawn as foreground or
    background with equal odds.
    """
    if jitter_px <= 0 or not mask.any():
        return mask.copy()
    steps = math.ceil(jitter_px)
    grown = ndimage.binary_dilation(mask, structure=EIGHT_CONNECTED, iterations=steps)
    core = ndimage.binary_erosion(mask, structure=EIGHT_CONNECTED, iterations=steps)
    band = grown & ~core

    redraw = band & (rng.random(mask.shape) < jitter_px / steps)
    coin = rng.random(mask.shape) < 0.5
    result = mask.copy()
    result[redraw] = coin[redraw]
    return result


def make_frame_masks(
    cfg: SynthConfig,
    frame_index: int,
    rng: Optional[np.random.Generator] = None,
    facing_degrees: Optional[float] = None,
) -> FrameSegmentation:
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng([cfg.rng_seed, frame_index])
    if facing_degrees is None:
        facing_degrees = cfg.base_facing_degrees

    thalamus, csp = _head_arrays(cfg, float(facing_degrees))
    if cfg.mask_jitter_px > 0:
        thalamus = jitter_boundary(thalamus, cfg.mask_jitter_px, rng)
        csp = jitter_boundary(csp, cfg.mask_jitter_px, rng) & ~thalamus
    drop_csp = cfg.csp_dropout > 0 and rng.random() < cfg.csp_dropout

    height, width = cfg.image_size
    return FrameSegmentation(
        width=width,
        height=height,
        thalamus=BinaryMask.from_array(thalamus) if thalamus.any() else None,
        csp=BinaryMask.from_array(csp) if csp.any() and not drop_csp else None,
    )


def build_exam(cfg: SynthConfig) -> Tuple[Exam, GroundTruth]:
    """Generate an exam in memory"""
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    facing = cfg.base_facing_degrees
    if cfg.facing_jitter_degrees > 0:
        facing += float(rng.uniform(-cfg.facing_jitter_degrees, cfg.facing_jitter_degrees))

    sweeps = []
    for index in range(cfg.n_sweeps):
        trace = make_trace(cfg, index, rng)
        segmentations: Dict[int, FrameSegmentation] = {}
        if index in cfg.head_sweeps:
            for t in np.flatnonzero(trace >= cfg.mask_threshold).tolist():
                segmentations[t] = make_frame_masks(cfg, t, rng, facing)
        sweeps.append(
            Sweep(
                sweep_id=f"V{index + 1}",
                n_frames=cfg.n_frames,
                trace=tuple(trace.tolist()),
                segmentations=segmentations,
            )
        )

    exam = Exam(exam_id=cfg.resolved_exam_id, sweeps=tuple(sweeps))
    truth = GroundTruth(presentation=cfg.presentation, lie=cfg.lie)
    logger.debug(
        f"Built exam {exam.exam_id}: facing {facing:.1f} deg, "
        f"{sum(len(s.segmentations) for s in sweeps)} segmented frames"
    )
    return exam, truth


def write_ground_truth(truth: GroundTruth, directory: Union[str, Path]) -> Path:
    path = Path(directory) / GROUND_TRUTH_NAME
    with open(path, "w", encoding="utf-8") as f:
        json.dump(
            {"presentation": str(truth.presentation), "lie": str(truth.lie)},
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
    return path


def read_ground_truth(directory: Union[str, Path]) -> GroundTruth:
    path = Path(directory) / GROUND_TRUTH_NAME
    if not path.is_file():
        raise BundleValidationError(f"ground truth missing: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return GroundTruth(
            presentation=PresentationLabel(data["presentation"]),
            lie=LieLabel(data["lie"]),
        )
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as e:
        raise BundleValidationError(f"ground truth malformed: {path}: {e!r}") from e
    except OSError as e:
        raise BundleIOError(f"cannot read {path}: {e}") from e


def make_exam(cfg: SynthConfig, directory: Union[str, Path]) -> SynthBundle:
    """Generate an exam and write it as a bundle with its ground truth"""
    exam, truth = build_exam(cfg)
    path = write_exam(exam, directory)
    write_ground_truth(truth, path)
    logger.info(f"Synthetic exam {exam.exam_id} ({truth.presentation}, {truth.lie}) at {path}")
    return SynthBundle(path=path, exam=exam, ground_truth=truth)


def orientation_grid(seed: int, count: int, **overrides) -> List[SynthConfig]:
    """`count` configs cycling through the four presentation/lie combinations"""
    combos = [
        (PresentationLabel.CEPHALIC, LieLabel.LEFT),
        (PresentationLabel.CEPHALIC, LieLabel.RIGHT),
        (PresentationLabel.BREECH, LieLabel.LEFT),
        (PresentationLabel.BREECH, LieLabel.RIGHT),
    ]
    base = SynthConfig(**overrides)
    return [
        replace(base, presentation=combos[i % 4][0], lie=combos[i % 4][1], rng_seed=seed + i)
        for i in range(count)
    ]
