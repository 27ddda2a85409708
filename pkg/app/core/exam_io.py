#!/usr/bin/env python3
"""
Exam bundle loading, validation and writing

Bundle layout:

    manifest.json          {"exam_id": ..., "sweeps": [{"sweep_id", "n_frames",
                            "trace_file", "masks_dir"}, ...]}
    <trace_file>           CSV, header "frame,probability", one row per frame
    <masks_dir>/frame_%04d.png
                           8-bit single-channel label image per segmented frame:
                           0 background, 1 thalamus, 2 CSP. A missing file means
                           the frame has no segmentation.
"""

import csv
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.core.errors import BundleIOError, BundleValidationError
from app.models import BinaryMask, Exam, FrameSegmentation, Sweep

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
TRACE_HEADER = ["frame", "probability"]
MASK_FILENAME = "frame_{:04d}.png"
MASK_PATTERN = re.compile(r"^frame_(\d{4,})\.png$")

BACKGROUND_LABEL = 0
THALAMUS_LABEL = 1
CSP_LABEL = 2
VALID_LABELS = {BACKGROUND_LABEL, THALAMUS_LABEL, CSP_LABEL}

PathLike = Union[str, Path]


def _mask_violations(where: str, name: str, mask: BinaryMask, seg: FrameSegmentation) -> List[str]:
    issues = []
    if (mask.width, mask.height) != (seg.width, seg.height):
        issues.append(
            f"{where}: {name} mask is {mask.width}x{mask.height}, "
            f"frame is {seg.width}x{seg.height}"
        )
    outside = [
        p for p in mask.pixels
        if not (0 <= p[0] < mask.height and 0 <= p[1] < mask.width)
    ]
    if outside:
        issues.append(f"{where}: {name} mask has {len(outside)} pixels outside the image")
    return issues


def _sweep_violations(sweep: Sweep) -> List[str]:
    issues = []
    name = f"sweep {sweep.sweep_id}"

    if not isinstance(sweep.n_frames, int) or sweep.n_frames < 1:
        issues.append(f"{name}: n_frames must be a positive integer, got {sweep.n_frames!r}")
    if len(sweep.trace) != sweep.n_frames:
        issues.append(
            f"{name}: trace length {len(sweep.trace)} does not match n_frames {sweep.n_frames}"
        )
    for t, value in enumerate(sweep.trace):
        if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
            issues.append(f"{name} frame {t}: probability out of range ({value!r})")

    for t in sorted(sweep.segmentations):
        seg = sweep.segmentations[t]
        where = f"{name} frame {t}"
        if not 0 <= t < sweep.n_frames:
            issues.append(f"{where}: segmentation index outside [0, {sweep.n_frames})")
        if seg.thalamus is None and seg.csp is None:
            issues.append(f"{where}: segmentation has neither thalamus nor CSP mask")
        if seg.thalamus is not None:
            issues.extend(_mask_violations(where, "thalamus", seg.thalamus, seg))
        if seg.csp is not None:
            issues.extend(_mask_violations(where, "CSP", seg.csp, seg))
    return issues


def validate_exam(exam: Exam) -> List[str]:
    """Describe every invariant violation; an empty list means the exam is valid"""
    violations = []
    if not exam.sweeps:
        violations.append(f"exam {exam.exam_id}: no sweeps")

    seen = set()
    for sweep in exam.sweeps:
        if sweep.sweep_id in seen:
            violations.append(f"sweep {sweep.sweep_id}: duplicate sweep id")
        seen.add(sweep.sweep_id)
        violations.extend(_sweep_violations(sweep))
    return violations


def _read_manifest(bundle: Path) -> Dict[str, Any]:
    manifest_path = bundle / MANIFEST_NAME
    if not manifest_path.is_file():
        raise BundleValidationError(f"manifest missing: {manifest_path}")
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise BundleValidationError(f"manifest malformed: {manifest_path}: {e}") from e
    except OSError as e:
        raise BundleIOError(f"cannot read {manifest_path}: {e}") from e

    problems = []
    if not isinstance(manifest, dict):
        raise BundleValidationError("manifest malformed: top level must be an object")
    if not isinstance(manifest.get("exam_id"), str):
        problems.append("exam_id must be a string")
    sweeps = manifest.get("sweeps")
    if not isinstance(sweeps, list):
        problems.append("sweeps must be a list")
    else:
        for i, entry in enumerate(sweeps):
            if not isinstance(entry, dict):
                problems.append(f"sweeps[{i}] must be an object")
                continue
            for key in ("sweep_id", "trace_file", "masks_dir"):
                if not isinstance(entry.get(key), str):
                    problems.append(f"sweeps[{i}].{key} must be a string")
            n_frames = entry.get("n_frames")
            if not isinstance(n_frames, int) or isinstance(n_frames, bool):
                problems.append(f"sweeps[{i}].n_frames must be an integer")
    if problems:
        raise BundleValidationError("manifest malformed", problems)
    return manifest


def _read_trace(path: Path, sweep_id: str, problems: List[str]) -> Tuple[float, ...]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except FileNotFoundError:
        problems.append(f"sweep {sweep_id}: trace file missing: {path}")
        return ()
    except UnicodeDecodeError:
        problems.append(f"sweep {sweep_id}: trace file is not UTF-8 text: {path}")
        return ()
    except OSError as e:
        raise BundleIOError(f"cannot read {path}: {e}") from e

    if not rows or [cell.strip() for cell in rows[0]] != TRACE_HEADER:
        problems.append(f"sweep {sweep_id}: trace header must be 'frame,probability'")
        return ()

    values = []
    for expected, row in enumerate(rows[1:]):
        if len(row) != 2:
            problems.append(f"sweep {sweep_id}: trace row {expected} must have 2 columns")
            continue
        try:
            frame = int(row[0])
            value = float(row[1])
        except ValueError:
            problems.append(f"sweep {sweep_id} frame {expected}: not a number: {row!r}")
            continue
        if frame != expected:
            problems.append(
                f"sweep {sweep_id}: trace frames must ascend from 0, found {frame} at row {expected}"
            )
        values.append(value)
    return tuple(values)


def _decode_label_image(path: Path, where: str, problems: List[str]) -> Optional[FrameSegmentation]:
    try:
        with Image.open(path) as image:
            if image.mode != "L":
                problems.append(f"{where}: mask must be 8-bit single channel, got mode {image.mode}")
                return None
            labels = np.asarray(image, dtype=np.uint8)
    except UnidentifiedImageError:
        problems.append(f"{where}: not a PNG image: {path}")
        return None
    except OSError as e:
        raise BundleIOError(f"cannot read {path}: {e}") from e

    unexpected = set(np.unique(labels).tolist()) - VALID_LABELS
    if unexpected:
        problems.append(f"{where}: mask labels must be in {{0,1,2}}, found {sorted(unexpected)}")
        return None

    height, width = labels.shape
    thalamus = labels == THALAMUS_LABEL
    csp = labels == CSP_LABEL
    if not thalamus.any() and not csp.any():
        return None
    return FrameSegmentation(
        width=int(width),
        height=int(height),
        thalamus=BinaryMask.from_array(thalamus) if thalamus.any() else None,
        csp=BinaryMask.from_array(csp) if csp.any() else None,
    )


def _read_masks(masks_dir: Path, sweep_id: str, problems: List[str]) -> Dict[int, FrameSegmentation]:
    segmentations: Dict[int, FrameSegmentation] = {}
    if not masks_dir.is_dir():
        logger.debug(f"Sweep {sweep_id}: no masks directory at {masks_dir}")
        return segmentations

    dims = None
    for path in sorted(masks_dir.iterdir()):
        match = MASK_PATTERN.match(path.name)
        if not match:
            continue
        frame = int(match.group(1))
        where = f"sweep {sweep_id} frame {frame}"
        seg = _decode_label_image(path, where, problems)
        if seg is None:
            continue
        if dims is None:
            dims = (seg.width, seg.height)
        elif (seg.width, seg.height) != dims:
            problems.append(
                f"{where}: mask dimensions {seg.width}x{seg.height} inconsistent "
                f"with {dims[0]}x{dims[1]}"
            )
        segmentations[frame] = seg
    return segmentations


def load_exam(path: PathLike) -> Exam:
    bundle = Path(path)
    if not bundle.is_dir():
        raise BundleIOError(f"exam bundle directory not found: {bundle}")

    manifest = _read_manifest(bundle)
    problems: List[str] = []
    sweeps = []
    for entry in manifest["sweeps"]:
        sweep_id = entry["sweep_id"]
        trace = _read_trace(bundle / entry["trace_file"], sweep_id, problems)
        segmentations = _read_masks(bundle / entry["masks_dir"], sweep_id, problems)
        sweeps.append(
            Sweep(
                sweep_id=sweep_id,
                n_frames=entry["n_frames"],
                trace=trace,
                segmentations=segmentations,
            )
        )

    exam = Exam(exam_id=manifest["exam_id"], sweeps=tuple(sweeps))
    problems.extend(validate_exam(exam))
    if problems:
        raise BundleValidationError(f"exam bundle {bundle} is invalid", problems)

    logger.info(
        f"Loaded exam {exam.exam_id}: {len(exam.sweeps)} sweeps, "
        f"{sum(len(s.segmentations) for s in exam.sweeps)} segmented frames"
    )
    return exam


def label_image(seg: FrameSegmentation) -> np.ndarray:
    labels = np.zeros((seg.height, seg.width), dtype=np.uint8)
    if seg.csp is not None:
        labels[seg.csp.to_array()] = CSP_LABEL
    if seg.thalamus is not None:
        thalamus = seg.thalamus.to_array()
        if seg.csp is not None and (labels[thalamus] == CSP_LABEL).any():
            logger.warning("Thalamus and CSP masks overlap; thalamus label wins")
        labels[thalamus] = THALAMUS_LABEL
    return labels


def write_exam(exam: Exam, directory: PathLike) -> Path:
    """Write `exam` as a bundle; traces are written as shortest round-trip decimals"""
    root = Path(directory)
    entries = []
    try:
        root.mkdir(parents=True, exist_ok=True)
        for sweep in exam.sweeps:
            masks_dir = root / sweep.sweep_id / "masks"
            masks_dir.mkdir(parents=True, exist_ok=True)
            trace_file = root / sweep.sweep_id / "trace.csv"

            with open(trace_file, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(TRACE_HEADER)
                for t, value in enumerate(sweep.trace):
                    writer.writerow([t, repr(float(value))])

            for t in sorted(sweep.segmentations):
                image = Image.fromarray(label_image(sweep.segmentations[t]))
                image.save(masks_dir / MASK_FILENAME.format(t))

            entries.append(
                {
                    "sweep_id": sweep.sweep_id,
                    "n_frames": sweep.n_frames,
                    "trace_file": f"{sweep.sweep_id}/trace.csv",
                    "masks_dir": f"{sweep.sweep_id}/masks",
                }
            )

        with open(root / MANIFEST_NAME, "w", encoding="utf-8") as f:
            json.dump({"exam_id": exam.exam_id, "sweeps": entries}, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise BundleIOError(f"cannot write exam bundle to {root}: {e}") from e

    logger.info(f"Exam {exam.exam_id} written to {root}")
    return root
