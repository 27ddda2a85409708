#!/usr/bin/env python3
"""
Command-line interface

    fetal-orientation classify EXAM_DIR [--out report.json]
    fetal-orientation synth --presentation breech --lie right --seed 7 --out DIR
    fetal-orientation plot-presentation EXAM_DIR SWEEP_ID --out trace.svg
    fetal-orientation plot-lie EXAM_DIR SWEEP_ID FRAME --out lie.svg
    fetal-orientation evaluate [BUNDLES_DIR | --synthetic N]

JSON goes to stdout (or --out); logs go to stderr.

Exit codes: 0 success (abstaining reports included), 2 malformed bundle,
3 I/O failure, 64 usage error.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from app import __version__
from app.core.config import PresetConfigs, QualityCriteria
from app.core.errors import (
    BundleIOError,
    BundleValidationError,
    ConfigError,
    GeometryError,
    PlotError,
)
from app.core.exam_io import load_exam
from app.models import Exam, LieLabel, PresentationLabel, Sweep
from app.pipeline.classifier import classify_exam
from app.plotting.figures import lie_figure, presentation_figure
from app.synth.generator import SynthConfig, make_exam, orientation_grid
from app.utils.evaluation_runner import evaluate_directory, evaluate_synthetic

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_USAGE = 64

PRESETS = {
    "standard": PresetConfigs.standard,
    "noisy": PresetConfigs.noisy_acquisition,
    "literal": PresetConfigs.literal,
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _logging_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_mutually_exclusive_group()
    group.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    group.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    return parent


def _criteria_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--preset", choices=sorted(PRESETS), default="standard", help="base quality criteria")
    parent.add_argument("--tau", type=float, help="head detection threshold")
    parent.add_argument("--min-pixels", type=int, help="fallback: minimum thalamus pixel count")
    parent.add_argument("--min-solidity", type=float, help="fallback: minimum thalamus solidity")
    parent.add_argument("--min-midpoint-dist", type=float, help="fallback: minimum chord midpoint distance")
    parent.add_argument("--noise-floor", type=float, help="zero trace values below this before matching")
    parent.add_argument("--max-spur", type=int, help="skeleton spur pruning length (0 disables)")
    parent.add_argument("--flip-lateral", action="store_true", help="swap image left/right for anatomical left/right")
    parent.add_argument("--jobs", type=int, default=1, help="worker threads")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="fetal-orientation",
        description="Fetal presentation and lie from blind-sweep ultrasound outputs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    logs = _logging_flags()
    criteria = _criteria_flags()

    classify = sub.add_parser("classify", parents=[logs, criteria], help="classify an exam bundle")
    classify.add_argument("exam_dir", type=Path)
    classify.add_argument("--out", type=Path, help="report file (default: stdout)")
    classify.set_defaults(handler=cmd_classify)

    synth = sub.add_parser("synth", parents=[logs], help="generate a synthetic exam bundle")
    synth.add_argument("--out", type=Path, required=True, help="bundle directory")
    synth.add_argument("--presentation", choices=["cephalic", "breech"], default="cephalic")
    synth.add_argument("--lie", choices=["left", "right"], default="right")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--exam-id")
    synth.add_argument("--n-sweeps", type=int)
    synth.add_argument("--n-frames", type=int)
    synth.add_argument("--image-size", type=int, nargs=2, metavar=("HEIGHT", "WIDTH"))
    synth.add_argument("--head-sweeps", type=int, nargs="+", metavar="INDEX", help="0-based sweeps that see the head")
    synth.add_argument("--bump-center", type=float, help="trace bump center as a fraction of the sweep")
    synth.add_argument("--bump-sigma", type=float, help="trace bump width as a fraction of the sweep")
    synth.add_argument("--bump-peak", type=float)
    synth.add_argument("--trace-noise", type=float, help="Gaussian noise sigma added to traces")
    synth.add_argument("--mask-jitter", type=float, help="boundary jitter in pixels")
    synth.add_argument("--outer-radius", type=float)
    synth.add_argument("--inner-radius", type=float)
    synth.add_argument("--span", type=float, help="crescent angular span in degrees")
    synth.add_argument("--csp-axes", type=float, nargs=2, metavar=("A", "B"))
    synth.add_argument("--csp-offset", type=float)
    synth.add_argument("--facing-jitter", type=float, help="random head rotation range in degrees")
    synth.add_argument("--csp-dropout", type=float, help="probability a frame loses its CSP mask")
    synth.add_argument("--mask-threshold", type=float, help="trace level above which frames get masks")
    synth.set_defaults(handler=cmd_synth)

    plot_presentation = sub.add_parser(
        "plot-presentation", parents=[logs, criteria], help="plot a sweep trace against the templates"
    )
    plot_presentation.add_argument("exam_dir", type=Path)
    plot_presentation.add_argument("sweep_id")
    plot_presentation.add_argument("--out", type=Path, help="SVG file (default: stdout)")
    plot_presentation.set_defaults(handler=cmd_plot_presentation)

    plot_lie = sub.add_parser("plot-lie", parents=[logs, criteria], help="plot one frame's lie analysis")
    plot_lie.add_argument("exam_dir", type=Path)
    plot_lie.add_argument("sweep_id")
    plot_lie.add_argument("frame", type=int)
    plot_lie.add_argument("--out", type=Path, help="SVG file (default: stdout)")
    plot_lie.set_defaults(handler=cmd_plot_lie)

    evaluate = sub.add_parser("evaluate", parents=[logs, criteria], help="score exams with known ground truth")
    evaluate.add_argument("bundles", type=Path, nargs="?", help="directory of bundles with ground_truth.json")
    evaluate.add_argument("--synthetic", type=int, metavar="COUNT", help="score COUNT in-memory synthetic exams")
    evaluate.add_argument("--seed", type=int, default=0, help="first seed for --synthetic")
    evaluate.add_argument("--trace-noise", type=float, default=0.0)
    evaluate.add_argument("--mask-jitter", type=float, default=0.0)
    evaluate.add_argument("--out", type=Path, help="summary file (default: stdout)")
    evaluate.set_defaults(handler=cmd_evaluate)

    return parser


def criteria_from_args(args: argparse.Namespace) -> QualityCriteria:
    base = PRESETS[args.preset]()
    return base.with_overrides(
        detection_threshold=args.tau,
        min_pixels=args.min_pixels,
        min_solidity=args.min_solidity,
        min_midpoint_distance=args.min_midpoint_dist,
        trace_noise_floor=args.noise_floor,
        max_spur_length=args.max_spur,
        flip_lateral=True if args.flip_lateral else None,
    )


def synth_config_from_args(args: argparse.Namespace) -> SynthConfig:
    overrides = {
        "n_sweeps": args.n_sweeps,
        "n_frames": args.n_frames,
        "image_size": tuple(args.image_size) if args.image_size else None,
        "head_sweep_indices": tuple(args.head_sweeps) if args.head_sweeps else None,
        "bump_center_fraction": args.bump_center,
        "bump_sigma_fraction": args.bump_sigma,
        "bump_peak": args.bump_peak,
        "trace_noise_sigma": args.trace_noise,
        "mask_jitter_px": args.mask_jitter,
        "outer_radius": args.outer_radius,
        "inner_radius": args.inner_radius,
        "span_degrees": args.span,
        "csp_semi_axes": tuple(args.csp_axes) if args.csp_axes else None,
        "csp_offset": args.csp_offset,
        "facing_jitter_degrees": args.facing_jitter,
        "csp_dropout": args.csp_dropout,
        "mask_threshold": args.mask_threshold,
        "exam_id": args.exam_id,
    }
    cfg = SynthConfig(
        presentation=PresentationLabel(args.presentation),
        lie=LieLabel(args.lie),
        rng_seed=args.seed,
    )
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None}).validate()


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {out}")


def _find_sweep(exam: Exam, sweep_id: str) -> Sweep:
    sweep = exam.sweep(sweep_id)
    if sweep is None:
        known = ", ".join(s.sweep_id for s in exam.sweeps)
        raise ConfigError(f"unknown sweep {sweep_id!r} (exam has: {known})")
    return sweep


def cmd_classify(args: argparse.Namespace) -> int:
    criteria = criteria_from_args(args)
    exam = load_exam(args.exam_dir)
    report = classify_exam(exam, criteria, jobs=args.jobs)
    _emit(report.dumps(), args.out)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    bundle = make_exam(synth_config_from_args(args), args.out)
    summary = {
        "exam_id": bundle.exam.exam_id,
        "path": str(bundle.path),
        "presentation": str(bundle.ground_truth.presentation),
        "lie": str(bundle.ground_truth.lie),
    }
    _emit(json.dumps(summary, indent=2, sort_keys=True) + "\n", None)
    return EXIT_OK


def cmd_plot_presentation(args: argparse.Namespace) -> int:
    criteria = criteria_from_args(args)
    sweep = _find_sweep(load_exam(args.exam_dir), args.sweep_id)
    _emit(presentation_figure(sweep, criteria), args.out)
    return EXIT_OK


def cmd_plot_lie(args: argparse.Namespace) -> int:
    criteria = criteria_from_args(args)
    sweep = _find_sweep(load_exam(args.exam_dir), args.sweep_id)
    seg = sweep.segmentations.get(args.frame)
    if seg is None:
        raise PlotError(f"sweep {args.sweep_id} has no segmentation for frame {args.frame}")
    _emit(lie_figure(seg, criteria, args.sweep_id, args.frame), args.out)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    criteria = criteria_from_args(args)
    if (args.bundles is None) == (args.synthetic is None):
        raise ConfigError("give either a bundles directory or --synthetic COUNT")

    if args.bundles is not None:
        if not args.bundles.is_dir():
            raise BundleIOError(f"bundles directory {args.bundles} does not exist")
        summary = evaluate_directory(args.bundles, criteria, jobs=args.jobs)
    else:
        if args.synthetic < 1:
            raise ConfigError("--synthetic needs a positive count")
        configs = orientation_grid(
            args.seed, args.synthetic,
            trace_noise_sigma=args.trace_noise, mask_jitter_px=args.mask_jitter,
        )
        summary = evaluate_synthetic(configs, criteria, jobs=args.jobs)
    _emit(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger("app").setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    _configure_logging(args)
    try:
        return args.handler(args)
    except BundleValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BundleIOError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, GeometryError, PlotError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
