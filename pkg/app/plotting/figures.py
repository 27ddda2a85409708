#!/usr/bin/env python3
"""
Presentation and lie figures

The presentation figure shows one sweep's head-probability trace against
both templates. The lie figure overlays one frame's masks with the
skeleton, the landmarks used and the facing arrow.
"""

import logging
from typing import Optional, Sequence, Tuple

from app.core.config import QualityCriteria
from app.core.errors import PlotError
from app.core.morphology import centroid, connected_components
from app.models import FrameSegmentation, LieMethod, Pixel, Sweep
from app.pipeline.lie import assess_frame, thalamus_landmarks
from app.pipeline.presentation import classify_sweep_with, template_breech, template_cephalic
from app.plotting.svg_builder import SvgDocument

logger = logging.getLogger(__name__)

TRACE_COLOR = "#222222"
CEPHALIC_COLOR = "#1f77b4"
BREECH_COLOR = "#d62728"
THALAMUS_COLOR = "#f2b134"
CSP_COLOR = "#4daf4a"
SKELETON_COLOR = "#6a3d9a"
ARROW_COLOR = "#e41a1c"

PLOT_WIDTH = 640
PLOT_HEIGHT = 400
MARGIN = 60

OVERLAY_SIZE = 480
OVERLAY_PAD = 6
ARROW_LENGTH = 20.0  # image pixels


def presentation_figure(sweep: Sweep, criteria: Optional[QualityCriteria] = None) -> str:
    """SVG with the trace and the cephalic/breech templates on frame/probability axes"""
    criteria = criteria or QualityCriteria()
    if sweep.n_frames < 1 or not sweep.trace:
        raise PlotError(f"sweep {sweep.sweep_id} has an empty trace")

    n = sweep.n_frames
    result = classify_sweep_with(sweep, criteria)
    left, right = MARGIN, PLOT_WIDTH - MARGIN
    top, bottom = MARGIN, PLOT_HEIGHT - MARGIN
    x_span = max(n - 1, 1)

    def to_xy(series: Sequence[float]):
        return [
            (left + (right - left) * t / x_span, bottom - (bottom - top) * float(v))
            for t, v in enumerate(series)
        ]

    doc = SvgDocument(PLOT_WIDTH, PLOT_HEIGHT, title=f"Head probability, sweep {sweep.sweep_id}")
    doc.rect(0, 0, PLOT_WIDTH, PLOT_HEIGHT, fill="white")

    doc.group_start("axes", stroke="black", stroke_width=1)
    doc.line(left, bottom, right, bottom)
    doc.line(left, bottom, left, top)
    doc.group_end()
    doc.text((left + right) / 2, PLOT_HEIGHT - 15, "frame", text_anchor="middle", font_size=14)
    doc.text(
        18, (top + bottom) / 2, "probability", text_anchor="middle", font_size=14,
        transform=f"rotate(-90 18 {(top + bottom) / 2:.2f})",
    )
    for value in (0.0, 0.5, 1.0):
        y = bottom - (bottom - top) * value
        doc.text(left - 8, y + 4, f"{value:.1f}", text_anchor="end", font_size=11)
    for t in sorted({0, n - 1}):
        doc.text(left + (right - left) * t / x_span, bottom + 18, str(t), text_anchor="middle", font_size=11)

    doc.polyline(to_xy(template_cephalic(n)), class_="template-cephalic", stroke=CEPHALIC_COLOR, stroke_width=2)
    doc.polyline(to_xy(template_breech(n)), class_="template-breech", stroke=BREECH_COLOR, stroke_width=2)
    doc.polyline(to_xy(sweep.trace), class_="trace", stroke=TRACE_COLOR, stroke_width=1.5)

    doc.group_start("legend", font_size=12)
    entries = [
        ("head probability", TRACE_COLOR),
        (f"f_c cephalic template, sim {result.sim_cephalic:.3f}", CEPHALIC_COLOR),
        (f"f_b breech template, sim {result.sim_breech:.3f}", BREECH_COLOR),
    ]
    for i, (label, color) in enumerate(entries):
        y = top + 10 + 18 * i
        doc.line(right - 230, y, right - 210, y, stroke=color, stroke_width=2)
        doc.text(right - 205, y + 4, label)
    doc.group_end()
    doc.text(left, top - 20, f"Sweep {sweep.sweep_id}: {result.label}", font_size=14)
    return doc.to_string()


class _OverlayFrame:
    """Maps image pixels of a cropped region onto SVG coordinates"""

    def __init__(self, pixels: Sequence[Pixel]):
        rows = [p[0] for p in pixels]
        cols = [p[1] for p in pixels]
        self.row0 = min(rows) - OVERLAY_PAD
        self.col0 = min(cols) - OVERLAY_PAD
        extent = max(max(rows) - self.row0, max(cols) - self.col0) + OVERLAY_PAD + 1
        self.scale = max(2, OVERLAY_SIZE // extent)
        self.width = (max(cols) - self.col0 + OVERLAY_PAD + 1) * self.scale
        self.height = (max(rows) - self.row0 + OVERLAY_PAD + 1) * self.scale

    def corner(self, pixel: Pixel) -> Tuple[float, float]:
        return (pixel[1] - self.col0) * self.scale, (pixel[0] - self.row0) * self.scale

    def center(self, row: float, col: float) -> Tuple[float, float]:
        return (col - self.col0 + 0.5) * self.scale, (row - self.row0 + 0.5) * self.scale


def _pixel_group(doc: SvgDocument, view: _OverlayFrame, pixels, class_: str, color: str, opacity: float):
    doc.group_start(class_, fill=color, fill_opacity=opacity)
    for pixel in sorted(pixels):
        x, y = view.corner(pixel)
        doc.rect(x, y, view.scale, view.scale)
    doc.group_end()


def lie_figure(
    seg: FrameSegmentation,
    criteria: Optional[QualityCriteria] = None,
    sweep_id: str = "",
    frame_index: int = 0,
) -> str:
    """SVG overlay of one frame's lie analysis; abstained frames raise PlotError"""
    criteria = criteria or QualityCriteria()
    assessment = assess_frame(seg, criteria, sweep_id, frame_index)
    if assessment.lie is None:
        raise PlotError(
            f"sweep {sweep_id} frame {frame_index} abstained from lie classification: {assessment.reason}"
        )
    lie = assessment.lie
    landmarks = thalamus_landmarks(seg.thalamus, criteria)
    dual = lie.method == LieMethod.DUAL_LANDMARK

    shown = set(seg.thalamus.pixels)
    if seg.csp is not None:
        shown |= seg.csp.pixels
    view = _OverlayFrame(sorted(shown))

    doc = SvgDocument(
        int(view.width), int(view.height) + 30,
        title=f"Lie, sweep {sweep_id} frame {frame_index}",
    )
    doc.arrow_marker("arrowhead", ARROW_COLOR)
    doc.rect(0, 0, view.width, view.height, fill="black")

    _pixel_group(doc, view, seg.thalamus.pixels, "mask thalamus", THALAMUS_COLOR, 0.6)
    if seg.csp is not None and not seg.csp.is_empty:
        _pixel_group(doc, view, seg.csp.pixels, "mask csp", CSP_COLOR, 0.6)
    _pixel_group(doc, view, landmarks.skeleton.pixels, "skeleton", SKELETON_COLOR, 1.0)

    radius = max(2.0, view.scale * 0.6)
    g_x, g_y = view.center(*landmarks.geodesic_center)
    doc.circle(g_x, g_y, radius, class_="geodesic-center", fill="white", stroke="black")

    if dual:
        csp_row, csp_col = centroid(connected_components(seg.csp)[0])
        c_x, c_y = view.center(csp_row, csp_col)
        doc.circle(c_x, c_y, radius, class_="csp-centroid", fill=CSP_COLOR, stroke="white")
    else:
        (r1, c1), (r2, c2) = landmarks.endpoints
        a_x, a_y = view.center(r1, c1)
        b_x, b_y = view.center(r2, c2)
        doc.line(a_x, a_y, b_x, b_y, class_="chord", stroke="white", stroke_dasharray="4 3")
        for e_x, e_y in ((a_x, a_y), (b_x, b_y)):
            doc.circle(e_x, e_y, radius, class_="endpoint", fill="cyan", stroke="black")
        m_row, m_col = landmarks.midpoint
        m_x, m_y = view.center(m_row, m_col)
        doc.circle(m_x, m_y, radius, class_="midpoint", fill="magenta", stroke="black")

    tip_x, tip_y = view.center(
        landmarks.geodesic_center[0] + ARROW_LENGTH * lie.vector[0],
        landmarks.geodesic_center[1] + ARROW_LENGTH * lie.vector[1],
    )
    doc.line(
        g_x, g_y, tip_x, tip_y, class_="facing", stroke=ARROW_COLOR, stroke_width=3,
        marker_end="url(#arrowhead)",
    )
    doc.text(
        6, view.height + 20,
        f"method {lie.method}, facing ({lie.vector[0]:.2f}, {lie.vector[1]:.2f}) -> {lie.bin}",
        font_size=13,
    )
    logger.debug(f"Rendered lie figure for sweep {sweep_id} frame {frame_index} ({lie.method})")
    return doc.to_string()
