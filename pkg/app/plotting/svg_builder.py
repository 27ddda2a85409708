#!/usr/bin/env python3
"""
Minimal SVG document builder

Elements are appended as text in call order; `to_string()` closes the
document. Attribute values and text are XML-escaped.
"""

from typing import Iterable, List, Optional, Tuple
from xml.sax.saxutils import escape, quoteattr

SVG_NAMESPACE = "http://www.w3.org/2000/svg"


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def _attributes(attrs: dict) -> str:
    parts = []
    for key, value in attrs.items():
        if value is None:
            continue
        name = key.rstrip("_").replace("_", "-")
        parts.append(f"{name}={quoteattr(_format(value))}")
    return " ".join(parts)


class SvgDocument:
    def __init__(self, width: int, height: int, title: Optional[str] = None):
        self.width = width
        self.height = height
        self.parts: List[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="{SVG_NAMESPACE}" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
        ]
        self.open_groups = 0
        if title:
            self.parts.append(f"<title>{escape(title)}</title>")

    def element(self, tag: str, **attrs) -> "SvgDocument":
        self.parts.append(f"<{tag} {_attributes(attrs)}/>")
        return self

    def arrow_marker(self, marker_id: str, color: str) -> "SvgDocument":
        self.parts.append("<defs>")
        self.parts.append(
            f"<marker {_attributes(dict(id=marker_id, markerWidth=8, markerHeight=8, refX=6, refY=4, orient='auto'))}>"
        )
        self.element("path", d="M0,0 L8,4 L0,8 z", fill=color)
        self.parts.append("</marker>")
        self.parts.append("</defs>")
        return self

    def group_start(self, class_: str, **attrs) -> "SvgDocument":
        self.parts.append(f"<g {_attributes(dict(class_=class_, **attrs))}>")
        self.open_groups += 1
        return self

    def group_end(self) -> "SvgDocument":
        if self.open_groups == 0:
            raise ValueError("no open group to close")
        self.parts.append("</g>")
        self.open_groups -= 1
        return self

    def rect(self, x: float, y: float, width: float, height: float, **attrs) -> "SvgDocument":
        return self.element("rect", x=float(x), y=float(y), width=float(width), height=float(height), **attrs)

    def circle(self, cx: float, cy: float, r: float, **attrs) -> "SvgDocument":
        return self.element("circle", cx=float(cx), cy=float(cy), r=float(r), **attrs)

    def line(self, x1: float, y1: float, x2: float, y2: float, **attrs) -> "SvgDocument":
        return self.element("line", x1=float(x1), y1=float(y1), x2=float(x2), y2=float(y2), **attrs)

    def polyline(self, points: Iterable[Tuple[float, float]], **attrs) -> "SvgDocument":
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        return self.element("polyline", points=coords, fill="none", **attrs)

    def text(self, x: float, y: float, content: str, **attrs) -> "SvgDocument":
        self.parts.append(f"<text {_attributes(dict(x=float(x), y=float(y), **attrs))}>{escape(content)}</text>")
        return self

    def to_string(self) -> str:
        closing = ["</g>"] * self.open_groups
        return "\n".join(self.parts + closing + ["</svg>"]) + "\n"
