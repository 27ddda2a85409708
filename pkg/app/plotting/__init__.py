"""
SVG figures for presentation traces and lie overlays
"""

from .figures import lie_figure, presentation_figure
from .svg_builder import SvgDocument

__all__ = ["lie_figure", "presentation_figure", "SvgDocument"]
