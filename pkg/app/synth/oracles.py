#!/usr/bin/env python3
"""
Brute-force reference implementations

Slow, obviously-correct versions of the morphology measurements, written
with plain loops and breadth-first searches instead of the scipy graph and
hull routines, so tests can compare them against the fast path.
"""

from collections import deque
from typing import Iterable, List, Optional, Set, Tuple

import numpy as np

from app.models import Pixel

_NEIGHBORS = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]


def _bfs_depths(source: Pixel, nodes: Set[Pixel]) -> dict:
    depths = {source: 0}
    queue = deque([source])
    while queue:
        row, col = queue.popleft()
        for dr, dc in _NEIGHBORS:
            nxt = (row + dr, col + dc)
            if nxt in nodes and nxt not in depths:
                depths[nxt] = depths[(row, col)] + 1
                queue.append(nxt)
    return depths


def oracle_geodesic_center(pixels: Iterable[Pixel]) -> Pixel:
    """Node with the smallest sum of 8-connected hop distances; ties to the smallest (row, col)"""
    nodes = set(pixels)
    if not nodes:
        raise ValueError("no pixels")
    best: Optional[Tuple[int, Pixel]] = None
    for source in sorted(nodes):
        depths = _bfs_depths(source, nodes)
        if len(depths) != len(nodes):
            raise ValueError("pixels are not 8-connected")
        total = sum(depths.values())
        if best is None or total < best[0]:
            best = (total, source)
    return best[1]


def _cross(o: Pixel, a: Pixel, b: Pixel) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(points: List[Pixel]) -> List[Pixel]:
    if len(points) <= 2:
        return points
    lower: List[Pixel] = []
    for p in points:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Pixel] = []
    for p in reversed(points):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def oracle_hull_pixel_count(pixels: Iterable[Pixel]) -> int:
    """Grid points inside or on the convex hull of the pixel centers, by exact integer tests"""
    points = sorted(set(pixels))
    if not points:
        return 0
    hull = _monotone_chain(points)
    rows = [p[0] for p in points]
    cols = [p[1] for p in points]

    count = 0
    for r in range(min(rows), max(rows) + 1):
        for c in range(min(cols), max(cols) + 1):
            p = (r, c)
            if len(hull) == 1:
                inside = p == hull[0]
            elif len(hull) == 2:
                a, b = hull
                inside = (
                    _cross(a, b, p) == 0
                    and min(a[0], b[0]) <= r <= max(a[0], b[0])
                    and min(a[1], b[1]) <= c <= max(a[1], b[1])
                )
            else:
                inside = all(
                    _cross(hull[i], hull[(i + 1) % len(hull)], p) >= 0 for i in range(len(hull))
                )
            count += inside
    return count


def random_connected_pixels(rng: np.random.Generator, size: int) -> Set[Pixel]:
    """Random 8-connected blob grown one neighbor at a time from (0, 0)"""
    if size < 1:
        raise ValueError("size must be at least 1")
    pixels = {(0, 0)}
    ordered = [(0, 0)]
    while len(pixels) < size:
        row, col = ordered[int(rng.integers(len(ordered)))]
        dr, dc = _NEIGHBORS[int(rng.integers(len(_NEIGHBORS)))]
        nxt = (row + dr, col + dc)
        if nxt not in pixels:
            pixels.add(nxt)
            ordered.append(nxt)
    return pixels
