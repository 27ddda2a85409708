#!/usr/bin/env python3
"""
Binary-mask geometry

Connected components, centroid, solidity, skeletonization, skeleton
endpoints and the geodesic center of a skeleton. Everything uses
8-connectivity, and shortest paths are unweighted hop counts (a diagonal
step costs 1).

All functions are pure. Masks are processed on a padded crop around their
pixels, so results do not depend on where a shape sits in the image.
"""

import logging
from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as count_graph_components
from scipy.sparse.csgraph import shortest_path
from scipy.spatial import ConvexHull
from skimage.morphology import skeletonize as zhang_suen_thinning

from app.core.errors import MorphologyError
from app.models import BinaryMask, Pixel

logger = logging.getLogger(__name__)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

# center weight 10, neighbors 1: a pixel with exactly one neighbor scores 11
ENDPOINT_KERNEL = np.array([[1, 1, 1], [1, 10, 1], [1, 1, 1]], dtype=np.int32)
ENDPOINT_RESPONSE = 11

NEIGHBOR_OFFSETS = [
    (d_row, d_col)
    for d_row in (-1, 0, 1)
    for d_col in (-1, 0, 1)
    if (d_row, d_col) != (0, 0)
]

_HULL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Component:
    pixels: FrozenSet[Pixel]

    @property
    def pixel_count(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class Skeleton:
    pixels: FrozenSet[Pixel]
    source_dims: Tuple[int, int]  # (height, width)

    def as_mask(self) -> BinaryMask:
        height, width = self.source_dims
        return BinaryMask(width=width, height=height, pixels=self.pixels)


def _local_array(pixels: Iterable[Pixel], pad: int = 1) -> Tuple[np.ndarray, Tuple[int, int]]:
    coords = np.array(sorted(pixels), dtype=np.int64).reshape(-1, 2)
    origin = coords.min(axis=0) - pad
    shape = coords.max(axis=0) - origin + 1 + pad
    array = np.zeros((int(shape[0]), int(shape[1])), dtype=bool)
    local = coords - origin
    array[local[:, 0], local[:, 1]] = True
    return array, (int(origin[0]), int(origin[1]))


def _pixels_from_array(array: np.ndarray, origin: Tuple[int, int]) -> FrozenSet[Pixel]:
    rows, cols = np.nonzero(array)
    return frozenset(
        zip((rows + origin[0]).tolist(), (cols + origin[1]).tolist())
    )


def _endpoint_array(array: np.ndarray) -> np.ndarray:
    response = ndimage.convolve(
        array.astype(np.int32), ENDPOINT_KERNEL, mode="constant", cval=0
    )
    return array & (response == ENDPOINT_RESPONSE)


def label_pixel_groups(pixels: Iterable[Pixel]) -> List[FrozenSet[Pixel]]:
    """8-connected groups, largest first, ties by smallest pixel"""
    pixels = frozenset(pixels)
    if not pixels:
        return []
    array, origin = _local_array(pixels)
    labels, count = ndimage.label(array, structure=EIGHT_CONNECTED)
    groups = [_pixels_from_array(labels == index, origin) for index in range(1, count + 1)]
    groups.sort(key=lambda group: (-len(group), min(group)))
    return groups


def connected_components(mask: BinaryMask) -> List[Component]:
    return [Component(pixels=group) for group in label_pixel_groups(mask.pixels)]


def largest_component_mask(mask: BinaryMask) -> BinaryMask:
    components = connected_components(mask)
    if not components:
        return mask
    return mask.with_pixels(components[0].pixels)


def centroid(component: Component) -> Tuple[float, float]:
    if not component.pixels:
        raise MorphologyError("centroid of an empty component")
    coords = np.array(list(component.pixels), dtype=float)
    mean = coords.mean(axis=0)
    return float(mean[0]), float(mean[1])


def hull_pixel_count(pixels: Iterable[Pixel]) -> int:
    """Grid points inside or on the convex hull of the pixel centers"""
    ordered = sorted(set(pixels))
    if not ordered:
        return 0
    coords = np.array(ordered, dtype=float)
    if len(ordered) < 3 or np.linalg.matrix_rank(coords - coords[0]) < 2:
        (r0, c0), (r1, c1) = ordered[0], ordered[-1]
        return gcd(abs(r1 - r0), abs(c1 - c0)) + 1

    hull = ConvexHull(coords)
    low = coords.min(axis=0).astype(int)
    high = coords.max(axis=0).astype(int)
    rows, cols = np.mgrid[low[0] : high[0] + 1, low[1] : high[1] + 1]
    grid = np.column_stack([rows.ravel(), cols.ravel()]).astype(float)
    signed = grid @ hull.equations[:, :2].T + hull.equations[:, 2]
    return int(np.count_nonzero(np.all(signed <= _HULL_TOLERANCE, axis=1)))


def solidity(component: Component) -> float:
    if not component.pixels:
        raise MorphologyError("solidity of an empty component")
    return component.pixel_count / hull_pixel_count(component.pixels)


def _nearest_to_centroid(group: FrozenSet[Pixel]) -> Pixel:
    row, col = centroid(Component(group))
    return min(group, key=lambda p: ((p[0] - row) ** 2 + (p[1] - col) ** 2, p))


def _bridge(group: FrozenSet[Pixel], pieces: List[FrozenSet[Pixel]]) -> Set[Pixel]:
    """Shortest paths inside `group` joining every piece to the largest one"""
    joined = set(pieces[0])
    added: Set[Pixel] = set()
    remaining = [set(p) for p in pieces[1:]]
    while remaining:
        parents: Dict[Pixel, Optional[Pixel]] = {p: None for p in sorted(joined)}
        queue = deque(sorted(joined))
        reached = None
        while queue and reached is None:
            row, col = queue.popleft()
            for d_row, d_col in NEIGHBOR_OFFSETS:
                nxt = (row + d_row, col + d_col)
                if nxt in group and nxt not in parents:
                    parents[nxt] = (row, col)
                    if any(nxt in piece for piece in remaining):
                        reached = nxt
                        break
                    queue.append(nxt)
        piece = next(p for p in remaining if reached in p)
        remaining.remove(piece)
        step = parents[reached]
        while step is not None and step not in joined:
            added.add(step)
            step = parents[step]
        joined |= piece | added
    return added


def _is_staircase_corner(pixel: Pixel, pixels: Set[Pixel]) -> bool:
    """A pixel with both a horizontal and a vertical neighbor whose removal keeps its neighbors joined"""
    row, col = pixel
    if (row, col - 1) not in pixels and (row, col + 1) not in pixels:
        return False
    if (row - 1, col) not in pixels and (row + 1, col) not in pixels:
        return False
    if all(p in pixels for p in [(row - 1, col), (row + 1, col), (row, col - 1), (row, col + 1)]):
        return False
    ring = [(row + d_row, col + d_col) for d_row, d_col in NEIGHBOR_OFFSETS]
    ring = [p for p in ring if p in pixels]
    return len(ring) >= 2 and len(label_pixel_groups(ring)) == 1


def _remove_staircase_corners(pixels: Set[Pixel]) -> Set[Pixel]:
    """Drop staircase corners until no pixel has more neighbors than the curve needs"""
    pixels = set(pixels)
    changed = True
    while changed:
        changed = False
        for pixel in sorted(pixels):
            if _is_staircase_corner(pixel, pixels):
                pixels.discard(pixel)
                changed = True
    return pixels


def skeletonize(mask: BinaryMask) -> Skeleton:
    """
    Zhang-Suen thinning to a one-pixel-wide skeleton.

    A source component that thins away completely keeps the pixel closest
    to its centroid, and one that thins into several pieces gets them
    joined by shortest paths through the component, so the skeleton has
    exactly as many components as the mask. Staircase corners left by the
    thinning are then removed so spur tips are single pixels.
    """
    dims = (mask.height, mask.width)
    if mask.is_empty:
        return Skeleton(pixels=frozenset(), source_dims=dims)

    array, origin = _local_array(mask.pixels, pad=1)
    thinned = zhang_suen_thinning(array)
    pixels = set(_pixels_from_array(thinned, origin))

    for group in label_pixel_groups(mask.pixels):
        inside = pixels & group
        if not inside:
            pixels.add(_nearest_to_centroid(group))
            continue
        pieces = label_pixel_groups(inside)
        if len(pieces) > 1:
            logger.debug(f"Thinning split a component into {len(pieces)} pieces; rejoining")
            pixels |= _bridge(group, pieces)

    return Skeleton(pixels=frozenset(_remove_staircase_corners(pixels)), source_dims=dims)


def _longest_branch(tip: Pixel, available: Set[Pixel]) -> List[Pixel]:
    """Pixels of the longest hop path from `tip` into `available`, tip excluded"""
    parents: Dict[Pixel, Optional[Pixel]] = {tip: None}
    depths = {tip: 0}
    queue = deque([tip])
    while queue:
        row, col = queue.popleft()
        for d_row, d_col in NEIGHBOR_OFFSETS:
            nxt = (row + d_row, col + d_col)
            if nxt in available and nxt not in parents:
                parents[nxt] = (row, col)
                depths[nxt] = depths[(row, col)] + 1
                queue.append(nxt)

    farthest = min(depths, key=lambda p: (-depths[p], p))
    path = []
    while farthest != tip:
        path.append(farthest)
        farthest = parents[farthest]
    return path


def prune_skeleton(skel: Skeleton, max_spur_length: int) -> Skeleton:
    """
    Remove side branches of at most `max_spur_length` pixels.

    Endpoints are peeled off `max_spur_length` times; each surviving tip
    then gets back the longest branch it lost, which restores the main
    branch ends but neither the spurs hanging off junctions nor the extra
    prongs of a forked tip. Components that would shrink to a single pixel
    or disappear are left untouched.
    """
    if max_spur_length <= 0 or not skel.pixels:
        return skel

    array, origin = _local_array(skel.pixels, pad=1)
    trimmed = array.copy()
    for _ in range(max_spur_length):
        tips = _endpoint_array(trimmed)
        if not tips.any():
            break
        trimmed &= ~tips

    kept = set(_pixels_from_array(trimmed, origin))
    available = set(skel.pixels) - kept
    for tip in sorted(_pixels_from_array(_endpoint_array(trimmed), origin)):
        branch = _longest_branch(tip, available)
        kept.update(branch)
        available.difference_update(branch)

    for group in label_pixel_groups(skel.pixels):
        if len(kept & group) <= 1:
            kept |= group

    removed = len(skel.pixels) - len(kept)
    if removed:
        logger.debug(f"Pruned {removed} spur pixels from skeleton")
    return Skeleton(pixels=frozenset(kept), source_dims=skel.source_dims)


def skeleton_endpoints(skel: Skeleton) -> List[Pixel]:
    if not skel.pixels:
        return []
    array, origin = _local_array(skel.pixels, pad=1)
    return sorted(_pixels_from_array(_endpoint_array(array), origin))


def geodesic_distance_sums(pixels: Iterable[Pixel]) -> Dict[Pixel, int]:
    """Sum of hop distances from each pixel to every other pixel of the set"""
    nodes = sorted(set(pixels))
    if not nodes:
        raise MorphologyError("geodesic center of an empty skeleton")

    index = {pixel: i for i, pixel in enumerate(nodes)}
    sources, targets = [], []
    for i, (row, col) in enumerate(nodes):
        for d_row, d_col in NEIGHBOR_OFFSETS:
            j = index.get((row + d_row, col + d_col))
            if j is not None:
                sources.append(i)
                targets.append(j)

    size = len(nodes)
    graph = csr_matrix(
        (np.ones(len(sources)), (sources, targets)), shape=(size, size)
    )
    n_components, _ = count_graph_components(graph, directed=False)
    if n_components != 1:
        raise MorphologyError(
            f"geodesic center needs a connected skeleton, got {n_components} components"
        )

    distances = shortest_path(graph, directed=False, unweighted=True)
    sums = distances.sum(axis=1)
    return {node: int(round(total)) for node, total in zip(nodes, sums.tolist())}


def geodesic_center(skel: Skeleton) -> Pixel:
    sums = geodesic_distance_sums(skel.pixels)
    # sorted iteration order makes min() pick the lexicographically smallest tie
    return min(sorted(sums), key=lambda pixel: sums[pixel])
