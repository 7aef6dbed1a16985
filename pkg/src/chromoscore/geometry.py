"""Per-contour width/length statistics and population-relative debris filters.

Width at a point is twice the Euclidean distance-transform value, i.e. the
full local object width; it is sampled along a thinned reference skeleton of
the filled component.  Length is the skeleton's geodesic diameter (longest
internal path, diagonal steps weighted sqrt(2)).

Debris removal compares each contour against the medians of its own image's
contour population: ratios of (1) area, (2) mean width, (3) median width and
(4) max width to the respective medians, plus (5) the bbox side ratio, must
all fall inside inclusive acceptance bands.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, fields

import numpy as np
from scipy.ndimage import distance_transform_edt
from skimage.morphology import skeletonize

from .errors import DegenerateContour
from .segmentation import BinaryMask, Contour, component_window

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class ContourStats:
    """Geometry summary of one outer contour's component."""

    area: int
    mean_width: float
    median_width: float
    max_width: float
    bbox_min_side: int
    bbox_max_side: int
    length: float


@dataclass(frozen=True)
class FilterThresholds:
    """Inclusive [lo, hi] acceptance bands for the five debris ratios."""

    area: tuple[float, float] = (0.2, 6.0)
    mean_width: tuple[float, float] = (0.4, 3.0)
    median_width: tuple[float, float] = (0.4, 3.0)
    max_width: tuple[float, float] = (0.4, 3.0)
    aspect: tuple[float, float] = (0.02, 0.9)

    def __post_init__(self) -> None:
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if lo > hi:
                raise ValueError(f"band {f.name} has lo {lo} > hi {hi}")


def geodesic_diameter(skel: np.ndarray) -> float:
    """Longest shortest-path between skeleton pixels, 8-connected, sqrt(2) diagonals.

    Double sweep per connected piece: Dijkstra from any pixel finds one far
    end, a second Dijkstra from there finds the true diameter of a tree-like
    skeleton.  A fragmented skeleton reports its largest piece.
    """
    pts = list(zip(*np.nonzero(skel)))
    if len(pts) < 2:
        return 0.0
    inside = skel

    def sweep(start):
        dist = {start: 0.0}
        heap = [(0.0, start)]
        far, far_d = start, 0.0
        while heap:
            d, (y, x) = heapq.heappop(heap)
            if d > dist.get((y, x), np.inf):
                continue
            if d > far_d:
                far, far_d = (y, x), d
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dy == 0 and dx == 0:
                        continue
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < inside.shape[0] and 0 <= nx < inside.shape[1] and inside[ny, nx]:
                        nd = d + (SQRT2 if dy and dx else 1.0)
                        if nd < dist.get((ny, nx), np.inf):
                            dist[(ny, nx)] = nd
                            heapq.heappush(heap, (nd, (ny, nx)))
        return far, far_d, dist

    remaining = set(pts)
    diameter = 0.0
    while remaining:
        far, _, _ = sweep(min(remaining))
        _, piece, seen = sweep(far)
        diameter = max(diameter, piece)
        remaining -= seen.keys()
    return diameter


def component_widths(filled: np.ndarray) -> tuple[np.ndarray, float]:
    """(sampled widths, skeleton path length) for a filled component map."""
    padded = np.zeros((filled.shape[0] + 2, filled.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = filled
    edt = distance_transform_edt(padded)
    skel = skeletonize(padded)
    if not skel.any():
        # thinning degenerates only on shapes a pixel or two wide; fall back
        # to the deepest interior pixel
        seed = np.unravel_index(int(np.argmax(edt)), edt.shape)
        skel[seed] = True
    widths = 2.0 * edt[skel]
    return widths, geodesic_diameter(skel)


def compute_stats(contour: Contour, mask: BinaryMask) -> ContourStats:
    """Measure one outer contour's component; DegenerateContour below 3 pixels."""
    filled = component_window(contour, mask)
    if int(filled.sum()) < 3:
        raise DegenerateContour(f"component of {contour.points[0]} has < 3 pixels")
    widths, length = component_widths(filled)
    return ContourStats(
        area=contour.area,
        mean_width=float(widths.mean()),
        median_width=float(np.median(widths)),
        max_width=float(widths.max()),
        bbox_min_side=contour.bbox.min_side,
        bbox_max_side=contour.bbox.max_side,
        length=length,
    )


def debris_reasons(stats: list[ContourStats], th: FilterThresholds) -> list[list[int]]:
    """Violated filter indices (1-5) per contour; empty list means kept."""
    if not stats:
        return []
    med_area = float(np.median([s.area for s in stats]))
    med_mean = float(np.median([s.mean_width for s in stats]))
    med_median = float(np.median([s.median_width for s in stats]))
    med_max = float(np.median([s.max_width for s in stats]))
    out = []
    for s in stats:
        ratios = (
            s.area / med_area,
            s.mean_width / med_mean,
            s.median_width / med_median,
            s.max_width / med_max,
            s.bbox_min_side / s.bbox_max_side,
        )
        bands = (th.area, th.mean_width, th.median_width, th.max_width, th.aspect)
        out.append([i + 1 for i, (r, (lo, hi)) in enumerate(zip(ratios, bands)) if not lo <= r <= hi])
    return out


def filter_debris(stats: list[ContourStats], th: FilterThresholds) -> list[int]:
    """Indices of contours passing all five population-relative bands."""
    return [i for i, why in enumerate(debris_reasons(stats, th)) if not why]
