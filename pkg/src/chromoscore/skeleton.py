"""Skeleton growing by the bending potential ratio predicate.

Every interior pixel p has a ruling point q1, its nearest boundary point.  A
pixel joins the skeleton when the bending potential ratio evaluated against
the ruling point q2 of an already admitted 8-neighbor exceeds the threshold t:

    epsilon = tan(theta / 2) * sqrt(arc^2 / chord^2 - 1)

where theta is the angle q1-p-q2, chord the Euclidean distance between the
two ruling points and arc the shorter of the two boundary paths joining them.
Points deep inside the body see their ruling points on opposite sides (theta
near pi, long arc) and score high; points near a cap see both ruling points
on the same small boundary patch and score near zero, which is what stops the
growth at the ends.

Growth starts at the deepest interior pixel (distance-transform argmax,
raster tie-break) and proceeds breadth first.  The admission rule is monotone
in the admitted set, so the fixed point reached is independent of traversal
order.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.ndimage import distance_transform_edt

from .errors import EmptyInterior, InvalidParams
from .geometry import geodesic_diameter
from .segmentation import BinaryMask, Contour, component_window

# cosine this close to -1 counts as a straight angle and yields the infinite
# sentinel; integer-pixel geometry cannot otherwise get nearer than ~1e-10
_COS_FLAT = -1.0 + 1e-12

_NBR8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class BprParams:
    """Admission threshold and seed policy for skeleton growth."""

    t: float = 1.0
    seed_policy: str = "edt-argmax"

    def __post_init__(self) -> None:
        if not 0.0 < self.t < 10.0:
            raise InvalidParams(f"t must be in (0, 10), got {self.t}")
        if self.seed_policy != "edt-argmax":
            raise InvalidParams(f"unknown seed policy {self.seed_policy!r}")


@dataclass(frozen=True)
class SkeletonPoint:
    """One admitted pixel with the geometry that admitted it.

    q1 is p's own ruling point, q2 the growth parent's ruling point (equal to
    q1 for the seed); width = dist(p, q1); epsilon the admitting ratio value
    (math.inf for the seed).
    """

    p: tuple[int, int]
    q1: tuple[int, int]
    q2: tuple[int, int]
    width: float
    epsilon: float


@dataclass(frozen=True)
class Skeleton:
    """Admitted point set of one component, in admission order (seed first)."""

    contour_id: int
    points: tuple[SkeletonPoint, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("skeleton needs at least the seed point")

    def pixel_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(sp.p for sp in self.points)

    @cached_property
    def path_length(self) -> float:
        """Geodesic diameter of the admitted pixel set (sqrt(2) diagonals)."""
        xs = [sp.p[0] for sp in self.points]
        ys = [sp.p[1] for sp in self.points]
        x0, y0 = min(xs), min(ys)
        canvas = np.zeros((max(ys) - y0 + 1, max(xs) - x0 + 1), dtype=bool)
        for sp in self.points:
            canvas[sp.p[1] - y0, sp.p[0] - x0] = True
        return geodesic_diameter(canvas)


def ruling_point(p: tuple[int, int], contour: Contour) -> tuple[int, int]:
    """Euclidean-nearest contour point to p; ties take the lowest contour index."""
    pts = np.asarray(contour.points, dtype=np.int64)
    d2 = np.square(pts[:, 0] - p[0]) + np.square(pts[:, 1] - p[1])
    i = int(np.argmin(d2))
    return contour.points[i]


def contour_arc_table(contour: Contour) -> tuple[np.ndarray, float]:
    """Cumulative boundary length per contour index plus the ring total.

    Steps weigh 1 between axial neighbors and sqrt(2) between diagonal ones.
    """
    pts = np.asarray(contour.points, dtype=np.int64)
    if len(pts) == 1:
        return np.zeros(1), 0.0
    ring = np.vstack([pts, pts[:1]])
    steps = np.where((np.abs(np.diff(ring, axis=0)) == 1).all(axis=1), math.sqrt(2.0), 1.0)
    cum = np.concatenate([[0.0], np.cumsum(steps[:-1])])
    return cum, float(cum[-1] + steps[-1])


def _min_arc(cum: np.ndarray, total: float, i: int, j: int) -> float:
    d = abs(float(cum[i]) - float(cum[j]))
    return min(d, total - d)


def bpr_epsilon(
    p: tuple[int, int], q1: tuple[int, int], q2: tuple[int, int], arc_length: float
) -> float:
    """Bending potential ratio from explicit geometry.

    Returns 0 when the ruling points coincide or the chord reaches the arc
    length, and math.inf when the angle at p is straight.
    """
    if tuple(q1) == tuple(q2):
        return 0.0
    ax, ay = q1[0] - p[0], q1[1] - p[1]
    bx, by = q2[0] - p[0], q2[1] - p[1]
    na = math.hypot(ax, ay)
    nb = math.hypot(bx, by)
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = (ax * bx + ay * by) / (na * nb)
    if c <= _COS_FLAT:
        return math.inf
    c = min(c, 1.0)
    chord2 = (q1[0] - q2[0]) ** 2 + (q1[1] - q2[1]) ** 2
    radicand = arc_length * arc_length / chord2 - 1.0
    if radicand < 0.0:
        radicand = 0.0
    return math.sqrt((1.0 - c) / (1.0 + c)) * math.sqrt(radicand)


def bpr_value(
    p: tuple[int, int], q1: tuple[int, int], q2: tuple[int, int], contour: Contour
) -> float:
    """Ratio for boundary points given by coordinate; arc read off the contour ring.

    Boundary pixels a ribbon visits twice resolve to their lowest index.
    """
    cum, total = contour_arc_table(contour)
    i = contour.points.index(tuple(q1))
    j = contour.points.index(tuple(q2))
    return bpr_epsilon(p, q1, q2, _min_arc(cum, total, i, j))


def grow_skeleton(
    contour: Contour, mask: BinaryMask, params: BprParams, contour_id: int = 0
) -> Skeleton:
    """Grow the admitted point set for one outer contour's component.

    Raises EmptyInterior when the component has fewer than 3 interior
    (non-boundary) pixels.
    """
    b = contour.bbox
    filled = component_window(contour, mask)
    h, w = filled.shape

    # window-local contour geometry
    cxs = [x - b.x for x, _ in contour.points]
    cys = [y - b.y for _, y in contour.points]
    cum, total = contour_arc_table(contour)
    cums = [float(v) for v in cum]

    interior = filled.copy()
    for x, y in zip(cxs, cys):
        interior[y, x] = False
    if int(interior.sum()) < 3:
        raise EmptyInterior(
            f"component of {contour.points[0]} has {int(interior.sum())} interior pixels"
        )

    # per-interior-pixel ruling point: exact integer argmin of squared distance,
    # first (= lowest) contour index on ties
    iys, ixs = np.nonzero(interior)
    cpts = np.stack([np.asarray(cxs, dtype=np.int64), np.asarray(cys, dtype=np.int64)], axis=1)
    nearest = np.empty(len(iys), dtype=np.int64)
    near_d2 = np.empty(len(iys), dtype=np.int64)
    # bound the pixel-by-contour distance matrix to ~8M entries per chunk
    step = max(1, 8_000_000 // max(len(cpts), 1))
    for lo in range(0, len(iys), step):
        hi = lo + step
        d2 = (
            np.square(ixs[lo:hi, None] - cpts[None, :, 0])
            + np.square(iys[lo:hi, None] - cpts[None, :, 1])
        )
        part = np.argmin(d2, axis=1)
        nearest[lo:hi] = part
        near_d2[lo:hi] = d2[np.arange(len(part)), part]
    qidx = np.full((h, w), -1, dtype=np.int64)
    qidx[iys, ixs] = nearest
    width_map = np.zeros((h, w))
    width_map[iys, ixs] = np.sqrt(near_d2)

    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = filled
    edt = distance_transform_edt(padded)[1:-1, 1:-1]
    depth = np.where(interior, edt, -1.0)
    seed_y, seed_x = np.unravel_index(int(np.argmax(depth)), depth.shape)

    def ratio(x: int, y: int, qi: int, q2i: int) -> float:
        if qi == q2i:
            return 0.0
        q1x, q1y = cxs[qi], cys[qi]
        q2x, q2y = cxs[q2i], cys[q2i]
        d = abs(cums[qi] - cums[q2i])
        arc = d if d <= total - d else total - d
        return bpr_epsilon((x, y), (q1x, q1y), (q2x, q2y), arc)

    t = params.t
    seed_qi = int(qidx[seed_y, seed_x])
    admitted: dict[tuple[int, int], tuple[int, int, float]] = {
        (seed_y, seed_x): (seed_qi, seed_qi, math.inf)
    }
    order = [(seed_y, seed_x)]
    queue: deque[tuple[int, int]] = deque()
    queued: set[tuple[int, int]] = set()

    def enqueue_neighbors(y: int, x: int) -> None:
        for dy, dx in _NBR8:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and interior[ny, nx]:
                key = (ny, nx)
                if key not in admitted and key not in queued:
                    queued.add(key)
                    queue.append(key)

    enqueue_neighbors(seed_y, seed_x)
    while queue:
        y, x = queue.popleft()
        queued.discard((y, x))
        if (y, x) in admitted:
            continue
        qi = int(qidx[y, x])
        best, best_q2 = 0.0, -1
        for dy, dx in _NBR8:
            rec = admitted.get((y + dy, x + dx))
            if rec is None:
                continue
            eps = ratio(x, y, qi, rec[0])
            if eps > best:
                best, best_q2 = eps, rec[0]
        if best > t:
            admitted[(y, x)] = (qi, best_q2, best)
            order.append((y, x))
            enqueue_neighbors(y, x)

    points = []
    for y, x in order:
        qi, q2i, eps = admitted[(y, x)]
        points.append(
            SkeletonPoint(
                p=(x + b.x, y + b.y),
                q1=(cxs[qi] + b.x, cys[qi] + b.y),
                q2=(cxs[q2i] + b.x, cys[q2i] + b.y),
                width=float(width_map[y, x]),
                epsilon=eps,
            )
        )
    return Skeleton(contour_id=contour_id, points=tuple(points))
