"""Otsu binarization and border following producing per-component contours.

Chromosomes are dark objects on a light field, so the default foreground rule
is intensity <= level; `invert` flips it for reversed stains.  Components use
8-connectivity and background (hole detection) uses 4-connectivity, the usual
duality that avoids checkerboard pathologies.

Connected components are found with union-find over horizontal pixel runs so
the Python-level work scales with the number of runs, not pixels.  Each
component's closed boundary is then traced with Moore neighborhood following.
Contours are listed in raster order of each component's first pixel, with a
component's hole contours directly after its outer contour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import GrayImage, Rect


@dataclass(frozen=True)
class BinaryMask:
    """Boolean foreground map with the source image's dimensions."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"mask must be a non-empty 2-D array, got shape {px.shape}")
        px = np.ascontiguousarray(px.astype(bool))
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Contour:
    """Ordered closed boundary of one component (or one hole inside it).

    points: (x, y) boundary pixels; consecutive entries are 8-adjacent and the
    last is 8-adjacent to the first.  For an outer contour `area` counts the
    filled component (enclosed holes included); for a hole contour it counts
    the enclosed pixels themselves.
    """

    points: tuple[tuple[int, int], ...]
    kind: str
    area: int
    bbox: Rect

    def __post_init__(self) -> None:
        if self.kind not in ("outer", "hole"):
            raise ValueError(f"kind must be outer|hole, got {self.kind!r}")
        if not self.points:
            raise ValueError("contour needs at least one point")
        if self.area < 1:
            raise ValueError(f"area must be >= 1, got {self.area}")

    @property
    def perimeter(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Component:
    """One 8-connected foreground component with its boundary decomposition.

    filled: boolean map cropped to outer.bbox with the holes filled in.
    """

    outer: Contour
    holes: tuple[Contour, ...]
    filled: np.ndarray


def otsu_threshold(img: GrayImage) -> int:
    """Otsu level maximizing between-class variance; ties take the lowest level."""
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    w0 = np.cumsum(hist)
    w1 = total - w0
    mu0_num = np.cumsum(hist * np.arange(256))
    mu_total = mu0_num[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(w0 > 0, mu0_num / w0, 0.0)
        mu1 = np.where(w1 > 0, (mu_total - mu0_num) / w1, 0.0)
    sigma_b = w0 * w1 * np.square(mu0 - mu1)
    return int(np.argmax(sigma_b))


def binarize(img: GrayImage, level: int, invert: bool = False) -> BinaryMask:
    """Foreground = intensity <= level (dark objects); invert flips the rule."""
    fg = img.pixels > level if invert else img.pixels <= level
    return BinaryMask(fg)


def _runs_of(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Horizontal runs of a boolean map as (row, x_first, x_last) arrays, raster order."""
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    d = np.diff(padded.ravel())
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    span = w + 2
    return starts // span, starts % span, ends % span - 1


def _find_root(parent: list[int], i: int) -> int:
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


def _label_runs(rows: np.ndarray, x0: np.ndarray, x1: np.ndarray, reach: int) -> np.ndarray:
    """Component label per run via union-find; reach 1 = 8-conn, 0 = 4-conn.

    Labels are 1-based and numbered by raster order of each component's first run.
    """
    n = len(rows)
    parent = list(range(n))
    uniq, first = np.unique(rows, return_index=True)
    bounds = {int(r): (int(first[k]), int(first[k + 1]) if k + 1 < len(first) else n) for k, r in enumerate(uniq)}
    for r in uniq:
        above = bounds.get(int(r) - 1)
        if above is None:
            continue
        i, a_hi = above
        j, b_hi = bounds[int(r)]
        while i < a_hi and j < b_hi:
            if x0[i] <= x1[j] + reach and x0[j] <= x1[i] + reach:
                ri, rj = _find_root(parent, i), _find_root(parent, j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            if x1[i] <= x1[j]:
                i += 1
            else:
                j += 1
    lab = np.empty(n, dtype=np.int32)
    numbered: dict[int, int] = {}
    for k in range(n):
        root = _find_root(parent, k)
        if root not in numbered:
            numbered[root] = len(numbered) + 1
        lab[k] = numbered[root]
    return lab


_MOORE = ((1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1))


def _next_step(inside: np.ndarray, y: int, x: int, back: int):
    """First inside neighbor scanning rotationally away from the backtrack."""
    for step in range(1, 9):
        d = (back + step) % 8
        dx, dy = _MOORE[d]
        if inside[y + dy, x + dx]:
            return y + dy, x + dx, (d + 4) % 8
    return None


def _trace_boundary(inside: np.ndarray, sy: int, sx: int) -> list[tuple[int, int]]:
    """Moore boundary trace of the region containing (sy, sx), its raster-first pixel.

    `inside` must be padded so neighbor lookups never leave the array.  The
    walk stops when its first (pixel, backtrack) state recurs, which closes
    the ring even when the boundary passes through the start pixel repeatedly.
    """
    pts = [(sx, sy)]
    state1 = _next_step(inside, sy, sx, 4)  # raster-first pixel: west is outside
    if state1 is None:
        return pts
    cap = 4 * int(inside.sum()) + 8
    cy, cx, back = state1
    while True:
        pts.append((cx, cy))
        nxt = _next_step(inside, cy, cx, back)
        if nxt == state1:
            return pts[:-1]  # the walk re-entered via the start pixel; drop the duplicate
        cy, cx, back = nxt
        if len(pts) > cap:
            raise RuntimeError("boundary trace failed to close")


def _bbox_of(points: list[tuple[int, int]]) -> Rect:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return Rect(min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)


def _fill_window(window: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int, int, int]]]:
    """Fill enclosed regions of a cropped component map.

    Returns (filled map, hole label map, holes); each hole entry is
    (seed_y, seed_x, area, hole_id) in raster order.  Anything not
    4-connected to the window border counts as enclosed, matching
    per-component isolated hole filling.  Holes are labeled individually so
    diagonal-adjacent holes trace as separate boundaries.
    """
    bh, bw = window.shape
    filled = window.copy()
    hole_img = np.zeros(window.shape, dtype=np.int32)
    rows, x0, x1 = _runs_of(~window)
    if len(rows) == 0:
        return filled, hole_img, []
    lab = _label_runs(rows, x0, x1, reach=0)
    border = set()
    for k in range(len(rows)):
        if rows[k] == 0 or rows[k] == bh - 1 or x0[k] == 0 or x1[k] == bw - 1:
            border.add(int(lab[k]))
    renum: dict[int, int] = {}
    seeds: list[tuple[int, int]] = []
    areas: list[int] = []
    for k in range(len(rows)):
        l = int(lab[k])
        if l in border:
            continue
        if l not in renum:
            renum[l] = len(renum) + 1
            seeds.append((int(rows[k]), int(x0[k])))
            areas.append(0)
        hid = renum[l]
        filled[rows[k], x0[k] : x1[k] + 1] = True
        hole_img[rows[k], x0[k] : x1[k] + 1] = hid
        areas[hid - 1] += int(x1[k] - x0[k] + 1)
    holes = [(sy, sx, areas[i], i + 1) for i, (sy, sx) in enumerate(seeds)]
    return filled, hole_img, holes


def _trace_shifted(inside_unpadded: np.ndarray, sy: int, sx: int, ox: int, oy: int) -> list[tuple[int, int]]:
    """Trace a boundary on an unpadded map and shift points to global coordinates."""
    padded = np.zeros((inside_unpadded.shape[0] + 2, inside_unpadded.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = inside_unpadded
    return [(x - 1 + ox, y - 1 + oy) for x, y in _trace_boundary(padded, sy + 1, sx + 1)]


def find_components(mask: BinaryMask) -> list[Component]:
    """All 8-connected foreground components with contours and filled maps."""
    rows, x0, x1 = _runs_of(mask.pixels)
    if len(rows) == 0:
        return []
    lab = _label_runs(rows, x0, x1, reach=1)
    per_label: dict[int, list[int]] = {}
    for k in range(len(rows)):
        per_label.setdefault(int(lab[k]), []).append(k)
    components = []
    for lid in sorted(per_label):
        runs = per_label[lid]
        by0, by1 = int(rows[runs[0]]), int(rows[runs[-1]])
        bx0 = int(min(x0[k] for k in runs))
        bx1 = int(max(x1[k] for k in runs))
        window = np.zeros((by1 - by0 + 1, bx1 - bx0 + 1), dtype=bool)
        for k in runs:
            window[rows[k] - by0, x0[k] - bx0 : x1[k] - bx0 + 1] = True
        filled, hole_img, holes = _fill_window(window)
        sy, sx = int(rows[runs[0]]) - by0, int(x0[runs[0]]) - bx0
        outer_pts = _trace_shifted(window, sy, sx, bx0, by0)
        outer = Contour(
            points=tuple(outer_pts),
            kind="outer",
            area=int(filled.sum()),
            bbox=Rect(bx0, by0, bx1 - bx0 + 1, by1 - by0 + 1),
        )
        hole_contours = []
        for hy, hx, harea, hid in holes:
            hole_pts = _trace_shifted(hole_img == hid, hy, hx, bx0, by0)
            hole_contours.append(
                Contour(points=tuple(hole_pts), kind="hole", area=harea, bbox=_bbox_of(hole_pts))
            )
        filled.flags.writeable = False
        components.append(Component(outer=outer, holes=tuple(hole_contours), filled=filled))
    return components


def find_contours(mask: BinaryMask) -> list[Contour]:
    """One outer contour per component plus flagged hole contours, raster order."""
    out: list[Contour] = []
    for comp in find_components(mask):
        out.append(comp.outer)
        out.extend(comp.holes)
    return out


def component_window(contour: Contour, mask: BinaryMask) -> np.ndarray:
    """Filled component map (cropped to contour.bbox) for one outer contour.

    Work is bounded by the bbox: the window is relabeled locally and the
    component containing the contour's first point selected.
    """
    if contour.kind != "outer":
        raise ValueError("component_window expects an outer contour")
    b = contour.bbox
    window = mask.pixels[b.y : b.y + b.h, b.x : b.x + b.w]
    rows, x0, x1 = _runs_of(window)
    lab = _label_runs(rows, x0, x1, reach=1)
    labels_img = np.zeros(window.shape, dtype=np.int32)
    for k in range(len(rows)):
        labels_img[rows[k], x0[k] : x1[k] + 1] = lab[k]
    px0, py0 = contour.points[0]
    lid = labels_img[py0 - b.y, px0 - b.x]
    filled, _, _ = _fill_window(labels_img == lid)
    return filled
