"""Labeled synthetic scenes: parametric sprites on white canvases."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .centromere import DC, MC
from .errors import InvalidGamma, InvalidParams, IoFailure, MalformedFile, PlacementOverflow
from .raster import WHITE, GrayImage, Rect, load_image
from .segmentation import BinaryMask

DEBRIS = "debris"
NUCLEUS = "nucleus"
KINDS = (MC, DC, DEBRIS, NUCLEUS)

_AXIS_STEP = 0.25
DEFAULT_GAMMA_RANGE = (0.7, 1.4)


@dataclass(frozen=True)
class ChromosomeShapeParams:
    """Bent-capsule shape description; also carries disc sizes for blob kinds."""

    kind: str = MC
    length: float = 46.0
    half_width: float = 4.4
    curvature: float = 0.0
    waists: tuple[float, ...] = (0.5,)
    waist_depth: float = 0.5
    notch_half_width: float = 4.0
    intensity: tuple[int, int] = (30, 90)
    nucleus_radius: float = 24.0
    debris_radius: float = 1.8

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown sprite kind {self.kind!r}")
        if self.length < 8.0:
            raise InvalidParams("length must be at least 8 px")
        if self.half_width < 1.5:
            raise InvalidParams("half_width must be at least 1.5 px")
        if abs(self.curvature) > math.pi:
            raise InvalidParams("curvature must lie in [-pi, pi]")
        want = {MC: 1, DC: 2}.get(self.kind, 0)
        if self.kind in (MC, DC):
            if len(self.waists) != want:
                raise InvalidParams(f"{self.kind} needs exactly {want} waist(s)")
            if any(not 0.1 < w < 0.9 for w in self.waists):
                raise InvalidParams("waist positions must lie in (0.1, 0.9)")
            if list(self.waists) != sorted(set(self.waists)):
                raise InvalidParams("waist positions must be strictly increasing")
        if not 0.0 < self.waist_depth < 1.0:
            raise InvalidParams("waist_depth must lie in (0, 1)")
        if not 0.0 < self.notch_half_width <= 8.0:
            raise InvalidParams("notch_half_width must lie in (0, 8]")
        lo, hi = self.intensity
        if not 0 <= lo <= hi <= WHITE - 1:
            raise InvalidParams("intensity range must satisfy 0 <= lo <= hi <= 254")
        if self.nucleus_radius <= 0 or self.debris_radius <= 0:
            raise InvalidParams("disc radii must be positive")


@dataclass(frozen=True, eq=False)
class Sprite:
    raster: GrayImage
    mask: BinaryMask
    kind: str
    centromeres: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sprite kind {self.kind!r}")
        if self.mask.pixels.shape != self.raster.pixels.shape:
            raise ValueError("mask and raster extents differ")
        want = {MC: 1, DC: 2}.get(self.kind, 0)
        if len(self.centromeres) != want:
            raise ValueError(f"{self.kind} sprite needs {want} centromere(s)")
        h, w = self.mask.pixels.shape
        for x, y in self.centromeres:
            if not (0 <= x < w and 0 <= y < h):
                raise ValueError("centromere outside sprite extent")


@dataclass(frozen=True)
class SceneObject:
    kind: str
    bbox: Rect
    centromeres: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class SceneLabel:
    canvas_w: int
    canvas_h: int
    objects: tuple[SceneObject, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for obj in self.objects:
            if not obj.bbox.within(self.canvas_w, self.canvas_h):
                raise ValueError("object bbox outside canvas")

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in KINDS}
        for obj in self.objects:
            out[obj.kind] += 1
        return out


def _trim(mask, raster, centromeres):
    ys, xs = np.nonzero(mask)
    y0, y1 = ys.min(), ys.max()
    x0, x1 = xs.min(), xs.max()
    return (
        mask[y0 : y1 + 1, x0 : x1 + 1],
        raster[y0 : y1 + 1, x0 : x1 + 1],
        tuple((int(x - x0), int(y - y0)) for x, y in centromeres),
    )


def _capsule_arrays(params, rng):
    L, hw = params.length, params.half_width
    n = 2 * int(math.ceil(L / (2 * _AXIS_STEP))) + 1
    ts = np.linspace(-L / 2, L / 2, n)
    if abs(params.curvature) < 1e-12:
        ax, ay = ts, np.zeros_like(ts)
    else:
        radius = L / params.curvature
        ax = radius * np.sin(ts / radius)
        ay = radius * (1.0 - np.cos(ts / radius))
    # integer-aligned waist centers keep the two DC notches rasterizing alike
    centers = [round((w - 0.5) * L) for w in params.waists]
    radii = np.full(n, hw)
    for c in centers:
        rel = ts - c
        inside = np.abs(rel) <= params.notch_half_width
        dip = np.cos(np.pi * rel / (2 * params.notch_half_width)) ** 2
        radii = np.where(inside, radii - hw * params.waist_depth * dip, radii)

    pad = hw + 2.0
    gx0, gx1 = math.floor(ax.min() - pad), math.ceil(ax.max() + pad)
    gy0, gy1 = math.floor(ay.min() - pad), math.ceil(ay.max() + pad)
    xs = np.arange(gx0, gx1 + 1, dtype=np.float64)
    ys = np.arange(gy0, gy1 + 1, dtype=np.float64)
    dx = xs[None, :, None] - ax[None, None, :]
    dy = ys[:, None, None] - ay[None, None, :]
    d2 = dx * dx + dy * dy
    mask = np.any(d2 <= radii[None, None, :] ** 2, axis=2)
    # flat ends: crop the end discs flush with the axis ends, because round
    # tips raster into single-file funnels that read as spurious constrictions
    near = np.argmin(d2, axis=2)
    for end, sgn in ((0, -1.0), (n - 1, 1.0)):
        j = min(end + 1, n - 1)
        tx, ty = ax[j] - ax[j - 1], ay[j] - ay[j - 1]
        norm = math.hypot(tx, ty)
        tx, ty = sgn * tx / norm, sgn * ty / norm
        along = (xs[None, :] - ax[end]) * tx + (ys[:, None] - ay[end]) * ty
        mask &= ~((near == end) & (along > 0.49))

    marks = []
    for c in centers:
        i = int(np.argmin(np.abs(ts - c)))
        marks.append((int(round(ax[i] - gx0)), int(round(ay[i] - gy0))))
    return mask, tuple(marks)


def _disc_arrays(radius):
    r = int(math.ceil(radius)) + 1
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return np.hypot(yy, xx) <= radius, ()


def generate_sprite(params: ChromosomeShapeParams, rng) -> Sprite:
    """Render one sprite; ground-truth centromeres sit at waist centers."""
    if params.kind in (MC, DC):
        mask, marks = _capsule_arrays(params, rng)
    elif params.kind == NUCLEUS:
        mask, marks = _disc_arrays(params.nucleus_radius)
    else:
        mask, marks = _disc_arrays(params.debris_radius)
    lo, hi = params.intensity
    shade = int(rng.integers(lo, hi + 1))
    raster = np.where(mask, np.uint8(shade), np.uint8(WHITE))
    mask, raster, marks = _trim(mask, raster, marks)
    return Sprite(
        raster=GrayImage.from_array(raster),
        mask=BinaryMask(mask),
        kind=params.kind,
        centromeres=marks,
    )


def random_shape_params(kind: str, rng, curvature_range=(0.0, 0.0)) -> ChromosomeShapeParams:
    """Sample plausible shape parameters for one sprite of the given kind."""
    lo, hi = curvature_range
    curvature = float(rng.uniform(lo, hi)) * (1 if rng.integers(2) else -1)
    if kind == MC:
        waists = (float(rng.uniform(0.35, 0.65)),)
    elif kind == DC:
        sep = float(rng.uniform(0.35, 0.5))
        mid = float(rng.uniform(0.45, 0.55))
        waists = (mid - sep / 2, mid + sep / 2)
    # waist half-width stays >= 1.8 px so the constriction never rasters
    # single-file, where the width-sum degenerates to lattice noise
    half_width = float(rng.uniform(3.6, 4.4))
    base = dict(
        kind=kind,
        length=float(rng.uniform(40.0, 60.0)),
        half_width=half_width,
        curvature=curvature if kind in (MC, DC) else 0.0,
        waist_depth=float(rng.uniform(0.35, 0.5)),
        nucleus_radius=float(rng.uniform(18.0, 30.0)),
        debris_radius=float(rng.uniform(1.0, 2.4)),
    )
    if kind in (MC, DC):
        base["waists"] = waists
    return ChromosomeShapeParams(**base)


def _rotate_point(x, y, w, h, k):
    for _ in range(k % 4):
        x, y = y, w - 1 - x
        w, h = h, w
    return x, y, w, h


def _free_rotate(sprite: Sprite, angle_deg: float) -> Sprite:
    mask = ndimage.rotate(
        sprite.mask.pixels.astype(np.uint8), angle_deg, order=0, reshape=True, prefilter=False
    ).astype(bool)
    raster = ndimage.rotate(
        sprite.raster.pixels, angle_deg, order=0, reshape=True, prefilter=False, cval=WHITE
    )
    raster = np.where(mask, raster, np.uint8(WHITE))
    h, w = sprite.mask.pixels.shape
    hh, ww = mask.shape
    th = math.radians(angle_deg)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    oy, ox = (hh - 1) / 2, (ww - 1) / 2
    marks = []
    for x, y in sprite.centromeres:
        dy, dx = y - cy, x - cx
        ny = oy + dy * math.cos(th) - dx * math.sin(th)
        nx = ox + dy * math.sin(th) + dx * math.cos(th)
        marks.append((int(round(nx)), int(round(ny))))
    mask, raster, marks = _trim(mask, raster, marks)
    h, w = mask.shape
    marks = tuple((min(max(x, 0), w - 1), min(max(y, 0), h - 1)) for x, y in marks)
    return Sprite(
        raster=GrayImage.from_array(raster),
        mask=BinaryMask(mask),
        kind=sprite.kind,
        centromeres=marks,
    )


def _oriented(sprite: Sprite, rng, allow_flips: bool, free_angle: bool) -> Sprite:
    if free_angle:
        sprite = _free_rotate(sprite, float(rng.uniform(0.0, 360.0)))
    mask = sprite.mask.pixels
    raster = sprite.raster.pixels
    marks = list(sprite.centromeres)
    h, w = mask.shape
    if allow_flips and rng.integers(2):
        mask, raster = mask[:, ::-1], raster[:, ::-1]
        marks = [(w - 1 - x, y) for x, y in marks]
    if allow_flips and rng.integers(2):
        mask, raster = mask[::-1, :], raster[::-1, :]
        marks = [(x, h - 1 - y) for x, y in marks]
    k = int(rng.integers(4)) if not free_angle else 0
    if k:
        mask = np.rot90(mask, k)
        raster = np.rot90(raster, k)
        marks = [_rotate_point(x, y, w, h, k)[:2] for x, y in marks]
    return Sprite(
        raster=GrayImage.from_array(np.ascontiguousarray(raster)),
        mask=BinaryMask(np.ascontiguousarray(mask)),
        kind=sprite.kind,
        centromeres=tuple(marks),
    )


def compose_scene(
    sprites,
    canvas_w: int,
    canvas_h: int,
    rng,
    *,
    margin: int = 2,
    max_tries: int = 200,
    noise_sigma: float = 0.0,
    allow_flips: bool = True,
    free_angle: bool = False,
) -> tuple[GrayImage, SceneLabel]:
    """Place sprites on a white canvas; masks stay disjoint with a margin."""
    if canvas_w < 1 or canvas_h < 1:
        raise InvalidParams("canvas must be at least 1x1")
    canvas = np.full((canvas_h, canvas_w), WHITE, dtype=np.uint8)
    occupied = np.zeros((canvas_h, canvas_w), dtype=bool)
    struct = np.ones((3, 3), dtype=bool)
    objects = []
    for sprite in sprites:
        placed = False
        for _ in range(max_tries):
            cand = _oriented(sprite, rng, allow_flips, free_angle)
            mask = cand.mask.pixels
            h, w = mask.shape
            if w > canvas_w or h > canvas_h:
                continue
            x0 = int(rng.integers(0, canvas_w - w + 1))
            y0 = int(rng.integers(0, canvas_h - h + 1))
            grown = ndimage.binary_dilation(
                np.pad(mask, margin), structure=struct, iterations=margin
            )
            gy0, gx0 = max(y0 - margin, 0), max(x0 - margin, 0)
            gy1, gx1 = min(y0 + h + margin, canvas_h), min(x0 + w + margin, canvas_w)
            window = occupied[gy0:gy1, gx0:gx1]
            gwin = grown[
                margin - (y0 - gy0) : margin - (y0 - gy0) + (gy1 - gy0),
                margin - (x0 - gx0) : margin - (x0 - gx0) + (gx1 - gx0),
            ]
            if np.any(window & gwin):
                continue
            patch = canvas[y0 : y0 + h, x0 : x0 + w]
            patch[mask] = cand.raster.pixels[mask]
            occupied[y0 : y0 + h, x0 : x0 + w] |= mask
            objects.append(
                SceneObject(
                    kind=cand.kind,
                    bbox=Rect(x0, y0, w, h),
                    centromeres=tuple((x0 + x, y0 + y) for x, y in cand.centromeres),
                )
            )
            placed = True
            break
        if not placed:
            raise PlacementOverflow(
                f"could not place a {sprite.kind} sprite within {max_tries} tries"
            )
    if noise_sigma > 0:
        noisy = canvas.astype(np.float64) + rng.normal(0.0, noise_sigma, canvas.shape)
        canvas = np.clip(np.rint(noisy), 0, WHITE).astype(np.uint8)
    label = SceneLabel(canvas_w=canvas_w, canvas_h=canvas_h, objects=tuple(objects))
    return GrayImage.from_array(canvas), label


def build_scene(
    rng,
    canvas_w: int,
    canvas_h: int,
    *,
    mc: int = 0,
    dc: int = 0,
    debris: int = 0,
    nuclei: int = 0,
    noise_sigma: float = 0.0,
    free_angle: bool = False,
    curvature_range=(0.0, 0.0),
) -> tuple[GrayImage, SceneLabel]:
    """Sample shapes for the requested mix and compose them on one canvas."""
    sprites = []
    for kind, n in ((MC, mc), (DC, dc), (DEBRIS, debris), (NUCLEUS, nuclei)):
        for _ in range(n):
            sprites.append(generate_sprite(random_shape_params(kind, rng, curvature_range), rng))
    return compose_scene(
        sprites, canvas_w, canvas_h, rng, noise_sigma=noise_sigma, free_angle=free_angle
    )


def augment(img: GrayImage, flip_h: bool, flip_v: bool, gamma: float) -> GrayImage:
    """Mirror flips, then the monotone intensity map v -> 255*(v/255)^gamma."""
    if not (math.isfinite(gamma) and gamma > 0):
        raise InvalidGamma(f"gamma must be positive and finite, got {gamma}")
    arr = img.pixels
    if flip_h:
        arr = arr[:, ::-1]
    if flip_v:
        arr = arr[::-1, :]
    lut = np.rint(WHITE * (np.arange(256) / WHITE) ** gamma).astype(np.uint8)
    return GrayImage.from_array(lut[arr])


def format_label_lines(label: SceneLabel) -> str:
    """One `kind cx cy w h` line per object, center and size in [0, 1]."""
    lines = []
    for obj in label.objects:
        b = obj.bbox
        cx = (b.x + b.w / 2) / label.canvas_w
        cy = (b.y + b.h / 2) / label.canvas_h
        lines.append(
            f"{obj.kind} {cx:.6f} {cy:.6f} {b.w / label.canvas_w:.6f} {b.h / label.canvas_h:.6f}"
        )
    return "".join(line + "\n" for line in lines)


def label_to_json(label: SceneLabel) -> str:
    doc = {
        "canvas": [label.canvas_w, label.canvas_h],
        "counts": label.counts(),
        "objects": [
            {
                "kind": obj.kind,
                "bbox": [obj.bbox.x, obj.bbox.y, obj.bbox.w, obj.bbox.h],
                "centromeres": [[x, y] for x, y in obj.centromeres],
            }
            for obj in label.objects
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_sprite_pool(directory) -> list[Sprite]:
    """Read crop/mask sprite pairs described by `<stem>.json` sidecars."""
    root = Path(directory)
    if not root.is_dir():
        raise IoFailure(f"sprite pool directory not found: {root}")
    sprites = []
    for meta_path in sorted(root.glob("*.json")):
        try:
            meta = json.loads(meta_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise MalformedFile(f"bad sprite sidecar {meta_path}: {exc}") from exc
        stem = meta_path.with_suffix("")
        raster = None
        for ext in (".pgm", ".png"):
            cand = stem.with_suffix(ext)
            if cand.exists():
                raster = load_image(cand)
                break
        mask_path = Path(f"{stem}.mask.pgm")
        if raster is None or not mask_path.exists():
            raise MalformedFile(f"sprite {stem} is missing its crop or mask file")
        mask = load_image(mask_path).pixels > 127
        marks = tuple((int(x), int(y)) for x, y in meta.get("centromeres", []))
        try:
            trimmed_mask, trimmed_raster, marks = _trim(mask, raster.pixels, marks)
            sprites.append(
                Sprite(
                    raster=GrayImage.from_array(np.ascontiguousarray(trimmed_raster)),
                    mask=BinaryMask(np.ascontiguousarray(trimmed_mask)),
                    kind=meta.get("kind", DEBRIS),
                    centromeres=marks,
                )
            )
        except ValueError as exc:
            raise MalformedFile(f"inconsistent sprite {stem}: {exc}") from exc
    return sprites
