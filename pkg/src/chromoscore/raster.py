"""8-bit grayscale rasters: value types, PGM/PNG I/O, cropping and padding.

PGM (P5 binary, P2 ASCII) is the bit-exact reference format; PNG is accepted
for ingestion convenience.  Multi-channel PNGs are converted to luma with the
integer BT.601 rule

    y = (77*r + 150*g + 29*b + 128) >> 8

which keeps the conversion exactly reproducible across platforms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure, MalformedFile, OutOfBounds, TargetTooSmall, UnsupportedDepth

WHITE = 255


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit single-channel raster, pixels stored row-major as (h, w)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {px.dtype}")
        px = np.ascontiguousarray(px)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self) -> int:
        return hash((self.pixels.shape, self.pixels.tobytes()))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        """Build from any integer array already within [0, 255]."""
        return cls(np.asarray(arr).astype(np.uint8))

    @classmethod
    def full(cls, width: int, height: int, value: int = WHITE) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.uint8))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle, (x, y) top-left inclusive."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rectangle extent must be >= 1, got {self.w}x{self.h}")

    @property
    def min_side(self) -> int:
        return min(self.w, self.h)

    @property
    def max_side(self) -> int:
        return max(self.w, self.h)

    def within(self, width: int, height: int) -> bool:
        return 0 <= self.x and 0 <= self.y and self.x + self.w <= width and self.y + self.h <= height


_PGM_TOKEN = re.compile(rb"^\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read `count` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    pos = 0
    for _ in range(count):
        m = _PGM_TOKEN.match(data[pos:])
        if m is None:
            raise MalformedFile("truncated PGM header")
        tokens.append(m.group(1))
        pos += m.end(1)
    return tokens, pos


def _load_pgm(data: bytes, path: Path) -> GrayImage:
    magic = data[:2]
    try:
        tokens, pos = _read_pgm_tokens(data[2:], 3)
    except MalformedFile as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedFile(f"{path}: non-numeric PGM header field") from exc
    if width < 1 or height < 1:
        raise MalformedFile(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise UnsupportedDepth(f"{path}: maxval {maxval} is not 8-bit")

    if magic == b"P5":
        # exactly one whitespace byte separates the header from raster data
        raster = data[2 + pos + 1 :]
        if len(raster) < width * height:
            raise MalformedFile(f"{path}: raster truncated ({len(raster)} of {width * height} bytes)")
        arr = np.frombuffer(raster[: width * height], dtype=np.uint8)
    else:
        try:
            values = [int(t) for t in data[2 + pos :].split()]
        except ValueError as exc:
            raise MalformedFile(f"{path}: non-numeric P2 sample") from exc
        if len(values) < width * height:
            raise MalformedFile(f"{path}: raster truncated ({len(values)} of {width * height} samples)")
        arr = np.asarray(values[: width * height], dtype=np.int64)
        if arr.min() < 0 or arr.max() > maxval:
            raise MalformedFile(f"{path}: sample outside [0, {maxval}]")
        arr = arr.astype(np.uint8)
    return GrayImage(arr.reshape(height, width))


def _load_png(path: Path) -> GrayImage:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                arr = np.asarray(im, dtype=np.uint8)
            elif mode in ("LA", "P", "RGB", "RGBA"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.uint32)
                r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
                arr = ((77 * r + 150 * g + 29 * b + 128) >> 8).astype(np.uint8)
            else:
                raise UnsupportedDepth(f"{path}: PNG mode {mode} is not 8-bit grayscale-convertible")
    except UnsupportedDepth:
        raise
    except OSError as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    return GrayImage(arr)


def load_image(path: str | Path) -> GrayImage:
    """Load a PGM (P5/P2) or PNG file as a GrayImage.

    Raises MalformedFile on undecodable content and UnsupportedDepth on
    non-8-bit sources.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if data[:2] in (b"P5", b"P2"):
        return _load_pgm(data, path)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(path)
    raise MalformedFile(f"{path}: unrecognized magic {data[:2]!r}")


def save_image(img: GrayImage, path: str | Path, format: str | None = None) -> None:
    """Write `img` to `path` as pgm (P5), pgm-ascii (P2) or png.

    The format defaults from the file extension (.pgm -> P5, .png -> PNG).
    Round trip through load_image is pixel-exact for every format.
    """
    path = Path(path)
    if format is None:
        format = "png" if path.suffix.lower() == ".png" else "pgm"
    if format not in ("pgm", "pgm-ascii", "png"):
        raise ValueError(f"unknown format {format!r}")

    try:
        if format == "pgm":
            header = f"P5\n{img.width} {img.height}\n255\n".encode()
            path.write_bytes(header + img.pixels.tobytes())
        elif format == "pgm-ascii":
            lines = [f"P2\n{img.width} {img.height}\n255"]
            for row in img.pixels:
                lines.append(" ".join(str(int(v)) for v in row))
            path.write_text("\n".join(lines) + "\n")
        else:
            from PIL import Image

            Image.fromarray(img.pixels, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def pad_to(img: GrayImage, target_w: int, target_h: int, fill: int = WHITE) -> GrayImage:
    """Center `img` on a target_w x target_h canvas filled with `fill`.

    Left/top margins are floor(slack / 2); original pixels are never altered.
    Raises TargetTooSmall when the image exceeds the target in either dimension.
    """
    if img.width > target_w or img.height > target_h:
        raise TargetTooSmall(
            f"image {img.width}x{img.height} exceeds target {target_w}x{target_h}"
        )
    left = (target_w - img.width) // 2
    top = (target_h - img.height) // 2
    canvas = np.full((target_h, target_w), fill, dtype=np.uint8)
    canvas[top : top + img.height, left : left + img.width] = img.pixels
    return GrayImage(canvas)


def pad_margins(img: GrayImage, target_w: int, target_h: int) -> tuple[int, int]:
    """Return the (left, top) margins pad_to would use for this image."""
    if img.width > target_w or img.height > target_h:
        raise TargetTooSmall(
            f"image {img.width}x{img.height} exceeds target {target_w}x{target_h}"
        )
    return (target_w - img.width) // 2, (target_h - img.height) // 2


def crop(img: GrayImage, rect: Rect) -> GrayImage:
    """Extract the exact sub-raster covered by `rect`."""
    if not rect.within(img.width, img.height):
        raise OutOfBounds(
            f"rect {rect} outside image {img.width}x{img.height}"
        )
    return GrayImage(img.pixels[rect.y : rect.y + rect.h, rect.x : rect.x + rect.w].copy())
