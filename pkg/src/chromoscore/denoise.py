"""Frequency-domain low-pass denoising applied before thresholding.

The transform is an exact mixed-radix DFT (numpy's pocketfft), so arbitrary
image sizes are handled without zero-padding; padding would alter the
frequency grid and with it the meaning of the cutoff.  The filter itself is a
brick-wall circular mask: coefficients whose centered radial frequency exceeds
the cutoff radius are zeroed outright.

The cutoff is expressed as a fraction of the largest radial frequency present
on the image's own frequency grid, so cutoff_fraction = 1 keeps every
coefficient and reproduces the input exactly (up to output rounding).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCutoff
from .raster import GrayImage

DEFAULT_CUTOFF = 0.35


@dataclass(frozen=True)
class Spectrum:
    """Complex DFT coefficients of an image, row-major, DC at index (0, 0)."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients)
        if c.ndim != 2 or c.size == 0:
            raise ValueError(f"coefficients must be a non-empty 2-D array, got shape {c.shape}")
        object.__setattr__(self, "coefficients", c.astype(np.complex128, copy=False))

    @property
    def width(self) -> int:
        return self.coefficients.shape[1]

    @property
    def height(self) -> int:
        return self.coefficients.shape[0]


def forward_fft(img: GrayImage) -> Spectrum:
    """Exact 2-D DFT of the intensity field."""
    return Spectrum(np.fft.fft2(img.pixels.astype(np.float64)))


def inverse_fft(spec: Spectrum) -> np.ndarray:
    """Real part of the inverse 2-D DFT as a float64 field."""
    return np.fft.ifft2(spec.coefficients).real


def _radial_frequency(height: int, width: int) -> np.ndarray:
    """Per-bin radial frequency sqrt(fy^2 + fx^2) in cycles per pixel."""
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    return np.hypot(fy, fx)


def lowpass_denoise(img: GrayImage, cutoff_fraction: float = DEFAULT_CUTOFF) -> GrayImage:
    """Remove all spectral content beyond cutoff_fraction of the maximum radial frequency.

    Output is the real part of the inverse transform, rounded to nearest
    integer and clipped to [0, 255].  Raises InvalidCutoff outside (0, 1].
    """
    if not 0.0 < cutoff_fraction <= 1.0:
        raise InvalidCutoff(f"cutoff_fraction must be in (0, 1], got {cutoff_fraction}")
    radial = _radial_frequency(img.height, img.width)
    radius = cutoff_fraction * radial.max()
    spec = forward_fft(img)
    kept = np.where(radial <= radius + 1e-12, spec.coefficients, 0.0)
    field = inverse_fft(Spectrum(kept))
    return GrayImage(np.clip(np.rint(field), 0, 255).astype(np.uint8))
