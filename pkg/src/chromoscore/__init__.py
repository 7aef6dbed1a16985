"""Dicentric chromosome scoring for metaphase images.

Classical pipeline: FFT low-pass denoise, Otsu threshold, contour extraction,
population-relative debris filtering, bending-potential skeletonization and
width-profile centromere detection.  An alternative per-class PCA
reconstruction-error classifier, a synthetic labeled-scene generator and a
confusion-matrix metrics suite round out the package.
"""

__version__ = "0.1.0"
