"""Exception types shared across the package."""


class ChromoscoreError(Exception):
    """Base class for all errors raised by this package."""


class MalformedFile(ChromoscoreError):
    """Image file cannot be parsed (bad magic, truncated data, bad dimensions)."""


class UnsupportedDepth(ChromoscoreError):
    """Image file is not 8-bit single-channel-convertible."""


class IoFailure(ChromoscoreError):
    """File could not be written or read at the OS level."""


class TargetTooSmall(ChromoscoreError):
    """Padding target is smaller than the source image in some dimension."""


class OutOfBounds(ChromoscoreError):
    """Crop rectangle does not lie within the host image."""


class InvalidCutoff(ChromoscoreError):
    """Low-pass cutoff fraction outside (0, 1]."""


class DegenerateContour(ChromoscoreError):
    """Component too small to carry geometry statistics (< 3 pixels)."""


class EmptyInterior(ChromoscoreError):
    """Component has no interior pixels to grow a skeleton from."""


class NoSkeletons(ChromoscoreError):
    """Average chromosome length requested over an empty skeleton list."""


class TooFewSamples(ChromoscoreError):
    """PCA fit needs at least two training images."""


class KTooLarge(ChromoscoreError):
    """Requested component count exceeds min(n_train - 1, dimension)."""


class DimensionMismatch(ChromoscoreError):
    """Vector length does not match the model's dimension or component count."""


class NotFitted(ChromoscoreError):
    """Classifier used before any model was fitted or loaded."""


class LengthMismatch(ChromoscoreError):
    """Prediction and truth sequences differ in length."""


class InvalidParams(ChromoscoreError):
    """Sprite shape parameters violate their declared ranges."""


class PlacementOverflow(ChromoscoreError):
    """Scene composition exhausted its retry budget before placing every sprite."""


class InvalidGamma(ChromoscoreError):
    """Gamma correction exponent must be strictly positive."""


class EmptyBatch(ChromoscoreError):
    """Batch directory holds no readable images."""


class ConfigError(ChromoscoreError):
    """Pipeline configuration value outside its declared range."""
