"""Per-class principal-component models; least-reconstruction-error calls."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IoFailure,
    KTooLarge,
    MalformedFile,
    NotFitted,
    TooFewSamples,
)
from .raster import WHITE, GrayImage, pad_to

CROP_SIDE = 192
DEFAULT_MAX_K = 64
_MAGIC = b"CHRPCA01"
_ORTHO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PcaModel:
    d: int
    k: int
    mean: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        if self.mean.shape != (self.d,):
            raise DimensionMismatch(f"mean must have length {self.d}")
        if self.basis.shape != (self.k, self.d):
            raise DimensionMismatch(f"basis must be {self.k}x{self.d}")
        if not 1 <= self.k <= self.d:
            raise KTooLarge(f"k={self.k} outside [1, {self.d}]")
        gram = self.basis @ self.basis.T
        if not np.allclose(gram, np.eye(self.k), atol=_ORTHO_TOL):
            raise ValueError("basis rows are not orthonormal")
        self.mean.flags.writeable = False
        self.basis.flags.writeable = False


@dataclass(frozen=True, eq=False)
class PcaClassifier:
    labels: tuple[str, ...]
    models: tuple[PcaModel, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ValueError("a classifier needs at least two classes")
        if len(self.labels) != len(self.models):
            raise ValueError("labels and models must pair up")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("class labels must be unique")
        d = self.models[0].d
        if any(m.d != d for m in self.models):
            raise DimensionMismatch("all class models must share d")

    @property
    def d(self) -> int:
        return self.models[0].d


def prepare_crop(img: GrayImage, side: int = CROP_SIDE) -> np.ndarray:
    """Pad a crop onto a white square canvas and scale intensities to [0, 1]."""
    padded = pad_to(img, side, side, fill=WHITE)
    return padded.pixels.astype(np.float64).ravel() / WHITE


def fit(class_images, k: int) -> PcaModel:
    """Principal directions of one class, singular values descending."""
    data = np.asarray([np.asarray(v, dtype=np.float64).ravel() for v in class_images])
    if data.ndim != 2 or data.shape[0] < 2:
        raise TooFewSamples("fitting needs at least two images")
    n, d = data.shape
    if not 1 <= k <= min(n - 1, d):
        raise KTooLarge(f"k={k} outside [1, {min(n - 1, d)}] for {n} samples of dim {d}")
    mean = data.mean(axis=0)
    _, _, vt = np.linalg.svd(data - mean, full_matrices=False)
    basis = vt[:k].copy()
    for row in basis:
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return PcaModel(d=d, k=k, mean=mean, basis=basis)


def reduce_image(model: PcaModel, image) -> np.ndarray:
    vec = np.asarray(image, dtype=np.float64).ravel()
    if vec.shape != (model.d,):
        raise DimensionMismatch(f"expected a {model.d}-vector, got {vec.shape}")
    return model.basis @ (vec - model.mean)


def reconstruct(model: PcaModel, coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.float64).ravel()
    if c.shape != (model.k,):
        raise DimensionMismatch(f"expected {model.k} coefficients, got {c.shape}")
    return model.mean + model.basis.T @ c


def reconstruction_error(model: PcaModel, image) -> float:
    vec = np.asarray(image, dtype=np.float64).ravel()
    back = reconstruct(model, reduce_image(model, vec))
    return float(np.sum((vec - back) ** 2))


def train_classifier(classes, k: int | None = None) -> PcaClassifier:
    """Fit one model per (label, images) pair; order fixes the tie-break."""
    pairs = list(classes.items()) if isinstance(classes, dict) else list(classes)
    labels, models = [], []
    for label, images in pairs:
        images = list(images)
        per_k = k if k is not None else min(DEFAULT_MAX_K, len(images) - 1)
        labels.append(str(label))
        models.append(fit(images, per_k))
    return PcaClassifier(labels=tuple(labels), models=tuple(models))


def class_errors(classifier: PcaClassifier | None, image) -> dict[str, float]:
    if classifier is None:
        raise NotFitted("no classifier loaded")
    return {
        label: reconstruction_error(model, image)
        for label, model in zip(classifier.labels, classifier.models)
    }


def classify(classifier: PcaClassifier | None, image) -> str:
    """Label whose model reconstructs the image with least squared error."""
    errs = class_errors(classifier, image)
    return min(classifier.labels, key=lambda label: errs[label])


def save_classifier(classifier: PcaClassifier, path) -> None:
    chunks = [_MAGIC, struct.pack("<IQ", len(classifier.labels), classifier.d)]
    for label, model in zip(classifier.labels, classifier.models):
        raw = label.encode("utf-8")
        chunks.append(struct.pack("<HI", len(raw), model.k))
        chunks.append(raw)
        chunks.append(np.ascontiguousarray(model.mean, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(model.basis, dtype="<f8").tobytes())
    try:
        with open(path, "wb") as fh:
            fh.write(b"".join(chunks))
    except OSError as exc:
        raise IoFailure(f"cannot write model {path}: {exc}") from exc


def load_classifier(path) -> PcaClassifier:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read model {path}: {exc}") from exc
    if not blob.startswith(_MAGIC):
        raise MalformedFile(f"{path} is not a classifier model file")
    off = len(_MAGIC)
    try:
        n_classes, d = struct.unpack_from("<IQ", blob, off)
        off += struct.calcsize("<IQ")
        labels, models = [], []
        for _ in range(n_classes):
            label_len, k = struct.unpack_from("<HI", blob, off)
            off += struct.calcsize("<HI")
            label = blob[off : off + label_len].decode("utf-8")
            off += label_len
            mean = np.frombuffer(blob, dtype="<f8", count=d, offset=off).copy()
            off += 8 * d
            basis = (
                np.frombuffer(blob, dtype="<f8", count=k * d, offset=off)
                .reshape(k, d)
                .copy()
            )
            off += 8 * k * d
            labels.append(label)
            models.append(PcaModel(d=d, k=k, mean=mean, basis=basis))
        if off != len(blob):
            raise MalformedFile(f"{path} has {len(blob) - off} trailing bytes")
        return PcaClassifier(labels=tuple(labels), models=tuple(models))
    except (struct.error, ValueError) as exc:
        raise MalformedFile(f"truncated or corrupt model file {path}: {exc}") from exc
