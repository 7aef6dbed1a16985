"""Batch orchestration: stage wiring, count gating, reports and overlays."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .centromere import DC, MC, average_chromosome_length, call_chromosome
from .config import MODE_PCA, PipelineConfig
from .denoise import lowpass_denoise
from .errors import (
    ChromoscoreError,
    ConfigError,
    EmptyBatch,
    EmptyInterior,
    IoFailure,
)
from .geometry import compute_stats, filter_debris
from .metrics import ConfusionMatrix, accumulate
from .pca import PcaClassifier, classify as pca_classify, load_classifier, prepare_crop
from .raster import WHITE, GrayImage, Rect, crop, load_image
from .segmentation import Contour, binarize, find_contours, otsu_threshold
from .skeleton import Skeleton, grow_skeleton

ACCEPTED = "accepted"
REJECTED = "rejected"
ANALYSABLE = "analysable"

REASON_COUNT = "count_out_of_range"
REASON_IO = "io_error"
REASON_NON_ANALYSABLE = "non_analysable"
REASON_NO_CONTOURS = "no_contours"

IMAGE_SUFFIXES = (".pgm", ".png")

# 3x5 bitmaps for the overlay tags
_GLYPHS = {
    "M": ("#.#", "###", "#.#", "#.#", "#.#"),
    "C": ("###", "#..", "#..", "#..", "###"),
    "D": ("##.", "#.#", "#.#", "#.#", "##."),
}


@dataclass(frozen=True)
class CallRecord:
    """One per-chromosome decision in image coordinates.

    BPR calls carry centromere points and width sums; PCA calls carry the
    label alone with empty geometry, so both modes share one schema.
    """

    contour_id: int
    label: str
    bbox: Rect
    centromeres: tuple[tuple[int, int], ...] = ()
    s1: Optional[float] = None
    s2: Optional[float] = None
    ratio: Optional[float] = None
    fallback: bool = False

    def __post_init__(self) -> None:
        if self.label not in (MC, DC):
            raise ValueError(f"label must be {MC}|{DC}, got {self.label!r}")
        if self.centromeres and (self.label == DC) != (len(self.centromeres) == 2):
            raise ValueError("DC exactly when two centromeres are kept")


@dataclass(frozen=True)
class ImageReport:
    """Outcome for one image: verdict, surviving count, calls, stage timings.

    contours and skeletons hold the geometry behind the calls (aligned by
    contour_id) for overlay rendering; they and the timings stay out of the
    serialized report line.
    """

    image_id: str
    verdict: str
    count: int
    calls: tuple[CallRecord, ...] = ()
    reason: Optional[str] = None
    warnings: tuple[str, ...] = ()
    timings: dict = field(default_factory=dict, compare=False)
    contours: tuple[Contour, ...] = field(default=(), repr=False, compare=False)
    skeletons: tuple[Skeleton, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.verdict not in (ACCEPTED, REJECTED):
            raise ValueError(f"verdict must be {ACCEPTED}|{REJECTED}, got {self.verdict!r}")
        if (self.verdict == REJECTED) != (self.reason is not None):
            raise ValueError("rejected reports carry a reason code, accepted ones none")

    @property
    def dc_count(self) -> int:
        return sum(1 for c in self.calls if c.label == DC)


@dataclass(frozen=True)
class BatchReport:
    """Per-image reports in filename order plus aggregates derived from them."""

    reports: tuple[ImageReport, ...]
    confusion: Optional[ConfusionMatrix] = None

    @property
    def accepted_count(self) -> int:
        return sum(1 for r in self.reports if r.verdict == ACCEPTED)

    @property
    def total_dc(self) -> int:
        return sum(r.dc_count for r in self.reports if r.verdict == ACCEPTED)

    @property
    def dc_frequency(self) -> Optional[float]:
        n = self.accepted_count
        return None if n == 0 else self.total_dc / n


def _rejected(image_id, reason, count, timings, warnings=(), calls=(), contours=(), skeletons=()):
    return ImageReport(
        image_id=image_id,
        verdict=REJECTED,
        count=count,
        calls=tuple(calls),
        reason=reason,
        warnings=tuple(warnings),
        timings=timings,
        contours=tuple(contours),
        skeletons=tuple(skeletons),
    )


def _bpr_calls(contours, mask, cfg, warnings):
    """Grow a skeleton per contour and call each; ungrowable contours drop out."""
    grown: list[tuple[int, Contour, Skeleton]] = []
    for i, contour in enumerate(contours):
        try:
            grown.append((i, contour, grow_skeleton(contour, mask, cfg.bpr, contour_id=i)))
        except EmptyInterior as exc:
            warnings.append(f"contour {i}: {exc}")
    if not grown:
        return [], [], []
    tl = cfg.centromere.tl_fraction * average_chromosome_length([sk for _, _, sk in grown])
    calls, kept_contours, kept_skeletons = [], [], []
    for i, contour, sk in grown:
        res = call_chromosome(sk, contour, cfg.centromere, tl)
        calls.append(
            CallRecord(
                contour_id=i,
                label=res.label,
                bbox=contour.bbox,
                centromeres=tuple((int(sp.p[0]), int(sp.p[1])) for sp in res.centromeres),
                s1=res.s1,
                s2=res.s2,
                ratio=res.ratio,
                fallback=res.fallback,
            )
        )
        kept_contours.append(contour)
        kept_skeletons.append(sk)
    return calls, kept_contours, kept_skeletons


def _pca_calls(contours, work, classifier, rejection, warnings):
    """Classify each contour's padded crop; the rejection model weeds first."""
    calls, kept = [], []
    for i, contour in enumerate(contours):
        try:
            vec = prepare_crop(crop(work, contour.bbox))
        except ChromoscoreError as exc:
            warnings.append(f"contour {i}: {exc}")
            continue
        if rejection is not None and pca_classify(rejection, vec) != ANALYSABLE:
            continue
        calls.append(CallRecord(contour_id=i, label=pca_classify(classifier, vec), bbox=contour.bbox))
        kept.append(contour)
    return calls, kept


def score_image(
    img: GrayImage,
    cfg: PipelineConfig,
    image_id: str = "image",
    classifier: Optional[PcaClassifier] = None,
    rejection: Optional[PcaClassifier] = None,
) -> ImageReport:
    """Run the full stage chain on one image; failures reject, never raise.

    The chromosome-count window is checked twice: on the debris-filtered
    contour population and again on the final call list.
    """
    timings: dict[str, float] = {}
    warnings: list[str] = []
    t0 = time.perf_counter()

    def mark(stage):
        nonlocal t0
        now = time.perf_counter()
        timings[stage] = now - t0
        t0 = now

    try:
        work = lowpass_denoise(img, cfg.cutoff_fraction) if cfg.denoise_enabled else img
        mark("denoise")
        mask = binarize(work, otsu_threshold(work), cfg.invert)
        mark("threshold")
        outers = [c for c in find_contours(mask) if c.kind == "outer"]
        mark("contours")
        if not outers:
            return _rejected(image_id, REASON_NO_CONTOURS, 0, timings, warnings)

        stats, measurable = [], []
        for contour in outers:
            try:
                stats.append(compute_stats(contour, mask))
                measurable.append(contour)
            except ChromoscoreError:
                continue
        survivors = [measurable[i] for i in filter_debris(stats, cfg.filters)]
        mark("filter")
        count = len(survivors)
        if not cfg.count_min <= count <= cfg.count_max:
            return _rejected(image_id, REASON_COUNT, count, timings, warnings)

        if cfg.mode == MODE_PCA:
            calls, contours = _pca_calls(survivors, work, classifier, rejection, warnings)
            skeletons: list[Skeleton] = []
        else:
            calls, contours, skeletons = _bpr_calls(survivors, mask, cfg, warnings)
        mark("classify")
        count = len(calls)
        if not cfg.count_min <= count <= cfg.count_max:
            return _rejected(
                image_id, REASON_COUNT, count, timings, warnings, calls, contours, skeletons
            )
        return ImageReport(
            image_id=image_id,
            verdict=ACCEPTED,
            count=count,
            calls=tuple(calls),
            warnings=tuple(warnings),
            timings=timings,
            contours=tuple(contours),
            skeletons=tuple(skeletons),
        )
    except Exception as exc:  # per-image isolation: any stage error becomes a verdict
        warnings.append(f"{type(exc).__name__}: {exc}")
        return _rejected(image_id, REASON_NON_ANALYSABLE, 0, timings, warnings)


def load_call_model(path) -> PcaClassifier:
    """Load the MC/DC model, rejecting one trained on other labels."""
    classifier = load_classifier(path)
    if set(classifier.labels) != {MC, DC}:
        raise ConfigError(f"call model must be trained on {MC}/{DC}, got {sorted(classifier.labels)}")
    return classifier


def load_rejection_model(path) -> PcaClassifier:
    """Load the analysable/non-analysable model used to weed crops."""
    classifier = load_classifier(path)
    if ANALYSABLE not in classifier.labels:
        raise ConfigError(f"rejection model must include class {ANALYSABLE!r}")
    return classifier


def _load_models(cfg: PipelineConfig):
    if cfg.mode != MODE_PCA:
        return None, None, ()
    if cfg.pca_model is None:
        raise ConfigError("pca mode needs pca.model in the config")
    classifier = load_call_model(cfg.pca_model)
    if cfg.pca_rejection_model is None:
        return classifier, None, ("rejection model absent; analysability stage skipped",)
    return classifier, load_rejection_model(cfg.pca_rejection_model), ()


def _match_truth(report: ImageReport, truth_objects) -> tuple[list[str], list[str]]:
    """Pair each call with the chromosome truth box holding its bbox center."""
    calls, truths = [], []
    boxes = [t for t in truth_objects if t["kind"] in (MC, DC)]
    for call in report.calls:
        cx = call.bbox.x + call.bbox.w / 2
        cy = call.bbox.y + call.bbox.h / 2
        containing = []
        for t in boxes:
            x, y, w, h = t["bbox"]
            if x <= cx < x + w and y <= cy < y + h:
                containing.append((math.dist((cx, cy), (x + w / 2, y + h / 2)), t))
        if containing:
            calls.append(call.label)
            truths.append(min(containing, key=lambda pair: pair[0])[1]["kind"])
    return calls, truths


def score_batch(directory, cfg: PipelineConfig, truth_dir=None) -> BatchReport:
    """Score every .pgm/.png in filename order; one bad file rejects only itself."""
    root = Path(directory)
    if not root.is_dir():
        raise IoFailure(f"not a directory: {root}")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise EmptyBatch(f"no {'/'.join(IMAGE_SUFFIXES)} images in {root}")
    classifier, rejection, model_warnings = _load_models(cfg)

    reports = []
    for path in files:
        try:
            img = load_image(path)
        except ChromoscoreError as exc:
            reports.append(
                _rejected(path.name, REASON_IO, 0, {}, (f"{type(exc).__name__}: {exc}",))
            )
            continue
        report = score_image(img, cfg, path.name, classifier, rejection)
        if model_warnings:
            report = replace(report, warnings=model_warnings + report.warnings)
        reports.append(report)

    confusion = None
    if truth_dir is not None:
        all_calls, all_truths = [], []
        for path, report in zip(files, reports):
            sidecar = Path(truth_dir) / (path.stem + ".json")
            if report.verdict != ACCEPTED or not sidecar.exists():
                continue
            doc = json.loads(sidecar.read_text())
            calls, truths = _match_truth(report, doc["objects"])
            all_calls.extend(calls)
            all_truths.extend(truths)
        confusion = accumulate(all_calls, all_truths)
    return BatchReport(reports=tuple(reports), confusion=confusion)


def report_to_line(report: ImageReport) -> str:
    """One sorted-key JSON object per image; geometry and timings excluded."""
    doc = {
        "image": report.image_id,
        "verdict": report.verdict,
        "reason": report.reason,
        "count": report.count,
        "dc": report.dc_count,
        "warnings": list(report.warnings),
        "calls": [
            {
                "contour": c.contour_id,
                "label": c.label,
                "bbox": [c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h],
                "centromeres": [[x, y] for x, y in c.centromeres],
                "s1": c.s1,
                "s2": c.s2,
                "ratio": c.ratio,
                "fallback": c.fallback,
            }
            for c in report.calls
        ],
    }
    return json.dumps(doc, sort_keys=True)


def format_batch_report(batch: BatchReport) -> str:
    """Per-image lines then one summary line, newline terminated."""
    lines = [report_to_line(r) for r in batch.reports]
    summary = {
        "summary": True,
        "images": len(batch.reports),
        "accepted": batch.accepted_count,
        "total_dc": batch.total_dc,
        "dc_frequency": batch.dc_frequency,
    }
    if batch.confusion is not None:
        c = batch.confusion
        summary["confusion"] = {"tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn}
    lines.append(json.dumps(summary, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def _draw_disc(arr, x, y, radius, value):
    h, w = arr.shape
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy <= radius * radius and 0 <= y + dy < h and 0 <= x + dx < w:
                arr[y + dy, x + dx] = value


def _draw_tag(arr, x, y, text, value):
    h, w = arr.shape
    for letter in text:
        rows = _GLYPHS[letter]
        for dy, row in enumerate(rows):
            for dx, cell in enumerate(row):
                if cell == "#" and 0 <= y + dy < h and 0 <= x + dx < w:
                    arr[y + dy, x + dx] = value
        x += len(rows[0]) + 1


def render_overlay(img: GrayImage, report: ImageReport) -> GrayImage:
    """Copy of img with contours outlined, skeletons marked, centromeres dotted.

    Contours draw at 0, skeletons at 64, the MC/DC tag in each bbox corner at
    0, and centromere discs last at 255 so they stay visible.
    """
    arr = img.pixels.copy()
    for contour in report.contours:
        for x, y in contour.points:
            arr[y, x] = 0
    for sk in report.skeletons:
        for x, y in sk.pixel_set():
            arr[y, x] = 64
    for call in report.calls:
        _draw_tag(arr, call.bbox.x, call.bbox.y, call.label, 0)
    for call in report.calls:
        for x, y in call.centromeres:
            _draw_disc(arr, x, y, 2, WHITE)
    return GrayImage.from_array(arr)
