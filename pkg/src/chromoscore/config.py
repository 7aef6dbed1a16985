"""Pipeline configuration: defaults, YAML parsing, strict validation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .centromere import CentromereParams
from .errors import ConfigError, InvalidParams
from .geometry import FilterThresholds
from .skeleton import BprParams

MODE_BPR = "bpr"
MODE_PCA = "pca"

DEFAULT_CONFIG_YAML = """\
# chromoscore pipeline configuration

mode: bpr                      # bpr | pca

denoise:
  enabled: true
  cutoff_fraction: 0.35        # keep radial frequencies up to this fraction of the grid maximum

segment:
  invert: false                # false: dark objects on a bright background

filters:                       # population-relative acceptance bands [lo, hi]
  area: [0.2, 6.0]
  mean_width: [0.4, 3.0]
  median_width: [0.4, 3.0]
  max_width: [0.4, 3.0]
  aspect: [0.02, 0.9]

bpr:
  t: 1.0                       # admission threshold for skeleton growth

centromere:
  collinearity_slack: 0.1      # px; how far q1-p-q2 may deviate from a straight width segment
  tl_fraction: 0.1             # candidate separation as a fraction of mean skeleton length
  ratio_threshold: 1.05        # width-sum ratio above which the second candidate is discarded
  slack_mode: absolute         # absolute | relative

count:                         # accept a patch only when its chromosome count is in range
  min: 40
  max: 46

pca:
  model: null                  # MC/DC model path, required in pca mode
  rejection_model: null        # optional analysable/non-analysable model
  k: null                      # per-class component cap applied at training time

synth:
  noise_sigma: 0.0             # additive Gaussian pixel noise
  free_angle: false            # resampled free rotation instead of 90-degree steps
  gamma_range: [0.7, 1.4]      # sampling range for gamma augmentation
"""


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = MODE_BPR
    denoise_enabled: bool = True
    cutoff_fraction: float = 0.35
    invert: bool = False
    filters: FilterThresholds = FilterThresholds()
    bpr: BprParams = BprParams()
    centromere: CentromereParams = CentromereParams()
    count_min: int = 40
    count_max: int = 46
    pca_model: str | None = None
    pca_rejection_model: str | None = None
    pca_k: int | None = None
    noise_sigma: float = 0.0
    free_angle: bool = False
    gamma_range: tuple[float, float] = (0.7, 1.4)

    def __post_init__(self):
        if self.mode not in (MODE_BPR, MODE_PCA):
            raise ConfigError(f"mode must be {MODE_BPR} or {MODE_PCA}, got {self.mode!r}")
        if not 0.0 < self.cutoff_fraction <= 1.0:
            raise ConfigError(f"denoise.cutoff_fraction must lie in (0, 1], got {self.cutoff_fraction}")
        if not 0 <= self.count_min <= self.count_max:
            raise ConfigError(f"count window [{self.count_min}, {self.count_max}] is not ordered")
        if self.pca_k is not None and self.pca_k < 1:
            raise ConfigError(f"pca.k must be at least 1, got {self.pca_k}")
        if self.noise_sigma < 0:
            raise ConfigError(f"synth.noise_sigma must be non-negative, got {self.noise_sigma}")
        lo, hi = self.gamma_range
        if not 0 < lo <= hi:
            raise ConfigError(f"synth.gamma_range must satisfy 0 < lo <= hi, got {self.gamma_range}")


def _section(doc: dict, name: str, allowed: tuple[str, ...]) -> dict:
    sub = doc.get(name) or {}
    if not isinstance(sub, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(sub) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(unknown))}")
    return sub


def _band(value, name: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a [lo, hi] pair") from exc
    return lo, hi


def parse_config(doc) -> PipelineConfig:
    """Build a validated PipelineConfig from a parsed YAML mapping."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be a mapping")
    top = ("mode", "denoise", "segment", "filters", "bpr", "centromere", "count", "pca", "synth")
    unknown = set(doc) - set(top)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")

    denoise = _section(doc, "denoise", ("enabled", "cutoff_fraction"))
    segment = _section(doc, "segment", ("invert",))
    filt = _section(doc, "filters", ("area", "mean_width", "median_width", "max_width", "aspect"))
    bpr = _section(doc, "bpr", ("t",))
    centro = _section(
        doc, "centromere", ("collinearity_slack", "tl_fraction", "ratio_threshold", "slack_mode")
    )
    count = _section(doc, "count", ("min", "max"))
    pca = _section(doc, "pca", ("model", "rejection_model", "k"))
    synth = _section(doc, "synth", ("noise_sigma", "free_angle", "gamma_range"))

    base = PipelineConfig()
    try:
        filters = FilterThresholds(
            **{k: _band(v, f"filters.{k}") for k, v in filt.items()}
        )
        bpr_params = BprParams(t=float(bpr.get("t", base.bpr.t)))
        centro_params = CentromereParams(
            collinearity_slack=float(
                centro.get("collinearity_slack", base.centromere.collinearity_slack)
            ),
            tl_fraction=float(centro.get("tl_fraction", base.centromere.tl_fraction)),
            ratio_threshold=float(centro.get("ratio_threshold", base.centromere.ratio_threshold)),
            slack_mode=str(centro.get("slack_mode", base.centromere.slack_mode)),
        )
    except (InvalidParams, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    k = pca.get("k")
    gamma = synth.get("gamma_range", base.gamma_range)
    return PipelineConfig(
        mode=str(doc.get("mode", base.mode)),
        denoise_enabled=bool(denoise.get("enabled", base.denoise_enabled)),
        cutoff_fraction=float(denoise.get("cutoff_fraction", base.cutoff_fraction)),
        invert=bool(segment.get("invert", base.invert)),
        filters=filters,
        bpr=bpr_params,
        centromere=centro_params,
        count_min=int(count.get("min", base.count_min)),
        count_max=int(count.get("max", base.count_max)),
        pca_model=None if pca.get("model") is None else str(pca["model"]),
        pca_rejection_model=(
            None if pca.get("rejection_model") is None else str(pca["rejection_model"])
        ),
        pca_k=None if k is None else int(k),
        noise_sigma=float(synth.get("noise_sigma", base.noise_sigma)),
        free_angle=bool(synth.get("free_angle", base.free_angle)),
        gamma_range=_band(gamma, "synth.gamma_range"),
    )


def default_config() -> PipelineConfig:
    return PipelineConfig()


def load_config(path) -> PipelineConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(doc)
