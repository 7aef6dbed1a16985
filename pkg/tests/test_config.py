"""YAML config parsing, defaults and strict key validation."""

import numpy as np
import pytest
import yaml

from chromoscore.config import (
    DEFAULT_CONFIG_YAML,
    PipelineConfig,
    default_config,
    load_config,
    parse_config,
)
from chromoscore.errors import ConfigError


def write(tmp_path, text):
    p = tmp_path / "cfg.yaml"
    p.write_text(text)
    return p


class TestDefaults:
    def test_default_matches_dataclass(self):
        cfg = default_config()
        assert cfg == PipelineConfig()
        assert cfg.mode == "bpr"
        assert cfg.denoise_enabled is True
        assert cfg.count_min == 40 and cfg.count_max == 46
        assert cfg.pca_model is None

    def test_shipped_yaml_reproduces_defaults(self):
        # the printable default document must parse back to default_config()
        assert parse_config(yaml.safe_load(DEFAULT_CONFIG_YAML)) == default_config()

    def test_empty_document_gives_defaults(self, tmp_path):
        assert load_config(write(tmp_path, "")) == default_config()

    def test_partial_section_keeps_other_defaults(self, tmp_path):
        cfg = load_config(write(tmp_path, "centromere:\n  tl_fraction: 0.25\n"))
        assert cfg.centromere.tl_fraction == 0.25
        assert cfg.centromere.ratio_threshold == 1.05
        assert cfg.filters == default_config().filters


class TestOverrides:
    def test_full_override_round_trip(self, tmp_path):
        text = """
mode: pca
denoise:
  enabled: false
  cutoff_fraction: 0.5
segment:
  invert: true
filters:
  area: [0.5, 2.0]
  aspect: [0.1, 0.8]
bpr:
  t: 1.3
centromere:
  collinearity_slack: 0.2
  tl_fraction: 0.15
  ratio_threshold: 1.2
  slack_mode: relative
count:
  min: 10
  max: 50
pca:
  model: models/mcdc.bin
  rejection_model: models/reject.bin
  k: 32
synth:
  noise_sigma: 4.0
  free_angle: true
  gamma_range: [0.9, 1.1]
"""
        cfg = load_config(write(tmp_path, text))
        assert cfg.mode == "pca"
        assert cfg.denoise_enabled is False
        assert cfg.cutoff_fraction == 0.5
        assert cfg.invert is True
        assert cfg.filters.area == (0.5, 2.0)
        assert cfg.filters.aspect == (0.1, 0.8)
        assert cfg.filters.mean_width == default_config().filters.mean_width
        assert cfg.bpr.t == 1.3
        assert cfg.centromere.collinearity_slack == 0.2
        assert cfg.centromere.slack_mode == "relative"
        assert cfg.count_min == 10 and cfg.count_max == 50
        assert cfg.pca_model == "models/mcdc.bin"
        assert cfg.pca_rejection_model == "models/reject.bin"
        assert cfg.pca_k == 32
        assert cfg.noise_sigma == 4.0
        assert cfg.free_angle is True
        assert cfg.gamma_range == (0.9, 1.1)

    def test_random_valid_documents_parse(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            t = float(rng.uniform(0.2, 3.0))
            cutoff = float(rng.uniform(0.05, 1.0))
            lo = int(rng.integers(0, 30))
            hi = lo + int(rng.integers(0, 30))
            doc = {
                "bpr": {"t": t},
                "denoise": {"cutoff_fraction": cutoff},
                "count": {"min": lo, "max": hi},
            }
            cfg = parse_config(doc)
            assert cfg.bpr.t == t
            assert cfg.cutoff_fraction == cutoff
            assert (cfg.count_min, cfg.count_max) == (lo, hi)


class TestRejection:
    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(ConfigError, match="denos"):
            load_config(write(tmp_path, "denos:\n  enabled: false\n"))

    def test_unknown_nested_key(self, tmp_path):
        with pytest.raises(ConfigError, match="cutof"):
            load_config(write(tmp_path, "denoise:\n  cutof: 0.3\n"))

    def test_non_mapping_root(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "- a\n- b\n"))

    def test_non_mapping_section(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "bpr: 1.0\n"))

    def test_invalid_yaml_text(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "mode: [unclosed\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml")

    @pytest.mark.parametrize(
        "doc",
        [
            {"mode": "fft"},
            {"denoise": {"cutoff_fraction": 0.0}},
            {"denoise": {"cutoff_fraction": 1.5}},
            {"count": {"min": 50, "max": 40}},
            {"count": {"min": -1}},
            {"bpr": {"t": 0.0}},
            {"centromere": {"ratio_threshold": 1.0}},
            {"centromere": {"slack_mode": "sloppy"}},
            {"filters": {"area": [3.0, 1.0]}},
            {"filters": {"area": 2.0}},
            {"synth": {"gamma_range": [0.0, 1.0]}},
            {"synth": {"gamma_range": [1.4, 0.7]}},
            {"synth": {"noise_sigma": -1.0}},
            {"pca": {"k": 0}},
        ],
    )
    def test_bad_values(self, doc):
        with pytest.raises(ConfigError):
            parse_config(doc)
