"""Subcommand behavior through main(argv): files emitted, exit codes, output."""

import json

import numpy as np
import pytest

from chromoscore.centromere import DC, MC
from chromoscore.cli import main
from chromoscore.config import DEFAULT_CONFIG_YAML
from chromoscore.pca import load_classifier, prepare_crop
from chromoscore.raster import load_image, save_image
from chromoscore.synth import generate_sprite, random_shape_params


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def sprite_dir(root, kind, seeds):
    root.mkdir(parents=True, exist_ok=True)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        sprite = generate_sprite(random_shape_params(kind, rng), rng)
        save_image(sprite.raster, root / f"{seed:04d}.pgm")
    return root


class TestSynth:
    def test_emits_scene_label_and_sidecar(self, tmp_path, capsys):
        out = tmp_path / "scenes"
        code, text, _ = run(
            capsys,
            "synth", "--count", "2", "--canvas", "320x256", "--mc", "4", "--dc", "1",
            "--seed", "9", "--out-dir", str(out),
        )
        assert code == 0
        assert json.loads(text)["scenes"] == 2
        for stem in ("0000", "0001"):
            img = load_image(out / f"{stem}.pgm")
            assert (img.width, img.height) == (320, 256)
            assert len((out / f"{stem}.txt").read_text().strip().splitlines()) == 5
            doc = json.loads((out / f"{stem}.json").read_text())
            assert doc["counts"][MC] == 4 and doc["counts"][DC] == 1

    def test_same_seed_same_bytes(self, tmp_path, capsys):
        args = ["synth", "--count", "1", "--canvas", "256x256", "--mc", "3", "--seed", "4"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out-dir", str(a)]) == 0
        assert main(args + ["--out-dir", str(b)]) == 0
        assert (a / "0000.pgm").read_bytes() == (b / "0000.pgm").read_bytes()
        assert (a / "0000.json").read_text() == (b / "0000.json").read_text()

    def test_bad_canvas_is_a_config_error(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "synth", "--canvas", "320by256", "--out-dir", str(tmp_path / "x")
        )
        assert code == 2
        assert "canvas" in err


class TestScore:
    def make_scenes(self, tmp_path, capsys):
        out = tmp_path / "scenes"
        assert main([
            "synth", "--count", "3", "--canvas", "384x384", "--mc", "5", "--dc", "1",
            "--seed", "21", "--out-dir", str(out),
        ]) == 0
        capsys.readouterr()
        return out

    def write_cfg(self, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("denoise:\n  enabled: false\ncount:\n  min: 1\n  max: 60\n")
        return cfg

    def test_score_prints_lines_and_summary(self, tmp_path, capsys):
        scenes = self.make_scenes(tmp_path, capsys)
        cfg = self.write_cfg(tmp_path)
        code, text, _ = run(capsys, "score", str(scenes), "--config", str(cfg))
        assert code == 0
        lines = text.strip().splitlines()
        assert len(lines) == 4
        for line in lines[:3]:
            doc = json.loads(line)
            assert doc["verdict"] == "accepted"
        summary = json.loads(lines[-1])
        assert summary["images"] == 3 and summary["accepted"] == 3

    def test_truth_adds_confusion(self, tmp_path, capsys):
        scenes = self.make_scenes(tmp_path, capsys)
        cfg = self.write_cfg(tmp_path)
        code, text, _ = run(
            capsys, "score", str(scenes), "--config", str(cfg), "--truth", str(scenes)
        )
        assert code == 0
        summary = json.loads(text.strip().splitlines()[-1])
        assert sum(summary["confusion"].values()) == 18

    def test_overlays_written(self, tmp_path, capsys):
        scenes = self.make_scenes(tmp_path, capsys)
        cfg = self.write_cfg(tmp_path)
        overlays = tmp_path / "ov"
        code, _, _ = run(
            capsys, "score", str(scenes), "--config", str(cfg), "--overlays", str(overlays)
        )
        assert code == 0
        files = sorted(p.name for p in overlays.iterdir())
        assert files == ["0000.overlay.pgm", "0001.overlay.pgm", "0002.overlay.pgm"]
        ov = load_image(overlays / "0000.overlay.pgm")
        src = load_image(scenes / "0000.pgm")
        assert (ov.pixels != src.pixels).any()

    def test_empty_directory_exits_nonzero(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code, _, err = run(capsys, "score", str(empty))
        assert code == 2
        assert "error:" in err

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        scenes = self.make_scenes(tmp_path, capsys)
        bad = tmp_path / "bad.yaml"
        bad.write_text("mode: warp\n")
        code, _, err = run(capsys, "score", str(scenes), "--config", str(bad))
        assert code == 2
        assert "error:" in err

    def test_mode_flag_overrides_config(self, tmp_path, capsys):
        scenes = self.make_scenes(tmp_path, capsys)
        cfg = self.write_cfg(tmp_path)
        # pca mode without a model path must fail cleanly
        code, _, err = run(
            capsys, "score", str(scenes), "--config", str(cfg), "--mode", "pca"
        )
        assert code == 2
        assert "pca.model" in err


class TestPca:
    def test_train_then_classify(self, tmp_path, capsys):
        mc_dir = sprite_dir(tmp_path / "mc", MC, range(900, 910))
        dc_dir = sprite_dir(tmp_path / "dc", DC, range(910, 920))
        model = tmp_path / "model.bin"
        code, text, _ = run(
            capsys,
            "pca", "train", "--class", f"{MC}={mc_dir}", "--class", f"{DC}={dc_dir}",
            "--k", "6", "--out", str(model),
        )
        assert code == 0
        assert json.loads(text)["classes"] == {MC: 6, DC: 6}
        assert load_classifier(model).labels == (MC, DC)

        probe = sprite_dir(tmp_path / "probe", MC, range(920, 925))
        code, text, _ = run(capsys, "pca", "classify", str(probe), "--model", str(model))
        assert code == 0
        lines = text.strip().splitlines()
        assert len(lines) == 5
        for line in lines:
            doc = json.loads(line)
            assert doc["label"] in (MC, DC)
            assert set(doc["errors"]) == {MC, DC}

    def test_train_rejects_malformed_class_spec(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "pca", "train", "--class", "nodir", "--out", str(tmp_path / "m.bin")
        )
        assert code == 2
        assert "label=dir" in err

    def test_train_rejects_empty_class_dir(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code, _, err = run(
            capsys, "pca", "train", "--class", f"x={empty}", "--out", str(tmp_path / "m.bin")
        )
        assert code == 2

    def test_classify_missing_model_fails(self, tmp_path, capsys):
        probe = sprite_dir(tmp_path / "probe", MC, [930])
        code, _, err = run(
            capsys, "pca", "classify", str(probe), "--model", str(tmp_path / "no.bin")
        )
        assert code == 2


class TestEval:
    def test_metrics_printed(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        pred.write_text("DC MC DC MC\n")
        truth.write_text("DC MC MC MC\n")
        code, text, _ = run(capsys, "eval", "--pred", str(pred), "--truth", str(truth))
        assert code == 0
        doc = json.loads(text)
        assert (doc["tp"], doc["tn"], doc["fp"], doc["fn"]) == (1, 2, 1, 0)
        assert doc["accuracy"] == 0.75
        assert doc["recall"] == 1.0

    def test_undefined_metric_serializes_as_null(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        pred.write_text("MC MC\n")
        truth.write_text("MC MC\n")
        code, text, _ = run(capsys, "eval", "--pred", str(pred), "--truth", str(truth))
        assert code == 0
        assert json.loads(text)["recall"] is None

    def test_bad_token_rejected(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        pred.write_text("DC XX\n")
        truth.write_text("DC MC\n")
        code, _, err = run(capsys, "eval", "--pred", str(pred), "--truth", str(truth))
        assert code == 2
        assert "XX" in err

    def test_length_mismatch_rejected(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        pred.write_text("DC\n")
        truth.write_text("DC MC\n")
        code, _, err = run(capsys, "eval", "--pred", str(pred), "--truth", str(truth))
        assert code == 2


class TestConfigCommand:
    def test_prints_default_yaml(self, capsys):
        code, text, _ = run(capsys, "config")
        assert code == 0
        assert text == DEFAULT_CONFIG_YAML

    def test_missing_subcommand_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
