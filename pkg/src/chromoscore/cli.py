"""Command line front end: score, synth, pca train/classify, eval, config."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .centromere import DC, MC
from .config import DEFAULT_CONFIG_YAML, MODE_BPR, MODE_PCA, default_config, load_config
from .errors import ChromoscoreError, ConfigError, EmptyBatch
from .metrics import accumulate, all_metrics
from .pca import class_errors, load_classifier, prepare_crop, save_classifier, train_classifier
from .pipeline import IMAGE_SUFFIXES, format_batch_report, render_overlay, score_batch
from .raster import load_image, save_image
from .synth import build_scene, format_label_lines, label_to_json


def _image_files(directory) -> list[Path]:
    root = Path(directory)
    return sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def _parse_canvas(text: str) -> tuple[int, int]:
    w, sep, h = text.partition("x")
    if not sep or not w.isdigit() or not h.isdigit() or int(w) < 1 or int(h) < 1:
        raise ConfigError(f"--canvas expects WxH, got {text!r}")
    return int(w), int(h)


def cmd_score(args) -> int:
    cfg = load_config(args.config) if args.config else default_config()
    if args.mode:
        cfg = replace(cfg, mode=args.mode)
    batch = score_batch(args.directory, cfg, truth_dir=args.truth)
    sys.stdout.write(format_batch_report(batch))
    if args.overlays:
        outdir = Path(args.overlays)
        outdir.mkdir(parents=True, exist_ok=True)
        for report in batch.reports:
            if not report.contours and not report.calls:
                continue
            src = Path(args.directory) / report.image_id
            try:
                img = load_image(src)
            except ChromoscoreError:
                continue
            save_image(render_overlay(img, report), outdir / (src.stem + ".overlay.pgm"))
    return 0


def cmd_synth(args) -> int:
    canvas_w, canvas_h = _parse_canvas(args.canvas)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        # per-scene child seed keeps scenes independent and reproducible
        rng = np.random.default_rng([args.seed, i])
        img, label = build_scene(
            rng,
            canvas_w,
            canvas_h,
            mc=args.mc,
            dc=args.dc,
            debris=args.debris,
            nuclei=args.nuclei,
            noise_sigma=args.noise_sigma,
            free_angle=args.free_angle,
        )
        stem = outdir / f"{i:04d}"
        save_image(img, stem.with_suffix(".pgm"))
        stem.with_suffix(".txt").write_text(format_label_lines(label))
        stem.with_suffix(".json").write_text(label_to_json(label))
    print(json.dumps({"scenes": args.count, "out_dir": str(outdir)}, sort_keys=True))
    return 0


def cmd_pca_train(args) -> int:
    classes = []
    for entry in args.class_specs:
        label, sep, directory = entry.partition("=")
        if not sep or not label or not directory:
            raise ConfigError(f"--class expects label=dir, got {entry!r}")
        files = _image_files(directory)
        if not files:
            raise EmptyBatch(f"no images for class {label!r} in {directory}")
        classes.append((label, [prepare_crop(load_image(f)) for f in files]))
    classifier = train_classifier(classes, k=args.k)
    save_classifier(classifier, args.out)
    summary = {
        "out": str(args.out),
        "classes": {label: model.k for label, model in zip(classifier.labels, classifier.models)},
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_pca_classify(args) -> int:
    classifier = load_classifier(args.model)
    files = _image_files(args.directory)
    if not files:
        raise EmptyBatch(f"no images in {args.directory}")
    for f in files:
        errs = class_errors(classifier, prepare_crop(load_image(f)))
        label = min(classifier.labels, key=lambda lbl: errs[lbl])
        print(json.dumps({"image": f.name, "label": label, "errors": errs}, sort_keys=True))
    return 0


def _read_labels(path) -> list[str]:
    try:
        tokens = Path(path).read_text().split()
    except OSError as exc:
        raise ConfigError(f"cannot read label file {path}: {exc}") from exc
    bad = sorted({t for t in tokens if t not in (MC, DC)})
    if bad:
        raise ConfigError(f"label file {path} holds non-{MC}/{DC} tokens: {', '.join(bad)}")
    return tokens


def cmd_eval(args) -> int:
    cm = accumulate(_read_labels(args.pred), _read_labels(args.truth))
    doc = {"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn}
    doc.update(all_metrics(cm))
    print(json.dumps(doc, sort_keys=True))
    return 0


def cmd_config(args) -> int:
    sys.stdout.write(DEFAULT_CONFIG_YAML)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chromoscore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every image in a directory")
    p.add_argument("directory")
    p.add_argument("--config", help="YAML config file; defaults apply when omitted")
    p.add_argument("--mode", choices=[MODE_BPR, MODE_PCA], help="override the config's mode")
    p.add_argument("--overlays", help="directory for rendered overlay images")
    p.add_argument("--truth", help="directory of ground-truth json sidecars")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="emit labeled synthetic scenes")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--canvas", default="1280x1024", help="scene size as WxH")
    p.add_argument("--mc", type=int, default=46)
    p.add_argument("--dc", type=int, default=0)
    p.add_argument("--debris", type=int, default=0)
    p.add_argument("--nuclei", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--free-angle", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pca", help="train or apply the reconstruction-error classifier")
    pca_sub = p.add_subparsers(dest="pca_command", required=True)
    t = pca_sub.add_parser("train", help="fit one model per class and save them")
    t.add_argument(
        "--class",
        dest="class_specs",
        action="append",
        required=True,
        metavar="LABEL=DIR",
        help="class label and its image directory; repeatable",
    )
    t.add_argument("--k", type=int, default=None, help="components per class")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_pca_train)
    c = pca_sub.add_parser("classify", help="label every image in a directory")
    c.add_argument("directory")
    c.add_argument("--model", required=True)
    c.set_defaults(func=cmd_pca_classify)

    p = sub.add_parser("eval", help="confusion metrics for paired label files")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("config", help="print the default configuration")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ChromoscoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
