"""Command-line front door wiring the toolkit into reproducible batch runs.

Every command is a pure function of its flags, input files, and seed; rerun
it and the outputs are byte-identical. Exit codes: 0 success, 1 usage error,
2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import load_dataset, save_dataset, validate
from .errors import DataFormatError
from .lls import load_detections, masked_loss, partition_outcomes
from .mix_paste import MixConfig, augment_dataset
from .noise import (
    GaussianBoxNoise,
    NoiseSpec,
    UniformBoxNoise,
    changes_to_json,
    corrupt_labels,
    perturb_boxes,
)
from .probe import suspect_boxes

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

_DEFAULTS = {
    "inject-noise": {
        "ann": None, "out": None, "changelog": None, "pc": 0.6, "pb": 0.6,
        "box_model": "uniform", "delta": 0.3, "mu": 0.0, "sigma": 0.1, "seed": 0,
    },
    "augment": {
        "ann": None, "images": None, "out": None, "k": 2, "apply_prob": 0.6,
        "beta_frac": 0.10, "lambda_a": 1.0, "lambda_b": 1.0, "seed": 0, "workers": 1,
    },
    "partition": {"dets": None, "ann": None, "out": None, "iou_thr": 0.5},
    "probe": {"dets": None, "ann": None, "out": None, "iou_cutoff": 0.70},
    "validate": {"ann": None},
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="patchmix", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("inject-noise", help="corrupt labels and boxes of a COCO document")
    p.add_argument("--ann", help="input COCO JSON")
    p.add_argument("--out", help="output COCO JSON")
    p.add_argument("--changelog", help="change log path (default: <out>.changes.json)")
    p.add_argument("--pc", type=float, help="category noise rate (default 0.6)")
    p.add_argument("--pb", type=float, help="box noise rate (default 0.6)")
    p.add_argument("--box-model", choices=["uniform", "gaussian"], dest="box_model")
    p.add_argument("--delta", type=float, help="uniform perturbation level (default 0.3)")
    p.add_argument("--mu", type=float, help="gaussian mean (default 0.0)")
    p.add_argument("--sigma", type=float, help="gaussian std dev (default 0.1)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_inject_noise)

    p = sub.add_parser("augment", help="mix-paste augment an image tree")
    p.add_argument("--ann", help="input COCO JSON")
    p.add_argument("--images", help="image root directory")
    p.add_argument("--out", help="output root (images/, annotations.json, report.json)")
    p.add_argument("--k", type=int, help="patches per mix, original included (default 2)")
    p.add_argument("--apply-prob", type=float, dest="apply_prob",
                   help="per-image augmentation probability (default 0.6)")
    p.add_argument("--beta-frac", type=float, dest="beta_frac",
                   help="smoothing band as a fraction of patch width (default 0.10)")
    p.add_argument("--lambda-a", type=float, dest="lambda_a", help="Beta a (default 1.0)")
    p.add_argument("--lambda-b", type=float, dest="lambda_b", help="Beta b (default 1.0)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="parallel image workers (default 1)")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("partition", help="split detections into outcome sets per image")
    p.add_argument("--dets", help="detections JSON array")
    p.add_argument("--ann", help="ground-truth COCO JSON")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.add_argument("--iou-thr", type=float, dest="iou_thr", help="match threshold (default 0.5)")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("probe", help="flag ground-truth boxes detections disagree with")
    p.add_argument("--dets", help="detections JSON array")
    p.add_argument("--ann", help="ground-truth COCO JSON")
    p.add_argument("--out", help="JSON report path (table always goes to stdout)")
    p.add_argument("--iou-cutoff", type=float, dest="iou_cutoff",
                   help="suspect cutoff (default 0.70)")
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("validate", help="report invariant violations in a COCO document")
    p.add_argument("--ann", help="COCO JSON to check")
    p.set_defaults(func=_cmd_validate)

    for sp in sub.choices.values():
        sp.add_argument("--config", help="JSON config file; explicit flags win")

    return parser


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from --config, then from the command's defaults."""
    defaults = _DEFAULTS[args.command]
    config = {}
    if getattr(args, "config", None):
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(config) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    return args


def _require_paths(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"--{name} is required")


def _cmd_inject_noise(args) -> int:
    _require_paths(args, "ann", "out")
    d = load_dataset(args.ann)
    if args.box_model == "gaussian":
        model = GaussianBoxNoise(mu=args.mu, sigma=args.sigma)
    else:
        model = UniformBoxNoise(delta=args.delta)
    spec = NoiseSpec(p_c=args.pc, p_b=args.pb, box_model=model, seed=args.seed)
    out, label_changes = corrupt_labels(d, spec)
    out, box_changes = perturb_boxes(out, spec)
    save_dataset(out, args.out)
    changelog = args.changelog or str(Path(args.out).with_suffix("")) + ".changes.json"
    Path(changelog).write_text(
        json.dumps(changes_to_json([*label_changes, *box_changes]), indent=2) + "\n",
        encoding="utf-8",
    )
    n = len(d.annotations)

    def with_rate(count: int) -> str:
        return f"{count} (rate {count / n:.4f})" if n else str(count)

    print(f"annotations: {n}")
    print(f"category changes: {with_rate(len(label_changes))}")
    print(f"box changes: {with_rate(len(box_changes))}")
    print(f"wrote {args.out} and {changelog}")
    return EXIT_OK


def _cmd_augment(args) -> int:
    _require_paths(args, "ann", "images", "out")
    d = load_dataset(args.ann)
    cfg = MixConfig(
        k=args.k, apply_prob=args.apply_prob, beta_frac=args.beta_frac,
        lambda_a=args.lambda_a, lambda_b=args.lambda_b, seed=args.seed,
    )
    out_root = Path(args.out)
    out_ds, report = augment_dataset(
        d, args.images, out_root / "images", cfg, workers=args.workers
    )
    save_dataset(out_ds, out_root / "annotations.json")
    (out_root / "report.json").write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(
        f"selected {report.selected_images}/{report.total_images} images "
        f"(fraction {report.selected_fraction:.4f})"
    )
    print(f"mixed items: {report.mixed_items}, skipped items: {report.skipped_items}")
    if report.errors:
        print(f"image errors: {len(report.errors)} (see report.json)")
    print(f"wrote {out_root}")
    return EXIT_OK


def _cmd_partition(args) -> int:
    _require_paths(args, "dets", "ann")
    d = load_dataset(args.ann)
    detections = load_detections(args.dets)
    by_image = {}
    for det in detections:
        by_image.setdefault(det.image_id, []).append(det)
    entries = []
    for img in sorted(d.images, key=lambda im: im.id):
        preds = [det.as_prediction() for det in by_image.get(img.id, [])]
        gts = d.annotations_by_image.get(img.id, ())
        part = partition_outcomes(preds, gts, args.iou_thr)
        loss = masked_loss(preds, part)
        entries.append(
            {
                "image_id": img.id,
                "partition": {
                    "neg": list(part.neg), "fb": list(part.fb),
                    "pos": list(part.pos), "pp": list(part.pp),
                },
                "loss": {
                    "l_bbox": loss.l_bbox, "l_cls_neg": loss.l_cls_neg,
                    "l_cls_pos": loss.l_cls_pos, "l_cls_fb": loss.l_cls_fb,
                    "total": loss.total,
                },
            }
        )
    text = json.dumps(entries, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out} ({len(entries)} images)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_probe(args) -> int:
    _require_paths(args, "dets", "ann")
    d = load_dataset(args.ann)
    detections = load_detections(args.dets)
    report = suspect_boxes(detections, d, args.iou_cutoff)
    print(report.to_table())
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    _require_paths(args, "ann")
    d = load_dataset(args.ann, strict=False)
    violations = validate(d)
    if not violations:
        print("OK: no violations")
        return EXIT_OK
    for v in violations:
        print(f"{v.kind}: {v.message}")
    print(f"{len(violations)} violation(s)")
    return EXIT_DATA


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the diagnostic
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = _resolve(args)
        return args.func(args)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
