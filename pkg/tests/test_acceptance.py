"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints a single `[ACCEPTANCE] <name>: PASS/FAIL` line (visible with
`pytest -s tests/test_acceptance.py` or on failure). Statistical checks use
fixed seeds, so the whole suite is deterministic.
"""

import json
import math
import time
from contextlib import contextmanager

import numpy as np

from patchmix.cli import EXIT_OK, main
from patchmix.dataset import Annotation, BBoxXYWH, load_dataset, save_dataset
from patchmix.lls import BACKGROUND, Prediction, masked_loss, partition_outcomes
from patchmix.mix_paste import edge_mask, mix_weight_fields
from patchmix.noise import NoiseSpec, UniformBoxNoise, corrupt_labels, perturb_boxes
from patchmix.probe import monte_carlo_presence, suspect_boxes
from patchmix.raster import box_to_rect, load_image

from conftest import build_dataset, minimal_doc, write_image_tree, write_json
from test_lls import oracle_partition
from test_probe import audit_dataset


@contextmanager
def criterion(name: str, budget_s: float | None = None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    if budget_s is not None and elapsed > budget_s:
        print(f"[ACCEPTANCE] {name}: FAIL (runtime {elapsed:.2f}s > {budget_s}s)")
        raise AssertionError(f"{name} exceeded runtime budget: {elapsed:.2f}s")
    print(f"[ACCEPTANCE] {name}: PASS ({elapsed:.2f}s)")


def test_mask_and_weight_invariants():
    """1,000 random mask configurations: weights sum to 1, mask in [lambda, 1],
    1 on the border, lambda beyond the band. Budget 10 s."""
    with criterion("mask-and-mix-weight-invariants", budget_s=10.0):
        rng = np.random.default_rng(20250810)
        for _ in range(1000):
            w = int(rng.integers(1, 65))
            h = int(rng.integers(1, 65))
            lam = float(rng.random())
            beta = float(rng.uniform(0.01, 0.5))
            k = int(rng.integers(2, 6))

            alpha = edge_mask(w, h, beta, lam)
            m = alpha.weights
            fields = mix_weight_fields(alpha, k)

            total = sum(f.weights for f in fields)
            if k == 2:
                assert np.all(total == 1.0)
            assert np.max(np.abs(total - 1.0)) <= 1e-12

            assert np.all(m <= 1.0)
            assert np.all(m >= lam - 1e-12)

            # border pixels have edge distance 0
            assert np.all(m[0, :] == 1.0) and np.all(m[-1, :] == 1.0)
            assert np.all(m[:, 0] == 1.0) and np.all(m[:, -1] == 1.0)

            rows = np.arange(h, dtype=np.float64)
            cols = np.arange(w, dtype=np.float64)
            d = np.minimum(
                np.minimum(rows, (h - 1) - rows)[:, None],
                np.minimum(cols, (w - 1) - cols)[None, :],
            )
            beyond = d > beta * w
            assert np.all(m[beyond] == lam)


def test_presence_probability_monte_carlo():
    """Simulated clean-item presence within 3 sigma of 1 - p**2 at p in {0.4, 0.6}.
    Budget 5 s."""
    with criterion("presence-probability-monte-carlo", budget_s=5.0):
        for p, closed_form, seed in ((0.4, 0.84, 101), (0.6, 0.64, 202)):
            est = monte_carlo_presence(p, 2, 100_000, rng=seed)
            assert abs(est.estimate - closed_form) <= 3 * est.stderr, (
                f"p={p}: {est.estimate} vs {closed_form} (se {est.stderr})"
            )


def test_corruption_protocol_rates_and_bounds():
    """p_c = p_b = 0.6, delta = 0.3 over 10,000 annotations: empirical rates
    within +/-0.015, every delta inside [-0.3, 0.3], no label kept. Budget 10 s."""
    with criterion("corruption-protocol", budget_s=10.0):
        d = build_dataset(n_images=500, n_categories=5, anns_per_image=20, seed=8)
        n = len(d.annotations)
        assert n == 10_000
        spec = NoiseSpec(
            p_c=0.6, p_b=0.6, box_model=UniformBoxNoise(delta=0.3), seed=424242
        )
        labeled, label_changes = corrupt_labels(d, spec)
        boxed, box_changes = perturb_boxes(labeled, spec)

        assert abs(len(label_changes) / n - 0.6) <= 0.015
        assert abs(len(box_changes) / n - 0.6) <= 0.015
        assert all(c.new != c.old for c in label_changes)
        deltas = np.array([c.deltas for c in box_changes])
        assert deltas.min() >= -0.3
        assert deltas.max() <= 0.3


def test_partition_against_oracle_and_loss_identity():
    """10,000 random instances (<=10 preds, <=5 gts): partition matches the
    brute-force pairwise oracle; suppressed-plus-kept losses reproduce the
    unmasked sum to 1e-9 relative. Budget 30 s."""
    with criterion("partition-oracle-and-loss-identity", budget_s=30.0):
        rng = np.random.default_rng(77)

        def random_box():
            return BBoxXYWH(
                float(rng.integers(0, 20)), float(rng.integers(0, 20)),
                float(rng.integers(1, 10)), float(rng.integers(1, 10)),
            )

        for _ in range(10_000):
            n_preds = int(rng.integers(0, 11))
            n_gts = int(rng.integers(0, 6))
            gt_ids = rng.permutation(40)[:n_gts]
            gts = [
                Annotation(id=int(aid), image_id=1,
                           category_id=int(rng.integers(1, 4)), bbox=random_box())
                for aid in gt_ids
            ]
            preds = [
                Prediction(
                    random_box(),
                    label=int(rng.choice([BACKGROUND, 1, 2, 3])),
                    cls_loss=float(rng.random() * 10),
                )
                for _ in range(n_preds)
            ]
            part = partition_outcomes(preds, gts, 0.5)
            expected = oracle_partition(preds, gts, 0.5)
            assert list(part.neg) == expected["neg"]
            assert list(part.fb) == expected["fb"]
            assert list(part.pos) == expected["pos"]
            assert list(part.pp) == expected["pp"]

            l_bbox = float(rng.random())
            loss = masked_loss(preds, part, l_bbox)
            everything = l_bbox + math.fsum(p.cls_loss for p in preds)
            suppressed = math.fsum(preds[i].cls_loss for i in part.pp)
            assert abs(loss.total + suppressed - everything) <= 1e-9 * max(1.0, abs(everything))


def test_audit_rates_exact():
    """Audit-table fixture counts reproduce the expected per-category rates exactly."""
    with criterion("box-audit-rates"):
        counts = {
            "Scissor": (1494, 73),
            "Utility Knife": (1635, 70),
            "Multi-Tool Knife": (1612, 81),
            "Straight Knife": (809, 34),
            "Folding Knife": (1589, 33),
        }
        d, dets = audit_dataset(counts)
        payload = suspect_boxes(dets, d, iou_cutoff=0.70).to_json()
        got = [row["rate_percent"] for row in payload["per_category"]]
        got.append(payload["total"]["rate_percent"])
        assert got == ["4.89%", "4.28%", "5.02%", "4.20%", "2.08%", "4.08%"]
        for row, (total, suspects) in zip(payload["per_category"], counts.values()):
            assert row["rate"] == suspects / total


def test_cli_augment_worker_determinism(tmp_path):
    """augment with one seed at 1 and 8 workers: byte-identical trees and
    reports on a 50-image fixture. Budget 60 s."""
    with criterion("augment-worker-determinism", budget_s=60.0):
        dataset = build_dataset(n_images=50, n_categories=3, anns_per_image=2,
                                img_w=64, img_h=64, seed=12)
        images_root = tmp_path / "src"
        write_image_tree(images_root, dataset)
        ann_path = tmp_path / "train.json"
        save_dataset(dataset, ann_path)

        outputs = {}
        for workers in (1, 8):
            out = tmp_path / f"out_w{workers}"
            code = main([
                "augment", "--ann", str(ann_path), "--images", str(images_root),
                "--out", str(out), "--seed", "97", "--workers", str(workers),
            ])
            assert code == EXIT_OK
            tree = {
                str(p.relative_to(out)): p.read_bytes()
                for p in sorted(out.rglob("*"))
                if p.is_file()
            }
            outputs[workers] = tree
        assert outputs[1].keys() == outputs[8].keys()
        for rel, data in outputs[1].items():
            assert outputs[8][rel] == data, f"{rel} differs between worker counts"


def test_pixel_locality_of_augmentation(tmp_path):
    """On every augmented fixture image, pixels outside annotation rectangles
    are byte-identical to the source."""
    with criterion("pixel-locality"):
        dataset = build_dataset(n_images=12, n_categories=3, anns_per_image=3,
                                img_w=56, img_h=48, seed=21)
        images_root = tmp_path / "src"
        write_image_tree(images_root, dataset)
        ann_path = tmp_path / "train.json"
        save_dataset(dataset, ann_path)
        out = tmp_path / "aug"
        code = main([
            "augment", "--ann", str(ann_path), "--images", str(images_root),
            "--out", str(out), "--seed", "5", "--apply-prob", "1.0",
        ])
        assert code == EXIT_OK
        out_ds = load_dataset(out / "annotations.json")
        changed_somewhere = False
        for src_img, out_img in zip(dataset.images, out_ds.images):
            before = load_image(images_root / src_img.file_name).pixels
            after = load_image(out / "images" / out_img.file_name).pixels
            outside = np.ones((src_img.height, src_img.width), dtype=bool)
            for ann in dataset.annotations:
                if ann.image_id != src_img.id:
                    continue
                x0, y0, x1, y1 = box_to_rect(ann.bbox, src_img.width, src_img.height)
                outside[y0:y1, x0:x1] = False
            assert np.array_equal(before[outside], after[outside]), (
                f"pixels outside boxes changed on image {src_img.id}"
            )
            if not np.array_equal(before, after):
                changed_somewhere = True
        assert changed_somewhere, "augmentation should have modified some pixels"


def test_coco_round_trip_with_extras(tmp_path):
    """load -> save -> load is field-identical, including real-valued boxes and
    opaque extra fields."""
    with criterion("coco-round-trip"):
        doc = minimal_doc()
        doc["info"] = {"description": "fixture", "version": 2}
        doc["images"][0]["license"] = 3
        doc["annotations"][0]["bbox"] = [1.5, 2.25, 10.0, 4.5]
        doc["annotations"][0]["area"] = 45.0
        doc["annotations"][0]["iscrowd"] = 0
        doc["categories"][0]["supercategory"] = "tool"
        path = write_json(tmp_path / "in.json", doc)

        first = load_dataset(path)
        saved = tmp_path / "saved.json"
        save_dataset(first, saved)
        second = load_dataset(saved)
        assert second == first
        assert second.annotations[0].bbox.as_list() == [1.5, 2.25, 10.0, 4.5]
        assert second.extra["info"] == {"description": "fixture", "version": 2}
        assert second.annotations[0].extra["iscrowd"] == 0

        big = build_dataset(n_images=40, n_categories=4, anns_per_image=5, seed=30)
        big_path = tmp_path / "big.json"
        save_dataset(big, big_path)
        assert load_dataset(big_path) == big
