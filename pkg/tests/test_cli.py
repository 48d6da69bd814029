import json
from pathlib import Path

import pytest

from patchmix.cli import EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from patchmix.dataset import load_dataset

from conftest import minimal_doc, write_json


def run(argv):
    return main([str(a) for a in argv])


def fig_style_partition_fixture(tmp_path):
    """One ground truth plus the four characteristic prediction outcomes."""
    gt_doc = {
        "images": [{"id": 1, "file_name": "a.png", "width": 100, "height": 100}],
        "annotations": [
            {"id": 1, "image_id": 1, "category_id": 1, "bbox": [10, 10, 20, 20]}
        ],
        "categories": [{"id": 1, "name": "knife"}, {"id": 2, "name": "scissor"}],
    }
    dets = [
        {"image_id": 1, "bbox": [70, 70, 10, 10], "label": 1, "cls_loss": 1.0},
        {"image_id": 1, "bbox": [10, 10, 20, 20], "label": None, "cls_loss": 2.0},
        {"image_id": 1, "bbox": [10, 10, 20, 20], "label": 1, "cls_loss": 4.0},
        {"image_id": 1, "bbox": [10, 10, 20, 20], "label": 2, "cls_loss": 8.0},
    ]
    ann = write_json(tmp_path / "gt.json", gt_doc)
    det = write_json(tmp_path / "dets.json", dets)
    return ann, det


class TestInjectNoise:
    def test_zero_rates_identity(self, tmp_path, capsys):
        ann = write_json(tmp_path / "in.json", minimal_doc())
        out = tmp_path / "out.json"
        assert run(["inject-noise", "--ann", ann, "--out", out,
                    "--pc", 0, "--pb", 0, "--seed", 1]) == EXIT_OK
        assert load_dataset(out) == load_dataset(ann)
        printed = capsys.readouterr().out
        assert "category changes: 0" in printed
        assert "box changes: 0" in printed
        changes = json.loads((tmp_path / "out.changes.json").read_text())
        assert changes == []

    def test_headline_corruption_setting(self, fixture_tree, tmp_path):
        ann_path, _, d = fixture_tree
        out = tmp_path / "noisy.json"
        assert run(["inject-noise", "--ann", ann_path, "--out", out,
                    "--pc", 0.6, "--pb", 0.6, "--delta", 0.3, "--seed", 7]) == EXIT_OK
        noisy = load_dataset(out)
        assert len(noisy.annotations) == len(d.annotations)
        changes = json.loads((tmp_path / "noisy.changes.json").read_text())
        assert changes  # at 60% rates on 16 annotations, silence is implausible

    def test_same_seed_byte_identical(self, fixture_tree, tmp_path):
        ann_path, _, _ = fixture_tree
        for name in ("a", "b"):
            assert run(["inject-noise", "--ann", ann_path,
                        "--out", tmp_path / f"{name}.json", "--seed", 5]) == EXIT_OK
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert (tmp_path / "a.changes.json").read_bytes() == \
            (tmp_path / "b.changes.json").read_bytes()

    def test_gaussian_model_flag(self, fixture_tree, tmp_path):
        ann_path, _, _ = fixture_tree
        assert run(["inject-noise", "--ann", ann_path, "--out", tmp_path / "g.json",
                    "--box-model", "gaussian", "--mu", 0, "--sigma", 0.1,
                    "--pc", 0, "--pb", 1.0, "--seed", 2]) == EXIT_OK


class TestAugment:
    def test_defaults_smoke(self, fixture_tree, tmp_path, capsys):
        ann_path, images_root, d = fixture_tree
        out = tmp_path / "aug"
        assert run(["augment", "--ann", ann_path, "--images", images_root,
                    "--out", out, "--seed", 3]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["total_images"] == len(d.images)
        assert any(img["records"] for img in report["images"])
        assert (out / "annotations.json").exists()
        assert "selected" in capsys.readouterr().out

    def test_apply_prob_zero_is_byte_identical(self, fixture_tree, tmp_path):
        ann_path, images_root, d = fixture_tree
        out = tmp_path / "aug0"
        assert run(["augment", "--ann", ann_path, "--images", images_root,
                    "--out", out, "--apply-prob", 0, "--seed", 3]) == EXIT_OK
        for img in d.images:
            assert (out / "images" / img.file_name).read_bytes() == \
                (images_root / img.file_name).read_bytes()

    def test_worker_count_does_not_change_output(self, fixture_tree, tmp_path):
        ann_path, images_root, d = fixture_tree
        for workers, name in ((1, "w1"), (8, "w8")):
            assert run(["augment", "--ann", ann_path, "--images", images_root,
                        "--out", tmp_path / name, "--seed", 4,
                        "--workers", workers]) == EXIT_OK
        r1 = (tmp_path / "w1" / "report.json").read_bytes()
        r8 = (tmp_path / "w8" / "report.json").read_bytes()
        assert r1 == r8
        a1 = (tmp_path / "w1" / "annotations.json").read_bytes()
        a8 = (tmp_path / "w8" / "annotations.json").read_bytes()
        assert a1 == a8
        files1 = sorted(p.relative_to(tmp_path / "w1") for p in (tmp_path / "w1").rglob("*") if p.is_file())
        files8 = sorted(p.relative_to(tmp_path / "w8") for p in (tmp_path / "w8").rglob("*") if p.is_file())
        assert files1 == files8
        for rel in files1:
            assert (tmp_path / "w1" / rel).read_bytes() == (tmp_path / "w8" / rel).read_bytes()


class TestPartition:
    def test_four_characteristic_outcomes(self, tmp_path):
        ann, det = fig_style_partition_fixture(tmp_path)
        out = tmp_path / "part.json"
        assert run(["partition", "--dets", det, "--ann", ann, "--out", out]) == EXIT_OK
        entries = json.loads(out.read_text())
        assert len(entries) == 1
        part = entries[0]["partition"]
        assert part == {"neg": [0], "fb": [1], "pos": [2], "pp": [3]}
        loss = entries[0]["loss"]
        # suppressed pp loss (8.0) is absent from the total
        assert loss["total"] == pytest.approx(1.0 + 2.0 + 4.0)

    def test_stdout_when_no_out_flag(self, tmp_path, capsys):
        ann, det = fig_style_partition_fixture(tmp_path)
        assert run(["partition", "--dets", det, "--ann", ann]) == EXIT_OK
        entries = json.loads(capsys.readouterr().out)
        assert entries[0]["image_id"] == 1


class TestProbe:
    def test_coincident_detections_zero_suspects(self, tmp_path, capsys):
        gt = minimal_doc()
        dets = [{"image_id": 1, "bbox": [0, 0, 2, 2], "label": 1}]
        ann = write_json(tmp_path / "gt.json", gt)
        det = write_json(tmp_path / "dets.json", dets)
        out = tmp_path / "probe.json"
        assert run(["probe", "--dets", det, "--ann", ann, "--out", out]) == EXIT_OK
        payload = json.loads(out.read_text())
        assert payload["total"]["suspects"] == 0
        assert "0.00%" in capsys.readouterr().out


class TestValidate:
    def test_valid_document(self, tmp_path, capsys):
        ann = write_json(tmp_path / "ok.json", minimal_doc())
        assert run(["validate", "--ann", ann]) == EXIT_OK
        assert "no violations" in capsys.readouterr().out

    def test_corrupted_document_reports_and_fails(self, tmp_path, capsys):
        doc = minimal_doc()
        doc["annotations"][0]["bbox"] = [0, 0, 0, 2]
        doc["annotations"].append(dict(doc["annotations"][0]))
        ann = write_json(tmp_path / "bad.json", doc)
        assert run(["validate", "--ann", ann]) == EXIT_DATA
        printed = capsys.readouterr().out
        assert "duplicate" in printed
        assert "non-positive box" in printed


class TestExitCodes:
    def test_unknown_command_is_usage_error(self, capsys):
        assert run(["frobnicate"]) == EXIT_USAGE

    def test_no_command_is_usage_error(self):
        assert run([]) == EXIT_USAGE

    def test_missing_required_flag(self, tmp_path, capsys):
        assert run(["inject-noise", "--out", tmp_path / "x.json"]) == EXIT_USAGE
        assert "--ann is required" in capsys.readouterr().err

    def test_invalid_parameter_value(self, tmp_path, capsys):
        ann = write_json(tmp_path / "in.json", minimal_doc())
        assert run(["inject-noise", "--ann", ann, "--out", tmp_path / "o.json",
                    "--pc", 1.5]) == EXIT_USAGE

    def test_missing_input_file_is_io_error(self, tmp_path):
        assert run(["validate", "--ann", tmp_path / "absent.json"]) == EXIT_IO

    def test_malformed_document_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        assert run(["validate", "--ann", bad]) == EXIT_DATA


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, tmp_path):
        doc = minimal_doc()
        doc["categories"].append({"id": 2, "name": "other"})
        ann = write_json(tmp_path / "in.json", doc)
        cfg = write_json(tmp_path / "cfg.json", {"pc": 0.0, "pb": 0.0, "seed": 9})
        out1 = tmp_path / "o1.json"
        assert run(["inject-noise", "--ann", ann, "--out", out1,
                    "--config", cfg]) == EXIT_OK
        # config pc=0 means no label changes at all
        assert json.loads((tmp_path / "o1.changes.json").read_text()) == []
        # an explicit flag overrides the config's pc and flips the single label
        out2 = tmp_path / "o2.json"
        assert run(["inject-noise", "--ann", ann, "--out", out2,
                    "--config", cfg, "--pc", 1.0]) == EXIT_OK
        changes = json.loads((tmp_path / "o2.changes.json").read_text())
        assert [c["kind"] for c in changes] == ["category"]

    def test_unknown_config_key_rejected(self, tmp_path):
        ann = write_json(tmp_path / "in.json", minimal_doc())
        cfg = write_json(tmp_path / "cfg.json", {"delta_typo": 1})
        assert run(["inject-noise", "--ann", ann, "--out", tmp_path / "o.json",
                    "--config", cfg]) == EXIT_USAGE
