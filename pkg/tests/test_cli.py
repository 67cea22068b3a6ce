import json
from pathlib import Path

import pytest

from roomaudit.cli import main
from roomaudit.evaluate import ground_truth_to_json
from roomaudit.fixtures import golden_ground_truth, golden_scene
from roomaudit.scene import save_scene

DATA = Path(__file__).resolve().parents[1] / "data"
REJECTION = Path(__file__).resolve().parent / "data" / "rejection"


@pytest.fixture()
def scene_path(tmp_path):
    p = tmp_path / "scene.json"
    p.write_text(save_scene(golden_scene()), encoding="utf-8")
    return p


@pytest.fixture()
def gt_path(tmp_path):
    p = tmp_path / "gt.json"
    p.write_text(ground_truth_to_json(golden_ground_truth()), encoding="utf-8")
    return p


class TestValidate:
    def test_example_rules_ok(self):
        assert main(["validate", str(DATA / "example_rules.json")]) == 0

    def test_missing_file_is_input_error(self):
        assert main(["validate", "/nonexistent/rules.json"]) == 2

    @pytest.mark.parametrize("path", sorted(REJECTION.iterdir()))
    def test_rejection_corpus(self, path, capsys):
        assert main(["validate", str(path)]) == 2
        err = capsys.readouterr().err
        assert err.strip()

    def test_dumped_builtin_pack_validates(self, tmp_path):
        out = tmp_path / "pack.json"
        assert main(["dump-rules", "--out", str(out)]) == 0
        assert main(["validate", str(out)]) == 0


class TestAssess:
    def test_golden_has_findings_exit_1(self, scene_path, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["assess", str(scene_path), "--out", str(out)])
        assert code == 1
        doc = json.loads(out.read_text())
        assert len(doc["findings"]) == 21

    def test_empty_scene_exit_0(self, tmp_path):
        p = tmp_path / "empty.json"
        p.write_text('{"rooms": [], "objects": []}')
        assert main(["assess", str(p), "--out", str(tmp_path / "r.json")]) == 0

    def test_community_filter(self, scene_path, tmp_path):
        out = tmp_path / "wheel.json"
        main(["assess", str(scene_path), "--community", "Wheelchair User",
              "--out", str(out)])
        doc = json.loads(out.read_text())
        ids = {f["rule_id"] for f in doc["findings"]}
        assert "Knives-Presence" not in ids
        assert "Door-Radius" in ids

    def test_bad_scene_exit_2(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"rooms": [{"name": "x", "floor": [[0,0],[1,0]]}], "objects": []}')
        assert main(["assess", str(p)]) == 2

    def test_user_spec_replaces_builtin(self, scene_path, tmp_path):
        out = tmp_path / "r.json"
        code = main(["assess", str(scene_path), "--spec", str(DATA / "example_rules.json"),
                     "--out", str(out)])
        assert code == 1
        ids = {f["rule_id"] for f in json.loads(out.read_text())["findings"]}
        assert ids == {"Door-Opening-Radius", "Knives-Presence"}

    def test_merge_builtin_extends(self, scene_path, tmp_path):
        out = tmp_path / "r.json"
        main(["assess", str(scene_path), "--spec", str(DATA / "example_rules.json"),
              "--merge-builtin", "--out", str(out)])
        ids = {f["rule_id"] for f in json.loads(out.read_text())["findings"]}
        assert "Door-Opening-Radius" in ids and "Table-Height" in ids

    def test_csv_format(self, scene_path, tmp_path):
        out = tmp_path / "r.csv"
        main(["assess", str(scene_path), "--format", "csv", "--out", str(out)])
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("rule_id,")
        assert len(lines) == 22

    def test_svg_format(self, scene_path, tmp_path):
        out = tmp_path / "r.svg"
        main(["assess", str(scene_path), "--format", "svg", "--out", str(out)])
        text = out.read_text()
        assert text.startswith("<svg") and text.count("<circle") == 21


class TestPipelineCommands:
    def test_simulate_deterministic_bytes(self, scene_path, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            code = main(["simulate", str(scene_path), "--factors", "well_lit,clean,medium",
                         "--seed", "42", "--calib", "degenerate", "--out", str(out)])
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_simulate_perceive_assess_chain(self, scene_path, tmp_path):
        scan = tmp_path / "scan.json"
        perceived = tmp_path / "perceived.json"
        report = tmp_path / "report.json"
        assert main(["simulate", str(scene_path), "--seed", "3",
                     "--calib", "degenerate", "--out", str(scan)]) == 0
        assert main(["perceive", str(scan), str(scene_path), "--out", str(perceived)]) == 0
        code = main(["assess", str(perceived), "--out", str(report)])
        assert code == 1
        assert len(json.loads(report.read_text())["findings"]) == 21

    def test_scan_config_file(self, scene_path, tmp_path):
        cfg = tmp_path / "scan_config.json"
        cfg.write_text(json.dumps({
            "factors": {"lighting": "well_lit", "tidiness": "clean", "speed": "medium"},
            "seed": 9, "frame_rate": 10.0,
            "calibration": {"parametric_detection": 1.0},
        }))
        out = tmp_path / "scan.json"
        assert main(["simulate", str(scene_path), "--scan-config", str(cfg),
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["seed"] == 9
        assert doc["factors"]["speed"] == "medium"

    def test_evaluate_degenerate_accuracy_one(self, scene_path, gt_path, tmp_path):
        out = tmp_path / "results.csv"
        code = main(["evaluate", str(scene_path), str(gt_path), "--scans", "1",
                     "--seed", "4", "--calib", "degenerate", "--out", str(out),
                     "--json-out", str(tmp_path / "results.json")])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 2
        assert lines[1].split(",")[-1] == "100.00"
        doc = json.loads((tmp_path / "results.json").read_text())
        assert doc[0]["stats"]["accuracy"] == 1.0

    def test_evaluate_rejects_bad_gt(self, scene_path, tmp_path):
        bad = tmp_path / "gt.json"
        bad.write_text("[{\"kind\": \"bogus\"}]")
        assert main(["evaluate", str(scene_path), str(bad), "--out",
                     str(tmp_path / "r.csv")]) == 2

    def test_top_level_config_sets_defaults(self, scene_path, gt_path, tmp_path):
        cfg = tmp_path / "defaults.json"
        cfg.write_text(json.dumps({"frame_rate": 10.0, "match_radius": 0.5,
                                   "dedupe_radius": 0.25}))
        out = tmp_path / "results.csv"
        code = main(["--config", str(cfg), "evaluate", str(scene_path), str(gt_path),
                     "--scans", "1", "--seed", "4", "--calib", "degenerate",
                     "--out", str(out)])
        assert code == 0
        assert out.read_text().strip().splitlines()[1].split(",")[-1] == "100.00"
