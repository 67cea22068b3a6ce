"""Regenerate the checked-in data files: the golden apartment scene, its
ground-truth annotations, the example rule spec, the factor-study condition
list, and the golden SVG report.

Run from the repository root:  python scripts/make_golden.py
"""
from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from roomaudit.assess import evaluate_scene
from roomaudit.evaluate import ground_truth_to_json
from roomaudit.fixtures import golden_ground_truth, golden_scene
from roomaudit.report import render_floorplan
from roomaudit.rules import ALL_COMMUNITIES, builtin_rule_pack
from roomaudit.scene import save_scene

EXAMPLE_RULES = """{
  "Door-Opening": {
    "Radius": {
      "Community": ["Wheelchair User"],
      "Dependency": ["Door"],
      "Dimension": {
        "Comparison": ">",
        "Value": [32]
      },
      "Existence": null,
      "Description": "Door openings must provide a clear width of at least 32 inches."
    }
  },
  "Knives": {
    "Radius": {
      "Community": ["Children"],
      "Dependency": ["Table", "Sofa", "Counter", "Floor", "Bed", "Chair"],
      "Dimension": {
        "Comparison": null,
        "Value": null
      },
      "Existence": false,
      "Description": "No knives may be left on reachable surfaces."
    }
  }
}
"""

CONDITIONS = """[
  {"lighting": "well_lit", "tidiness": "clean", "speed": "medium"},
  {"lighting": "partial", "tidiness": "clean", "speed": "medium"},
  {"lighting": "well_lit", "tidiness": "messy", "speed": "medium"},
  {"lighting": "well_lit", "tidiness": "very_messy", "speed": "medium"},
  {"lighting": "well_lit", "tidiness": "clean", "speed": "fast"},
  {"lighting": "poor", "tidiness": "clean", "speed": "medium"}
]
"""


def main():
    root = Path(__file__).resolve().parents[1]
    data = root / "data"
    data.mkdir(exist_ok=True)

    scene = golden_scene()
    (data / "golden_apartment.json").write_text(save_scene(scene), encoding="utf-8")
    (data / "golden_ground_truth.json").write_text(
        ground_truth_to_json(golden_ground_truth()), encoding="utf-8")
    (data / "example_rules.json").write_text(EXAMPLE_RULES, encoding="utf-8")
    (data / "factor_conditions.json").write_text(CONDITIONS, encoding="utf-8")

    assessment = evaluate_scene(builtin_rule_pack(), scene, ALL_COMMUNITIES)
    (data / "golden_report.svg").write_text(render_floorplan(scene, assessment),
                                            encoding="utf-8")
    print(f"wrote {len(list(data.iterdir()))} files to {data}")


if __name__ == "__main__":
    main()
