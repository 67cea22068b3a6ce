"""Calibration tuning harness: run the six-condition study for the shipped
calibration (optionally with overrides) and report the ordering margins and
per-axis recall monotonicity, so new constants can be vetted before shipping.

Usage:  python scripts/calibrate.py [--scans N] [--seeds S1 S2 ...] [--calib FILE]
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from roomaudit.evaluate import batch_evaluate
from roomaudit.fixtures import golden_ground_truth, golden_scene
from roomaudit.rules import builtin_rule_pack
from roomaudit.simulate import calibration_from_json, default_calibration

from run_factor_study import CONDITIONS

AXES = {"lighting": (0, 1, 5), "tidiness": (0, 2, 3), "speed": (0, 4)}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scans", type=int, default=10)
    parser.add_argument("--seeds", type=int, nargs="+", default=[20240501, 1, 424242])
    parser.add_argument("--calib", help="calibration JSON overriding the shipped defaults")
    args = parser.parse_args()

    calib = default_calibration()
    if args.calib:
        calib = calibration_from_json(Path(args.calib).read_text(encoding="utf-8"))

    scene, gt, pack = golden_scene(), golden_ground_truth(), builtin_rule_pack()
    all_ok = True
    for seed in args.seeds:
        results = batch_evaluate(scene, gt, pack, CONDITIONS, args.scans, calib, seed)
        accs = [100 * r.stats.accuracy for r in results]
        ordered = all(a > b for a, b in zip(accs, accs[1:]))
        margins = [a - b for a, b in zip(accs, accs[1:])]
        print(f"seed {seed}: acc {['%.1f' % a for a in accs]} "
              f"ordered={ordered} min_gap={min(margins):.1f}pp")
        for axis, chain in AXES.items():
            for a, b in zip(chain, chain[1:]):
                better, worse = results[a], results[b]
                allowance = math.hypot(better.recall_stderr(), worse.recall_stderr())
                if worse.stats.recall > better.stats.recall + allowance:
                    print(f"  monotonicity broken on {axis}: "
                          f"{better.factors.as_dict()} -> {worse.factors.as_dict()}")
                    all_ok = False
        all_ok &= ordered
    print("OK" if all_ok else "NEEDS TUNING")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
