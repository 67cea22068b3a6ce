"""Run the six-condition factor study on the golden apartment and print the
results table.

Usage:  python scripts/run_factor_study.py [--scans N] [--seed S] [--out results.csv]
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from roomaudit.evaluate import batch_evaluate, results_to_csv
from roomaudit.fixtures import golden_ground_truth, golden_scene
from roomaudit.rules import builtin_rule_pack
from roomaudit.simulate import Lighting, ScanFactors, Speed, Tidiness, default_calibration

CONDITIONS = [
    ScanFactors(Lighting.WELL_LIT, Tidiness.CLEAN, Speed.MEDIUM),
    ScanFactors(Lighting.PARTIAL, Tidiness.CLEAN, Speed.MEDIUM),
    ScanFactors(Lighting.WELL_LIT, Tidiness.MESSY, Speed.MEDIUM),
    ScanFactors(Lighting.WELL_LIT, Tidiness.VERY_MESSY, Speed.MEDIUM),
    ScanFactors(Lighting.WELL_LIT, Tidiness.CLEAN, Speed.FAST),
    ScanFactors(Lighting.POOR, Tidiness.CLEAN, Speed.MEDIUM),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scans", type=int, default=20)
    parser.add_argument("--seed", type=int, default=20240501)
    parser.add_argument("--out", default=None, help="optional CSV output path")
    args = parser.parse_args()

    results = batch_evaluate(
        golden_scene(), golden_ground_truth(), builtin_rule_pack(),
        CONDITIONS, args.scans, default_calibration(), args.seed)

    header = f"{'light':10s} {'tidy':11s} {'speed':7s} " \
             f"{'tp':>6s} {'fp':>6s} {'tn':>6s} {'fn':>6s} " \
             f"{'prec':>6s} {'rec':>6s} {'f1':>6s} {'acc':>6s}"
    print(header)
    print("-" * len(header))
    for r in results:
        c, s = r.counts, r.stats
        print(f"{r.factors.lighting.value:10s} {r.factors.tidiness.value:11s} "
              f"{r.factors.speed.value:7s} "
              f"{c.tp:6.2f} {c.fp:6.2f} {c.tn:6.2f} {c.fn:6.2f} "
              f"{100 * s.precision:6.1f} {100 * s.recall:6.1f} "
              f"{100 * s.f1:6.1f} {100 * s.accuracy:6.1f}")
    if args.out:
        Path(args.out).write_text(results_to_csv(results), encoding="utf-8")
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
