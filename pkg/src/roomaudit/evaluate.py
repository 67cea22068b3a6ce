"""Scoring: match findings against ground-truth annotations using the
seven-outcome taxonomy, aggregate to precision/recall/F1/accuracy, and run
batched factor studies (simulate -> perceive -> assess -> classify)."""
from __future__ import annotations

import enum
import io
import json
import math
from dataclasses import dataclass

from .assess import Assessment, evaluate_scene
from .geometry import Vec3
from .perceive import run_perception
from .rules import ALL_COMMUNITIES, ObjectClass, RuleSet, parse_object_class
from .scene import Scene, SceneObject
from .simulate import NoiseCalibration, ScanFactors, simulate_scan

MATCH_RADIUS_M = 0.5


class CaseKind(enum.Enum):
    ISSUE = "issue"
    NON_ISSUE = "non_issue"


@dataclass(frozen=True)
class GroundTruthCase:
    kind: CaseKind
    object_class: ObjectClass
    anchor: Vec3
    rule_id: str | None = None   # required for issues
    label: str = ""

    def __post_init__(self):
        if self.kind is CaseKind.ISSUE and not self.rule_id:
            raise ValueError(f"issue case {self.label!r} needs an expected rule_id")


@dataclass(frozen=True)
class OutcomeCounts:
    """Seven outcome counters; fractional after averaging over scans.

    False positives split into misclassification (wrong object or rule at a
    real issue), extra detection (non-issue or nothing flagged), and
    dimension/position error (right object on a non-issue, wrongly flagged).
    False negatives split into missed object vs missed issue on a seen object.
    """

    tp: float = 0.0
    tn: float = 0.0
    fp_misc: float = 0.0
    fp_e: float = 0.0
    fp_dp: float = 0.0
    fn_m: float = 0.0
    fn_dp: float = 0.0

    @property
    def fp(self) -> float:
        return self.fp_misc + self.fp_e + self.fp_dp

    @property
    def fn(self) -> float:
        return self.fn_m + self.fn_dp

    def __add__(self, other: "OutcomeCounts") -> "OutcomeCounts":
        return OutcomeCounts(*(getattr(self, f) + getattr(other, f) for f in _COUNT_FIELDS))

    def scaled(self, factor: float) -> "OutcomeCounts":
        return OutcomeCounts(*(getattr(self, f) * factor for f in _COUNT_FIELDS))


_COUNT_FIELDS = ("tp", "tn", "fp_misc", "fp_e", "fp_dp", "fn_m", "fn_dp")


@dataclass(frozen=True)
class AggregateStats:
    precision: float
    recall: float
    f1: float
    accuracy: float
    degenerate: bool = False   # set when any ratio was 0/0 and reported as 0


def classify_outcomes(assessment: Assessment, gt: list[GroundTruthCase],
                      match_radius: float = MATCH_RADIUS_M,
                      perceived: list[SceneObject] | None = None) -> OutcomeCounts:
    """Greedy nearest-first matching of findings to ground-truth anchors.

    A matched issue counts TP only with the right object class and rule;
    otherwise the case is consumed as a misclassification. Unmatched issues
    become FN-DP when the perceived object list still contains the object
    (pass the perception output to enable the split) and FN-M otherwise.
    """
    if match_radius <= 0:
        raise ValueError("match_radius must be positive")
    for i, a in enumerate(gt):
        for b in gt[i + 1:]:
            if a.anchor.distance_to(b.anchor) < match_radius:
                raise ValueError(
                    f"ambiguous ground truth: anchors of {a.label!r} and {b.label!r} "
                    f"are within the match radius")

    findings = list(assessment.findings)
    pairs: list[tuple[float, int, int]] = []
    for fi, f in enumerate(findings):
        for ci, case in enumerate(gt):
            d = f.anchor.distance_to(case.anchor)
            if d <= match_radius:
                pairs.append((d, ci, fi))
    pairs.sort()
    case_match: dict[int, int] = {}
    finding_match: dict[int, int] = {}
    for d, ci, fi in pairs:
        if ci in case_match or fi in finding_match:
            continue
        case_match[ci] = fi
        finding_match[fi] = ci

    tp = tn = fp_misc = fp_e = fp_dp = fn_m = fn_dp = 0
    for ci, case in enumerate(gt):
        fi = case_match.get(ci)
        if case.kind is CaseKind.ISSUE:
            if fi is None:
                if perceived is not None and _object_seen(perceived, case, match_radius):
                    fn_dp += 1
                else:
                    fn_m += 1
            else:
                f = findings[fi]
                if f.subject_class is case.object_class and f.rule_id == case.rule_id:
                    tp += 1
                else:
                    fp_misc += 1
        else:
            if fi is None:
                tn += 1
            else:
                f = findings[fi]
                if f.subject_class is case.object_class:
                    fp_dp += 1
                else:
                    fp_misc += 1
    fp_e += sum(1 for fi in range(len(findings)) if fi not in finding_match)
    return OutcomeCounts(tp=tp, tn=tn, fp_misc=fp_misc, fp_e=fp_e, fp_dp=fp_dp,
                         fn_m=fn_m, fn_dp=fn_dp)


def _object_seen(perceived: list[SceneObject], case: GroundTruthCase, radius: float) -> bool:
    return any(o.object_class is case.object_class
               and o.box.center.distance_to(case.anchor) <= radius
               for o in perceived)


def aggregate(counts: OutcomeCounts, total_cases: float) -> AggregateStats:
    """Precision/recall/F1/accuracy; 0/0 ratios report 0 with a flag so batch
    tables never abort."""
    if total_cases <= 0:
        raise ValueError("total_cases must be positive")
    degenerate = False

    def ratio(num: float, den: float) -> float:
        nonlocal degenerate
        if den == 0.0:
            degenerate = True
            return 0.0
        return num / den

    precision = ratio(counts.tp, counts.tp + counts.fp)
    recall = ratio(counts.tp, counts.tp + counts.fn)
    f1 = ratio(2.0 * precision * recall, precision + recall)
    accuracy = (counts.tp + counts.tn) / total_cases
    return AggregateStats(precision, recall, f1, accuracy, degenerate)


@dataclass(frozen=True)
class ConditionResult:
    factors: ScanFactors
    counts: OutcomeCounts          # averaged over scans
    stats: AggregateStats
    per_scan: tuple[OutcomeCounts, ...] = ()

    def recall_stderr(self) -> float:
        n = len(self.per_scan)
        if n < 2:
            return 0.0
        recalls = []
        for c in self.per_scan:
            denom = c.tp + c.fn
            recalls.append(c.tp / denom if denom > 0 else 0.0)
        mean = sum(recalls) / n
        var = sum((r - mean) ** 2 for r in recalls) / (n - 1)
        return math.sqrt(var / n)


def run_single_scan(scene: Scene, gt: list[GroundTruthCase], ruleset: RuleSet,
                    factors: ScanFactors, calib: NoiseCalibration, seed: int,
                    match_radius: float = MATCH_RADIUS_M,
                    frame_rate: float = 10.0) -> OutcomeCounts:
    log = simulate_scan(scene, factors, calib, seed, frame_rate)
    perceived = run_perception(log, scene)
    assessment = evaluate_scene(ruleset, perceived, ALL_COMMUNITIES)
    return classify_outcomes(assessment, gt, match_radius, list(perceived.objects))


def derive_seed(base_seed: int, condition_index: int, scan_index: int) -> int:
    """Independent stream per (condition, scan), stable across runs."""
    import numpy as np
    ss = np.random.SeedSequence([int(base_seed), int(condition_index), int(scan_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def batch_evaluate(scene: Scene, gt: list[GroundTruthCase], ruleset: RuleSet,
                   conditions: list[ScanFactors], scans_per_condition: int,
                   calib: NoiseCalibration, base_seed: int,
                   match_radius: float = MATCH_RADIUS_M,
                   frame_rate: float = 10.0) -> list[ConditionResult]:
    """One averaged row per condition, fractional counts as published tables
    report them (mean of per-scan integer counts)."""
    if scans_per_condition < 1:
        raise ValueError("scans_per_condition must be >= 1")
    results = []
    total_cases = len(gt)
    for ci, factors in enumerate(conditions):
        per_scan = []
        for k in range(scans_per_condition):
            seed = derive_seed(base_seed, ci, k)
            per_scan.append(run_single_scan(scene, gt, ruleset, factors, calib, seed,
                                            match_radius, frame_rate))
        total = OutcomeCounts()
        for c in per_scan:
            total = total + c
        mean = total.scaled(1.0 / scans_per_condition)
        results.append(ConditionResult(factors, mean, aggregate(mean, total_cases),
                                       tuple(per_scan)))
    return results


# --- Ground truth and results I/O --------------------------------------------

def ground_truth_to_json(cases: list[GroundTruthCase]) -> str:
    doc = [
        {
            "kind": c.kind.value,
            "class": c.object_class.value,
            "anchor": [c.anchor.x, c.anchor.y, c.anchor.z],
            "rule_id": c.rule_id,
            "label": c.label,
        }
        for c in cases
    ]
    return json.dumps(doc, indent=2)


def ground_truth_from_json(text: str) -> list[GroundTruthCase]:
    doc = json.loads(text)
    return [
        GroundTruthCase(
            kind=CaseKind(d["kind"]),
            object_class=parse_object_class(d["class"]),
            anchor=Vec3(*d["anchor"]),
            rule_id=d.get("rule_id"),
            label=d.get("label", ""),
        )
        for d in doc
    ]


CSV_COLUMNS = ("lighting", "tidiness", "speed", "tp", "fp", "tn", "fn",
               "fp_misc", "fp_e", "fp_dp", "fn_m", "fn_dp",
               "precision", "recall", "f1", "accuracy")


def results_to_csv(results: list[ConditionResult]) -> str:
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for r in results:
        c, s = r.counts, r.stats
        row = [
            r.factors.lighting.value, r.factors.tidiness.value, r.factors.speed.value,
            f"{c.tp:.2f}", f"{c.fp:.2f}", f"{c.tn:.2f}", f"{c.fn:.2f}",
            f"{c.fp_misc:.2f}", f"{c.fp_e:.2f}", f"{c.fp_dp:.2f}",
            f"{c.fn_m:.2f}", f"{c.fn_dp:.2f}",
            f"{100 * s.precision:.2f}", f"{100 * s.recall:.2f}",
            f"{100 * s.f1:.2f}", f"{100 * s.accuracy:.2f}",
        ]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def results_to_json(results: list[ConditionResult]) -> str:
    doc = [
        {
            "factors": r.factors.as_dict(),
            "counts": {f: getattr(r.counts, f) for f in _COUNT_FIELDS}
            | {"fp": r.counts.fp, "fn": r.counts.fn},
            "stats": {
                "precision": r.stats.precision, "recall": r.stats.recall,
                "f1": r.stats.f1, "accuracy": r.stats.accuracy,
                "degenerate": r.stats.degenerate,
            },
        }
        for r in results
    ]
    return json.dumps(doc, indent=2, sort_keys=True)
