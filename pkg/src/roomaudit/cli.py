"""Command-line interface tying the pipeline together.

Exit codes are stable: 0 success, 1 findings present (assess, usable as a CI
gate for scene files), 2 input error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv as _csv
import io
import json
import sys
from pathlib import Path

from . import assess as assess_mod
from . import evaluate as evaluate_mod
from . import perceive as perceive_mod
from . import report as report_mod
from . import rules as rules_mod
from . import simulate as simulate_mod
from .rules import ALL_COMMUNITIES, Community, RuleSpecError, Severity, parse_community
from .scene import SceneError, load_scene, save_scene
from .simulate import Lighting, ScanFactors, Speed, Tidiness

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(_read(path))
    if not isinstance(doc, dict):
        raise InputError("config file must hold a JSON object")
    return doc


def _parse_factors(text: str) -> ScanFactors:
    parts = [p.strip().lower().replace("-", "_").replace(" ", "_") for p in text.split(",")]
    if len(parts) != 3:
        raise InputError("--factors expects lighting,tidiness,speed (e.g. well_lit,clean,medium)")
    try:
        return ScanFactors(Lighting(parts[0]), Tidiness(parts[1]), Speed(parts[2]))
    except ValueError as e:
        raise InputError(f"bad factors {text!r}: {e}") from None


def _load_calibration(path: str | None) -> simulate_mod.NoiseCalibration:
    if not path:
        return simulate_mod.default_calibration()
    if path == "degenerate":
        return simulate_mod.degenerate_calibration()
    return simulate_mod.calibration_from_json(_read(path))


def _load_ruleset(args) -> rules_mod.RuleSet:
    if getattr(args, "spec", None):
        rs = rules_mod.parse_rule_spec(_read(args.spec))
        if getattr(args, "merge_builtin", False):
            user_ids = {r.rule_id for r in rs.rules}
            kept = tuple(r for r in rules_mod.builtin_rule_pack().rules
                         if r.rule_id not in user_ids)
            rs = rules_mod.RuleSet(kept + tuple(rs.rules),
                                   source=rules_mod.RuleSource.USER_FILE)
        return rs
    return rules_mod.builtin_rule_pack()


def _parse_communities(values: list[str] | None) -> frozenset[Community]:
    if not values:
        return ALL_COMMUNITIES
    return frozenset(parse_community(v) for v in values)


def cmd_validate(args) -> int:
    try:
        rs = rules_mod.parse_rule_spec(_read(args.spec))
    except RuleSpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    diagnostics = rules_mod.validate_rule_set(rs)
    for d in diagnostics:
        print(str(d), file=sys.stderr)
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return EXIT_INPUT
    print(f"ok: {len(rs)} rule(s)", file=sys.stderr)
    return EXIT_OK


def cmd_dump_rules(args) -> int:
    _write(args.out, rules_mod.serialize_rule_spec(rules_mod.builtin_rule_pack()))
    return EXIT_OK


def cmd_assess(args) -> int:
    scene = load_scene(_read(args.scene))
    ruleset = _load_ruleset(args)
    communities = _parse_communities(args.community)
    assessment = assess_mod.evaluate_scene(ruleset, scene, communities)
    if args.format == "json":
        _write(args.out, assess_mod.assessment_to_json(assessment))
    elif args.format == "csv":
        _write(args.out, _findings_csv(assessment))
    else:
        _write(args.out, report_mod.render_floorplan(scene, assessment))
    print(f"{len(assessment.findings)} finding(s)", file=sys.stderr)
    return EXIT_FINDINGS if assessment.findings else EXIT_OK


def _findings_csv(assessment: assess_mod.Assessment) -> str:
    out = io.StringIO()
    writer = _csv.writer(out, lineterminator="\n")
    writer.writerow(["rule_id", "category", "subject_id", "subject_class", "room",
                     "measured_in", "op", "values", "anchor_x", "anchor_y", "anchor_z",
                     "communities", "description"])
    for f in assessment.findings:
        writer.writerow([
            f.rule_id, f.category.value, f.subject_id or "",
            f.subject_class.value if f.subject_class else "", f.room or "",
            f"{f.measured:.2f}" if f.measured is not None else "",
            f.constraint.op.value if f.constraint else "",
            ";".join(str(v) for v in f.constraint.values) if f.constraint else "",
            f"{f.anchor.x:.4f}", f"{f.anchor.y:.4f}", f"{f.anchor.z:.4f}",
            ";".join(sorted(c.value for c in f.communities)),
            f.description,
        ])
    return out.getvalue()


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    scene = load_scene(_read(args.scene))
    factors = ScanFactors()
    seed = args.seed
    frame_rate = args.frame_rate or config.get("frame_rate", 10.0)
    calib = _load_calibration(args.calib or config.get("calibration"))
    if args.scan_config:
        sc = json.loads(_read(args.scan_config))
        if "factors" in sc:
            factors = ScanFactors.from_dict(sc["factors"])
        if seed is None:
            seed = sc.get("seed")
        if not args.frame_rate and "frame_rate" in sc:
            frame_rate = sc["frame_rate"]
        if "calibration" in sc and not args.calib:
            calib = simulate_mod.calibration_from_json(json.dumps(sc["calibration"]), base=calib)
    if args.factors:
        factors = _parse_factors(args.factors)
    if seed is None:
        seed = 0
    log = simulate_mod.simulate_scan(scene, factors, calib, int(seed), float(frame_rate))
    _write(args.out, perceive_mod.scanlog_to_json(log))
    n_det = sum(len(f.detections) for f in log.frames)
    print(f"{len(log.frames)} frames, {n_det} detections, "
          f"{len(log.parametric)} parametric observations", file=sys.stderr)
    return EXIT_OK


def cmd_perceive(args) -> int:
    config = _load_config(args.config)
    log = perceive_mod.scanlog_from_json(_read(args.scanlog))
    scene = load_scene(_read(args.scene))
    dedupe = args.dedupe_radius or config.get("dedupe_radius", perceive_mod.DEDUPE_RADIUS_M)
    perceived = perceive_mod.run_perception(log, scene, float(dedupe))
    _write(args.out, save_scene(perceived))
    print(f"{len(perceived.objects)} perceived object(s)", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    scene = load_scene(_read(args.scene))
    gt = evaluate_mod.ground_truth_from_json(_read(args.ground_truth))
    ruleset = _load_ruleset(args)
    calib = _load_calibration(args.calib or config.get("calibration"))
    if args.conditions:
        doc = json.loads(_read(args.conditions))
        conditions = [ScanFactors.from_dict(d) for d in doc]
    else:
        conditions = [ScanFactors()]
    match_radius = args.match_radius or config.get("match_radius", evaluate_mod.MATCH_RADIUS_M)
    frame_rate = args.frame_rate or config.get("frame_rate", 10.0)
    results = evaluate_mod.batch_evaluate(
        scene, gt, ruleset, conditions, args.scans, calib, args.seed,
        float(match_radius), float(frame_rate))
    _write(args.out, evaluate_mod.results_to_csv(results))
    if args.json_out:
        _write(args.json_out, evaluate_mod.results_to_json(results))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roomaudit",
        description="Audit 3D indoor scenes for accessibility and safety issues; "
                    "simulate scans and score detection quality.")
    parser.add_argument("--config", help="JSON config with defaults: calibration path, "
                                         "match_radius, dedupe_radius, frame_rate")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a rule spec file")
    p.add_argument("spec", help="rule spec JSON path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dump-rules", help="write the builtin rule pack as JSON")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_dump_rules)

    p = sub.add_parser("assess", help="evaluate rules against a scene file")
    p.add_argument("scene", help="scene JSON path")
    p.add_argument("--spec", help="rule spec path (replaces the builtin pack)")
    p.add_argument("--merge-builtin", action="store_true",
                   help="extend the builtin pack with --spec instead of replacing it")
    p.add_argument("--community", action="append",
                   help="restrict to a community (repeatable); default: all four")
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("simulate", help="generate a scan log from a scene")
    p.add_argument("scene")
    p.add_argument("--factors", help="lighting,tidiness,speed (e.g. well_lit,clean,medium)")
    p.add_argument("--seed", type=int)
    p.add_argument("--calib", help="calibration JSON path, or 'degenerate' for zero noise")
    p.add_argument("--scan-config", help="JSON with factors/seed/frame_rate/calibration overrides")
    p.add_argument("--frame-rate", type=float)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("perceive", help="turn a scan log into a perceived scene")
    p.add_argument("scanlog")
    p.add_argument("scene", help="captured structure used for raycasting")
    p.add_argument("--dedupe-radius", type=float)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_perceive)

    p = sub.add_parser("evaluate", help="batch factor study: simulate, perceive, assess, score")
    p.add_argument("scene")
    p.add_argument("ground_truth", help="ground-truth annotation JSON")
    p.add_argument("--spec", help="rule spec path (replaces the builtin pack)")
    p.add_argument("--merge-builtin", action="store_true")
    p.add_argument("--conditions", help="JSON list of factor combinations")
    p.add_argument("--scans", type=int, default=5, help="scans per condition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--calib", help="calibration JSON path, or 'degenerate'")
    p.add_argument("--match-radius", type=float)
    p.add_argument("--frame-rate", type=float)
    p.add_argument("--out", default="-", help="results CSV path")
    p.add_argument("--json-out", help="also write results as JSON")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (InputError, RuleSpecError, SceneError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_INPUT
    except Exception as e:  # pragma: no cover - defensive
        print(f"internal error: {e}", file=sys.stderr)
        code = EXIT_INTERNAL
    return code


if __name__ == "__main__":
    sys.exit(main())
