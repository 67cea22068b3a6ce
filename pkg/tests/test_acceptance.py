"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its measured runtime. Run with `pytest tests/test_acceptance.py -v -s`.
"""
import math
import random
import time
from pathlib import Path

from oracles import brute_force_ray
from roomaudit.assess import evaluate_scene
from roomaudit.cli import main as cli_main
from roomaudit.evaluate import (
    CaseKind,
    OutcomeCounts,
    aggregate,
    batch_evaluate,
    classify_outcomes,
    results_to_csv,
)
from roomaudit.fixtures import golden_ground_truth, golden_scene
from roomaudit.geometry import OrientedBox, Vec3
from roomaudit.perceive import (
    LocalizedDetection,
    ParametricObservation,
    fuse,
    run_perception,
    scanlog_to_json,
    update_tracks,
)
from roomaudit.report import render_floorplan
from roomaudit.rules import (
    ALL_COMMUNITIES,
    ObjectClass,
    parse_rule_spec,
    serialize_rule_spec,
)
from roomaudit.scene import (
    PortalCutout,
    PortalKind,
    Provenance,
    Room,
    Scene,
    SceneObject,
    WallSegment,
    ray_intersect,
)
from roomaudit.simulate import (
    Lighting,
    ScanFactors,
    Speed,
    Tidiness,
    default_calibration,
    degenerate_calibration,
    simulate_scan,
)

DATA = Path(__file__).resolve().parents[1] / "data"
REJECTION = Path(__file__).resolve().parent / "data" / "rejection"

# Shipped defaults for the factor-study criterion.
FACTOR_STUDY_SEED = 20240501
SIX_CONDITIONS = [
    ScanFactors(Lighting.WELL_LIT, Tidiness.CLEAN, Speed.MEDIUM),
    ScanFactors(Lighting.PARTIAL, Tidiness.CLEAN, Speed.MEDIUM),
    ScanFactors(Lighting.WELL_LIT, Tidiness.MESSY, Speed.MEDIUM),
    ScanFactors(Lighting.WELL_LIT, Tidiness.VERY_MESSY, Speed.MEDIUM),
    ScanFactors(Lighting.WELL_LIT, Tidiness.CLEAN, Speed.FAST),
    ScanFactors(Lighting.POOR, Tidiness.CLEAN, Speed.MEDIUM),
]


def _report(n, label, t0, budget):
    elapsed = time.perf_counter() - t0
    assert elapsed < budget, f"criterion {n} exceeded its {budget}s budget ({elapsed:.1f}s)"
    print(f"criterion {n}: PASS ({elapsed:.2f}s) - {label}")


def test_criterion_1_metric_arithmetic():
    """All 24 published aggregate statistics within 0.05 percentage points."""
    t0 = time.perf_counter()
    rows = [
        ((18.0, 2.6, 9.8, 1.4), (87.4, 92.8, 90.0, 89.7)),
        ((16.2, 3.6, 10.0, 2.8), (81.8, 85.3, 83.5, 84.5)),
        ((5.2, 1.4, 9.8, 14.6), (78.8, 26.3, 39.4, 48.4)),
        ((15.6, 2.6, 10.0, 4.8), (85.7, 76.5, 80.8, 82.6)),
        ((12.4, 4.4, 10.0, 7.4), (73.8, 62.6, 67.8, 72.3)),
        ((8.6, 0.8, 10.0, 12.0), (91.5, 41.7, 57.3, 60.0)),
    ]
    checked = 0
    for (tp, fp, tn, fn), expected in rows:
        stats = aggregate(OutcomeCounts(tp=tp, tn=tn, fp_e=fp, fn_m=fn), 31)
        got = (stats.precision, stats.recall, stats.f1, stats.accuracy)
        for g, want in zip(got, expected):
            assert abs(100 * g - want) <= 0.05, f"{100 * g:.3f} vs {want}"
            checked += 1
    assert checked == 24
    _report(1, "24/24 aggregate statistics within +/-0.05 pp", t0, 1.0)


def test_criterion_2_golden_rule_pack():
    """Direct evaluation of the golden apartment: exactly the 21 planted
    issues, none of the 10 non-issues, precision = recall = 1.0."""
    t0 = time.perf_counter()
    scene = golden_scene()
    gt = golden_ground_truth()
    from roomaudit.rules import builtin_rule_pack

    assessment = evaluate_scene(builtin_rule_pack(), scene, ALL_COMMUNITIES)
    assert len(assessment.findings) == 21

    issues = [c for c in gt if c.kind is CaseKind.ISSUE]
    assert len(issues) == 21 and len(gt) - len(issues) == 10
    remaining = list(assessment.findings)
    for case in issues:
        match = next((f for f in remaining if f.rule_id == case.rule_id
                      and (f.anchor - case.anchor).norm() < 1e-9), None)
        assert match is not None, f"no finding for planted issue {case.label!r}"
        remaining.remove(match)
    assert remaining == [], f"unexpected findings: {[f.rule_id for f in remaining]}"

    counts = classify_outcomes(assessment, gt, perceived=list(scene.objects))
    stats = aggregate(counts, len(gt))
    assert counts.tp == 21 and counts.tn == 10
    assert stats.precision == 1.0 and stats.recall == 1.0
    _report(2, "21 issues found, 10 non-issues clean, P = R = 1.0", t0, 1.0)


def test_criterion_3_perfect_perception_identity():
    """Degenerate-noise simulate -> perceive -> assess reproduces the direct
    findings: same rule ids, anchors within 1e-6 m."""
    t0 = time.perf_counter()
    scene = golden_scene()
    from roomaudit.rules import builtin_rule_pack

    pack = builtin_rule_pack()
    ref = evaluate_scene(pack, scene, ALL_COMMUNITIES)
    log = simulate_scan(scene, ScanFactors(), degenerate_calibration(), seed=7)
    perceived = run_perception(log, scene)
    got = evaluate_scene(pack, perceived, ALL_COMMUNITIES)

    assert len(got.findings) == len(ref.findings) == 21
    remaining = list(got.findings)
    worst = 0.0
    for f in ref.findings:
        match = min(((g, (g.anchor - f.anchor).norm()) for g in remaining
                     if g.rule_id == f.rule_id),
                    key=lambda pair: pair[1], default=None)
        assert match is not None and match[1] < 1e-6, f"{f.rule_id} anchor off"
        worst = max(worst, match[1])
        remaining.remove(match[0])
    assert remaining == []
    _report(3, f"pipeline identical to direct evaluation (worst anchor {worst:.1e} m)",
            t0, 10.0)


def test_criterion_4_factor_study_ordering():
    """20 scans per condition with the shipped calibration: accuracy ordering
    matches the published row order, and worsening one factor axis never
    increases mean recall by more than one standard error."""
    t0 = time.perf_counter()
    scene = golden_scene()
    gt = golden_ground_truth()
    from roomaudit.rules import builtin_rule_pack

    results = batch_evaluate(scene, gt, builtin_rule_pack(), SIX_CONDITIONS,
                             scans_per_condition=20, calib=default_calibration(),
                             base_seed=FACTOR_STUDY_SEED)
    accs = [r.stats.accuracy for r in results]
    assert all(a > b for a, b in zip(accs, accs[1:])), \
        f"accuracy ordering broken: {[round(100 * a, 1) for a in accs]}"

    chains = {
        "lighting": (0, 1, 5),
        "tidiness": (0, 2, 3),
        "speed": (0, 4),
    }
    for axis, chain in chains.items():
        for a, b in zip(chain, chain[1:]):
            better, worse = results[a], results[b]
            allowance = math.hypot(better.recall_stderr(), worse.recall_stderr())
            assert worse.stats.recall <= better.stats.recall + allowance, \
                f"{axis}: recall rose when worsening {better.factors} -> {worse.factors}"
    _report(4, "accuracy strictly ordered "
               f"({' > '.join(f'{100 * a:.1f}' for a in accs)}), recall monotone per axis",
            t0, 120.0)


def _random_ray_scene(rng: random.Random) -> Scene:
    rooms = ()
    if rng.random() < 0.7:
        portals = []
        if rng.random() < 0.6:
            portals.append(PortalCutout(PortalKind.DOOR, rng.uniform(0.5, 4.0),
                                        rng.uniform(0.6, 1.5), 0.0, rng.uniform(1.8, 2.3)))
        if rng.random() < 0.4:
            portals.append(PortalCutout(PortalKind.WINDOW, rng.uniform(5.0, 6.5),
                                        rng.uniform(0.5, 1.4), rng.uniform(0.5, 1.0),
                                        rng.uniform(1.8, 2.4)))
        rooms = (Room("r", ((0, 0), (8, 0), (8, 8), (0, 8)), (
            WallSegment(Vec3(0, 0, 0), Vec3(8, 0, 0), 2.5),
            WallSegment(Vec3(8, 0, 0), Vec3(8, 8, 0), 2.5, portals=tuple(portals)),
        )),)
    objects = tuple(
        SceneObject(
            f"b{i}", ObjectClass.STORAGE,
            OrientedBox(
                Vec3(rng.uniform(0.5, 7.5), rng.uniform(0.5, 7.5), rng.uniform(0.2, 2.2)),
                Vec3(rng.uniform(0.1, 1.2), rng.uniform(0.1, 1.2), rng.uniform(0.1, 1.2)),
                rng.uniform(-math.pi, math.pi)),
            1.0, Provenance.GROUND_TRUTH)
        for i in range(rng.randint(0, 6))
    )
    return Scene(rooms, objects)


def test_criterion_5_raycast_oracle_equivalence():
    """>= 10,000 random rays agree with the brute-force all-surfaces oracle
    on hit/miss and nearest t within 1e-6 m."""
    t0 = time.perf_counter()
    rng = random.Random(2024)
    total = hits = 0
    while total < 10_000:
        scene = _random_ray_scene(rng)
        for _ in range(100):
            origin = Vec3(rng.uniform(-2, 10), rng.uniform(-2, 10), rng.uniform(0.05, 3.5))
            d = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
            if d.norm() < 1e-9:
                continue
            d = d.normalized()
            total += 1
            fast = ray_intersect(scene, origin, d)
            slow = brute_force_ray(scene, origin, d)
            if fast is None:
                # Tolerate oracle grazes within the epsilon band.
                assert slow is None or slow[0] < 3e-6, f"engine missed a hit at t={slow}"
            else:
                assert slow is not None, "engine hit where the oracle misses"
                assert abs(fast.t - slow[0]) <= 1e-6, f"{fast.t} vs {slow[0]}"
                hits += 1
    assert total >= 10_000 and hits > 2_000
    _report(5, f"{total} rays checked against the oracle ({hits} hits)", t0, 10.0)


def test_criterion_6_parser_properties(capsys):
    """Round-trip identity on 1,000 randomized rule sets, the two example
    documents parse to their specified rules, and every rejection-corpus file
    exits 2 with a diagnostic."""
    t0 = time.perf_counter()
    from roomaudit.rules import (
        Community,
        ComparisonOp,
        DimensionConstraint,
        Existence,
        IssueCategory,
        IssueRule,
        Measurement,
        RuleSet,
    )

    rng = random.Random(77)
    classes = sorted(ObjectClass, key=lambda c: c.value)
    communities = sorted(Community, key=lambda c: c.value)
    ops = sorted(ComparisonOp, key=lambda o: o.value)

    def random_rule(i: int) -> IssueRule:
        cls = rng.choice(classes)
        existential = rng.random() < 0.4
        name = cls.display_name + f"-{i}"
        if existential:
            existence = rng.choice([Existence.MUST_EXIST, Existence.MUST_NOT_EXIST])
            measurement = (Measurement.ABSENCE if existence is Existence.MUST_EXIST
                           else Measurement.PRESENCE)
            dimension = None
            category = IssueCategory.EXISTENCE
        else:
            existence = Existence.UNSET
            measurement = rng.choice([Measurement.HEIGHT, Measurement.RADIUS,
                                      Measurement.DEPTH])
            op = rng.choice(ops)
            if op is ComparisonOp.BETWEEN:
                lo = rng.uniform(1, 40)
                values = (lo, lo + rng.uniform(0, 40))
            else:
                values = (rng.uniform(1, 80),)
            dimension = DimensionConstraint(op, values)
            category = rng.choice([IssueCategory.DIMENSION, IssueCategory.POSITION])
        return IssueRule(
            rule_id=f"{name}-{measurement.value}",
            object_class=cls,
            measurement=measurement,
            communities=frozenset(rng.sample(communities, rng.randint(1, 4))),
            dependencies=frozenset(rng.sample(classes, rng.randint(0, 3))),
            dimension=dimension,
            existence=existence,
            description=f"generated rule {i}",
            category=category,
        )

    for trial in range(1000):
        rs = RuleSet(tuple(random_rule(i) for i in range(rng.randint(0, 5))))
        again = parse_rule_spec(serialize_rule_spec(rs))
        key = lambda r: r.rule_id
        assert sorted(again.rules, key=key) == sorted(rs.rules, key=key)

    example = parse_rule_spec((DATA / "example_rules.json").read_text(encoding="utf-8"))
    by_id = {r.rule_id: r for r in example.rules}
    door = by_id["Door-Opening-Radius"]
    assert door.object_class is ObjectClass.DOOR
    assert door.dimension == DimensionConstraint(ComparisonOp.GT, (32,))
    assert door.communities == {Community.WHEELCHAIR_USER}
    knives = by_id["Knives-Presence"]
    assert knives.existence is Existence.MUST_NOT_EXIST
    assert knives.dimension is None
    assert len(knives.dependencies) == 6

    corpus = sorted(REJECTION.iterdir())
    assert len(corpus) >= 10
    for path in corpus:
        code = cli_main(["validate", str(path)])
        err = capsys.readouterr().err
        assert code == 2, f"{path.name} should exit 2"
        assert err.strip(), f"{path.name} produced no diagnostic"
    _report(6, f"1000 round-trips, example docs parse, "
               f"{len(corpus)} malformed files rejected", t0, 5.0)


def test_criterion_7_window_and_fusion_properties():
    """Window means inside the componentwise hull, fuse idempotence, and
    dedupe never increasing the object count; 1,000+ random instances each."""
    t0 = time.perf_counter()
    rng = random.Random(3)

    def det(cls):
        from roomaudit.perceive import FrameDetection

        return FrameDetection(cls, (292.0, 212.0, 348.0, 268.0), 0.9)

    for _ in range(1000):
        points = [Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3))
                  for _ in range(5)]
        tracks, emitted = [], []
        for i, p in enumerate(points):
            tracks, out = update_tracks(tracks, [det(ObjectClass.RUG)], [p], i)
            emitted.extend(out)
        assert len(emitted) == 1
        mean = emitted[0].point
        for axis in "xyz":
            vals = [getattr(p, axis) for p in points]
            assert min(vals) - 1e-9 <= getattr(mean, axis) <= max(vals) + 1e-9

    fuse_classes = [ObjectClass.KNIVES, ObjectClass.RUG, ObjectClass.TABLE]
    for _ in range(1000):
        parametric = [
            ParametricObservation(
                rng.choice(fuse_classes),
                OrientedBox(Vec3(rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0.1, 1)),
                            Vec3(0.2, 0.2, 0.2)),
                rng.uniform(0.3, 1.0), 0.0)
            for _ in range(rng.randint(0, 6))
        ]
        localized = [
            LocalizedDetection(rng.choice(fuse_classes),
                               Vec3(rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0.1, 1)),
                               rng.uniform(0.3, 1.0), 0, 5)
            for _ in range(rng.randint(0, 6))
        ]
        once = fuse(parametric, localized)
        assert len(once) <= len(parametric) + len(localized)
        refed = [ParametricObservation(o.object_class, o.box, o.confidence, 0.0)
                 for o in once]
        twice = fuse(refed, [])
        assert [(o.object_class, o.box, o.confidence) for o in twice] == \
            [(o.object_class, o.box, o.confidence) for o in once]
    _report(7, "window hull, fuse idempotence, dedupe monotonicity x1000", t0, 5.0)


def test_criterion_8_byte_determinism(tmp_path):
    """ScanLog, CSV and SVG outputs are byte-identical across two runs with
    the same seed and inputs."""
    t0 = time.perf_counter()
    scene = golden_scene()
    gt = golden_ground_truth()
    from roomaudit.rules import builtin_rule_pack

    pack = builtin_rule_pack()
    calib = default_calibration()
    factors = ScanFactors(Lighting.PARTIAL, Tidiness.MESSY, Speed.MEDIUM)

    logs = [scanlog_to_json(simulate_scan(scene, factors, calib, seed=99))
            for _ in range(2)]
    assert logs[0].encode() == logs[1].encode()

    csvs = [results_to_csv(batch_evaluate(scene, gt, pack, [ScanFactors()], 1,
                                          degenerate_calibration(), base_seed=12))
            for _ in range(2)]
    assert csvs[0].encode() == csvs[1].encode()

    assessment = evaluate_scene(pack, scene, ALL_COMMUNITIES)
    svgs = [render_floorplan(scene, assessment) for _ in range(2)]
    assert svgs[0].encode() == svgs[1].encode()
    assert svgs[0] == (DATA / "golden_report.svg").read_text(encoding="utf-8")
    _report(8, "scan log, CSV and SVG byte-identical across runs", t0, 60.0)
