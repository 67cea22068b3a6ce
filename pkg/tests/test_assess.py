import random

import pytest

from roomaudit.assess import (
    MeasurementError,
    assessment_to_json,
    check_constraint,
    evaluate_rule,
    evaluate_scene,
    measure,
)
from roomaudit.geometry import OrientedBox, Vec3
from roomaudit.rules import (
    ALL_COMMUNITIES,
    Community,
    ComparisonOp,
    DimensionConstraint,
    Existence,
    INCHES_PER_METER,
    IssueCategory,
    IssueRule,
    Measurement,
    ObjectClass,
    builtin_rule_pack,
)
from roomaudit.scene import Provenance, Room, Scene, SceneObject


def _obj(oid, cls, center, half, yaw=0.0, provenance=Provenance.GROUND_TRUTH):
    return SceneObject(oid, cls, OrientedBox(Vec3(*center), Vec3(*half), yaw), 1.0, provenance)


ROOM = Room("r", ((0, 0), (6, 0), (6, 6), (0, 6)), ())


class TestMeasure:
    def test_table_height_uses_top(self):
        table = _obj("t", ObjectClass.TABLE, (1, 1, 0.343), (0.6, 0.4, 0.343))
        assert measure(table, Measurement.HEIGHT) == pytest.approx(27.0, abs=0.01)

    def test_door_radius_is_clear_width(self):
        door = _obj("d", ObjectClass.DOOR, (1, 1, 1.0), (0.813 / 2, 0.05, 1.0))
        assert measure(door, Measurement.RADIUS) == pytest.approx(32.01, abs=0.01)

    def test_switch_height_uses_center(self):
        switch = _obj("s", ObjectClass.LIGHT_SWITCH, (1, 0, 1.40), (0.04, 0.015, 0.04))
        assert measure(switch, Measurement.HEIGHT) == pytest.approx(55.1, abs=0.05)

    def test_cabinet_height_uses_bottom(self):
        cab = _obj("c", ObjectClass.CABINET, (1, 1, 1.0), (0.4, 0.15, 0.3))
        assert measure(cab, Measurement.HEIGHT) == pytest.approx(0.7 * INCHES_PER_METER)

    def test_depth_uses_local_y(self):
        chair = _obj("c", ObjectClass.CHAIR, (1, 1, 0.45), (0.25, 0.22, 0.45), yaw=1.2)
        assert measure(chair, Measurement.DEPTH) == pytest.approx(0.44 * INCHES_PER_METER)

    def test_radius_of_rug_rejected(self):
        rug = _obj("r", ObjectClass.RUG, (1, 1, 0.01), (0.6, 0.4, 0.01))
        with pytest.raises(MeasurementError):
            measure(rug, Measurement.RADIUS)


class TestCheckConstraint:
    B = DimensionConstraint(ComparisonOp.BETWEEN, (28, 34))

    def test_between_inside(self):
        assert check_constraint(33, self.B)

    def test_between_boundary_inclusive(self):
        assert check_constraint(28, self.B)
        assert check_constraint(34, self.B)

    def test_between_outside(self):
        assert not check_constraint(27, self.B)
        assert not check_constraint(35, self.B)

    def test_simple_operators(self):
        assert check_constraint(31, DimensionConstraint(ComparisonOp.LT, (32,)))
        assert not check_constraint(32, DimensionConstraint(ComparisonOp.LT, (32,)))
        assert check_constraint(32, DimensionConstraint(ComparisonOp.LE, (32,)))
        assert check_constraint(32, DimensionConstraint(ComparisonOp.GE, (32,)))
        assert not check_constraint(32, DimensionConstraint(ComparisonOp.GT, (32,)))

    def test_eq_uses_quarter_inch_tolerance(self):
        eq = DimensionConstraint(ComparisonOp.EQ, (30,))
        assert check_constraint(30.2, eq)
        assert not check_constraint(30.3, eq)


class TestEvaluateRule:
    def knives_rule(self):
        return builtin_rule_pack().by_id("Knives-Presence")

    def test_knife_on_counter_fires(self):
        counter = _obj("c", ObjectClass.COUNTER, (2, 2, 0.43), (1.0, 0.3, 0.43))
        knife = _obj("k", ObjectClass.KNIVES, (2.2, 2.0, 0.88), (0.15, 0.05, 0.02))
        scene = Scene((ROOM,), (counter, knife))
        findings = evaluate_rule(self.knives_rule(), scene)
        assert len(findings) == 1
        f = findings[0]
        assert f.category is IssueCategory.EXISTENCE
        assert f.subject_id == "k"
        assert f.measured is None
        assert f.anchor == knife.box.center

    def test_knife_in_closed_drawer_does_not_fire(self):
        drawer = _obj("d", ObjectClass.STORAGE, (2, 2, 0.4), (0.4, 0.3, 0.4))
        knife = _obj("k", ObjectClass.KNIVES, (2, 2, 0.4), (0.15, 0.05, 0.02))
        scene = Scene((ROOM,), (drawer, knife))
        assert evaluate_rule(self.knives_rule(), scene) == []

    def test_missing_alarm_anchors_at_room_centroid(self):
        rule = builtin_rule_pack().by_id("Smoke Alarm-Absence")
        scene = Scene((ROOM,), ())
        findings = evaluate_rule(rule, scene)
        assert len(findings) == 1
        f = findings[0]
        assert f.subject_id is None
        assert f.room == "r"
        assert f.anchor == Vec3(3.0, 3.0, 1.5)

    def test_alarm_present_suppresses_finding(self):
        rule = builtin_rule_pack().by_id("Smoke Alarm-Absence")
        alarm = _obj("a", ObjectClass.SMOKE_ALARM, (3, 6, 2.2), (0.07, 0.015, 0.07))
        scene = Scene((ROOM,), (alarm,))
        assert evaluate_rule(rule, scene) == []

    def test_dimension_rule_skips_raycast_provenance(self):
        rule = IssueRule("Table-Height", ObjectClass.TABLE, Measurement.HEIGHT,
                         ALL_COMMUNITIES,
                         dimension=DimensionConstraint(ComparisonOp.BETWEEN, (28, 34)),
                         category=IssueCategory.DIMENSION)
        bad = _obj("t", ObjectClass.TABLE, (1, 1, 0.2), (0.6, 0.4, 0.2),
                   provenance=Provenance.FRAME_RAYCAST)
        scene = Scene((ROOM,), (bad,))
        assert evaluate_rule(rule, scene) == []
        solid = _obj("t2", ObjectClass.TABLE, (2, 2, 0.2), (0.6, 0.4, 0.2),
                     provenance=Provenance.PARAMETRIC)
        assert len(evaluate_rule(rule, Scene((ROOM,), (solid,)))) == 1


class TestEvaluateScene:
    def test_golden_yields_exactly_21(self, golden, pack):
        a = evaluate_scene(pack, golden, ALL_COMMUNITIES)
        assert len(a.findings) == 21

    def test_empty_scene_no_rooms_no_findings(self, pack):
        a = evaluate_scene(pack, Scene((), ()), ALL_COMMUNITIES)
        assert a.findings == ()

    def test_rooms_without_alarms_fire_per_room(self, pack):
        rooms = (Room("a", ((0, 0), (2, 0), (2, 2), (0, 2)), ()),
                 Room("b", ((3, 0), (5, 0), (5, 2), (3, 2)), ()))
        a = evaluate_scene(pack, Scene(rooms, ()), ALL_COMMUNITIES)
        assert [f.rule_id for f in a.findings] == ["Smoke Alarm-Absence", "Smoke Alarm-Absence"]
        assert [f.room for f in a.findings] == ["a", "b"]

    def test_wheelchair_community_drops_child_rules(self, golden, pack):
        a = evaluate_scene(pack, golden, {Community.WHEELCHAIR_USER})
        ids = {f.rule_id for f in a.findings}
        assert not ids & {"Knives-Presence", "Scissors-Presence", "Medication-Presence"}

    def test_determinism(self, golden, pack):
        a1 = evaluate_scene(pack, golden, ALL_COMMUNITIES)
        a2 = evaluate_scene(pack, golden, ALL_COMMUNITIES)
        assert a1 == a2
        assert assessment_to_json(a1) == assessment_to_json(a2)

    def test_disabled_rules_never_fire(self, golden, pack):
        a = evaluate_scene(pack, golden, ALL_COMMUNITIES)
        assert not any(f.rule_id in ("Sofa-Height", "Chair-Depth") for f in a.findings)

    def test_constraint_soundness(self, golden, pack):
        a = evaluate_scene(pack, golden, ALL_COMMUNITIES)
        for f in a.findings:
            if f.category is not IssueCategory.EXISTENCE:
                assert f.measured is not None
                assert not check_constraint(f.measured, f.constraint)

    def test_monotone_existential_findings(self, pack):
        counter = _obj("c", ObjectClass.COUNTER, (2, 2, 0.43), (1.0, 0.3, 0.43))
        knife1 = _obj("k1", ObjectClass.KNIVES, (1.5, 2.0, 0.88), (0.15, 0.05, 0.02))
        knife2 = _obj("k2", ObjectClass.KNIVES, (2.6, 2.0, 0.88), (0.15, 0.05, 0.02))
        base = evaluate_scene(pack, Scene((ROOM,), (counter, knife1)), ALL_COMMUNITIES)
        more = evaluate_scene(pack, Scene((ROOM,), (counter, knife1, knife2)), ALL_COMMUNITIES)
        count = lambda a: sum(1 for f in a.findings if f.rule_id == "Knives-Presence")
        assert count(more) == count(base) + 1

    def test_brute_force_equivalence_small_scenes(self, pack):
        """Exhaustive (rule, object) oracle on random small scenes."""
        rng = random.Random(31)
        classes = [ObjectClass.TABLE, ObjectClass.COUNTER, ObjectClass.LIGHT_SWITCH,
                   ObjectClass.KNIVES, ObjectClass.SMOKE_ALARM, ObjectClass.RUG,
                   ObjectClass.SOFA, ObjectClass.CABINET]
        from roomaudit.scene import is_supported_by

        for _ in range(40):
            objects = []
            for i in range(rng.randint(0, 10)):
                cls = rng.choice(classes)
                objects.append(_obj(
                    f"o{i}", cls,
                    (rng.uniform(0.5, 5.5), rng.uniform(0.5, 5.5), rng.uniform(0.05, 2.0)),
                    (rng.uniform(0.05, 0.8), rng.uniform(0.05, 0.6), rng.uniform(0.02, 0.5)),
                ))
            scene = Scene((ROOM,), tuple(objects))
            got = {(f.rule_id, f.subject_id, f.room)
                   for f in evaluate_scene(pack, scene, ALL_COMMUNITIES).findings}

            expected = set()
            for rule in pack:
                if not rule.enabled:
                    continue
                if rule.existence is Existence.MUST_EXIST:
                    present = scene.objects_of_class(rule.object_class)
                    for room in scene.rooms:
                        if not any(room.contains_xy(o.box.center.x, o.box.center.y)
                                   for o in present):
                            expected.add((rule.rule_id, None, room.name))
                elif rule.existence is Existence.MUST_NOT_EXIST:
                    for obj in scene.objects_of_class(rule.object_class):
                        supported = False
                        for dep in rule.dependencies:
                            if dep is ObjectClass.FLOOR:
                                supported |= is_supported_by(obj, None, scene)
                            else:
                                supported |= any(
                                    is_supported_by(obj, s, scene)
                                    for s in scene.objects_of_class(dep))
                        if supported or not rule.dependencies:
                            expected.add((rule.rule_id, obj.id, None))
                else:
                    for obj in scene.objects_of_class(rule.object_class):
                        if not check_constraint(measure(obj, rule.measurement), rule.dimension):
                            expected.add((rule.rule_id, obj.id, None))
            assert got == expected
