"""Rule evaluation: measure objects, apply dimension/position/existence
rules against a scene, and produce anchored findings."""
from __future__ import annotations

import json
from dataclasses import dataclass

from .geometry import Vec3
from .rules import (
    INCHES_PER_METER,
    Community,
    ComparisonOp,
    DimensionConstraint,
    Existence,
    IssueCategory,
    IssueRule,
    Measurement,
    ObjectClass,
    RuleSet,
    filter_by_community,
)
from .scene import Provenance, Scene, SceneObject, is_supported_by

SUPPORT_EPS = 0.05          # rest tolerance for "on a reachable surface"
EQ_TOLERANCE_IN = 0.25      # equality comparisons on measured geometry
ABSENCE_ANCHOR_Z = 1.5      # missing-object findings anchor at room centroid

# Height anchor per class: surface-bearing furniture measures at the top,
# wall cabinets at the mount (bottom), small fixtures at their center.
_TOP_ANCHORED = {ObjectClass.TABLE, ObjectClass.COUNTER, ObjectClass.TOILET,
                 ObjectClass.SOFA, ObjectClass.SINK, ObjectClass.CHAIR, ObjectClass.BED}
_BOTTOM_ANCHORED = {ObjectClass.CABINET}
_CENTER_ANCHORED = {ObjectClass.KNOB, ObjectClass.DOOR_HANDLE, ObjectClass.LIGHT_SWITCH,
                    ObjectClass.ELECTRIC_SOCKET, ObjectClass.GRAB_BAR}
_RADIUS_CLASSES = {ObjectClass.DOOR, ObjectClass.WINDOW, ObjectClass.OPENING}


class MeasurementError(ValueError):
    """Raised when a measurement does not apply to an object class."""


def measure(obj: SceneObject, measurement: Measurement) -> float:
    """Measured value in inches for one object."""
    box = obj.box
    if measurement is Measurement.HEIGHT:
        if obj.object_class in _BOTTOM_ANCHORED:
            meters = box.bottom
        elif obj.object_class in _CENTER_ANCHORED:
            meters = box.center.z
        elif obj.object_class in _TOP_ANCHORED:
            meters = box.top
        else:
            # Unlisted classes default by channel: furniture from the room
            # model measures at the top, raycast-localized fixtures at center.
            from .rules import Channel
            meters = box.center.z if obj.object_class.channel is Channel.FRAME_DETECTION else box.top
    elif measurement is Measurement.RADIUS:
        if obj.object_class not in _RADIUS_CLASSES:
            raise MeasurementError(f"Radius does not apply to {obj.object_class.value}")
        meters = 2.0 * box.half_extents.x  # portal clear width rides local x
    elif measurement is Measurement.DEPTH:
        meters = 2.0 * box.half_extents.y
    else:
        raise MeasurementError(f"{measurement.value} is not a measurable quantity")
    return meters * INCHES_PER_METER


def check_constraint(value: float, c: DimensionConstraint) -> bool:
    """True when the measured value (inches) satisfies the constraint."""
    if c.op is ComparisonOp.LT:
        return value < c.values[0]
    if c.op is ComparisonOp.LE:
        return value <= c.values[0]
    if c.op is ComparisonOp.EQ:
        return abs(value - c.values[0]) <= EQ_TOLERANCE_IN
    if c.op is ComparisonOp.GE:
        return value >= c.values[0]
    if c.op is ComparisonOp.GT:
        return value > c.values[0]
    return c.values[0] <= value <= c.values[1]


@dataclass(frozen=True)
class Finding:
    rule_id: str
    category: IssueCategory
    anchor: Vec3
    communities: frozenset[Community]
    description: str
    subject_id: str | None = None
    subject_class: ObjectClass | None = None
    measured: float | None = None            # inches
    constraint: DimensionConstraint | None = None
    room: str | None = None

    def sort_key(self) -> tuple:
        return (self.rule_id, self.subject_id or "", self.room or "")


@dataclass(frozen=True)
class Assessment:
    findings: tuple[Finding, ...]
    evaluated_rule_ids: tuple[str, ...]
    object_count: int
    timestamp: str = ""

    def __post_init__(self):
        object.__setattr__(self, "findings", tuple(self.findings))
        object.__setattr__(self, "evaluated_rule_ids", tuple(self.evaluated_rule_ids))


def _support_candidates(rule: IssueRule, scene: Scene) -> list[SceneObject | None]:
    supports: list[SceneObject | None] = []
    for dep in rule.dependencies:
        if dep is ObjectClass.FLOOR:
            supports.append(None)
        else:
            supports.extend(scene.objects_of_class(dep))
    return supports


def evaluate_rule(rule: IssueRule, scene: Scene) -> list[Finding]:
    """All findings one rule produces on a scene. Disabled rules yield none."""
    if not rule.enabled:
        return []
    findings: list[Finding] = []

    if rule.existence is Existence.MUST_NOT_EXIST:
        supports = _support_candidates(rule, scene) if rule.dependencies else []
        for obj in scene.objects_of_class(rule.object_class):
            if rule.dependencies:
                resting = any(is_supported_by(obj, s, scene, SUPPORT_EPS) for s in supports)
                if not resting:
                    continue
            findings.append(Finding(
                rule_id=rule.rule_id, category=IssueCategory.EXISTENCE,
                anchor=obj.box.center, communities=rule.communities,
                description=rule.description, subject_id=obj.id,
                subject_class=obj.object_class,
            ))
        return findings

    if rule.existence is Existence.MUST_EXIST:
        present = scene.objects_of_class(rule.object_class)
        for room in scene.rooms:
            if any(room.contains_xy(o.box.center.x, o.box.center.y) for o in present):
                continue
            cx, cy = room.centroid()
            findings.append(Finding(
                rule_id=rule.rule_id, category=IssueCategory.EXISTENCE,
                anchor=Vec3(cx, cy, ABSENCE_ANCHOR_Z), communities=rule.communities,
                description=rule.description, subject_id=None,
                subject_class=rule.object_class, room=room.name,
            ))
        return findings

    assert rule.dimension is not None
    for obj in scene.objects_of_class(rule.object_class):
        if rule.category is IssueCategory.DIMENSION and obj.provenance is Provenance.FRAME_RAYCAST:
            continue  # raycast objects carry default extents, so sizes are not trusted
        value = measure(obj, rule.measurement)
        if check_constraint(value, rule.dimension):
            continue
        findings.append(Finding(
            rule_id=rule.rule_id, category=rule.category, anchor=obj.box.center,
            communities=rule.communities, description=rule.description,
            subject_id=obj.id, subject_class=obj.object_class,
            measured=value, constraint=rule.dimension,
        ))
    return findings


def evaluate_scene(rs: RuleSet, scene: Scene,
                   communities: set[Community] | frozenset[Community],
                   timestamp: str = "") -> Assessment:
    """Evaluate every community-relevant rule; deterministic finding order."""
    filtered = filter_by_community(rs, communities)
    findings: list[Finding] = []
    for rule in filtered:
        findings.extend(evaluate_rule(rule, scene))
    findings.sort(key=Finding.sort_key)
    keys = [f.sort_key() for f in findings]
    if len(set(keys)) != len(keys):
        raise RuntimeError("duplicate findings for one (rule, subject, room)")
    return Assessment(
        findings=tuple(findings),
        evaluated_rule_ids=tuple(r.rule_id for r in filtered),
        object_count=len(scene.objects),
        timestamp=timestamp,
    )


def assessment_to_json(assessment: Assessment) -> str:
    """Stable-order JSON report for diff-based golden tests."""
    doc = {
        "evaluated_rule_ids": list(assessment.evaluated_rule_ids),
        "findings": [
            {
                "anchor": [f.anchor.x, f.anchor.y, f.anchor.z],
                "category": f.category.value,
                "communities": sorted(c.value for c in f.communities),
                "constraint": (
                    {"op": f.constraint.op.value, "values": list(f.constraint.values)}
                    if f.constraint else None
                ),
                "description": f.description,
                "measured_in": f.measured,
                "room": f.room,
                "rule_id": f.rule_id,
                "subject_class": f.subject_class.value if f.subject_class else None,
                "subject_id": f.subject_id,
            }
            for f in assessment.findings
        ],
        "object_count": assessment.object_count,
        "timestamp": assessment.timestamp,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
