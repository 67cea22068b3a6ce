"""The golden apartment: a three-room scene with 21 planted issues and 10
non-issues, plus its ground-truth annotation list.

Placement rules the tests rely on:
  * All 31 case anchors are pairwise >= 1.0 m apart (twice the match radius),
    so greedy matching is unambiguous.
  * Camera-channel fixtures (switches, sockets, handles, bars, alarms, knobs)
    sit with their centers exactly on a host surface plane (a wall or a
    furniture face), and loose items (knives, scissors, medication, rugs)
    with centers exactly on their support's top plane. A noise-free
    bbox-center ray then lands exactly on the true center, and the perceived
    world reproduces the ground truth to float precision.
  * Small items rest on helper furniture when the host's own anchor would sit
    too close; helpers are compliant, so they produce no findings.
  * Walls are axis-aligned, so wall fixtures use yaw 0 with their thin axis
    set per wall orientation.
"""
from __future__ import annotations

from .evaluate import CaseKind, GroundTruthCase
from .geometry import OrientedBox, Vec3
from .rules import INCHES_PER_METER, ObjectClass
from .scene import PortalCutout, PortalKind, Provenance, Room, Scene, SceneObject, WallSegment

WALL_H = 2.5
ALARM_Z = 2.2
THIN = 0.015  # half thickness of wall-mounted fixtures


def m(inches: float) -> float:
    return inches / INCHES_PER_METER


def _obj(oid: str, cls: ObjectClass, center: tuple[float, float, float],
         half: tuple[float, float, float], yaw: float = 0.0) -> SceneObject:
    return SceneObject(oid, cls, OrientedBox(Vec3(*center), Vec3(*half), yaw),
                       1.0, Provenance.GROUND_TRUTH)


def _furniture(oid: str, cls: ObjectClass, x: float, y: float, top_in: float,
               hx: float, hy: float) -> SceneObject:
    """Floor-standing furniture whose top sits at the given height in inches."""
    top = m(top_in)
    return _obj(oid, cls, (x, y, top / 2.0), (hx, hy, top / 2.0))


def golden_scene() -> Scene:
    entrance = Room(
        name="entrance",
        floor=((0.0, 0.0), (3.0, 0.0), (3.0, 4.0), (0.0, 4.0)),
        walls=(
            # west wall carries the (compliant) 36 in exterior door
            WallSegment(Vec3(0, 0, 0), Vec3(0, 4, 0), WALL_H, portals=(
                PortalCutout(PortalKind.DOOR, offset=1.3, width=m(36), sill=0.0, head=2.0),)),
            WallSegment(Vec3(0, 0, 0), Vec3(3, 0, 0), WALL_H),
            WallSegment(Vec3(0, 4, 0), Vec3(3, 4, 0), WALL_H),
            # shared wall to the living room: 28 in door, too narrow
            WallSegment(Vec3(3, 0, 0), Vec3(3, 4, 0), WALL_H, portals=(
                PortalCutout(PortalKind.DOOR, offset=2.5, width=m(28), sill=0.0, head=2.0),)),
        ),
    )
    living = Room(
        name="living",
        floor=((3.0, 0.0), (9.0, 0.0), (9.0, 6.0), (3.0, 6.0)),
        walls=(
            WallSegment(Vec3(3, 0, 0), Vec3(9, 0, 0), WALL_H),
            WallSegment(Vec3(9, 0, 0), Vec3(9, 6, 0), WALL_H),
            # shared wall to the kitchen: 26 in door, too narrow
            WallSegment(Vec3(3, 6, 0), Vec3(9, 6, 0), WALL_H, portals=(
                PortalCutout(PortalKind.DOOR, offset=3.0, width=m(26), sill=0.0, head=2.0),)),
            WallSegment(Vec3(3, 4, 0), Vec3(3, 6, 0), WALL_H),
        ),
    )
    kitchen = Room(
        name="kitchen",
        floor=((3.0, 6.0), (9.0, 6.0), (9.0, 9.0), (3.0, 9.0)),
        walls=(
            WallSegment(Vec3(3, 6, 0), Vec3(3, 9, 0), WALL_H),
            WallSegment(Vec3(3, 9, 0), Vec3(9, 9, 0), WALL_H),
            WallSegment(Vec3(9, 6, 0), Vec3(9, 9, 0), WALL_H),
        ),
    )

    objects = (
        # --- entrance -----------------------------------------------------
        # south wall (runs along x, fixtures thin along y)
        _obj("sw-entrance-high", ObjectClass.LIGHT_SWITCH, (1.0, 0.0, m(55)), (0.04, THIN, 0.04)),
        _obj("sw-entrance-ok", ObjectClass.LIGHT_SWITCH, (2.4, 0.0, m(44)), (0.04, THIN, 0.04)),
        _obj("cab-entrance-ok", ObjectClass.CABINET, (2.0, 3.85, m(20) + 0.3), (0.4, 0.15, 0.3)),
        _obj("storage-entrance", ObjectClass.STORAGE, (0.25, 3.3, 0.75), (0.2, 0.2, 0.75)),
        # knob centered on the storage unit's front face (x = 0.45 plane)
        _obj("knob-entrance-low", ObjectClass.KNOB, (0.45, 3.3, m(30)), (THIN, 0.025, 0.025)),
        _obj("rug-entrance", ObjectClass.RUG, (1.6, 1.5, 0.0), (0.6, 0.4, 0.01)),
        # --- living room ----------------------------------------------------
        _furniture("table-living-low", ObjectClass.TABLE, 4.2, 1.2, 26, 0.6, 0.4),
        _furniture("table-living-ok", ObjectClass.TABLE, 7.8, 1.0, 30, 0.6, 0.4),
        _furniture("table-living-aux", ObjectClass.TABLE, 7.8, 4.6, 30, 0.6, 0.4),
        _obj("scissors-living", ObjectClass.SCISSORS, (7.9, 4.8, m(30)), (0.10, 0.04, 0.02)),
        _furniture("sofa-living", ObjectClass.SOFA, 6.0, 0.45, 31.5, 1.0, 0.45),
        _obj("meds-living", ObjectClass.MEDICATION, (5.4, 0.6, m(31.5)), (0.05, 0.05, 0.04)),
        _furniture("toilet-living-high", ObjectClass.TOILET, 8.5, 2.8, 22, 0.2, 0.3),
        _obj("rug-living", ObjectClass.RUG, (5.0, 3.2, 0.0), (0.6, 0.4, 0.01)),
        # east wall (runs along y, fixtures thin along x)
        _obj("bar-living-low", ObjectClass.GRAB_BAR, (9.0, 4.5, m(24)), (THIN, 0.3, 0.04)),
        _obj("sw-living-ok", ObjectClass.LIGHT_SWITCH, (8.2, 0.0, m(40)), (0.04, THIN, 0.04)),
        _obj("sock-living-ok", ObjectClass.ELECTRIC_SOCKET, (3.0, 5.2, m(16)), (THIN, 0.04, 0.06)),
        _obj("alarm-living", ObjectClass.SMOKE_ALARM, (9.0, 1.2, ALARM_Z), (THIN, 0.07, 0.07)),
        _furniture("chair-living", ObjectClass.CHAIR, 4.5, 4.8, 35.4, 0.25, 0.25),
        # --- kitchen --------------------------------------------------------
        _furniture("counter-kitchen-high", ObjectClass.COUNTER, 4.8, 8.7, 38, 1.1, 0.3),
        _obj("knife-kitchen", ObjectClass.KNIVES, (5.8, 8.55, m(38)), (0.15, 0.05, 0.02)),
        _furniture("counter-kitchen-ok", ObjectClass.COUNTER, 8.7, 7.3, 33, 0.3, 1.2),
        _obj("meds-kitchen", ObjectClass.MEDICATION, (8.75, 6.35, m(33)), (0.05, 0.05, 0.04)),
        _furniture("sink-kitchen-high", ObjectClass.SINK, 7.2, 8.7, 20, 0.3, 0.3),
        _furniture("table-kitchen-high", ObjectClass.TABLE, 5.2, 6.8, 38, 0.6, 0.4),
        _obj("cab-kitchen-high", ObjectClass.CABINET, (3.15, 7.4, m(50) + 0.3), (0.15, 0.4, 0.3)),
        _obj("handle-kitchen-high", ObjectClass.DOOR_HANDLE, (8.4, 9.0, m(60)), (0.06, THIN, 0.06)),
        _obj("handle-kitchen-ok", ObjectClass.DOOR_HANDLE, (9.0, 8.1, m(40)), (THIN, 0.06, 0.06)),
        _obj("sock-kitchen-low", ObjectClass.ELECTRIC_SOCKET, (9.0, 8.85, m(10)), (THIN, 0.04, 0.06)),
        _obj("sock-kitchen-high", ObjectClass.ELECTRIC_SOCKET, (3.0, 6.3, m(52)), (THIN, 0.04, 0.06)),
        _obj("storage-kitchen", ObjectClass.STORAGE, (3.15, 8.5, 0.9), (0.15, 0.25, 0.9)),
        # knob centered on the kitchen storage unit's front face (x = 3.3)
        _obj("knob-kitchen-ok", ObjectClass.KNOB, (3.3, 8.5, m(40)), (THIN, 0.025, 0.025)),
        _obj("alarm-kitchen", ObjectClass.SMOKE_ALARM, (6.6, 9.0, ALARM_Z), (0.07, THIN, 0.07)),
    )
    return Scene((entrance, living, kitchen), objects)


def golden_ground_truth() -> list[GroundTruthCase]:
    """The hand-checked oracle listing: 21 issues and 10 non-issues."""
    issue, non = CaseKind.ISSUE, CaseKind.NON_ISSUE
    v = Vec3
    return [
        # --- dimension issues (7) ---
        GroundTruthCase(issue, ObjectClass.DOOR, v(3.0, 2.5 + m(28) / 2, 1.0),
                        "Door-Radius", "entrance door too narrow (28 in)"),
        GroundTruthCase(issue, ObjectClass.DOOR, v(6.0 + m(26) / 2, 6.0, 1.0),
                        "Door-Radius", "kitchen door too narrow (26 in)"),
        GroundTruthCase(issue, ObjectClass.TABLE, v(4.2, 1.2, m(26) / 2),
                        "Table-Height", "living table too low (26 in)"),
        GroundTruthCase(issue, ObjectClass.TABLE, v(5.2, 6.8, m(38) / 2),
                        "Table-Height", "kitchen table too high (38 in)"),
        GroundTruthCase(issue, ObjectClass.COUNTER, v(4.8, 8.7, m(38) / 2),
                        "Counter-Height", "kitchen counter too high (38 in)"),
        GroundTruthCase(issue, ObjectClass.SINK, v(7.2, 8.7, m(20) / 2),
                        "Sink-Height", "kitchen sink too high (20 in)"),
        GroundTruthCase(issue, ObjectClass.TOILET, v(8.5, 2.8, m(22) / 2),
                        "Toilet-Height", "toilet seat too high (22 in)"),
        # --- position issues (7) ---
        GroundTruthCase(issue, ObjectClass.LIGHT_SWITCH, v(1.0, 0.0, m(55)),
                        "Light Switch-Height", "entrance switch too high (55 in)"),
        GroundTruthCase(issue, ObjectClass.ELECTRIC_SOCKET, v(9.0, 8.85, m(10)),
                        "Electric Socket-Height", "kitchen socket too low (10 in)"),
        GroundTruthCase(issue, ObjectClass.ELECTRIC_SOCKET, v(3.0, 6.3, m(52)),
                        "Electric Socket-Height", "kitchen socket too high (52 in)"),
        GroundTruthCase(issue, ObjectClass.CABINET, v(3.15, 7.4, m(50) + 0.3),
                        "Cabinet-Height", "kitchen cabinet mounted too high (50 in)"),
        GroundTruthCase(issue, ObjectClass.DOOR_HANDLE, v(8.4, 9.0, m(60)),
                        "Door Handle-Height", "kitchen door handle too high (60 in)"),
        GroundTruthCase(issue, ObjectClass.GRAB_BAR, v(9.0, 4.5, m(24)),
                        "Grab Bar-Adults-Height", "grab bar too low for adults (24 in)"),
        GroundTruthCase(issue, ObjectClass.KNOB, v(0.45, 3.3, m(30)),
                        "Knob-Height", "entrance knob too low (30 in)"),
        # --- existence issues (7) ---
        GroundTruthCase(issue, ObjectClass.RUG, v(5.0, 3.2, 0.0),
                        "Rug-Presence", "throw rug in the living room"),
        GroundTruthCase(issue, ObjectClass.RUG, v(1.6, 1.5, 0.0),
                        "Rug-Presence", "throw rug in the entrance"),
        GroundTruthCase(issue, ObjectClass.KNIVES, v(5.8, 8.55, m(38)),
                        "Knives-Presence", "knife on the kitchen counter"),
        GroundTruthCase(issue, ObjectClass.SCISSORS, v(7.9, 4.8, m(30)),
                        "Scissors-Presence", "scissors on the living table"),
        GroundTruthCase(issue, ObjectClass.MEDICATION, v(8.75, 6.35, m(33)),
                        "Medication-Presence", "medication on the kitchen counter"),
        GroundTruthCase(issue, ObjectClass.MEDICATION, v(5.4, 0.6, m(31.5)),
                        "Medication-Presence", "medication on the sofa"),
        GroundTruthCase(issue, ObjectClass.SMOKE_ALARM, v(1.5, 2.0, 1.5),
                        "Smoke Alarm-Absence", "no smoke alarm in the entrance"),
        # --- non-issues (10) ---
        GroundTruthCase(non, ObjectClass.DOOR, v(0.0, 1.3 + m(36) / 2, 1.0),
                        label="entrance door is wide enough (36 in)"),
        GroundTruthCase(non, ObjectClass.TABLE, v(7.8, 1.0, m(30) / 2),
                        label="living table at a good height (30 in)"),
        GroundTruthCase(non, ObjectClass.COUNTER, v(8.7, 7.3, m(33) / 2),
                        label="kitchen counter at a good height (33 in)"),
        GroundTruthCase(non, ObjectClass.LIGHT_SWITCH, v(8.2, 0.0, m(40)),
                        label="living switch in reach (40 in)"),
        GroundTruthCase(non, ObjectClass.LIGHT_SWITCH, v(2.4, 0.0, m(44)),
                        label="entrance switch in reach (44 in)"),
        GroundTruthCase(non, ObjectClass.ELECTRIC_SOCKET, v(3.0, 5.2, m(16)),
                        label="living socket in reach (16 in)"),
        GroundTruthCase(non, ObjectClass.CABINET, v(2.0, 3.85, m(20) + 0.3),
                        label="entrance cabinet mounted low enough (20 in)"),
        GroundTruthCase(non, ObjectClass.DOOR_HANDLE, v(9.0, 8.1, m(40)),
                        label="kitchen door handle in reach (40 in)"),
        GroundTruthCase(non, ObjectClass.KNOB, v(3.3, 8.5, m(40)),
                        label="kitchen knob in reach (40 in)"),
        GroundTruthCase(non, ObjectClass.SMOKE_ALARM, v(9.0, 1.2, ALARM_Z),
                        label="living room smoke alarm present"),
    ]
