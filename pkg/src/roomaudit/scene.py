"""World model: rooms (floor polygons, walls with portal cutouts) and objects
as class-labeled oriented boxes, plus ray intersection and scene file I/O.

Scenes are immutable after load; ray queries are pure and thread-safe. The
same shape describes both ground-truth worlds and perceived worlds.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    RAY_EPS,
    OrientedBox,
    Vec3,
    point_in_polygon,
    polygon_area,
    polygon_centroid,
    polygon_is_simple,
    wrap_angle,
)
from .rules import Channel, ObjectClass, parse_object_class

BOTTOM_SLACK = 0.02  # boxes may dip this far below the floor plane


class SceneError(ValueError):
    """Raised for schema or invariant violations in scene documents."""


class PortalKind(enum.Enum):
    DOOR = "door"
    WINDOW = "window"
    OPENING = "opening"


class Provenance(enum.Enum):
    GROUND_TRUTH = "ground_truth"
    PARAMETRIC = "parametric"
    FRAME_RAYCAST = "frame_raycast"
    FUSED = "fused"


@dataclass(frozen=True)
class PortalCutout:
    kind: PortalKind
    offset: float      # meters from wall endpoint a, along the wall
    width: float
    sill: float        # bottom of the cutout
    head: float        # top of the cutout


@dataclass(frozen=True)
class WallSegment:
    a: Vec3
    b: Vec3
    height: float
    thickness: float = 0.1
    portals: tuple[PortalCutout, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "portals", tuple(self.portals))

    @property
    def length(self) -> float:
        return (self.b - self.a).norm()

    def direction(self) -> Vec3:
        return (self.b - self.a).normalized()


@dataclass(frozen=True)
class SceneObject:
    id: str
    object_class: ObjectClass
    box: OrientedBox
    confidence: float = 1.0
    provenance: Provenance = Provenance.GROUND_TRUTH


@dataclass(frozen=True)
class Room:
    name: str
    floor: tuple[tuple[float, float], ...]
    walls: tuple[WallSegment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "floor", tuple((float(x), float(y)) for x, y in self.floor))
        object.__setattr__(self, "walls", tuple(self.walls))

    def centroid(self) -> tuple[float, float]:
        return polygon_centroid(list(self.floor))

    def contains_xy(self, x: float, y: float) -> bool:
        return point_in_polygon(x, y, list(self.floor))


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int


DEFAULT_INTRINSICS = CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)


@dataclass(frozen=True)
class Hit:
    point: Vec3
    t: float
    surface: str


@dataclass(eq=False)
class Scene:
    rooms: tuple[Room, ...]
    objects: tuple[SceneObject, ...]
    _surfaces: "SurfaceSet | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.rooms = tuple(self.rooms)
        self.objects = tuple(self.objects)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        return self.rooms == other.rooms and self.objects == other.objects

    def objects_of_class(self, cls: ObjectClass) -> list[SceneObject]:
        """Explicit objects of a class, plus synthetic boxes derived from
        portals for the structural door/window/opening classes."""
        out = [o for o in self.objects if o.object_class is cls]
        if cls in (ObjectClass.DOOR, ObjectClass.WINDOW, ObjectClass.OPENING):
            out.extend(o for o in self.portal_objects() if o.object_class is cls)
        return out

    def portal_objects(self) -> list[SceneObject]:
        """Portals as oriented boxes: width along local x, thickness along y."""
        out: list[SceneObject] = []
        for ri, room in enumerate(self.rooms):
            for wi, wall in enumerate(room.walls):
                u = wall.direction()
                yaw = math.atan2(u.y, u.x)
                for pi, portal in enumerate(wall.portals):
                    mid = wall.a + u * (portal.offset + portal.width / 2.0)
                    center = Vec3(mid.x, mid.y, (portal.sill + portal.head) / 2.0)
                    half = Vec3(portal.width / 2.0, wall.thickness / 2.0,
                                (portal.head - portal.sill) / 2.0)
                    cls = ObjectClass(portal.kind.value)
                    out.append(SceneObject(
                        id=f"{portal.kind.value}:{room.name}:{wi}:{pi}",
                        object_class=cls,
                        box=OrientedBox(center, half, yaw),
                        confidence=1.0,
                        provenance=Provenance.PARAMETRIC,
                    ))
        return out

    def room_of_point(self, x: float, y: float) -> Room | None:
        for room in self.rooms:
            if room.contains_xy(x, y):
                return room
        return None

    def bounds_xy(self) -> tuple[float, float, float, float]:
        xs: list[float] = []
        ys: list[float] = []
        for room in self.rooms:
            xs.extend(p[0] for p in room.floor)
            ys.extend(p[1] for p in room.floor)
        for obj in self.objects:
            for p in obj.box.footprint():
                xs.append(p[0])
                ys.append(p[1])
        if not xs:
            return (0.0, 0.0, 1.0, 1.0)
        return (min(xs), min(ys), max(xs), max(ys))

    def surfaces(self) -> "SurfaceSet":
        if self._surfaces is None:
            object.__setattr__(self, "_surfaces", SurfaceSet.build(self))
        return self._surfaces

    def without_channels(self, dropped: set[Channel]) -> "Scene":
        kept = tuple(o for o in self.objects if o.object_class.channel not in dropped)
        return Scene(self.rooms, kept)


class SurfaceSet:
    """Vectorized intersection structure over a scene's surfaces.

    Surfaces are floors (room polygons at z = 0), walls (vertical quads minus
    portal cutouts) and object box faces. Built once per scene; queries take a
    single origin and a batch of unit directions.
    """

    def __init__(self, boxes, box_labels, walls, floors):
        self.box_centers, self.box_halves, self.box_cos, self.box_sin = boxes
        self.box_labels = box_labels
        self.walls = walls        # list of dicts with a, u, n, length, height, portals, label
        self.floors = floors      # list of (vertices ndarray, label)

    @staticmethod
    def build(scene: Scene) -> "SurfaceSet":
        centers, halves, coss, sins, labels = [], [], [], [], []
        for obj in scene.objects:
            b = obj.box
            centers.append([b.center.x, b.center.y, b.center.z])
            halves.append([b.half_extents.x, b.half_extents.y, b.half_extents.z])
            coss.append(math.cos(b.yaw))
            sins.append(math.sin(b.yaw))
            labels.append(f"object:{obj.id}")
        boxes = (
            np.array(centers, dtype=float).reshape(-1, 3),
            np.array(halves, dtype=float).reshape(-1, 3),
            np.array(coss, dtype=float),
            np.array(sins, dtype=float),
        )
        walls = []
        for room in scene.rooms:
            for wi, wall in enumerate(room.walls):
                a = wall.a.as_array()
                u3 = (wall.b - wall.a).as_array()
                length = float(np.linalg.norm(u3))
                u = u3 / length
                n = np.array([u[1], -u[0], 0.0])  # horizontal normal to the wall plane
                walls.append({
                    "a": a, "u": u, "n": n, "length": length, "height": wall.height,
                    "portals": [(p.offset, p.width, p.sill, p.head) for p in wall.portals],
                    "label": f"wall:{room.name}:{wi}",
                })
        floors = [(np.array(room.floor, dtype=float), f"floor:{room.name}")
                  for room in scene.rooms]
        return SurfaceSet(boxes, labels, walls, floors)

    def intersect(self, origin: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, list[str | None]]:
        """Nearest hit per ray. Returns (t[N], label[N]); misses get t = inf."""
        dirs = np.atleast_2d(dirs)
        n_rays = dirs.shape[0]
        best_t = np.full(n_rays, np.inf)
        best_label: list[str | None] = [None] * n_rays

        k = self.box_centers.shape[0]
        if k:
            rel = origin[None, :] - self.box_centers                     # (K, 3)
            c, s = self.box_cos, self.box_sin
            ox = c * rel[:, 0] + s * rel[:, 1]
            oy = -s * rel[:, 0] + c * rel[:, 1]
            oz = rel[:, 2]
            dx = c[None, :] * dirs[:, 0:1] + s[None, :] * dirs[:, 1:2]   # (N, K)
            dy = -s[None, :] * dirs[:, 0:1] + c[None, :] * dirs[:, 1:2]
            dz = np.repeat(dirs[:, 2:3], k, axis=1)
            t_enter = np.full((n_rays, k), -np.inf)
            t_exit = np.full((n_rays, k), np.inf)
            ok = np.ones((n_rays, k), dtype=bool)
            for oc, dc, axis in ((ox, dx, 0), (oy, dy, 1), (oz, dz, 2)):
                h = self.box_halves[:, axis][None, :]
                o_b = np.broadcast_to(oc[None, :] if oc.ndim == 1 else oc, (n_rays, k))
                parallel = np.abs(dc) < 1e-12
                ok &= ~(parallel & (np.abs(o_b) > h))
                with np.errstate(divide="ignore", invalid="ignore"):
                    t1 = (-h - o_b) / dc
                    t2 = (h - o_b) / dc
                lo = np.minimum(t1, t2)
                hi = np.maximum(t1, t2)
                lo = np.where(parallel, -np.inf, lo)
                hi = np.where(parallel, np.inf, hi)
                t_enter = np.maximum(t_enter, lo)
                t_exit = np.minimum(t_exit, hi)
            ok &= (t_enter <= t_exit) & (t_exit > RAY_EPS)
            t_hit = np.where(t_enter > RAY_EPS, t_enter, t_exit)
            t_hit = np.where(ok, t_hit, np.inf)
            idx = np.argmin(t_hit, axis=1)
            t_min = t_hit[np.arange(n_rays), idx]
            improved = t_min < best_t
            for i in np.flatnonzero(improved):
                best_label[i] = self.box_labels[idx[i]]
            best_t = np.where(improved, t_min, best_t)

        for wall in self.walls:
            n = wall["n"]
            denom = dirs @ n
            with np.errstate(divide="ignore", invalid="ignore"):
                t = ((wall["a"] - origin) @ n) / denom
            valid = (np.abs(denom) > 1e-12) & (t > RAY_EPS) & np.isfinite(t)
            if not valid.any():
                continue
            t = np.where(valid, t, 0.0)
            pts = origin[None, :] + t[:, None] * dirs
            rel = pts - wall["a"][None, :]
            along = rel @ wall["u"]
            zc = pts[:, 2]
            on_quad = valid & (along >= 0.0) & (along <= wall["length"]) \
                & (zc >= 0.0) & (zc <= wall["height"])
            for off, width, sill, head in wall["portals"]:
                in_cutout = (along > off) & (along < off + width) & (zc > sill) & (zc < head)
                on_quad &= ~in_cutout
            improved = on_quad & (t < best_t)
            for i in np.flatnonzero(improved):
                best_label[i] = wall["label"]
            best_t = np.where(improved, t, best_t)

        dz = dirs[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_floor = -origin[2] / dz
        floor_ok = (np.abs(dz) > 1e-12) & (t_floor > RAY_EPS) & np.isfinite(t_floor)
        if floor_ok.any():
            px = origin[0] + t_floor * dirs[:, 0]
            py = origin[1] + t_floor * dirs[:, 1]
            for verts, label in self.floors:
                inside = _points_in_polygon(px, py, verts)
                improved = floor_ok & inside & (t_floor < best_t)
                for i in np.flatnonzero(improved):
                    best_label[i] = label
                best_t = np.where(improved, t_floor, best_t)

        return best_t, best_label


def _points_in_polygon(px: np.ndarray, py: np.ndarray, verts: np.ndarray) -> np.ndarray:
    inside = np.zeros(px.shape, dtype=bool)
    n = verts.shape[0]
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        cond = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (px < xcross)
    return inside


def ray_intersect(scene: Scene, origin: Vec3, direction: Vec3) -> Hit | None:
    """Nearest intersection of a ray with any floor, wall (minus portal
    cutouts), or object box face; None if the ray escapes the scene."""
    d = direction.as_array()
    t, labels = scene.surfaces().intersect(origin.as_array(), d[None, :])
    if not math.isfinite(t[0]) or labels[0] is None:
        return None
    tv = float(t[0])
    p = origin + direction * tv
    return Hit(point=p, t=tv, surface=labels[0])


def top_height(box: OrientedBox) -> float:
    return box.top


def bottom_height(box: OrientedBox) -> float:
    return box.bottom


def center_height(box: OrientedBox) -> float:
    return box.center.z


def is_supported_by(obj: SceneObject, support: SceneObject | None, scene: Scene,
                    eps: float = 0.05) -> bool:
    """True when obj rests on the support: its bottom is within eps of the
    support's top and its center footprint lies inside the support's.

    support=None means the floor: top at z = 0 and the footprint of whichever
    room contains the point.
    """
    bottom = obj.box.bottom
    cx, cy = obj.box.center.x, obj.box.center.y
    if support is None:
        if abs(bottom - 0.0) > eps:
            return False
        return scene.room_of_point(cx, cy) is not None
    top = support.box.top
    if not (top - eps <= bottom <= top + eps):
        return False
    return support.box.contains_xy(cx, cy)


# --- JSON I/O ---------------------------------------------------------------

def _vec3_to_json(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def scene_to_json(scene: Scene) -> str:
    doc = {
        "rooms": [
            {
                "name": room.name,
                "floor": [[x, y] for x, y in room.floor],
                "walls": [
                    {
                        "a": [w.a.x, w.a.y],
                        "b": [w.b.x, w.b.y],
                        "height": w.height,
                        "thickness": w.thickness,
                        "portals": [
                            {"kind": p.kind.value, "offset": p.offset, "width": p.width,
                             "sill": p.sill, "head": p.head}
                            for p in w.portals
                        ],
                    }
                    for w in room.walls
                ],
            }
            for room in scene.rooms
        ],
        "objects": [
            {
                "id": o.id,
                "class": o.object_class.value,
                "center": _vec3_to_json(o.box.center),
                "half_extents": _vec3_to_json(o.box.half_extents),
                "yaw": o.box.yaw,
                "confidence": o.confidence,
                "provenance": o.provenance.value,
            }
            for o in scene.objects
        ],
    }
    return json.dumps(doc, indent=2)


def save_scene(scene: Scene) -> str:
    return scene_to_json(scene)


def _require(cond: bool, message: str):
    if not cond:
        raise SceneError(message)


def load_scene(text: str) -> Scene:
    """Parse and validate a scene document; raises SceneError with the
    offending room/object named."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneError(f"malformed JSON: {e}") from None
    _require(isinstance(doc, dict), "top level must be an object")
    rooms = []
    for i, rd in enumerate(doc.get("rooms", [])):
        name = rd.get("name", f"room{i}")
        floor = [(float(x), float(y)) for x, y in rd.get("floor", [])]
        _require(len(floor) >= 3, f"room {name}: floor polygon needs >= 3 vertices")
        _require(polygon_is_simple(floor), f"room {name}: floor polygon self-intersects")
        _require(polygon_area(floor) > 0, f"room {name}: floor polygon must be counter-clockwise")
        walls = []
        for wi, wd in enumerate(rd.get("walls", [])):
            ax, ay = wd["a"]
            bx, by = wd["b"]
            a, b = Vec3(float(ax), float(ay), 0.0), Vec3(float(bx), float(by), 0.0)
            _require(a.distance_to(b) > 1e-9, f"room {name} wall {wi}: endpoints coincide")
            height = float(wd["height"])
            _require(height > 0, f"room {name} wall {wi}: height must be positive")
            thickness = float(wd.get("thickness", 0.1))
            portals = []
            for pd in wd.get("portals", []):
                try:
                    kind = PortalKind(pd["kind"])
                except ValueError:
                    raise SceneError(f"room {name} wall {wi}: unknown portal kind {pd['kind']!r}") from None
                p = PortalCutout(kind, float(pd["offset"]), float(pd["width"]),
                                 float(pd["sill"]), float(pd["head"]))
                _require(p.width > 0, f"room {name} wall {wi}: portal width must be positive")
                _require(0 <= p.sill < p.head <= height,
                         f"room {name} wall {wi}: portal sill/head outside the wall")
                _require(p.offset >= 0 and p.offset + p.width <= a.distance_to(b) + 1e-9,
                         f"room {name} wall {wi}: portal lies outside the wall rectangle")
                portals.append(p)
            walls.append(WallSegment(a, b, height, thickness, tuple(portals)))
        rooms.append(Room(name, tuple(floor), tuple(walls)))

    objects = []
    seen_ids: set[str] = set()
    for od in doc.get("objects", []):
        oid = str(od.get("id", ""))
        _require(bool(oid), "object with missing id")
        _require(oid not in seen_ids, f"object {oid}: duplicate id")
        seen_ids.add(oid)
        try:
            cls = parse_object_class(od["class"])
        except Exception:
            raise SceneError(f"object {oid}: unknown class {od.get('class')!r}") from None
        center = Vec3(*[float(v) for v in od["center"]])
        half = Vec3(*[float(v) for v in od["half_extents"]])
        _require(half.x > 0 and half.y > 0 and half.z > 0,
                 f"object {oid}: half extents must be positive")
        _require(center.is_finite() and half.is_finite(), f"object {oid}: non-finite geometry")
        yaw = wrap_angle(float(od.get("yaw", 0.0)))
        confidence = float(od.get("confidence", 1.0))
        _require(0.0 <= confidence <= 1.0, f"object {oid}: confidence out of [0, 1]")
        box = OrientedBox(center, half, yaw)
        _require(box.bottom >= -BOTTOM_SLACK, f"object {oid}: box extends below the floor")
        provenance = Provenance(od.get("provenance", "ground_truth"))
        objects.append(SceneObject(oid, cls, box, confidence, provenance))
    return Scene(tuple(rooms), tuple(objects))
