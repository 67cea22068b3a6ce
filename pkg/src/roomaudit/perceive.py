"""Perception over a scan log: raycast-localize 2D detections, smooth each
track over a sliding window, and fuse with parametric box observations into
a perceived object set.

Localization raycasts against the reconstruction geometry only (structure
plus parametric-channel objects): the classes found in camera frames are not
part of the captured 3D model, so their rays land on the host wall, counter,
or floor behind them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Vec3, iou_2d, matrix_from_quat
from .rules import Channel, ObjectClass, parse_object_class
from .scene import (
    CameraIntrinsics,
    Provenance,
    Scene,
    SceneObject,
    ray_intersect,
)
from .geometry import OrientedBox

WINDOW_SIZE = 5            # sliding-window length for raycast averaging
MIN_TRACK_POINTS = 3       # tracks finalized with fewer points are dropped
TRACK_TIMEOUT_FRAMES = 15  # unseen for this many frames -> finalize
IOU_GATE = 0.3
DEDUPE_RADIUS_M = 0.25
CONFIDENCE_FLOOR = 0.5
POSE_JUMP_RAD = 0.21       # ~12 deg; a camera teleport invalidates image-space tracks
POSE_JUMP_M = 0.5

# Default full extents (w, d, h) in meters for raycast-localized objects;
# the detection channel gives no 3D size, so a per-class prior is used.
# Only the center height of these objects is trusted downstream.
CLASS_DEFAULT_EXTENTS: dict[ObjectClass, tuple[float, float, float]] = {
    ObjectClass.DOOR_HANDLE: (0.12, 0.06, 0.12),
    ObjectClass.ELECTRIC_SOCKET: (0.08, 0.03, 0.12),
    ObjectClass.LIGHT_SWITCH: (0.08, 0.03, 0.08),
    ObjectClass.GRAB_BAR: (0.60, 0.08, 0.08),
    ObjectClass.KNIVES: (0.30, 0.10, 0.04),
    ObjectClass.SCISSORS: (0.20, 0.08, 0.04),
    ObjectClass.MEDICATION: (0.10, 0.10, 0.08),
    ObjectClass.RUG: (1.20, 0.80, 0.02),
    ObjectClass.SMOKE_ALARM: (0.14, 0.06, 0.14),
    ObjectClass.KNOB: (0.05, 0.05, 0.05),
}
_FALLBACK_EXTENTS = (0.10, 0.10, 0.10)


def default_box_for(cls: ObjectClass, center: Vec3) -> OrientedBox:
    w, d, h = CLASS_DEFAULT_EXTENTS.get(cls, _FALLBACK_EXTENTS)
    return OrientedBox(center, Vec3(w / 2.0, d / 2.0, h / 2.0), 0.0)


BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class FrameDetection:
    object_class: ObjectClass
    bbox: BBox                 # (x0, y0, x1, y1) pixels
    confidence: float


@dataclass(frozen=True)
class CameraFrame:
    index: int
    position: Vec3
    quaternion: tuple[float, float, float, float]  # (w, x, y, z), world-from-camera
    timestamp: float
    detections: tuple[FrameDetection, ...] = ()

    def rotation(self) -> np.ndarray:
        return matrix_from_quat(self.quaternion)


@dataclass(frozen=True)
class ParametricObservation:
    object_class: ObjectClass
    box: OrientedBox
    confidence: float
    first_seen: float


@dataclass(frozen=True)
class ScanLog:
    intrinsics: CameraIntrinsics
    frames: tuple[CameraFrame, ...]
    parametric: tuple[ParametricObservation, ...]
    factors: dict
    seed: int
    frame_rate: float


@dataclass(frozen=True)
class LocalizedDetection:
    object_class: ObjectClass
    point: Vec3
    confidence: float
    frame_index: int
    n_points: int


@dataclass
class Track:
    object_class: ObjectClass
    points: list[Vec3] = field(default_factory=list)
    confidences: list[float] = field(default_factory=list)
    last_bbox: BBox = (0.0, 0.0, 0.0, 0.0)
    last_frame: int = -1

    def mean_point(self) -> Vec3:
        n = len(self.points)
        return Vec3(sum(p.x for p in self.points) / n,
                    sum(p.y for p in self.points) / n,
                    sum(p.z for p in self.points) / n)

    def mean_confidence(self) -> float:
        return sum(self.confidences) / len(self.confidences)


def project_point(p: Vec3, position: Vec3, rotation: np.ndarray,
                  intr: CameraIntrinsics) -> tuple[float, float, float]:
    """World point to (u, v, depth); depth <= 0 means behind the camera."""
    rel = p.as_array() - position.as_array()
    cam = rotation.T @ rel
    z = float(cam[2])
    if z <= 1e-9:
        return (math.nan, math.nan, z)
    u = intr.fx * float(cam[0]) / z + intr.cx
    v = intr.fy * float(cam[1]) / z + intr.cy
    return (u, v, z)


def unproject_pixel(u: float, v: float, position: Vec3, rotation: np.ndarray,
                    intr: CameraIntrinsics) -> Vec3:
    """Unit world-space direction of the camera ray through a pixel."""
    d_cam = np.array([(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0])
    d_world = rotation @ d_cam
    return Vec3.from_array(d_world / np.linalg.norm(d_world))


def reconstruction_geometry(scene: Scene) -> Scene:
    """The raycast world: structure plus parametric objects only."""
    return scene.without_channels({Channel.FRAME_DETECTION})


def localize(det: FrameDetection, frame: CameraFrame, intrinsics: CameraIntrinsics,
             geometry: Scene) -> Vec3 | None:
    """Raycast the bbox-center pixel into the world; None if the ray escapes."""
    u = (det.bbox[0] + det.bbox[2]) / 2.0
    v = (det.bbox[1] + det.bbox[3]) / 2.0
    direction = unproject_pixel(u, v, frame.position, frame.rotation(), intrinsics)
    hit = ray_intersect(geometry, frame.position, direction)
    return hit.point if hit else None


def update_tracks(tracks: list[Track], detections: list[FrameDetection],
                  points: list[Vec3], frame_index: int,
                  iou_threshold: float = IOU_GATE) -> tuple[list[Track], list[LocalizedDetection]]:
    """Associate one frame's localized detections with open tracks.

    A detection joins a track only with matching class and bbox IoU at or
    above the gate. A full window emits its mean and keeps sliding; stale
    tracks flush their mean if they hold at least MIN_TRACK_POINTS.
    """
    if len(detections) != len(points):
        raise ValueError("detections and localized points must align")
    emitted: list[LocalizedDetection] = []
    live = list(tracks)

    order = sorted(range(len(detections)),
                   key=lambda i: (detections[i].object_class.value, detections[i].bbox))
    claimed: set[int] = set()
    for i in order:
        det, point = detections[i], points[i]
        best_j, best_iou = -1, iou_threshold
        for j, track in enumerate(live):
            if j in claimed or track.object_class is not det.object_class:
                continue
            v = iou_2d(det.bbox, track.last_bbox)
            if v >= best_iou:
                best_j, best_iou = j, v
        if best_j < 0:
            track = Track(det.object_class)
            live.append(track)
            best_j = len(live) - 1
        track = live[best_j]
        claimed.add(best_j)
        track.points.append(point)
        track.confidences.append(det.confidence)
        if len(track.points) > WINDOW_SIZE:
            track.points.pop(0)
            track.confidences.pop(0)
        track.last_bbox = det.bbox
        track.last_frame = frame_index
        if len(track.points) == WINDOW_SIZE:
            emitted.append(LocalizedDetection(
                track.object_class, track.mean_point(), track.mean_confidence(),
                frame_index, WINDOW_SIZE))

    survivors: list[Track] = []
    for track in live:
        if frame_index - track.last_frame >= TRACK_TIMEOUT_FRAMES:
            if len(track.points) >= MIN_TRACK_POINTS:
                emitted.append(LocalizedDetection(
                    track.object_class, track.mean_point(), track.mean_confidence(),
                    frame_index, len(track.points)))
        else:
            survivors.append(track)
    return survivors, emitted


def finalize_tracks(tracks: list[Track], frame_index: int) -> list[LocalizedDetection]:
    """End-of-log flush for tracks that still hold enough points."""
    out = []
    for track in tracks:
        if len(track.points) >= MIN_TRACK_POINTS:
            out.append(LocalizedDetection(
                track.object_class, track.mean_point(), track.mean_confidence(),
                frame_index, len(track.points)))
    return out


def fuse(parametric: list[ParametricObservation], localized: list[LocalizedDetection],
         dedupe_radius: float = DEDUPE_RADIUS_M,
         confidence_floor: float = CONFIDENCE_FLOOR) -> list[SceneObject]:
    """Merge the two channels into one perceived object list.

    Low-confidence candidates drop; same-class candidates within the dedupe
    radius collapse to the higher-confidence one. Output order is
    deterministic (confidence descending, then stable input order).
    """
    candidates: list[tuple[float, int, SceneObject]] = []
    seq = 0
    for obs in parametric:
        obj = SceneObject(f"p{seq:03d}", obs.object_class, obs.box,
                          obs.confidence, Provenance.PARAMETRIC)
        candidates.append((obs.confidence, seq, obj))
        seq += 1
    for loc in localized:
        obj = SceneObject(f"d{seq:03d}", loc.object_class,
                          default_box_for(loc.object_class, loc.point),
                          loc.confidence, Provenance.FRAME_RAYCAST)
        candidates.append((loc.confidence, seq, obj))
        seq += 1

    candidates = [c for c in candidates if c[0] >= confidence_floor]
    candidates.sort(key=lambda c: (-c[0], c[1]))
    accepted: list[SceneObject] = []
    for _conf, _i, obj in candidates:
        clash = any(
            kept.object_class is obj.object_class
            and kept.box.center.distance_to(obj.box.center) < dedupe_radius
            for kept in accepted
        )
        if not clash:
            accepted.append(obj)
    accepted.sort(key=lambda o: o.id)
    return accepted


def _pose_jumped(prev: CameraFrame, cur: CameraFrame) -> bool:
    """Detects a discontinuous camera move between consecutive frames.
    Image-space association is meaningless across a teleport."""
    if prev.position.distance_to(cur.position) > POSE_JUMP_M:
        return True
    dot = abs(sum(a * b for a, b in zip(prev.quaternion, cur.quaternion)))
    angle = 2.0 * math.acos(min(1.0, dot))
    return angle > POSE_JUMP_RAD


def run_perception(log: ScanLog, geometry: Scene,
                   dedupe_radius: float = DEDUPE_RADIUS_M) -> Scene:
    """Full pipeline over one scan log; returns the perceived scene (rooms
    copied from the captured structure, objects replaced by perception)."""
    recon = reconstruction_geometry(geometry)
    surfaces = recon.surfaces()
    intr = log.intrinsics
    tracks: list[Track] = []
    localized: list[LocalizedDetection] = []
    last_index = 0
    prev_frame: CameraFrame | None = None
    for frame in log.frames:
        if prev_frame is not None and _pose_jumped(prev_frame, frame):
            localized.extend(finalize_tracks(tracks, frame.index))
            tracks = []
        prev_frame = frame
        last_index = frame.index
        dets: list[FrameDetection] = []
        pts: list[Vec3] = []
        if frame.detections:
            rotation = frame.rotation()
            dirs = np.empty((len(frame.detections), 3))
            for i, det in enumerate(frame.detections):
                u = (det.bbox[0] + det.bbox[2]) / 2.0
                v = (det.bbox[1] + det.bbox[3]) / 2.0
                dirs[i] = unproject_pixel(u, v, frame.position, rotation, intr).as_array()
            t, _labels = surfaces.intersect(frame.position.as_array(), dirs)
            for i, det in enumerate(frame.detections):
                if math.isfinite(t[i]):
                    p = frame.position.as_array() + t[i] * dirs[i]
                    dets.append(det)
                    pts.append(Vec3.from_array(p))
        tracks, emitted = update_tracks(tracks, dets, pts, frame.index)
        localized.extend(emitted)
    localized.extend(finalize_tracks(tracks, last_index + 1))
    objects = fuse(list(log.parametric), localized, dedupe_radius)
    return Scene(geometry.rooms, tuple(objects))


# --- ScanLog JSON I/O --------------------------------------------------------

def scanlog_to_json(log: ScanLog) -> str:
    doc = {
        "intrinsics": {
            "fx": log.intrinsics.fx, "fy": log.intrinsics.fy,
            "cx": log.intrinsics.cx, "cy": log.intrinsics.cy,
            "width": log.intrinsics.width, "height": log.intrinsics.height,
        },
        "factors": log.factors,
        "seed": log.seed,
        "frame_rate": log.frame_rate,
        "frames": [
            {
                "index": f.index,
                "timestamp": f.timestamp,
                "position": [f.position.x, f.position.y, f.position.z],
                "quaternion": list(f.quaternion),
                "detections": [
                    {"class": d.object_class.value, "bbox": list(d.bbox),
                     "confidence": d.confidence}
                    for d in f.detections
                ],
            }
            for f in log.frames
        ],
        "parametric": [
            {
                "class": o.object_class.value,
                "center": [o.box.center.x, o.box.center.y, o.box.center.z],
                "half_extents": [o.box.half_extents.x, o.box.half_extents.y, o.box.half_extents.z],
                "yaw": o.box.yaw,
                "confidence": o.confidence,
                "first_seen": o.first_seen,
            }
            for o in log.parametric
        ],
    }
    return json.dumps(doc, indent=2)


def scanlog_from_json(text: str) -> ScanLog:
    doc = json.loads(text)
    intr = CameraIntrinsics(**doc["intrinsics"])
    frames = tuple(
        CameraFrame(
            index=fd["index"],
            position=Vec3(*fd["position"]),
            quaternion=tuple(fd["quaternion"]),
            timestamp=fd["timestamp"],
            detections=tuple(
                FrameDetection(parse_object_class(dd["class"]), tuple(dd["bbox"]), dd["confidence"])
                for dd in fd["detections"]
            ),
        )
        for fd in doc["frames"]
    )
    parametric = tuple(
        ParametricObservation(
            object_class=parse_object_class(od["class"]),
            box=OrientedBox(Vec3(*od["center"]), Vec3(*od["half_extents"]), od["yaw"]),
            confidence=od["confidence"],
            first_seen=od["first_seen"],
        )
        for od in doc["parametric"]
    )
    return ScanLog(
        intrinsics=intr, frames=frames, parametric=parametric,
        factors=doc.get("factors", {}), seed=doc.get("seed", 0),
        frame_rate=doc.get("frame_rate", 10.0),
    )
