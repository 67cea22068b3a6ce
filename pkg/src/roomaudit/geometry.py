"""Low-level 3D math: vectors, yaw-oriented boxes, polygons, camera transforms.

Conventions used throughout the package: right-handed world frame, z up,
floor at z = 0, lengths in meters, angles in radians. Camera frames follow
the computer-vision convention (x right, y down, z forward).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
RAY_EPS = 1e-6  # minimum ray parameter for a hit to count


def wrap_angle(a: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> Vec3:
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: Vec3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: Vec3) -> Vec3:
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> Vec3:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def distance_to(self, other: Vec3) -> float:
        return (self - other).norm()

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x, self.y, self.z))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @staticmethod
    def from_array(a) -> Vec3:
        return Vec3(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True, slots=True)
class OrientedBox:
    """A 3D box with a yaw rotation about the vertical axis.

    ``half_extents`` are along the box's local x (width), y (depth) and
    z (height) axes; yaw rotates local x/y into the world.
    """

    center: Vec3
    half_extents: Vec3
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    @property
    def top(self) -> float:
        return self.center.z + self.half_extents.z

    @property
    def bottom(self) -> float:
        return self.center.z - self.half_extents.z

    def to_local(self, p: Vec3) -> Vec3:
        c, s = math.cos(-self.yaw), math.sin(-self.yaw)
        dx, dy = p.x - self.center.x, p.y - self.center.y
        return Vec3(c * dx - s * dy, s * dx + c * dy, p.z - self.center.z)

    def rotate_to_world(self, v: Vec3) -> Vec3:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return Vec3(c * v.x - s * v.y, s * v.x + c * v.y, v.z)

    def contains(self, p: Vec3, tol: float = 0.0) -> bool:
        q = self.to_local(p)
        h = self.half_extents
        return abs(q.x) <= h.x + tol and abs(q.y) <= h.y + tol and abs(q.z) <= h.z + tol

    def contains_xy(self, x: float, y: float, tol: float = 0.0) -> bool:
        """Point-in-rotated-rectangle test on the horizontal footprint."""
        q = self.to_local(Vec3(x, y, self.center.z))
        return abs(q.x) <= self.half_extents.x + tol and abs(q.y) <= self.half_extents.y + tol

    def corners(self) -> list[Vec3]:
        h = self.half_extents
        out = []
        for sx in (-1.0, 1.0):
            for sy in (-1.0, 1.0):
                for sz in (-1.0, 1.0):
                    local = Vec3(sx * h.x, sy * h.y, sz * h.z)
                    out.append(self.center + self.rotate_to_world(local))
        return out

    def footprint(self) -> list[tuple[float, float]]:
        h = self.half_extents
        pts = []
        for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
            w = self.rotate_to_world(Vec3(sx * h.x, sy * h.y, 0.0))
            pts.append((self.center.x + w.x, self.center.y + w.y))
        return pts


def ray_box_t(origin: Vec3, direction: Vec3, box: OrientedBox) -> float | None:
    """Nearest positive ray parameter against a box, slab method in local frame.

    Rays starting inside the box return the exit-face parameter.
    """
    o = box.to_local(origin)
    c, s = math.cos(-box.yaw), math.sin(-box.yaw)
    dl = Vec3(c * direction.x - s * direction.y, s * direction.x + c * direction.y, direction.z)
    t_enter, t_exit = -math.inf, math.inf
    for oc, dc, h in ((o.x, dl.x, box.half_extents.x),
                      (o.y, dl.y, box.half_extents.y),
                      (o.z, dl.z, box.half_extents.z)):
        if abs(dc) < 1e-12:
            if abs(oc) > h:
                return None
            continue
        t1, t2 = (-h - oc) / dc, (h - oc) / dc
        if t1 > t2:
            t1, t2 = t2, t1
        t_enter = max(t_enter, t1)
        t_exit = min(t_exit, t2)
    if t_enter > t_exit or t_exit <= RAY_EPS:
        return None
    return t_enter if t_enter > RAY_EPS else t_exit


def polygon_area(poly: list[tuple[float, float]]) -> float:
    """Signed area; positive for counter-clockwise vertex order."""
    a = 0.0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        a += x1 * y2 - x2 * y1
    return a / 2.0


def polygon_centroid(poly: list[tuple[float, float]]) -> tuple[float, float]:
    a = polygon_area(poly)
    if abs(a) < 1e-12:
        xs = [p[0] for p in poly]
        ys = [p[1] for p in poly]
        return sum(xs) / len(xs), sum(ys) / len(ys)
    cx = cy = 0.0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        w = x1 * y2 - x2 * y1
        cx += (x1 + x2) * w
        cy += (y1 + y2) * w
    return cx / (6.0 * a), cy / (6.0 * a)


def point_in_polygon(x: float, y: float, poly: list[tuple[float, float]],
                     include_boundary: bool = True) -> bool:
    """Even-odd test; points on an edge count as inside when requested."""
    n = len(poly)
    if include_boundary:
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            ex, ey = x2 - x1, y2 - y1
            ln2 = ex * ex + ey * ey
            if ln2 == 0.0:
                continue
            t = ((x - x1) * ex + (y - y1) * ey) / ln2
            t = min(1.0, max(0.0, t))
            px, py = x1 + t * ex, y1 + t * ey
            if (x - px) ** 2 + (y - py) ** 2 <= 1e-18:
                return True
    inside = False
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xcross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xcross:
                inside = not inside
    return inside


def _segments_properly_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def polygon_is_simple(poly: list[tuple[float, float]]) -> bool:
    """No two non-adjacent edges may cross."""
    n = len(poly)
    if n < 3:
        return False
    edges = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_properly_intersect(*edges[i], *edges[j]):
                return False
    return True


def iou_2d(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    """Intersection over union of two (x0, y0, x1, y1) rectangles."""
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix1 - ix0), max(0.0, iy1 - iy0)
    inter = iw * ih
    area_a = max(0.0, a[2] - a[0]) * max(0.0, a[3] - a[1])
    area_b = max(0.0, b[2] - b[0]) * max(0.0, b[3] - b[1])
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return inter / union


# Camera rotations are 3x3 matrices whose columns are the camera's
# right/down/forward axes expressed in world coordinates.

def look_at_rotation(eye: Vec3, target: Vec3) -> np.ndarray:
    forward = (target - eye).as_array()
    n = np.linalg.norm(forward)
    if n < 1e-12:
        raise ValueError("look_at target coincides with eye")
    forward /= n
    up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up)
    rn = np.linalg.norm(right)
    if rn < 1e-9:
        # Looking straight up/down: pick a stable right axis.
        right = np.array([1.0, 0.0, 0.0])
        rn = 1.0
    right /= rn
    down = np.cross(forward, right)
    return np.column_stack([right, down, forward])


def quat_from_matrix(m: np.ndarray) -> tuple[float, float, float, float]:
    """Rotation matrix to unit quaternion (w, x, y, z) with w >= 0."""
    t = np.trace(m)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2.0
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    q /= np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    return (float(q[0]), float(q[1]), float(q[2]), float(q[3]))


def matrix_from_quat(q: tuple[float, float, float, float]) -> np.ndarray:
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    w, x, y, z = w / n, x / n, y / n, z / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
