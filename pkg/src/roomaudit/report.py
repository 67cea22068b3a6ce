"""Floorplan rendering: rooms, walls with portal gaps, object footprints and
one marker per finding, as a deterministic SVG document."""
from __future__ import annotations

from .assess import Assessment
from .scene import Scene

SCALE = 60.0     # px per meter
MARGIN = 30.0

_ROOM_FILL = "#f7f6f2"
_WALL_COLOR = "#4a4a4a"
_WINDOW_COLOR = "#8fb8d8"
_OBJECT_FILL = "rgba(120,160,200,0.35)"
_OBJECT_STROKE = "#5b8bb5"
_MARKER_FILL = "#d0312d"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_floorplan(scene: Scene, assessment: Assessment | None = None) -> str:
    """SVG floorplan; byte-stable for fixed inputs."""
    minx, miny, maxx, maxy = scene.bounds_xy()
    width = (maxx - minx) * SCALE + 2 * MARGIN
    height = (maxy - miny) * SCALE + 2 * MARGIN

    def sx(x: float) -> float:
        return (x - minx) * SCALE + MARGIN

    def sy(y: float) -> float:
        return (maxy - y) * SCALE + MARGIN

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">')
    parts.append(f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>')

    for room in scene.rooms:
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in room.floor)
        parts.append(f'<polygon points="{pts}" fill="{_ROOM_FILL}" stroke="#c9c5bb" stroke-width="1"/>')
        cx, cy = room.centroid()
        parts.append(
            f'<text x="{_fmt(sx(cx))}" y="{_fmt(sy(cy))}" font-family="sans-serif" '
            f'font-size="11" fill="#b0aa9c" text-anchor="middle">{room.name}</text>')

    for room in scene.rooms:
        for wall in room.walls:
            u = wall.direction()
            spans = _solid_spans(wall.length, [(p.offset, p.offset + p.width, p.kind.value)
                                               for p in wall.portals])
            w_px = max(2.0, wall.thickness * SCALE)
            for s0, s1 in spans:
                a = wall.a + u * s0
                b = wall.a + u * s1
                parts.append(
                    f'<line x1="{_fmt(sx(a.x))}" y1="{_fmt(sy(a.y))}" '
                    f'x2="{_fmt(sx(b.x))}" y2="{_fmt(sy(b.y))}" '
                    f'stroke="{_WALL_COLOR}" stroke-width="{_fmt(w_px)}"/>')
            for p in wall.portals:
                if p.kind.value != "window":
                    continue
                a = wall.a + u * p.offset
                b = wall.a + u * (p.offset + p.width)
                parts.append(
                    f'<line x1="{_fmt(sx(a.x))}" y1="{_fmt(sy(a.y))}" '
                    f'x2="{_fmt(sx(b.x))}" y2="{_fmt(sy(b.y))}" '
                    f'stroke="{_WINDOW_COLOR}" stroke-width="2"/>')

    for obj in sorted(scene.objects, key=lambda o: o.id):
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in obj.box.footprint())
        parts.append(
            f'<polygon points="{pts}" fill="{_OBJECT_FILL}" '
            f'stroke="{_OBJECT_STROKE}" stroke-width="1"><title>{obj.id}</title></polygon>')

    if assessment is not None:
        for f in assessment.findings:
            x, y = sx(f.anchor.x), sy(f.anchor.y)
            parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="{_MARKER_FILL}" '
                f'stroke="#7a100d" stroke-width="1"/>')
            parts.append(
                f'<text x="{_fmt(x + 7)}" y="{_fmt(y - 6)}" font-family="sans-serif" '
                f'font-size="9" fill="#7a100d">{_escape(f.rule_id)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _solid_spans(length: float, cutouts: list[tuple[float, float, str]]) -> list[tuple[float, float]]:
    """Wall intervals left solid once full-height portal gaps are removed."""
    gaps = sorted((max(0.0, a), min(length, b)) for a, b, _kind in cutouts)
    spans = []
    cursor = 0.0
    for a, b in gaps:
        if a > cursor:
            spans.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < length - 1e-9:
        spans.append((cursor, length))
    return spans
