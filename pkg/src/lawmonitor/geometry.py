"""2D geometry primitives: oriented rectangles, segments and sampled curves.

Pure functions over plain tuples/ndarrays; used by the world model for
overlap tests and by the intersection monitor for line crossings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

Point = tuple[float, float]


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def rect_corners(cx: float, cy: float, heading: float, length: float, width: float) -> list[Point]:
    """Corners of an oriented rectangle, length along the heading axis."""
    if length <= 0 or width <= 0:
        raise ValueError("degenerate rectangle")
    hl, hw = length / 2.0, width / 2.0
    c, s = math.cos(heading), math.sin(heading)
    local = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
    return [(cx + dx * c - dy * s, cy + dx * s + dy * c) for dx, dy in local]


@dataclass(frozen=True)
class Rect:
    """Oriented rectangle given by its four corners (ccw)."""

    corners: tuple[Point, Point, Point, Point]

    @staticmethod
    def from_pose(cx, cy, heading, length, width) -> "Rect":
        return Rect(tuple(rect_corners(cx, cy, heading, length, width)))

    def inflate(self, margin: float) -> "Rect":
        cx = sum(p[0] for p in self.corners) / 4.0
        cy = sum(p[1] for p in self.corners) / 4.0
        out = []
        for x, y in self.corners:
            dx, dy = x - cx, y - cy
            n = math.hypot(dx, dy)
            out.append((x + margin * dx / n, y + margin * dy / n))
        return Rect(tuple(out))


@dataclass(frozen=True)
class Segment:
    p1: Point
    p2: Point


@dataclass(frozen=True)
class CubicCurve:
    """Lateral offset as a cubic in the longitudinal coordinate.

    ``coeffs`` are in numpy polyval order (highest degree first); the curve
    is defined for x in [x_min, x_max].
    """

    coeffs: tuple[float, ...]
    x_min: float
    x_max: float

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("curve validity range is degenerate")

    def y(self, x):
        if isinstance(x, (int, float)):
            out = 0.0
            for c in self.coeffs:   # Horner; much cheaper than polyval here
                out = out * x + c
            return out
        return np.polyval(self.coeffs, x)

    def sample(self, step: float = 0.1, lo: float | None = None, hi: float | None = None) -> np.ndarray:
        lo = self.x_min if lo is None else max(lo, self.x_min)
        hi = self.x_max if hi is None else min(hi, self.x_max)
        if lo > hi:
            return np.empty((0, 2))
        n = max(2, int(math.ceil((hi - lo) / step)) + 1)
        xs = np.linspace(lo, hi, n)
        return np.column_stack([xs, self.y(xs)])


def _project(corners: Sequence[Point], ax: Point) -> tuple[float, float]:
    dots = [p[0] * ax[0] + p[1] * ax[1] for p in corners]
    return min(dots), max(dots)


def rects_overlap(a: Rect, b: Rect) -> bool:
    """Separating-axis test for two oriented rectangles (closed regions)."""
    for corners in (a.corners, b.corners):
        for i in range(4):
            x1, y1 = corners[i]
            x2, y2 = corners[(i + 1) % 4]
            ax = (-(y2 - y1), x2 - x1)
            lo1, hi1 = _project(a.corners, ax)
            lo2, hi2 = _project(b.corners, ax)
            if hi1 < lo2 or hi2 < lo1:
                return False
    return True


def point_in_rect(p: Point, r: Rect) -> bool:
    for i in range(4):
        x1, y1 = r.corners[i]
        x2, y2 = r.corners[(i + 1) % 4]
        if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) < -1e-12:
            return False
    return True


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """Closed-segment intersection, collinear touches included."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _between(p3, p4, p1):
        return True
    if d2 == 0 and _between(p3, p4, p2):
        return True
    if d3 == 0 and _between(p1, p2, p3):
        return True
    return d4 == 0 and _between(p1, p2, p4)


def _between(a: Point, b: Point, c: Point) -> bool:
    return min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12 and \
           min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12


def rect_segment_overlap(r: Rect, seg: Segment) -> bool:
    if point_in_rect(seg.p1, r) or point_in_rect(seg.p2, r):
        return True
    for i in range(4):
        if segments_intersect(r.corners[i], r.corners[(i + 1) % 4], seg.p1, seg.p2):
            return True
    return False


def rect_polyline_overlap(r: Rect, points: np.ndarray) -> bool:
    if len(points) == 0:
        return False
    if len(points) == 1:
        return point_in_rect((points[0][0], points[0][1]), r)
    pts = points.tolist() if isinstance(points, np.ndarray) else list(points)
    rx = [p[0] for p in r.corners]
    ry = [p[1] for p in r.corners]
    rx1, rx2, ry1, ry2 = min(rx), max(rx), min(ry), max(ry)
    for i in range(len(pts) - 1):
        (x1, y1), (x2, y2) = pts[i], pts[i + 1]
        # axis-aligned bounding-box rejection before the exact test
        if max(x1, x2) < rx1 or min(x1, x2) > rx2 or \
           max(y1, y2) < ry1 or min(y1, y2) > ry2:
            continue
        if rect_segment_overlap(r, Segment((x1, y1), (x2, y2))):
            return True
    return False


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> bool:
    """Ray-cast point-in-polygon; boundary points count as inside."""
    x, y = p
    inside = False
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if _orient((x1, y1), (x2, y2), p) == 0 and _between((x1, y1), (x2, y2), p):
            return True
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside
