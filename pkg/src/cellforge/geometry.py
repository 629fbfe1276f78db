"""Integer-coordinate 2-D kernel for layout shapes.

All coordinates are integer database units (1 dbu = 1 nm).  Values are
immutable after construction and every operation is a pure function, so
shapes can be shared freely across threads.

Only 45/90-degree geometry occurs in the devices built on top of this
kernel; the predicates below (intersection, containment) are exact integer
arithmetic, distances are the only place floats appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Union

from .errors import CornerTooLarge, HoleOutsideBody

DBU_PER_UM = 1000
COORD_MIN = -(2**31)
COORD_MAX = 2**31 - 1


def um(value: float) -> int:
    """Convert micrometres to integer dbu (the only float->dbu boundary)."""
    return round(value * DBU_PER_UM)


def to_um(value: int) -> float:
    return value / DBU_PER_UM


@dataclass(frozen=True, slots=True)
class Point:
    x: int
    y: int

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Point":
        return Point(-self.x, -self.y)


ORIGIN = Point(0, 0)


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned rectangle, lo <= hi on both axes."""

    lo: Point
    hi: Point

    def __post_init__(self):
        if self.lo.x > self.hi.x or self.lo.y > self.hi.y:
            raise ValueError(f"rect not normalized: {self.lo} .. {self.hi}")

    @classmethod
    def from_bounds(cls, x0: int, y0: int, x1: int, y1: int) -> "Rect":
        return cls(Point(min(x0, x1), min(y0, y1)), Point(max(x0, x1), max(y0, y1)))

    @property
    def width(self) -> int:
        return self.hi.x - self.lo.x

    @property
    def height(self) -> int:
        return self.hi.y - self.lo.y

    @property
    def center(self) -> Point:
        return Point((self.lo.x + self.hi.x) // 2, (self.lo.y + self.hi.y) // 2)

    def area(self) -> int:
        return self.width * self.height

    def expanded(self, d: int, dy: int | None = None) -> "Rect":
        """Grow (or shrink, d < 0) by d on x and dy (default d) on y."""
        if dy is None:
            dy = d
        return Rect(Point(self.lo.x - d, self.lo.y - dy), Point(self.hi.x + d, self.hi.y + dy))

    def translated(self, dx: int, dy: int) -> "Rect":
        return Rect(Point(self.lo.x + dx, self.lo.y + dy), Point(self.hi.x + dx, self.hi.y + dy))

    def contains_point(self, p: Point) -> bool:
        return self.lo.x <= p.x <= self.hi.x and self.lo.y <= p.y <= self.hi.y

    def contains_rect(self, other: "Rect") -> bool:
        return (self.lo.x <= other.lo.x and self.lo.y <= other.lo.y
                and self.hi.x >= other.hi.x and self.hi.y >= other.hi.y)

    def intersects(self, other: "Rect") -> bool:
        """True when the rects overlap or touch."""
        return (self.lo.x <= other.hi.x and other.lo.x <= self.hi.x
                and self.lo.y <= other.hi.y and other.lo.y <= self.hi.y)

    def union(self, other: "Rect") -> "Rect":
        return Rect(Point(min(self.lo.x, other.lo.x), min(self.lo.y, other.lo.y)),
                    Point(max(self.hi.x, other.hi.x), max(self.hi.y, other.hi.y)))

    def vertices(self) -> tuple[Point, ...]:
        """Corners counter-clockwise starting at lo."""
        return (self.lo, Point(self.hi.x, self.lo.y), self.hi, Point(self.lo.x, self.hi.y))


@dataclass(frozen=True, slots=True)
class Polygon:
    """Closed ring; the first vertex is not repeated at the end."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        v = self.vertices
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for i in range(len(v)):
            if v[i] == v[(i + 1) % len(v)]:
                raise ValueError(f"repeated consecutive vertex {v[i]}")


@dataclass(frozen=True, slots=True)
class OctagonWithHole:
    """Outer ring with one hole ring strictly inside it."""

    outer: Polygon
    hole: Polygon


@dataclass(frozen=True, slots=True)
class Path:
    """Manhattan centerline with a drawn width; ends are flush (no extension)."""

    points: tuple[Point, ...]
    width: int

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("path needs at least 2 points")
        if self.width <= 0:
            raise ValueError("path width must be positive")
        for a, b in zip(self.points, self.points[1:]):
            if a == b:
                raise ValueError("zero-length path segment")
            if a.x != b.x and a.y != b.y:
                raise ValueError("path segments must be axis-aligned")

    def length(self) -> int:
        """Exact centerline length (sum of segment lengths)."""
        return sum(abs(b.x - a.x) + abs(b.y - a.y)
                   for a, b in zip(self.points, self.points[1:]))


Geometry = Union[Rect, Polygon, OctagonWithHole, Path]


@dataclass(frozen=True, slots=True)
class Shape:
    layer: str
    geometry: Geometry
    net: str | None = None

    def with_net(self, net: str | None) -> "Shape":
        return replace(self, net=net)


@dataclass(frozen=True, slots=True)
class Transform:
    """Placement transform: mirror about the x axis, then rotate, then translate."""

    translation: Point = ORIGIN
    rotation: int = 0
    mirror_x: bool = False

    def __post_init__(self):
        if self.rotation not in (0, 90, 180, 270):
            raise ValueError(f"rotation must be a quarter turn, got {self.rotation}")

    def apply(self, p: Point) -> Point:
        x, y = p.x, p.y
        if self.mirror_x:
            y = -y
        r = self.rotation
        if r == 90:
            x, y = -y, x
        elif r == 180:
            x, y = -x, -y
        elif r == 270:
            x, y = y, -x
        return Point(x + self.translation.x, y + self.translation.y)

    def compose(self, other: "Transform") -> "Transform":
        """Transform equal to applying `other` first, then self."""
        rot = (self.rotation + (-other.rotation if self.mirror_x else other.rotation)) % 360
        return Transform(
            translation=self.apply(other.translation),
            rotation=rot,
            mirror_x=self.mirror_x != other.mirror_x,
        )

    def inverse(self) -> "Transform":
        rot = self.rotation if self.mirror_x else (-self.rotation) % 360
        inv = Transform(rotation=rot, mirror_x=self.mirror_x)
        return replace(inv, translation=inv.apply(-self.translation))


IDENTITY = Transform()


def snap(value: int, grid: int) -> int:
    """Nearest multiple of grid; ties round away from zero."""
    if grid <= 0:
        raise ValueError("grid must be positive")
    q, r = divmod(abs(value), grid)
    if 2 * r >= grid:
        q += 1
    return q * grid if value >= 0 else -q * grid


def chamfered_rect(rect: Rect, corner: int) -> Polygon:
    """Rectangle with all four corners cut at 45 degrees by `corner`.

    corner == 0 yields the plain 4-vertex rectangle ring.
    """
    if corner < 0:
        raise CornerTooLarge("corner must be >= 0")
    if 2 * corner > min(rect.width, rect.height):
        raise CornerTooLarge(
            f"corner {corner} too large for {rect.width}x{rect.height} body")
    if corner == 0:
        return Polygon(rect.vertices())
    x0, y0, x1, y1 = rect.lo.x, rect.lo.y, rect.hi.x, rect.hi.y
    c = corner
    raw = (
        Point(x0 + c, y0), Point(x1 - c, y0), Point(x1, y0 + c), Point(x1, y1 - c),
        Point(x1 - c, y1), Point(x0 + c, y1), Point(x0, y1 - c), Point(x0, y0 + c),
    )
    # 2*corner == width or height collapses a chamfer edge to a point
    dedup = tuple(p for i, p in enumerate(raw) if p != raw[(i + 1) % len(raw)])
    return Polygon(dedup)


def octagon_with_hole(layer: str, outer: Rect, inner: Rect, corner: int,
                      hole_corner: int = 0, net: str | None = None) -> Shape:
    """Chamfered-corner ring on `layer` with a hole cut by `inner`.

    hole_corner chamfers the hole ring the same way (0 keeps it rectangular).
    """
    outer_ring = chamfered_rect(outer, corner)
    hole_ring = chamfered_rect(inner, hole_corner)
    for v in hole_ring.vertices:
        if _point_in_ring(v, outer_ring.vertices) != 1:
            raise HoleOutsideBody(f"hole vertex {v} not strictly inside body")
    return Shape(layer, OctagonWithHole(outer_ring, hole_ring), net)


def polygon_area(p: Polygon) -> int | float:
    """Signed shoelace area; positive for counter-clockwise rings."""
    s = 0
    v = p.vertices
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        s += a.x * b.y - b.x * a.y
    return s // 2 if s % 2 == 0 else s / 2


def bbox(obj: Shape | Geometry) -> Rect:
    """Minimal axis-aligned enclosure."""
    g = obj.geometry if isinstance(obj, Shape) else obj
    if isinstance(g, Rect):
        return g
    if isinstance(g, Polygon):
        return _points_bbox(g.vertices)
    if isinstance(g, OctagonWithHole):
        return _points_bbox(g.outer.vertices)
    if isinstance(g, Path):
        rects = _path_rects(g)
        out = rects[0]
        for r in rects[1:]:
            out = out.union(r)
        return out
    raise TypeError(f"no bbox for {type(g).__name__}")


def _points_bbox(pts) -> Rect:
    xs = [p.x for p in pts]
    ys = [p.y for p in pts]
    return Rect(Point(min(xs), min(ys)), Point(max(xs), max(ys)))


def apply_transform(shape: Shape, t: Transform) -> Shape:
    g = shape.geometry
    if isinstance(g, Rect):
        a, b = t.apply(g.lo), t.apply(g.hi)
        new: Geometry = Rect.from_bounds(a.x, a.y, b.x, b.y)
    elif isinstance(g, Polygon):
        new = Polygon(tuple(t.apply(p) for p in g.vertices))
    elif isinstance(g, OctagonWithHole):
        new = OctagonWithHole(Polygon(tuple(t.apply(p) for p in g.outer.vertices)),
                              Polygon(tuple(t.apply(p) for p in g.hole.vertices)))
    elif isinstance(g, Path):
        new = Path(tuple(t.apply(p) for p in g.points), g.width)
    else:
        raise TypeError(f"cannot transform {type(g).__name__}")
    return replace(shape, geometry=new)


# --- boundary decomposition -------------------------------------------------
#
# Every geometry is reduced to rings: positive rings carry material, negative
# rings are holes.  Material = inside any positive ring and not strictly
# inside any negative ring.

def rings(g: Geometry) -> tuple[list[tuple[Point, ...]], list[tuple[Point, ...]]]:
    if isinstance(g, Rect):
        return [g.vertices()], []
    if isinstance(g, Polygon):
        return [g.vertices], []
    if isinstance(g, OctagonWithHole):
        return [g.outer.vertices], [g.hole.vertices]
    if isinstance(g, Path):
        return [r.vertices() for r in _path_rects(g)], []
    raise TypeError(f"no rings for {type(g).__name__}")


def _path_rects(p: Path) -> list[Rect]:
    """One rect per segment; interior joints extended half a width to cover corners."""
    lo_h = p.width // 2
    hi_h = p.width - lo_h
    out = []
    n = len(p.points)
    for i in range(n - 1):
        a, b = p.points[i], p.points[i + 1]
        ext_a = lo_h if i > 0 else 0
        ext_b = hi_h if i < n - 2 else 0
        if a.x == b.x:  # vertical
            y0, y1 = min(a.y, b.y), max(a.y, b.y)
            if a.y > b.y:
                ext_a, ext_b = ext_b, ext_a
            out.append(Rect(Point(a.x - lo_h, y0 - ext_a), Point(a.x + hi_h, y1 + ext_b)))
        else:
            x0, x1 = min(a.x, b.x), max(a.x, b.x)
            if a.x > b.x:
                ext_a, ext_b = ext_b, ext_a
            out.append(Rect(Point(x0 - ext_a, a.y - lo_h), Point(x1 + ext_b, a.y + hi_h)))
    return out


def _segments(ring: tuple[Point, ...]) -> Iterator[tuple[Point, Point]]:
    for i in range(len(ring)):
        yield ring[i], ring[(i + 1) % len(ring)]


def _orient(a: Point, b: Point, c: Point) -> int:
    v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return (v > 0) - (v < 0)


def _on_segment(a: Point, b: Point, p: Point) -> bool:
    if _orient(a, b, p) != 0:
        return False
    return (min(a.x, b.x) <= p.x <= max(a.x, b.x)
            and min(a.y, b.y) <= p.y <= max(a.y, b.y))


def _segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """Exact test: segments share at least one point (crossing or touching)."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if d1 != d2 and d3 != d4:
        return True
    return (_on_segment(q1, q2, p1) or _on_segment(q1, q2, p2)
            or _on_segment(p1, p2, q1) or _on_segment(p1, p2, q2))


def _point_in_ring(p: Point, ring: tuple[Point, ...]) -> int:
    """2 = on boundary, 1 = strictly inside, 0 = outside (exact)."""
    inside = False
    for a, b in _segments(ring):
        if _on_segment(a, b, p):
            return 2
        if (a.y > p.y) != (b.y > p.y):
            t = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
            if (b.y - a.y) > 0:
                inside ^= t > 0
            else:
                inside ^= t < 0
    return 1 if inside else 0


def shape_contains_point(g: Geometry, p: Point) -> int:
    """Material test honoring holes: 2 boundary, 1 strictly inside, 0 outside."""
    pos, neg = rings(g)
    best = 0
    for r in pos:
        c = _point_in_ring(p, r)
        if c == 2:
            return 2
        best = max(best, c)
    if best == 0:
        return 0
    for r in neg:
        c = _point_in_ring(p, r)
        if c == 2:
            return 2
        if c == 1:
            return 0
    return best


def shapes_intersect(a: Shape | Geometry, b: Shape | Geometry) -> bool:
    """True when the material of the two shapes overlaps or touches."""
    ga = a.geometry if isinstance(a, Shape) else a
    gb = b.geometry if isinstance(b, Shape) else b
    if isinstance(ga, Rect) and isinstance(gb, Rect):
        return ga.intersects(gb)
    if not bbox(ga).intersects(bbox(gb)):
        return False
    ra_pos, ra_neg = rings(ga)
    rb_pos, rb_neg = rings(gb)
    # hole rings are material boundary too: crossing one means leaving the hole
    for ra in ra_pos + ra_neg:
        for rb in rb_pos + rb_neg:
            for s1 in _segments(ra):
                for s2 in _segments(rb):
                    if _segments_touch(*s1, *s2):
                        return True
    # no boundary contact: one may lie strictly inside the other
    if shape_contains_point(gb, ra_pos[0][0]) == 1:
        return True
    if shape_contains_point(ga, rb_pos[0][0]) == 1:
        return True
    return False


def _point_seg_dist(p: Point, a: Point, b: Point) -> float:
    ax, ay = a.x, a.y
    dx, dy = b.x - ax, b.y - ay
    px, py = p.x - ax, p.y - ay
    ll = dx * dx + dy * dy
    t = 0.0 if ll == 0 else max(0.0, min(1.0, (px * dx + py * dy) / ll))
    ex, ey = px - t * dx, py - t * dy
    return math.hypot(ex, ey)


def _seg_seg_dist(p1: Point, p2: Point, q1: Point, q2: Point) -> float:
    if _segments_touch(p1, p2, q1, q2):
        return 0.0
    return min(_point_seg_dist(p1, q1, q2), _point_seg_dist(p2, q1, q2),
               _point_seg_dist(q1, p1, p2), _point_seg_dist(q2, p1, p2))


def segment_distance(p1: Point, p2: Point, q1: Point, q2: Point) -> float:
    """Minimum distance between two segments; 0.0 when they cross or touch."""
    return _seg_seg_dist(p1, p2, q1, q2)


def boundary_distance(a: Shape | Geometry, b: Shape | Geometry) -> float:
    """Minimum distance between the boundary rings of two shapes.

    Unlike min_spacing this ignores material containment: a shape strictly
    inside another still reports the gap between their outlines.
    """
    ga = a.geometry if isinstance(a, Shape) else a
    gb = b.geometry if isinstance(b, Shape) else b
    ra_pos, ra_neg = rings(ga)
    rb_pos, rb_neg = rings(gb)
    best = math.inf
    for ra in ra_pos + ra_neg:
        for rb in rb_pos + rb_neg:
            for s1 in _segments(ra):
                for s2 in _segments(rb):
                    d = _seg_seg_dist(*s1, *s2)
                    if d < best:
                        best = d
    return best


def min_spacing(a: Shape | Geometry, b: Shape | Geometry) -> float:
    """Minimum edge-to-edge distance; 0.0 when the shapes overlap or touch."""
    ga = a.geometry if isinstance(a, Shape) else a
    gb = b.geometry if isinstance(b, Shape) else b
    if isinstance(ga, Rect) and isinstance(gb, Rect):
        dx = max(ga.lo.x - gb.hi.x, gb.lo.x - ga.hi.x, 0)
        dy = max(ga.lo.y - gb.hi.y, gb.lo.y - ga.hi.y, 0)
        return math.hypot(dx, dy) if dx and dy else float(dx or dy)
    if shapes_intersect(ga, gb):
        return 0.0
    return boundary_distance(ga, gb)
