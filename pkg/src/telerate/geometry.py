"""Exact 2D primitives: vectors, segments, and capsule (stadium) queries.

Everything here is plain scalar math on immutable value types. The risk
field builds on these queries; the vectorized cloud evaluation in
``riskfield`` must agree with them (cross-checked in tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Absolute tolerance for geometric comparisons (meters-scale scenes,
# double precision).
GEOM_EPS = 1e-9


class DegenerateFrameError(ValueError):
    """Raised when a direction cannot be derived from coincident points."""


class UndefinedClosestPointError(ValueError):
    """Raised when the closest boundary point is requested from inside."""


@dataclass(frozen=True, slots=True)
class Vec2:
    """2D vector. Components must be finite; NaN/Inf never propagate."""

    x: float
    y: float

    def __post_init__(self):
        # Hot path: constructed every tick; keep the check branch-cheap.
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x!r}, {self.y!r})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def normalized(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise DegenerateFrameError("cannot normalize a zero vector")
        return Vec2(self.x / n, self.y / n)

    def perp(self) -> "Vec2":
        # +90 degree rotation
        return Vec2(-self.y, self.x)

    def rotated(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)


@dataclass(frozen=True, slots=True)
class Segment:
    """Line segment; a == b is allowed (degenerate segment = point)."""

    a: Vec2
    b: Vec2

    def length(self) -> float:
        return (self.b - self.a).norm()


@dataclass(frozen=True, slots=True)
class Capsule:
    """Stadium shape: all points within `radius` of the spine segment."""

    spine: Segment
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0) or not math.isfinite(self.radius):
            raise ValueError(f"capsule radius must be positive, got {self.radius!r}")


def closest_point_on_segment(p: Vec2, s: Segment) -> Vec2:
    """Point on s minimizing distance to p (projection clamped to [0,1])."""
    ab = s.b - s.a
    denom = ab.dot(ab)
    if denom == 0.0:
        return s.a
    t = (p - s.a).dot(ab) / denom
    t = min(1.0, max(0.0, t))
    return Vec2(s.a.x + t * ab.x, s.a.y + t * ab.y)


def segment_distance(p: Vec2, s: Segment) -> float:
    return (p - closest_point_on_segment(p, s)).norm()


def capsule_signed_distance(p: Vec2, c: Capsule) -> float:
    """Positive outside, zero on the boundary, negative inside.

    Equals dist(p, spine) - radius, so it is bounded below by -radius.
    """
    return segment_distance(p, c.spine) - c.radius


def capsule_boundary_closest_point(p: Vec2, c: Capsule) -> Vec2:
    """Closest point on the capsule boundary to a point strictly outside.

    Raises UndefinedClosestPointError for p inside or on the boundary;
    callers must branch on capsule_signed_distance first.
    """
    m = closest_point_on_segment(p, c.spine)
    d = (p - m).norm()
    if d <= c.radius:
        raise UndefinedClosestPointError(
            "closest boundary point undefined for a point inside or on the capsule"
        )
    scale = c.radius / d
    return Vec2(m.x + scale * (p.x - m.x), m.y + scale * (p.y - m.y))


def line_intersects_capsule(p: Vec2, direction: Vec2, c: Capsule) -> bool:
    """True iff the infinite line through p along `direction` meets the capsule.

    `direction` must be unit length (within GEOM_EPS). The perpendicular
    offset of a spine point q from the line is |cross(q - p, direction)|;
    that is an affine function of the spine parameter, so its minimum over
    the spine is zero if the endpoint offsets change sign, else the smaller
    endpoint offset.
    """
    if abs(direction.norm() - 1.0) > GEOM_EPS:
        raise ValueError("direction must be a unit vector")
    ca = (c.spine.a - p).cross(direction)
    cb = (c.spine.b - p).cross(direction)
    if ca * cb <= 0.0:
        return True
    return min(abs(ca), abs(cb)) <= c.radius
