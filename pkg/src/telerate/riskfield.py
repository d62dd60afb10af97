"""Collision-risk field around the robot's stopping envelope.

The critical region is a capsule over the path the robot sweeps while
braking as hard as it can from its current velocity; any obstacle point
inside it makes a collision unavoidable. A potential band of thickness
``d`` around the capsule assigns each obstacle point a risk in [0, 1]:
1 at the capsule boundary, falling linearly to 0 at distance ``d``.

Three aggregates are computed over the sampled obstacle cloud:

* isotropic risk: the maximum point risk anywhere;
* directional risks: per-axis risks in a local frame whose X-axis points
  at the maximum-risk obstacle point, using the axis component of the
  obstacle-to-region vector;
* directed risks: directional risks restricted to the half the robot is
  being commanded toward.

Cloud-wide evaluation is vectorized with numpy so a 100 Hz control loop
can afford it; the scalar geometry in :mod:`telerate.geometry` is the
reference the vector path is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .environment import ObstacleCloud
from .geometry import GEOM_EPS, Capsule, Segment, Vec2, capsule_signed_distance

MotionSigns = Union[tuple[int, int], Callable[["LocalFrame"], tuple[int, int]]]


@dataclass(frozen=True, slots=True)
class ControlParams:
    """All control-loop constants.

    Defaults reproduce the original study parameters: max_scale 5.0,
    input_threshold 0.5, robot_radius 0.2 m, max_accel 35 m/s^2,
    field_base 0.3 m, field_speed_gain 1.0 s.
    """

    max_scale: float = 5.0          # S_c, commanded speed at full deflection
    input_threshold: float = 0.5    # P_c, deflection below which input scaling bites
    robot_radius: float = 0.2       # capsule radius, m
    max_accel: float = 35.0         # braking/accel limit, m/s^2
    field_base: float = 0.3         # field thickness at rest, m
    field_speed_gain: float = 1.0   # extra thickness per unit speed, s
    sample_resolution: float = 0.02  # obstacle sampling step, m
    slew_limit: Optional[float] = None  # max scale increase, fraction of max_scale per s

    def __post_init__(self):
        for name in ("max_scale", "input_threshold", "robot_radius", "max_accel",
                     "field_base", "field_speed_gain", "sample_resolution"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"ControlParams.{name} must be positive, got {v!r}")
        if self.slew_limit is not None and not self.slew_limit > 0:
            raise ValueError(f"ControlParams.slew_limit must be positive, got {self.slew_limit!r}")


@dataclass(frozen=True, slots=True)
class RobotState:
    position: Vec2
    velocity: Vec2
    time: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.time):
            raise ValueError(f"RobotState.time must be finite, got {self.time!r}")


@dataclass(frozen=True, slots=True)
class LocalFrame:
    """Risk-aligned orthonormal frame; y_hat is x_hat rotated +90 degrees."""

    x_hat: Vec2
    y_hat: Vec2

    def __post_init__(self):
        if abs(self.x_hat.norm() - 1.0) > GEOM_EPS or abs(self.y_hat.norm() - 1.0) > GEOM_EPS:
            raise ValueError("frame axes must be unit vectors")
        if abs(self.x_hat.dot(self.y_hat)) > GEOM_EPS:
            raise ValueError("frame axes must be orthogonal")
        perp = self.x_hat.perp()
        if abs(perp.x - self.y_hat.x) > GEOM_EPS or abs(perp.y - self.y_hat.y) > GEOM_EPS:
            raise ValueError("y_hat must be x_hat rotated +90 degrees")

    def to_local(self, v: Vec2) -> Vec2:
        return Vec2(v.dot(self.x_hat), v.dot(self.y_hat))

    def to_global(self, v: Vec2) -> Vec2:
        return Vec2(
            v.x * self.x_hat.x + v.y * self.y_hat.x,
            v.x * self.x_hat.y + v.y * self.y_hat.y,
        )

    def angle(self) -> float:
        return math.atan2(self.x_hat.y, self.x_hat.x)


GLOBAL_FRAME = LocalFrame(x_hat=Vec2(1.0, 0.0), y_hat=Vec2(0.0, 1.0))


@dataclass(frozen=True, slots=True)
class RiskReport:
    capsule: Capsule
    d: float                       # field extent, m
    c_r: float                     # isotropic risk
    argmax_point: Optional[Vec2]   # first cloud point attaining c_r; None iff c_r == 0
    frame: LocalFrame
    c_rx: float
    c_ry: float
    c_rx_directed: float
    c_ry_directed: float


def critical_region(state: RobotState, params: ControlParams) -> Capsule:
    """Capsule swept by the robot while braking at max_accel from velocity V.

    Spine runs from the current position along V for |V|^2 / (2 a_max);
    total length is 2 r + |V|^2 / (2 a_max). Zero velocity gives a circle.
    """
    speed = state.velocity.norm()
    if speed == 0.0:
        spine = Segment(state.position, state.position)
    else:
        stop_dist = speed * speed / (2.0 * params.max_accel)
        tip = state.position + state.velocity.scaled(stop_dist / speed)
        spine = Segment(state.position, tip)
    return Capsule(spine=spine, radius=params.robot_radius)


def field_extent(speed: float, params: ControlParams) -> float:
    """Field thickness d = field_base + field_speed_gain * speed."""
    if speed < 0:
        raise ValueError(f"speed must be nonnegative, got {speed!r}")
    return params.field_base + params.field_speed_gain * speed


def risk_from_distance(d_o: float, d: float) -> float:
    """Piecewise point risk: 0 beyond d, 1 inside the region, linear between."""
    if d_o > d:
        return 0.0
    if d_o < 0.0:
        return 1.0
    return (d - d_o) / d


def point_risk(p: Vec2, capsule: Capsule, d: float) -> float:
    """Risk of a single obstacle point against the critical region."""
    if not d > 0:
        raise ValueError(f"field extent d must be positive, got {d!r}")
    return risk_from_distance(capsule_signed_distance(p, capsule), d)


def build_frame(robot_pos: Vec2, argmax_point: Optional[Vec2]) -> LocalFrame:
    """Frame with x_hat toward the max-risk point; global frame when none.

    With zero risk every scale factor is 1, so the frame choice cannot
    affect the command there.
    """
    if argmax_point is None:
        return GLOBAL_FRAME
    x_hat = (argmax_point - robot_pos).normalized()
    return LocalFrame(x_hat=x_hat, y_hat=x_hat.perp())


# -- vectorized cloud internals ---------------------------------------------

def _spine_rel(
    pts_x: np.ndarray, pts_y: np.ndarray, capsule: Capsule
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-point offsets from the capsule spine.

    Returns (rel_x, rel_y, dx, dy, dist): rel is p - spine.a, (dx, dy) is
    p - m with m the closest spine point, dist its norm.
    """
    a = capsule.spine.a
    ab = capsule.spine.b - capsule.spine.a
    denom = ab.dot(ab)
    rel_x = pts_x - a.x
    rel_y = pts_y - a.y
    if denom == 0.0:
        dx, dy = rel_x, rel_y
    else:
        t = (rel_x * ab.x + rel_y * ab.y) / denom
        t = np.minimum(1.0, np.maximum(0.0, t))
        dx = rel_x - t * ab.x
        dy = rel_y - t * ab.y
    dist = np.hypot(dx, dy)
    return rel_x, rel_y, dx, dy, dist


def _point_risks(sd: np.ndarray, d: float) -> np.ndarray:
    # Same values as the scalar piecewise form: clip((d - sd)/d, 0, 1).
    return np.minimum(1.0, np.maximum(0.0, (d - sd) / d))


def _axis_risks(
    rel_x: np.ndarray,
    rel_y: np.ndarray,
    dx: np.ndarray,
    dy: np.ndarray,
    dist: np.ndarray,
    sd: np.ndarray,
    capsule: Capsule,
    d: float,
    u: Vec2,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point axis risks and the axis coordinate used for side splits.

    The field has no support beyond distance d from the critical region,
    so points with d_o > d contribute nothing on any axis (this is also
    what makes every per-axis scale equal 1 whenever the isotropic risk
    is zero). Returns (risks, side): risks is 0 for points outside the
    field or whose axis line misses the capsule, 1 for eligible points
    inside/on the capsule, else the piecewise form of the axis component
    of (p - q); side is (p - m) . u.
    """
    # Eligibility = line_intersects_capsule, vectorized: the perpendicular
    # offset of a spine endpoint from the line through p along u.
    ab = capsule.spine.b - capsule.spine.a
    ca = rel_y * u.x - rel_x * u.y            # cross(a - p, u)
    cb = ca + (ab.x * u.y - ab.y * u.x)       # cross(b - p, u)
    eligible = (ca * cb <= 0.0) | (np.minimum(np.abs(ca), np.abs(cb)) <= capsule.radius)
    eligible &= sd <= d
    side = dx * u.x + dy * u.y
    # For p outside, q = m + r*(p-m)/|p-m|, so (p-q).u = sd * (p-m).u / |p-m|.
    d_axis = np.abs(side * (sd / np.where(dist > 0.0, dist, 1.0)))
    risks = np.where(sd <= 0.0, 1.0, np.maximum(0.0, (d - d_axis) / d))
    risks = risks * eligible
    return risks, side


def _axis_pair_risks(
    rel_x: np.ndarray,
    rel_y: np.ndarray,
    dx: np.ndarray,
    dy: np.ndarray,
    dist: np.ndarray,
    sd: np.ndarray,
    capsule: Capsule,
    d: float,
    frame: LocalFrame,
    sign_x: int,
    sign_y: int,
) -> tuple[float, float, float, float]:
    """Both axes of _axis_risks fused (shared masks and projections).

    Returns (c_rx, c_ry, c_rx_directed, c_ry_directed); must agree with
    per-axis _axis_risks exactly.
    """
    ux, uy = frame.x_hat.x, frame.x_hat.y  # y_hat is (-uy, ux)
    ab = capsule.spine.b - capsule.spine.a
    # cross(a-p, x_hat) = rel_y*ux - rel_x*uy; cross(a-p, y_hat) = -(rel . x_hat)
    ca_x = rel_y * ux - rel_x * uy
    ca_y = -(rel_x * ux + rel_y * uy)
    cb_x = ca_x + (ab.x * uy - ab.y * ux)
    cb_y = ca_y + (ab.x * ux + ab.y * uy)
    in_field = sd <= d
    inside = sd <= 0.0
    ratio = sd / np.where(dist > 0.0, dist, 1.0)
    out = []
    for ca, cb, side_u, sign in (
        (ca_x, cb_x, (ux, uy), sign_x),
        (ca_y, cb_y, (-uy, ux), sign_y),
    ):
        eligible = (ca * cb <= 0.0) | (np.minimum(np.abs(ca), np.abs(cb)) <= capsule.radius)
        eligible &= in_field
        side = dx * side_u[0] + dy * side_u[1]
        d_axis = np.abs(side * ratio)
        risks = np.where(inside, 1.0, np.maximum(0.0, (d - d_axis) / d))
        risks = risks * eligible
        mask = side >= 0.0 if sign > 0 else side <= 0.0
        out.append((_max_or_zero(risks), _max_or_zero(risks * mask)))
    return out[0][0], out[1][0], out[0][1], out[1][1]


def _max_or_zero(values: np.ndarray) -> float:
    return float(values.max()) if values.size else 0.0


def isotropic_risk(
    cloud: ObstacleCloud, capsule: Capsule, d: float
) -> tuple[float, Optional[Vec2]]:
    """Maximum point risk over the cloud and the first point attaining it.

    The argmax point is None exactly when the risk is zero (including an
    empty cloud).
    """
    if not d > 0:
        raise ValueError(f"field extent d must be positive, got {d!r}")
    pts = cloud.points
    if pts.shape[0] == 0:
        return 0.0, None
    _, _, _, _, dist = _spine_rel(pts[:, 0], pts[:, 1], capsule)
    risks = _point_risks(dist - capsule.radius, d)
    c_r = float(risks.max())
    if c_r == 0.0:
        return 0.0, None
    idx = int(np.argmax(risks))  # first occurrence: deterministic tie-break
    return c_r, Vec2(float(pts[idx, 0]), float(pts[idx, 1]))


def _axis_unit(frame: LocalFrame, axis: str) -> Vec2:
    if axis == "x":
        return frame.x_hat
    if axis == "y":
        return frame.y_hat
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def directional_risk(
    cloud: ObstacleCloud, capsule: Capsule, d: float, frame: LocalFrame, axis: str
) -> float:
    """Max axis risk over field points whose axis line intersects the capsule.

    The eligible set is the intersection of line_intersects_capsule with
    the field support (d_o <= d); the per-point value uses the axis
    component of the vector to the closest boundary point, so it is never
    below the isotropic risk of the same point.
    """
    if not d > 0:
        raise ValueError(f"field extent d must be positive, got {d!r}")
    pts = cloud.points
    if pts.shape[0] == 0:
        return 0.0
    u = _axis_unit(frame, axis)
    rel_x, rel_y, dx, dy, dist = _spine_rel(pts[:, 0], pts[:, 1], capsule)
    risks, _ = _axis_risks(
        rel_x, rel_y, dx, dy, dist, dist - capsule.radius, capsule, d, u
    )
    return _max_or_zero(risks)


def directed_risk(
    cloud: ObstacleCloud,
    capsule: Capsule,
    d: float,
    frame: LocalFrame,
    axis: str,
    motion_sign: int,
) -> float:
    """Directional risk restricted to the half the motion points into.

    The split is measured by the axis coordinate of p relative to the
    capsule spine's nearest point; points exactly on the split plane
    count for both signs.
    """
    if not d > 0:
        raise ValueError(f"field extent d must be positive, got {d!r}")
    if motion_sign not in (1, -1):
        raise ValueError(f"motion_sign must be +1 or -1, got {motion_sign!r}")
    pts = cloud.points
    if pts.shape[0] == 0:
        return 0.0
    u = _axis_unit(frame, axis)
    rel_x, rel_y, dx, dy, dist = _spine_rel(pts[:, 0], pts[:, 1], capsule)
    risks, side = _axis_risks(
        rel_x, rel_y, dx, dy, dist, dist - capsule.radius, capsule, d, u
    )
    mask = side >= 0.0 if motion_sign > 0 else side <= 0.0
    return _max_or_zero(risks * mask)


def assess(
    state: RobotState,
    cloud: ObstacleCloud,
    params: ControlParams,
    motion_signs: MotionSigns = (1, 1),
) -> RiskReport:
    """Full risk evaluation for one state: isotropic, frame, per-axis risks.

    motion_signs selects the half-space per axis for the directed risks;
    it may be a (sign_x, sign_y) pair or a callable receiving the local
    frame and returning one, for callers whose signs depend on the frame.
    """
    capsule = critical_region(state, params)
    d = field_extent(state.velocity.norm(), params)
    pts = cloud.points

    empty = RiskReport(
        capsule=capsule, d=d, c_r=0.0, argmax_point=None, frame=GLOBAL_FRAME,
        c_rx=0.0, c_ry=0.0, c_rx_directed=0.0, c_ry_directed=0.0,
    )
    if pts.shape[0] == 0:
        return empty

    pts_x = pts[:, 0]
    pts_y = pts[:, 1]
    rel_x, rel_y, dx, dy, dist = _spine_rel(pts_x, pts_y, capsule)
    sd = dist - capsule.radius

    # Points beyond the field extent contribute zero to every aggregate;
    # the per-axis work then runs on the (usually small) remainder with
    # results identical to a full evaluation.
    keep = np.flatnonzero(sd <= d)
    if keep.size == 0:
        return empty
    if keep.size < sd.size:
        pts_x, pts_y = pts_x[keep], pts_y[keep]
        rel_x, rel_y = rel_x[keep], rel_y[keep]
        dx, dy, dist, sd = dx[keep], dy[keep], dist[keep], sd[keep]

    iso = _point_risks(sd, d)
    c_r = float(iso.max())
    argmax_point = None
    if c_r > 0.0:
        idx = int(np.argmax(iso))  # keep preserves cloud order: first wins
        argmax_point = Vec2(float(pts_x[idx]), float(pts_y[idx]))
    frame = build_frame(state.position, argmax_point)

    if callable(motion_signs):
        motion_signs = motion_signs(frame)
    sign_x, sign_y = motion_signs
    if sign_x not in (1, -1) or sign_y not in (1, -1):
        raise ValueError(f"motion signs must be +1 or -1, got {motion_signs!r}")

    c_rx, c_ry, c_rx_dir, c_ry_dir = _axis_pair_risks(
        rel_x, rel_y, dx, dy, dist, sd, capsule, d, frame, sign_x, sign_y
    )
    return RiskReport(
        capsule=capsule,
        d=d,
        c_r=c_r,
        argmax_point=argmax_point,
        frame=frame,
        c_rx=c_rx,
        c_ry=c_ry,
        c_rx_directed=c_rx_dir,
        c_ry_directed=c_ry_dir,
    )
