"""The five forward-control methods mapping stick deflection to commanded
velocity.

All methods share the decomposition S = S_c * S_human * S_risk applied
per axis in the risk-aligned local frame:

* c:  constant scale, S_x = S_y = max_scale;
* h:  input scaling only, S_x = S_y = max_scale * S_human;
* r1: isotropic risk, S_x = S_y = max_scale * S_human * (1 - C_r);
* r2: per-axis risks C_rx / C_ry in the local frame;
* r3: per-axis risks counting only obstacles on the side the input
  commands motion toward.

The risk-gated methods zero the command before an obstacle can reach the
critical region, which is what makes them collision-free.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .environment import ObstacleCloud
from .geometry import Vec2
from .riskfield import (
    GLOBAL_FRAME,
    ControlParams,
    LocalFrame,
    RiskReport,
    RobotState,
    assess,
    critical_region,
    field_extent,
)


class Method(str, Enum):
    C = "c"
    H = "h"
    R1 = "r1"
    R2 = "r2"
    R3 = "r3"


@dataclass(frozen=True, slots=True)
class JoystickInput:
    """2-axis deflection, each component in [-1, 1], plus the confirm button."""

    p_i: Vec2
    button: bool = False

    def __post_init__(self):
        if abs(self.p_i.x) > 1.0 + 1e-9 or abs(self.p_i.y) > 1.0 + 1e-9:
            raise ValueError(f"joystick axes must be within [-1, 1], got {self.p_i}")


@dataclass(frozen=True, slots=True)
class ScaleDiagnostics:
    s_human: float
    s_risk: float  # isotropic 1 - c_r, logged for every method
    s_x: float     # effective total per-axis scale in the local frame
    s_y: float
    frame: LocalFrame
    risk: RiskReport


@dataclass(frozen=True, slots=True)
class VelocityCommand:
    v: Vec2
    diagnostics: ScaleDiagnostics


def clamp_radial(p: Vec2) -> Vec2:
    """Clamp deflection to the unit disk so |v| never exceeds max_scale."""
    n = p.norm()
    if n > 1.0:
        return Vec2(p.x / n, p.y / n)
    return p


def human_scale(p_i: Vec2, input_threshold: float) -> float:
    """min(1, |p_i| / threshold): fine control below the threshold."""
    if not input_threshold > 0:
        raise ValueError(f"input_threshold must be positive, got {input_threshold!r}")
    return min(1.0, p_i.norm() / input_threshold)


def _zero_risk_report(state: RobotState, params: ControlParams) -> RiskReport:
    return RiskReport(
        capsule=critical_region(state, params),
        d=field_extent(state.velocity.norm(), params),
        c_r=0.0,
        argmax_point=None,
        frame=GLOBAL_FRAME,
        c_rx=0.0,
        c_ry=0.0,
        c_rx_directed=0.0,
        c_ry_directed=0.0,
    )


def compute_command(
    method: Method,
    stick: JoystickInput,
    state: RobotState,
    cloud: ObstacleCloud,
    params: ControlParams,
    assess_risk: bool = True,
) -> VelocityCommand:
    """Commanded velocity plus full scale/risk diagnostics for one tick.

    Methods c and h do not consume the risk field, but it is still
    assessed by default so logs stay comparable across methods; pass
    assess_risk=False to skip that work in production runs.
    """
    method = Method(method)
    p = clamp_radial(stick.p_i)
    s_human = human_scale(p, params.input_threshold)

    if assess_risk or method in (Method.R1, Method.R2, Method.R3):
        # Directed risks look at the half the input pushes toward; at a
        # zero component the positive side is used.
        def signs(frame: LocalFrame) -> tuple[int, int]:
            local = frame.to_local(p)
            return (1 if local.x >= 0.0 else -1, 1 if local.y >= 0.0 else -1)

        risk = assess(state, cloud, params, motion_signs=signs)
    else:
        risk = _zero_risk_report(state, params)

    s_c = params.max_scale
    if method is Method.C:
        s_x = s_y = s_c
        v = p.scaled(s_c)
    elif method is Method.H:
        s_x = s_y = s_c * s_human
        v = p.scaled(s_x)
    elif method is Method.R1:
        s_x = s_y = s_c * s_human * (1.0 - risk.c_r)
        v = p.scaled(s_x)
    else:
        if method is Method.R2:
            rx, ry = risk.c_rx, risk.c_ry
        else:
            rx, ry = risk.c_rx_directed, risk.c_ry_directed
        s_x = s_c * s_human * (1.0 - rx)
        s_y = s_c * s_human * (1.0 - ry)
        local = risk.frame.to_local(p)
        v = risk.frame.to_global(Vec2(s_x * local.x, s_y * local.y))

    diagnostics = ScaleDiagnostics(
        s_human=s_human, s_risk=1.0 - risk.c_r, s_x=s_x, s_y=s_y,
        frame=risk.frame, risk=risk,
    )
    return VelocityCommand(v=v, diagnostics=diagnostics)


def apply_scales(stick: JoystickInput, diag: ScaleDiagnostics) -> Vec2:
    """Recompute the command from per-axis scales (used after slew limiting)."""
    p = clamp_radial(stick.p_i)
    local = diag.frame.to_local(p)
    return diag.frame.to_global(Vec2(diag.s_x * local.x, diag.s_y * local.y))


def slew_limit(
    prev: ScaleDiagnostics,
    nxt: ScaleDiagnostics,
    dt: float,
    rate: float,
    max_scale: float,
) -> ScaleDiagnostics:
    """Cap how fast the per-axis scales may rise between consecutive ticks.

    Each of s_x, s_y may increase by at most rate * max_scale * dt per
    step; decreases always pass through so the safety gating stays
    instantaneous. `rate` is the allowed rise as a fraction of max_scale
    per second.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    cap = rate * max_scale * dt
    s_x = min(nxt.s_x, prev.s_x + cap) if nxt.s_x > prev.s_x else nxt.s_x
    s_y = min(nxt.s_y, prev.s_y + cap) if nxt.s_y > prev.s_y else nxt.s_y
    if s_x == nxt.s_x and s_y == nxt.s_y:
        return nxt
    return replace(nxt, s_x=s_x, s_y=s_y)
