"""Deterministic point-robot dynamics at a fixed timestep.

The robot's velocity snaps to the commanded velocity unless that would
exceed the acceleration limit, in which case it moves toward it at
exactly a_max. Position advances by forward Euler. Walls never constrain
the position; contact is only reported. There is no randomness anywhere,
so identical inputs replay bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .environment import WallMap, robot_wall_contact
from .geometry import Vec2
from .riskfield import RobotState
from .scaling import VelocityCommand


@dataclass(frozen=True, slots=True)
class SimConfig:
    dt: float = 0.01          # 100 Hz loop
    robot_radius: float = 0.2
    max_accel: float = 35.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.robot_radius > 0:
            raise ValueError(f"robot_radius must be positive, got {self.robot_radius!r}")
        if not self.max_accel > 0:
            raise ValueError(f"max_accel must be positive, got {self.max_accel!r}")


@dataclass(frozen=True, slots=True)
class StepResult:
    state: RobotState
    applied_accel: Vec2
    clamped: bool
    in_contact: bool


def step(
    state: RobotState, command: VelocityCommand, config: SimConfig, wall_map: WallMap
) -> StepResult:
    """Advance one tick toward the commanded velocity."""
    dv = command.v - state.velocity
    dv_norm = dv.norm()
    max_dv = config.max_accel * config.dt
    if dv_norm <= max_dv:
        new_velocity = command.v
        applied_accel = dv.scaled(1.0 / config.dt)
        clamped = False
    else:
        scale = max_dv / dv_norm
        new_velocity = state.velocity + dv.scaled(scale)
        applied_accel = dv.scaled(config.max_accel / dv_norm)
        clamped = True
    new_position = state.position + new_velocity.scaled(config.dt)
    new_state = RobotState(
        position=new_position, velocity=new_velocity, time=state.time + config.dt
    )
    return StepResult(
        state=new_state,
        applied_accel=applied_accel,
        clamped=clamped,
        in_contact=robot_wall_contact(new_position, config.robot_radius, wall_map),
    )


def run(
    initial: RobotState,
    commands: Iterable[VelocityCommand],
    config: SimConfig,
    wall_map: WallMap,
) -> list[StepResult]:
    """Fold step over a command stream; output length equals input length."""
    results = []
    state = initial
    for command in commands:
        result = step(state, command, config, wall_map)
        results.append(result)
        state = result.state
    return results
