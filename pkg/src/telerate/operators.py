"""Scripted operator policies for headless, reproducible evaluation.

Three policies produce stick inputs:

* waypoint: seeks the trial targets via the map's interior route points,
  pressing the confirm button when stopped on a target. It deflects to
  realize a desired approach speed through an adaptively learned model
  of the control mapping: when the risk field suppresses the scale for
  a while, the operator pushes harder, and keeps pushing briefly once
  the suppression lifts. That trust lag is what produces the
  characteristic overshoot just past the hallway exit.
* adversarial: full deflection straight at the nearest wall, forever.
  Used to probe the collision-free guarantee.
* replay: re-emits the raw inputs of a recorded log.

Every policy is a pure function of its constructor arguments and the
per-tick state it is shown; repeated runs are identical.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .environment import EnvironmentSpec, nearest_wall_point
from .geometry import Vec2
from .riskfield import ControlParams, RobotState
from .scaling import JoystickInput, clamp_radial
from .trial import LogHeader, TickLog, TrialPhase, TrialState

# Ticks to wait before repeating a press that did not advance the trial.
_REPRESS_TICKS = 25


class ReplayMismatchError(ValueError):
    """A replay was started against a different method/env than recorded."""


@dataclass(frozen=True, slots=True)
class WaypointConfig:
    speed_gain: float = 2.0       # desired approach speed per meter of error, 1/s
    top_speed: float = 5.0        # m/s cruise cap
    clearance_gain: float = 7.0   # comfort speed per meter of wall clearance, 1/s
    press_tolerance: float = 0.12  # m, how close before pressing
    stop_speed: float = 0.2       # m/s, how slow before pressing
    waypoint_radius: float = 0.3  # m, route points are passed, not stopped at
    stick_rate: float = 4.0       # full-scale stick travel per second
    feedback_delay: float = 0.25  # s, age of the state the operator acts on
    adapt_down_time: float = 0.15  # s, how fast the gain estimate drops
    adapt_up_time: float = 0.8     # s, how slowly trust in the gain recovers
    min_gain_estimate: float = 0.05
    max_gain_estimate: float = 2.0  # the constant-scale map can outrun the curve
    # Docking: once the target looks close, creep in short pushes and
    # coast whenever the perceived speed tops the creep target. Push-
    # and-release converges under any monotone control mapping, which a
    # proportional law does not once the stick curve or risk gating
    # bends the gain.
    dock_radius: float = 0.5      # m, where docking engages
    dock_exit_radius: float = 0.9  # m, where it disengages (flew past)
    dock_gain: float = 1.5        # creep speed per meter of error, 1/s
    dock_speed_cap: float = 0.25  # m/s ceiling on the creep
    dock_deflection: float = 0.35  # max stick magnitude while docking


class WaypointOperator:
    """Route-following seeker that completes trials on every method.

    Deflection realizes a desired approach speed (proportional to the
    remaining distance, capped by wall clearance) by inverting the
    stick curve through an adaptive estimate of any extra gain the
    active method applies; suppression is learned quickly, trust
    recovers slowly. The operator sees the robot through the
    teleoperation loop (a short feedback delay) and moves the stick at
    a bounded physical rate; near a target it switches to short
    push-and-coast nudges, which stay stable under the delay. Pushing
    hard while suppressed, then easing off a beat too late once the
    suppression lifts, is what produces the hallway-exit overshoot
    under the isotropic risk method, as with its human counterparts.
    """

    name = "waypoint"

    def __init__(
        self,
        env: EnvironmentSpec,
        params: ControlParams,
        dt: float,
        config: WaypointConfig = WaypointConfig(),
    ):
        self.env = env
        self.max_scale = params.max_scale
        self.input_threshold = params.input_threshold
        self.robot_radius = params.robot_radius
        self.dt = dt
        self.config = config
        self.reset()

    def reset(self) -> None:
        self._leg = 0
        self._wp_idx = 0
        self._gain_estimate = 1.0
        self._stick = Vec2(0.0, 0.0)
        self._last_deflection = 0.0
        self._ticks_since_press = _REPRESS_TICKS
        self._docking = False
        # (state, deflection that produced it) pairs; the left end is
        # what the operator currently perceives.
        self._history: deque[tuple[RobotState, Vec2]] = deque(
            maxlen=max(1, round(self.config.feedback_delay / self.dt) + 1)
        )

    def _observe(self, state: RobotState) -> tuple[RobotState, Vec2]:
        """The (state, held stick) the operator perceives: delayed by
        the teleop loop, with the stick contemporaneous to the state so
        the gain estimate never mixes eras."""
        self._history.append((state, self._stick))
        return self._history[0]

    def _slew_stick(self, wanted: Vec2) -> Vec2:
        """Move the held stick toward the wanted deflection at bounded rate."""
        step = self.config.stick_rate * self.dt
        delta = wanted - self._stick
        dist = delta.norm()
        if dist > step:
            delta = delta.scaled(step / dist)
        self._stick = self._stick + delta
        return self._stick

    def _observe_gain(self, velocity: Vec2, stick: Vec2) -> None:
        """Update the realized-gain estimate from a seen (velocity, stick) pair.

        Expectation is the input-scaled mapping at full trust; progress is
        measured along the pushed direction, so purely lateral gating (the
        per-axis methods stiffening cross-corridor corrections) does not
        read as overall suppression.
        """
        cfg = self.config
        deflection = stick.norm()
        if deflection < 0.15:
            return
        along = max(0.0, velocity.dot(stick) / deflection)
        expected = (
            self.max_scale * min(1.0, deflection / self.input_threshold) * deflection
        )
        ratio = min(cfg.max_gain_estimate, max(cfg.min_gain_estimate, along / expected))
        tau = cfg.adapt_down_time if ratio < self._gain_estimate else cfg.adapt_up_time
        self._gain_estimate += (self.dt / tau) * (ratio - self._gain_estimate)

    def _deflection_for(self, desired_speed: float) -> float:
        """Invert the stick curve: |p| with S_c * s_human(p) * p * gain ~ desired."""
        need = desired_speed / max(self._gain_estimate, self.config.min_gain_estimate)
        knee = self.max_scale * self.input_threshold  # speed where s_human saturates
        if need >= knee:
            p = need / self.max_scale
        else:
            p = math.sqrt(need * self.input_threshold / self.max_scale)
        return min(1.0, p)

    def step(self, state: RobotState, trial: TrialState) -> JoystickInput:
        if trial.phase is TrialPhase.COMPLETE:
            return JoystickInput(p_i=Vec2(0.0, 0.0), button=False)

        cfg = self.config
        seen, seen_stick = self._observe(state)
        leg = trial.next_target_index
        if leg != self._leg:
            self._leg = leg
            self._wp_idx = 0
            self._ticks_since_press = _REPRESS_TICKS
            self._docking = False

        route = self.env.route[leg]
        pos = seen.position
        while self._wp_idx < len(route) and (route[self._wp_idx] - pos).norm() <= cfg.waypoint_radius:
            self._wp_idx += 1
        at_final_objective = self._wp_idx >= len(route)
        target = self.env.targets[leg]
        objective = target.position if at_final_objective else route[self._wp_idx]

        self._observe_gain(seen.velocity, seen_stick)

        error = objective - pos
        distance = error.norm()
        if at_final_objective:
            if not self._docking and distance <= cfg.dock_radius:
                self._docking = True
            elif self._docking and distance > cfg.dock_exit_radius:
                self._docking = False
        else:
            self._docking = False

        if self._docking:
            creep_target = min(cfg.dock_speed_cap, cfg.dock_gain * distance)
            if distance <= cfg.press_tolerance or seen.velocity.norm() > creep_target:
                wanted = Vec2(0.0, 0.0)  # coast; the brake does the rest
            else:
                magnitude = min(cfg.dock_deflection, self._deflection_for(creep_target))
                wanted = error.scaled(magnitude / distance)
        else:
            # Comfort: nobody flies a corridor at top speed; scale the
            # desired speed with the perceived wall clearance.
            _, wall_dist, _ = nearest_wall_point(pos, self.env.map)
            comfort = cfg.clearance_gain * max(0.0, wall_dist - self.robot_radius)
            desired = min(cfg.top_speed, comfort, cfg.speed_gain * distance)
            magnitude = self._deflection_for(desired) if distance > 0.0 else 0.0
            wanted = error.scaled(magnitude / distance) if distance > 0.0 else Vec2(0.0, 0.0)
        p_i = clamp_radial(self._slew_stick(wanted))

        button = False
        self._ticks_since_press += 1
        if (
            at_final_objective
            and (target.position - pos).norm() <= cfg.press_tolerance
            and seen.velocity.norm() < cfg.stop_speed
            and self._ticks_since_press >= _REPRESS_TICKS
        ):
            button = True
            self._ticks_since_press = 0

        self._last_deflection = p_i.norm()
        return JoystickInput(p_i=p_i, button=button)


class AdversarialOperator:
    """Full deflection toward the nearest wall point, never pressing."""

    name = "adversarial"

    def __init__(self, env: EnvironmentSpec):
        self.env = env

    def reset(self) -> None:
        pass

    def step(self, state: RobotState, trial: TrialState) -> JoystickInput:
        wall_point, dist, _ = nearest_wall_point(state.position, self.env.map)
        if dist == 0.0:
            direction = Vec2(1.0, 0.0)
        else:
            direction = (wall_point - state.position).normalized()
        return JoystickInput(p_i=direction, button=False)


class ReplayOperator:
    """Re-emits recorded raw inputs; zero input once the log is exhausted."""

    name = "replay"

    def __init__(self, logs: list[TickLog]):
        self.logs = logs
        self._idx = 0

    def reset(self) -> None:
        self._idx = 0

    def step(self, state: RobotState, trial: TrialState) -> JoystickInput:
        if self._idx >= len(self.logs):
            return JoystickInput(p_i=Vec2(0.0, 0.0), button=False)
        tick = self.logs[self._idx]
        self._idx += 1
        return JoystickInput(p_i=tick.stick, button=tick.button)


def check_replay_header(header: LogHeader, method: str, env_name: str) -> None:
    """Reject replays against a different method or environment."""
    if header.method != method:
        raise ReplayMismatchError(
            f"log was recorded with method {header.method!r}, not {method!r}"
        )
    if header.env.map.name != env_name:
        raise ReplayMismatchError(
            f"log was recorded in env {header.env.map.name!r}, not {env_name!r}"
        )


def make_operator(
    kind: str,
    env: EnvironmentSpec,
    params: ControlParams,
    dt: float,
    **kwargs,
):
    if kind == "waypoint":
        return WaypointOperator(env, params, dt, **kwargs)
    if kind == "adversarial":
        return AdversarialOperator(env)
    raise ValueError(f"unknown operator kind {kind!r} (expected waypoint or adversarial)")
