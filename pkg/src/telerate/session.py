"""One teleoperation session: the causal 100 Hz pipeline shared by the
batch runner and the live service.

Each tick: take the freshest input snapshot, compute the command from
the pre-step state, integrate one step, update the trial machine, and
log. The pipeline is single-threaded and free of randomness, so a
session is fully determined by (config, input stream).
"""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import replace as dc_replace
from typing import Optional

from . import __version__
from .environment import EnvironmentSpec, sample_obstacles
from .geometry import Vec2
from .riskfield import ControlParams, RobotState
from .scaling import (
    JoystickInput,
    Method,
    VelocityCommand,
    apply_scales,
    compute_command,
    slew_limit,
)
from .simulator import SimConfig, step
from .trial import (
    LogHeader,
    TickLog,
    TrialMetrics,
    TrialPhase,
    TrialState,
    metrics,
    update,
)


@dataclass(frozen=True, slots=True)
class SessionConfig:
    method: Method
    env: EnvironmentSpec
    params: ControlParams = ControlParams()
    sim: SimConfig = SimConfig()
    tick_rate: int = 100
    broadcast_rate: int = 25
    lenient_press: bool = False
    operator: Optional[str] = None  # operator kind; None = human via wire

    def __post_init__(self):
        if self.tick_rate <= 0 or self.broadcast_rate <= 0:
            raise ValueError("tick_rate and broadcast_rate must be positive")
        if self.tick_rate % self.broadcast_rate != 0:
            raise ValueError(
                f"tick_rate {self.tick_rate} must be divisible by "
                f"broadcast_rate {self.broadcast_rate}"
            )
        if abs(self.sim.dt * self.tick_rate - 1.0) > 1e-9:
            raise ValueError(
                f"sim.dt {self.sim.dt} is inconsistent with tick_rate {self.tick_rate}"
            )


class Session:
    """Mutable session state; owned by exactly one thread of control."""

    def __init__(self, config: SessionConfig):
        self.config = config
        self.cloud = sample_obstacles(config.env.map, config.params.sample_resolution)
        self.reset()

    def reset(self) -> None:
        env = self.config.env
        self.state = RobotState(position=env.start, velocity=Vec2(0.0, 0.0), time=0.0)
        self.trial = TrialState()
        self.logs: list[TickLog] = []
        self.last_command: Optional[VelocityCommand] = None
        self.last_contact = False
        self._prev_diag = None

    def header(self) -> LogHeader:
        cfg = self.config
        return LogHeader(
            method=cfg.method.value,
            env=cfg.env,
            params=cfg.params,
            sim=cfg.sim,
            operator=cfg.operator,
            code_version=__version__,
        )

    def tick(self, stick: JoystickInput) -> TickLog:
        """Advance one tick from the given input snapshot."""
        cfg = self.config
        cmd = compute_command(cfg.method, stick, self.state, self.cloud, cfg.params)
        if cfg.params.slew_limit is not None:
            # A fresh session ramps in from zero scale; afterwards each
            # tick is limited against the previous tick's scales.
            prev = self._prev_diag
            if prev is None:
                prev = dc_replace(cmd.diagnostics, s_x=0.0, s_y=0.0)
            diag = slew_limit(
                prev, cmd.diagnostics, cfg.sim.dt, cfg.params.slew_limit,
                cfg.params.max_scale,
            )
            if diag is not cmd.diagnostics:
                cmd = VelocityCommand(v=apply_scales(stick, diag), diagnostics=diag)
        self._prev_diag = cmd.diagnostics

        result = step(self.state, cmd, cfg.sim, cfg.env.map)
        self.state = result.state
        self.last_command = cmd
        self.last_contact = result.in_contact

        diag = cmd.diagnostics
        tick = TickLog(
            time=self.state.time,
            position=self.state.position,
            velocity=self.state.velocity,
            stick=stick.p_i,
            command=cmd.v,
            s_human=diag.s_human,
            s_x=diag.s_x,
            s_y=diag.s_y,
            c_r=diag.risk.c_r,
            c_rx=diag.risk.c_rx,
            c_ry=diag.risk.c_ry,
            contact=result.in_contact,
            button=stick.button,
        )
        was_complete = self.trial.phase is TrialPhase.COMPLETE
        self.trial = update(self.trial, tick, cfg.env, lenient=cfg.lenient_press)
        if not was_complete:
            self.logs.append(tick)
        return tick

    def run_trial(
        self, operator, cap_seconds: float = 120.0
    ) -> tuple[list[TickLog], TrialState, TrialMetrics]:
        """Drive the session with a scripted operator until completion or cap."""
        operator.reset()
        self.reset()
        max_ticks = int(round(cap_seconds * self.config.tick_rate))
        for _ in range(max_ticks):
            stick = operator.step(self.state, self.trial)
            self.tick(stick)
            if self.trial.phase is TrialPhase.COMPLETE:
                break
        result = metrics(self.logs, self.trial, self.config.env, dt=self.config.sim.dt)
        return self.logs, self.trial, result
