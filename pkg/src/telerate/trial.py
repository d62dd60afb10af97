"""Trial state machine, per-tick logging, and the four evaluation metrics.

A trial visits the map's four targets in order: the clock starts on the
first nonzero stick deflection, a button press within a target's radius
advances to the next one, and the press at the fourth target ends the
trial. Metrics:

* t_trial: completion time minus start time;
* d_total: path length over the running portion;
* t_collision: total time in wall contact while running;
* d_overshoot: farthest excursion past the final target along the
  hallway exit direction, after the robot first leaves the hallway.

Logs are JSONL: a header line (method, env, params), one object per
tick, and a trailing summary line. Floats round-trip exactly, so replay
can compare bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import IO, Optional

from .environment import EnvironmentSpec, environment_to_dict, load_environment
from .geometry import Vec2
from .riskfield import ControlParams
from .simulator import SimConfig

LOG_SCHEMA_VERSION = 1

_TICK_FIELDS = (
    "t", "px", "py", "vx", "vy", "ix", "iy", "cx", "cy",
    "s_human", "s_x", "s_y", "c_r", "c_rx", "c_ry",
    "contact", "button", "method", "env",
)


class IncompleteTrialError(ValueError):
    """Metrics were requested for a trial that never started."""


class LogParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TrialPhase(str, Enum):
    AWAITING_FIRST_INPUT = "awaiting_first_input"
    RUNNING = "running"
    COMPLETE = "complete"


@dataclass(frozen=True, slots=True)
class TrialState:
    phase: TrialPhase = TrialPhase.AWAITING_FIRST_INPUT
    next_target_index: int = 0
    started_at: Optional[float] = None
    completed_at: Optional[float] = None
    # exited_hallway latches on a crossing of the exit plane from the
    # hallway side; entered_hallway arms it, so maps whose start area
    # already lies beyond the plane (U-shaped hallways) behave correctly.
    entered_hallway: bool = False
    exited_hallway: bool = False
    prev_button: bool = False  # presses are rising edges, not held state


@dataclass(frozen=True, slots=True)
class TickLog:
    time: float
    position: Vec2
    velocity: Vec2
    stick: Vec2      # raw deflection, needed to re-simulate
    command: Vec2
    s_human: float
    s_x: float
    s_y: float
    c_r: float
    c_rx: float
    c_ry: float
    contact: bool
    button: bool


@dataclass(frozen=True, slots=True)
class TrialMetrics:
    t_trial: float
    d_total: float
    t_collision: float
    d_overshoot: float
    completed: bool


def update(
    trial: TrialState, tick: TickLog, env: EnvironmentSpec, lenient: bool = False
) -> TrialState:
    """Advance the trial state machine by one tick.

    Ticks after completion are ignored. In lenient mode a press is
    accepted anywhere (for human sessions); otherwise it must land within
    the current target's radius.
    """
    if trial.phase is TrialPhase.COMPLETE:
        return trial

    phase = trial.phase
    started_at = trial.started_at
    next_index = trial.next_target_index
    completed_at = trial.completed_at
    entered = trial.entered_hallway
    exited = trial.exited_hallway

    if phase is TrialPhase.AWAITING_FIRST_INPUT:
        if tick.stick.x == 0.0 and tick.stick.y == 0.0:
            if tick.button == trial.prev_button:
                return trial
            return replace(trial, prev_button=tick.button)
        phase = TrialPhase.RUNNING
        started_at = tick.time

    if not exited:
        past = (tick.position - env.exit_point).dot(env.exit_dir) > 0.0
        if not entered:
            entered = not past
        elif past:
            exited = True

    if tick.button and not trial.prev_button:
        target = env.targets[next_index]
        if lenient or (tick.position - target.position).norm() <= target.radius:
            if next_index == len(env.targets) - 1:
                phase = TrialPhase.COMPLETE
                completed_at = tick.time
            else:
                next_index += 1

    if (
        phase is trial.phase
        and entered == trial.entered_hallway
        and exited == trial.exited_hallway
        and next_index == trial.next_target_index
        and tick.button == trial.prev_button
    ):
        return trial
    return TrialState(
        phase=phase,
        next_target_index=next_index,
        started_at=started_at,
        completed_at=completed_at,
        entered_hallway=entered,
        exited_hallway=exited,
        prev_button=tick.button,
    )


def metrics(
    logs: list[TickLog],
    trial: TrialState,
    env: EnvironmentSpec,
    dt: Optional[float] = None,
) -> TrialMetrics:
    """Compute the four trial metrics from a tick log.

    A pure function of (logs, env): the exit latch is rescanned from the
    positions rather than taken from the final trial state. Incomplete
    trials are measured over the observed span with completed=False.
    """
    if trial.started_at is None:
        raise IncompleteTrialError("trial never started: no first input recorded")
    started = trial.started_at
    ended = trial.completed_at if trial.completed_at is not None else (
        logs[-1].time if logs else started
    )
    if dt is None:
        dt = logs[1].time - logs[0].time if len(logs) >= 2 else 0.0

    d_total = 0.0
    contact_ticks = 0
    d_overshoot = 0.0
    entered = False
    exited = False
    final = env.targets[-1]
    prev_pos: Optional[Vec2] = None
    for tick in logs:
        running = started <= tick.time <= ended
        if running:
            if prev_pos is not None:
                d_total += (tick.position - prev_pos).norm()
            # the tick at started_at spans pre-start time; counting only
            # later ticks keeps t_collision <= t_trial exactly
            if tick.contact and tick.time > started:
                contact_ticks += 1
            if not exited:
                past_plane = (tick.position - env.exit_point).dot(env.exit_dir) > 0.0
                if not entered:
                    entered = not past_plane
                elif past_plane:
                    exited = True
            if exited:
                past = (tick.position - final.position).dot(env.exit_dir)
                if past > d_overshoot:
                    d_overshoot = past
        prev_pos = tick.position

    return TrialMetrics(
        t_trial=ended - started,
        d_total=d_total,
        t_collision=contact_ticks * dt,
        d_overshoot=d_overshoot,
        completed=trial.phase is TrialPhase.COMPLETE,
    )


# -- log serialization -------------------------------------------------------

@dataclass(frozen=True, slots=True)
class LogHeader:
    method: str
    env: EnvironmentSpec
    params: ControlParams
    sim: SimConfig
    operator: Optional[str] = None
    schema: int = LOG_SCHEMA_VERSION
    code_version: str = ""


def params_to_dict(params: ControlParams) -> dict:
    return asdict(params)


def params_from_dict(doc: dict) -> ControlParams:
    return ControlParams(**doc)


def sim_to_dict(sim: SimConfig) -> dict:
    return asdict(sim)


def sim_from_dict(doc: dict) -> SimConfig:
    return SimConfig(**doc)


def _tick_to_obj(tick: TickLog, method: str, env_name: str) -> dict:
    return {
        "t": tick.time,
        "px": tick.position.x, "py": tick.position.y,
        "vx": tick.velocity.x, "vy": tick.velocity.y,
        "ix": tick.stick.x, "iy": tick.stick.y,
        "cx": tick.command.x, "cy": tick.command.y,
        "s_human": tick.s_human, "s_x": tick.s_x, "s_y": tick.s_y,
        "c_r": tick.c_r, "c_rx": tick.c_rx, "c_ry": tick.c_ry,
        "contact": tick.contact, "button": tick.button,
        "method": method, "env": env_name,
    }


def _tick_from_obj(obj: dict, line: int) -> TickLog:
    missing = [k for k in _TICK_FIELDS if k not in obj]
    if missing:
        raise LogParseError(f"tick record missing fields {missing}", line)
    return TickLog(
        time=float(obj["t"]),
        position=Vec2(float(obj["px"]), float(obj["py"])),
        velocity=Vec2(float(obj["vx"]), float(obj["vy"])),
        stick=Vec2(float(obj["ix"]), float(obj["iy"])),
        command=Vec2(float(obj["cx"]), float(obj["cy"])),
        s_human=float(obj["s_human"]),
        s_x=float(obj["s_x"]), s_y=float(obj["s_y"]),
        c_r=float(obj["c_r"]), c_rx=float(obj["c_rx"]), c_ry=float(obj["c_ry"]),
        contact=bool(obj["contact"]),
        button=bool(obj["button"]),
    )


def summary_to_dict(
    summary: TrialMetrics, method: str, env_name: str, operator: Optional[str]
) -> dict:
    return {
        "t_trial": summary.t_trial,
        "d_total": summary.d_total,
        "t_collision": summary.t_collision,
        "d_overshoot": summary.d_overshoot,
        "completed": summary.completed,
        "method": method,
        "env": env_name,
        "operator": operator,
    }


def write_log(
    header: LogHeader, logs: list[TickLog], summary: Optional[TrialMetrics], sink: IO[str]
) -> None:
    """Write header + ticks + optional summary as JSONL."""
    head = {
        "type": "header",
        "schema": header.schema,
        "method": header.method,
        "env": environment_to_dict(header.env),
        "params": params_to_dict(header.params),
        "sim": sim_to_dict(header.sim),
        "operator": header.operator,
        "code_version": header.code_version,
    }
    sink.write(json.dumps(head) + "\n")
    env_name = header.env.map.name
    for tick in logs:
        sink.write(json.dumps(_tick_to_obj(tick, header.method, env_name)) + "\n")
    if summary is not None:
        obj = summary_to_dict(summary, header.method, env_name, header.operator)
        obj["type"] = "summary"
        sink.write(json.dumps(obj) + "\n")


def read_log(source: IO[str]) -> tuple[LogHeader, list[TickLog], Optional[TrialMetrics]]:
    """Inverse of write_log; raises LogParseError with the offending line."""
    header: Optional[LogHeader] = None
    logs: list[TickLog] = []
    summary: Optional[TrialMetrics] = None
    for line_no, raw in enumerate(source, start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"invalid JSON: {exc}", line_no) from exc
        if not isinstance(obj, dict):
            raise LogParseError("expected a JSON object", line_no)
        kind = obj.get("type", "tick")
        if kind == "header":
            if header is not None:
                raise LogParseError("duplicate header", line_no)
            try:
                header = LogHeader(
                    method=obj["method"],
                    env=load_environment(json.dumps(obj["env"])),
                    params=params_from_dict(obj["params"]),
                    sim=sim_from_dict(obj["sim"]),
                    operator=obj.get("operator"),
                    schema=int(obj["schema"]),
                    code_version=obj.get("code_version", ""),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise LogParseError(f"bad header: {exc}", line_no) from exc
        elif kind == "summary":
            summary = TrialMetrics(
                t_trial=float(obj["t_trial"]),
                d_total=float(obj["d_total"]),
                t_collision=float(obj["t_collision"]),
                d_overshoot=float(obj["d_overshoot"]),
                completed=bool(obj["completed"]),
            )
        elif kind == "tick":
            if header is None:
                raise LogParseError("tick record before header", line_no)
            logs.append(_tick_from_obj(obj, line_no))
        else:
            raise LogParseError(f"unknown record type {kind!r}", line_no)
    if header is None:
        raise LogParseError("no header record", 1)
    return header, logs, summary
