"""Replay verification: re-simulate a recorded log from its raw inputs
and check the result matches bit for bit.

The log header embeds the full environment and parameter set, so a log
is self-contained; any edit to a logged tick, or any behavioral change
in the pipeline, shows up as a divergence at a specific tick.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional

from . import __version__
from .operators import ReplayOperator
from .scaling import JoystickInput, Method
from .session import Session, SessionConfig
from .trial import TickLog, metrics, read_log

_COMPARED_FIELDS = (
    "time", "position", "velocity", "stick", "command",
    "s_human", "s_x", "s_y", "c_r", "c_rx", "c_ry", "contact", "button",
)


@dataclass(frozen=True, slots=True)
class ReplayReport:
    path: str
    ticks: int
    match: bool
    first_divergence: Optional[int] = None  # tick index, 0-based
    divergent_field: Optional[str] = None
    recorded_value: Optional[str] = None
    replayed_value: Optional[str] = None
    version_warning: Optional[str] = None
    summary_match: Optional[bool] = None

    def describe(self) -> str:
        lines = [f"replay {self.path}: {self.ticks} ticks"]
        if self.version_warning:
            lines.append(f"warning: {self.version_warning}")
        if self.match:
            lines.append("match: bit-exact")
        else:
            lines.append(
                f"DIVERGENCE at tick {self.first_divergence}, field "
                f"{self.divergent_field}: recorded {self.recorded_value}, "
                f"replayed {self.replayed_value}"
            )
        if self.summary_match is False:
            lines.append("stored summary does NOT match recomputed metrics")
        return "\n".join(lines)


def _first_difference(recorded: TickLog, replayed: TickLog) -> Optional[str]:
    for field_name in _COMPARED_FIELDS:
        if getattr(recorded, field_name) != getattr(replayed, field_name):
            return field_name
    return None


def verify_log(source: IO[str], path: str = "<log>") -> ReplayReport:
    """Re-simulate a log from its recorded inputs and compare every tick."""
    header, recorded, stored_summary = read_log(source)
    version_warning = None
    if header.code_version and header.code_version != __version__:
        version_warning = (
            f"log written by version {header.code_version}, replaying with {__version__}"
        )

    config = SessionConfig(
        method=Method(header.method),
        env=header.env,
        params=header.params,
        sim=header.sim,
        tick_rate=int(round(1.0 / header.sim.dt)),
        operator=header.operator,
    )
    session = Session(config)
    operator = ReplayOperator(recorded)
    for index, rec in enumerate(recorded):
        stick = operator.step(session.state, session.trial)
        replayed = session.tick(JoystickInput(p_i=stick.p_i, button=stick.button))
        field_name = _first_difference(rec, replayed)
        if field_name is not None:
            return ReplayReport(
                path=path,
                ticks=len(recorded),
                match=False,
                first_divergence=index,
                divergent_field=field_name,
                recorded_value=repr(getattr(rec, field_name)),
                replayed_value=repr(getattr(replayed, field_name)),
                version_warning=version_warning,
            )

    summary_match = None
    if stored_summary is not None and session.trial.started_at is not None:
        recomputed = metrics(recorded, session.trial, header.env, dt=header.sim.dt)
        summary_match = recomputed == stored_summary

    return ReplayReport(
        path=path,
        ticks=len(recorded),
        match=True,
        version_warning=version_warning,
        summary_match=summary_match,
    )


def verify_log_file(path: str | Path) -> ReplayReport:
    with open(path, "r", encoding="utf-8") as source:
        return verify_log(source, path=str(path))
