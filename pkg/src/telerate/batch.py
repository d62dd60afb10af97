"""Headless experiment grid runner: methods x environments x operators x
repeats, one log and one summary per cell, plus an aggregate CSV.

Every cell is a fresh deterministic session, so rerunning a grid with
the same configuration reproduces every file byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

from .environment import EnvironmentSpec
from .operators import make_operator
from .riskfield import ControlParams
from .scaling import Method
from .session import Session, SessionConfig
from .simulator import SimConfig
from .trial import summary_to_dict, write_log


def cell_name(method: str, env: str, operator: str, rep: int) -> str:
    return f"{method}_{env}_{operator}_r{rep}"


def run_cell(
    method: Method,
    env: EnvironmentSpec,
    operator_kind: str,
    params: ControlParams,
    sim: SimConfig,
    cap_seconds: float = 120.0,
):
    """Run one trial cell; returns (session, logs, trial, metrics)."""
    config = SessionConfig(
        method=method, env=env, params=params, sim=sim,
        tick_rate=int(round(1.0 / sim.dt)), operator=operator_kind,
    )
    session = Session(config)
    operator = make_operator(operator_kind, env, params, sim.dt)
    logs, trial, result = session.run_trial(operator, cap_seconds=cap_seconds)
    return session, logs, trial, result


def run_batch(
    methods: list[Method],
    envs: list[EnvironmentSpec],
    operator_kinds: list[str],
    repeats: int,
    out_dir: str | Path,
    params: ControlParams = ControlParams(),
    sim: SimConfig = SimConfig(),
    cap_seconds: float = 120.0,
) -> list[dict]:
    """Run the full grid, writing one JSONL log and one summary per cell.

    Returns the per-trial summary rows (also written alongside the logs).
    Cells that hit the time cap are recorded with completed=false and the
    run continues.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for method in methods:
        for env in envs:
            for operator_kind in operator_kinds:
                for rep in range(repeats):
                    session, logs, trial, result = run_cell(
                        method, env, operator_kind, params, sim, cap_seconds
                    )
                    name = cell_name(method.value, env.map.name, operator_kind, rep)
                    with open(out / f"{name}.jsonl", "w", encoding="utf-8") as sink:
                        write_log(session.header(), logs, result, sink)
                    row = summary_to_dict(result, method.value, env.map.name, operator_kind)
                    row["rep"] = rep
                    with open(out / f"{name}.summary.json", "w", encoding="utf-8") as sink:
                        json.dump(row, sink, indent=2)
                        sink.write("\n")
                    rows.append(row)
    return rows
