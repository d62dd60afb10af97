"""Command-line surface: live service, batch runs, replay, and tables.

Exit codes: 0 success, 1 configuration error, 2 runtime error.

Every control parameter can be overridden through environment
variables: TELERATE_MAX_SCALE, TELERATE_INPUT_THRESHOLD,
TELERATE_ROBOT_RADIUS, TELERATE_MAX_ACCEL, TELERATE_FIELD_BASE,
TELERATE_FIELD_SPEED_GAIN, TELERATE_SAMPLE_RESOLUTION,
TELERATE_SLEW_LIMIT.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .batch import run_batch
from .environment import SHIPPED_MAPS, MapFormatError
from .replay import verify_log_file
from .report import aggregate, load_summaries, render_figures, write_summary_csv
from .riskfield import ControlParams
from .scaling import Method
from .server import create_app, resolve_environment
from .session import SessionConfig
from .simulator import SimConfig

ENV_PREFIX = "TELERATE_"

_PARAM_FIELDS = (
    "max_scale", "input_threshold", "robot_radius", "max_accel",
    "field_base", "field_speed_gain", "sample_resolution", "slew_limit",
)


class ConfigError(Exception):
    pass


def params_from_env(base: ControlParams = ControlParams()) -> ControlParams:
    """Apply TELERATE_* environment overrides to a parameter set."""
    overrides = {}
    for field_name in _PARAM_FIELDS:
        raw = os.environ.get(ENV_PREFIX + field_name.upper())
        if raw is not None:
            try:
                overrides[field_name] = float(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{ENV_PREFIX}{field_name.upper()}={raw!r} is not a number"
                ) from exc
    if not overrides:
        return base
    try:
        return replace(base, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_methods(spec: str) -> list[Method]:
    if spec == "all":
        return list(Method)
    try:
        return [Method(name.strip()) for name in spec.split(",") if name.strip()]
    except ValueError as exc:
        raise ConfigError(f"unknown method in {spec!r} (expected c,h,r1,r2,r3)") from exc


def _parse_envs(spec: str):
    names = list(SHIPPED_MAPS) if spec == "all" else [n.strip() for n in spec.split(",")]
    try:
        return [resolve_environment(name) for name in names if name]
    except (MapFormatError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telerate",
        description="Variable-scaling rate-control teleoperation stack",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the live session service")
    serve.add_argument("--env", required=True, help="shipped map name (env1..env4) or map file")
    serve.add_argument("--method", required=True, choices=[m.value for m in Method])
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--slew", type=float, default=None,
                       help="enable the scale slew limiter (fraction of max scale per second)")
    serve.add_argument("--lenient-press", action="store_true",
                       help="accept target presses anywhere (human sessions)")
    serve.add_argument("--out", default=None, help="directory for trial logs")
    serve.add_argument("--lockstep", action="store_true",
                       help="advance one tick per input message (scripted clients)")
    serve.add_argument("--broadcast-rate", type=int, default=25)
    serve.add_argument("--ui", default=None,
                       help="static cockpit directory (default: ./frontend/dist if present)")

    run_p = sub.add_parser("run", help="run a headless experiment grid")
    run_p.add_argument("--env", required=True, help="comma-separated map names/files, or 'all'")
    run_p.add_argument("--method", required=True, help="comma-separated methods, or 'all'")
    run_p.add_argument("--operator", required=True,
                       help="comma-separated operators: waypoint, adversarial")
    run_p.add_argument("--repeats", type=int, default=1)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--cap-seconds", type=float, default=120.0)

    replay_p = sub.add_parser("replay", help="verify a trial log by re-simulation")
    replay_p.add_argument("log", help="path to a .jsonl trial log")

    table_p = sub.add_parser("table", help="aggregate summaries into a CSV and figures")
    table_p.add_argument("dir", help="directory containing *.summary.json files")
    table_p.add_argument("--out", default=None,
                         help="CSV path (default: <dir>/summary.csv)")
    table_p.add_argument("--no-figures", action="store_true")
    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    env = resolve_environment(args.env)
    params = params_from_env()
    if args.slew is not None:
        params = replace(params, slew_limit=args.slew)
    config = SessionConfig(
        method=Method(args.method),
        env=env,
        params=params,
        sim=SimConfig(robot_radius=params.robot_radius, max_accel=params.max_accel),
        broadcast_rate=args.broadcast_rate,
        lenient_press=args.lenient_press,
    )
    ui_dir = args.ui
    if ui_dir is None:
        default_ui = Path("frontend") / "dist"
        ui_dir = str(default_ui) if default_ui.is_dir() else None
    app = create_app(config, out_dir=args.out, lockstep=args.lockstep, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_run(args) -> int:
    methods = _parse_methods(args.method)
    envs = _parse_envs(args.env)
    operators = [o.strip() for o in args.operator.split(",") if o.strip()]
    for op in operators:
        if op not in ("waypoint", "adversarial"):
            raise ConfigError(f"unknown operator {op!r}")
    if args.repeats < 1:
        raise ConfigError("--repeats must be at least 1")
    params = params_from_env()
    sim = SimConfig(robot_radius=params.robot_radius, max_accel=params.max_accel)
    rows = run_batch(
        methods, envs, operators, args.repeats, args.out,
        params=params, sim=sim, cap_seconds=args.cap_seconds,
    )
    table = aggregate(rows)
    write_summary_csv(table, Path(args.out) / "summary.csv")
    completed = sum(1 for r in rows if r["completed"])
    print(f"{len(rows)} trials ({completed} completed) -> {args.out}")
    return 0


def _cmd_replay(args) -> int:
    report = verify_log_file(args.log)
    print(report.describe())
    if not report.match or report.summary_match is False:
        return 2
    return 0


def _cmd_table(args) -> int:
    rows = load_summaries(args.dir)
    if not rows:
        print(f"no *.summary.json files in {args.dir}", file=sys.stderr)
        return 1
    table = aggregate(rows)
    out_csv = Path(args.out) if args.out else Path(args.dir) / "summary.csv"
    write_summary_csv(table, out_csv)
    print(f"wrote {out_csv}")
    if not args.no_figures:
        for path in render_figures(table, out_csv.parent):
            print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "run": _cmd_run,
        "replay": _cmd_replay,
        "table": _cmd_table,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, MapFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
