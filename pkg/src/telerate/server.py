"""Live session service: one simulated robot steered over a WebSocket.

The simulation loop owns all state and never blocks on the network: the
connection handlers only swap the latest input snapshot (latest wins)
and drain per-client broadcast queues that drop when full. One client
(the first to connect) is the pilot; later clients spectate and get a
busy error if they try to send input.

Two pacing modes:

* realtime (default): the loop ticks on the wall clock at tick_rate,
  broadcasting state at broadcast_rate. If no input arrives for 0.5 s
  the held input decays to zero (dead-man behavior).
* lockstep: every input message advances exactly one tick and the
  resulting state is sent back immediately. Scripted clients use this
  to drive deterministic trials over the real protocol.
"""

from __future__ import annotations

import asyncio
import time as time_mod
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .environment import (
    SHIPPED_MAPS,
    environment_to_dict,
    load_environment,
    load_shipped_environment,
)
from .geometry import Vec2
from .scaling import JoystickInput, Method
from .session import Session, SessionConfig
from .trial import TrialPhase, metrics, params_to_dict, write_log
from .wire import SCHEMA_VERSION, ProtocolError, decode_client, encode

INPUT_STALE_SECONDS = 0.5
_QUEUE_SIZE = 4


class _Client:
    def __init__(self, socket: WebSocket, role: str):
        self.socket = socket
        self.role = role
        self.queue: asyncio.Queue[str] = asyncio.Queue(maxsize=_QUEUE_SIZE)
        self.last_seq = -1


class LiveService:
    """Owns the session, the input mailbox, and the client registry."""

    def __init__(
        self,
        config: SessionConfig,
        out_dir: Optional[str] = None,
        lockstep: bool = False,
    ):
        self.config = config
        self.session = Session(config)
        self.out_dir = Path(out_dir) if out_dir else None
        self.lockstep = lockstep
        self._stick = JoystickInput(p_i=Vec2(0.0, 0.0), button=False)
        self._input_at: Optional[float] = None
        self._seq = 0
        self._clients: dict[WebSocket, _Client] = {}
        self._pilot: Optional[WebSocket] = None
        self._tick_count = 0
        self._trial_index = 0
        self._log_written = False
        self._loop_task: Optional[asyncio.Task] = None

    # -- outbound ------------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _state_message(self, input_stale: bool) -> dict:
        s = self.session
        cmd = s.last_command
        if cmd is not None:
            diag = cmd.diagnostics
            scales = {
                "s_human": diag.s_human, "s_risk": diag.s_risk,
                "s_x": diag.s_x, "s_y": diag.s_y,
            }
            risks = {
                "c_r": diag.risk.c_r,
                "c_rx": diag.risk.c_rx, "c_ry": diag.risk.c_ry,
                "c_rx_dir": diag.risk.c_rx_directed, "c_ry_dir": diag.risk.c_ry_directed,
            }
            frame_angle = diag.frame.angle()
            capsule = diag.risk.capsule
            field_extent = diag.risk.d
        else:
            scales = {"s_human": 0.0, "s_risk": 1.0, "s_x": 0.0, "s_y": 0.0}
            risks = {"c_r": 0.0, "c_rx": 0.0, "c_ry": 0.0, "c_rx_dir": 0.0, "c_ry_dir": 0.0}
            frame_angle = 0.0
            capsule = None
            field_extent = self.config.params.field_base
        env = self.config.env
        return {
            "type": "state",
            "seq": self._next_seq(),
            "schema": SCHEMA_VERSION,
            "time": s.state.time,
            "position": [s.state.position.x, s.state.position.y],
            "velocity": [s.state.velocity.x, s.state.velocity.y],
            "scales": scales,
            "risks": risks,
            "frame_angle": frame_angle,
            "capsule": None if capsule is None else {
                "a": [capsule.spine.a.x, capsule.spine.a.y],
                "b": [capsule.spine.b.x, capsule.spine.b.y],
                "radius": capsule.radius,
            },
            "field_extent": field_extent,
            "trial": {
                "phase": self.session.trial.phase.value,
                "next_target": self.session.trial.next_target_index,
                "exited_hallway": self.session.trial.exited_hallway,
            },
            "targets": [
                {"pos": [t.position.x, t.position.y], "radius": t.radius}
                for t in env.targets
            ],
            "contact": s.last_contact,
            "input_stale": input_stale,
        }

    def _hello_message(self, role: str) -> dict:
        return {
            "type": "hello",
            "seq": self._next_seq(),
            "schema": SCHEMA_VERSION,
            "role": role,
            "method": self.config.method.value,
            "env": environment_to_dict(self.config.env),
            "params": params_to_dict(self.config.params),
            "tick_rate": self.config.tick_rate,
            "broadcast_rate": self.config.broadcast_rate,
        }

    def _error_message(self, message: str) -> dict:
        return {"type": "error", "seq": self._next_seq(), "message": message}

    def _ack_message(self, for_seq: int, action: str) -> dict:
        return {"type": "ack", "seq": self._next_seq(), "for_seq": for_seq, "action": action}

    def _broadcast(self, message: dict) -> None:
        text = encode(message)
        for client in self._clients.values():
            while True:
                try:
                    client.queue.put_nowait(text)
                    break
                except asyncio.QueueFull:
                    try:
                        client.queue.get_nowait()  # drop the oldest frame
                    except asyncio.QueueEmpty:
                        break

    # -- simulation ----------------------------------------------------------

    def _current_input(self, now: float) -> tuple[JoystickInput, bool]:
        if self._input_at is None:
            return JoystickInput(p_i=Vec2(0.0, 0.0), button=False), False
        if not self.lockstep and now - self._input_at > INPUT_STALE_SECONDS:
            return JoystickInput(p_i=Vec2(0.0, 0.0), button=False), True
        return self._stick, False

    def _tick_once(self, stick: JoystickInput) -> None:
        was_complete = self.session.trial.phase is TrialPhase.COMPLETE
        self.session.tick(stick)
        self._tick_count += 1
        if (
            not was_complete
            and self.session.trial.phase is TrialPhase.COMPLETE
            and not self._log_written
        ):
            self._write_trial_log()
            self._log_written = True

    def _write_trial_log(self) -> None:
        if self.out_dir is None:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        result = metrics(
            self.session.logs, self.session.trial, self.config.env, dt=self.config.sim.dt
        )
        path = self.out_dir / f"trial_{self._trial_index:03d}.jsonl"
        with open(path, "w", encoding="utf-8") as sink:
            write_log(self.session.header(), self.session.logs, result, sink)

    async def run_loop(self) -> None:
        """Wall-clock 100 Hz loop for realtime sessions."""
        period = 1.0 / self.config.tick_rate
        every = self.config.tick_rate // self.config.broadcast_rate
        next_t = time_mod.monotonic() + period
        while True:
            delay = next_t - time_mod.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
                next_t += period
            else:
                # Fell behind (heavy load); re-anchor instead of spiraling.
                next_t = time_mod.monotonic() + period
            stick, stale = self._current_input(time_mod.monotonic())
            self._tick_once(stick)
            if self._tick_count % every == 0:
                self._broadcast(self._state_message(stale))

    # -- session control -------------------------------------------------------

    def _reset(self) -> None:
        if self.session.logs and not self._log_written and self.out_dir is not None:
            # Abandoned trial: keep the partial log for the record.
            self._write_trial_log()
        self.session.reset()
        self._trial_index += 1
        self._log_written = False
        self._stick = JoystickInput(p_i=Vec2(0.0, 0.0), button=False)
        self._input_at = None

    def _handle_control(self, msg: dict) -> dict:
        action = msg["action"]
        if action in ("start", "reset"):
            self._reset()
            return self._ack_message(msg["seq"], action)
        if self.session.trial.phase is TrialPhase.RUNNING:
            return self._error_message(f"{action} is only allowed between trials")
        if action == "set_method":
            try:
                method = Method(msg["method"])
            except ValueError:
                return self._error_message(f"unknown method {msg['method']!r}")
            self.config = SessionConfig(
                method=method, env=self.config.env, params=self.config.params,
                sim=self.config.sim, tick_rate=self.config.tick_rate,
                broadcast_rate=self.config.broadcast_rate,
                lenient_press=self.config.lenient_press, operator=self.config.operator,
            )
            self.session = Session(self.config)
            self._reset()
            return self._ack_message(msg["seq"], action)
        if action == "set_env":
            try:
                env = resolve_environment(msg["env"])
            except Exception as exc:
                return self._error_message(f"cannot load env {msg['env']!r}: {exc}")
            self.config = SessionConfig(
                method=self.config.method, env=env, params=self.config.params,
                sim=self.config.sim, tick_rate=self.config.tick_rate,
                broadcast_rate=self.config.broadcast_rate,
                lenient_press=self.config.lenient_press, operator=self.config.operator,
            )
            self.session = Session(self.config)
            self._reset()
            return self._ack_message(msg["seq"], action)
        return self._error_message(f"unknown action {action!r}")

    # -- connection handling ---------------------------------------------------

    async def _sender(self, client: _Client) -> None:
        while True:
            text = await client.queue.get()
            await client.socket.send_text(text)

    async def handle_socket(self, socket: WebSocket) -> None:
        await socket.accept()
        role = "pilot" if self._pilot is None else "spectator"
        client = _Client(socket, role)
        self._clients[socket] = client
        if role == "pilot":
            self._pilot = socket
        sender = asyncio.create_task(self._sender(client))
        try:
            await socket.send_text(encode(self._hello_message(role)))
            while True:
                text = await socket.receive_text()
                try:
                    msg = decode_client(text)
                except ProtocolError as exc:
                    await socket.send_text(encode(self._error_message(str(exc))))
                    break
                if msg["seq"] <= client.last_seq:
                    await socket.send_text(
                        encode(self._error_message(
                            f"seq {msg['seq']} not increasing (last {client.last_seq})"
                        ))
                    )
                    break
                client.last_seq = msg["seq"]
                if msg["type"] == "input":
                    if client.role != "pilot":
                        await socket.send_text(
                            encode(self._error_message("busy: another client is piloting"))
                        )
                        continue
                    x = max(-1.0, min(1.0, msg["p_i"][0]))
                    y = max(-1.0, min(1.0, msg["p_i"][1]))
                    self._stick = JoystickInput(p_i=Vec2(x, y), button=msg["button"])
                    self._input_at = time_mod.monotonic()
                    if self.lockstep:
                        self._tick_once(self._stick)
                        await socket.send_text(encode(self._state_message(False)))
                else:
                    reply = self._handle_control(msg)
                    await socket.send_text(encode(reply))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            self._clients.pop(socket, None)
            if self._pilot is socket:
                self._pilot = None
                # Fail safe: a vanished pilot must not keep flying the robot.
                self._stick = JoystickInput(p_i=Vec2(0.0, 0.0), button=False)
                self._input_at = None


def resolve_environment(name_or_path: str):
    """Accept a shipped map name (env1..env4) or a path to a map file."""
    if name_or_path in SHIPPED_MAPS:
        return load_shipped_environment(name_or_path)
    with open(name_or_path, "rb") as f:
        return load_environment(f)


def create_app(
    config: SessionConfig,
    out_dir: Optional[str] = None,
    lockstep: bool = False,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    service = LiveService(config, out_dir=out_dir, lockstep=lockstep)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        if not service.lockstep:
            service._loop_task = asyncio.create_task(service.run_loop())
        try:
            yield
        finally:
            if service._loop_task is not None:
                service._loop_task.cancel()

    app = FastAPI(title="telerate session service", lifespan=lifespan)
    app.state.service = service

    @app.websocket("/ws")
    async def ws_endpoint(socket: WebSocket):
        await service.handle_socket(socket)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="cockpit")
    return app
