"""Scripted WebSocket client used by the service and acceptance tests:
drives a complete trial through the wire protocol with no UI."""

import json

from telerate.environment import load_environment
from telerate.geometry import Vec2
from telerate.operators import WaypointOperator
from telerate.riskfield import RobotState
from telerate.trial import TrialPhase, TrialState, params_from_dict
from telerate.wire import decode_server, encode


def drive_full_trial(client, dt=0.01, max_ticks=4000):
    """Run one full trial over /ws in lockstep; returns ticks used."""
    with client.websocket_connect("/ws") as ws:
        hello = decode_server(ws.receive_text())
        assert hello["type"] == "hello"
        env = load_environment(json.dumps(hello["env"]))
        params = params_from_dict(hello["params"])
        operator = WaypointOperator(env, params, dt=dt)
        state = RobotState(position=env.start, velocity=Vec2(0.0, 0.0), time=0.0)
        trial = TrialState()
        seq = 0
        for _ in range(max_ticks):
            stick = operator.step(state, trial)
            seq += 1
            ws.send_text(encode({
                "type": "input", "seq": seq,
                "p_i": [stick.p_i.x, stick.p_i.y], "button": stick.button,
            }))
            msg = decode_server(ws.receive_text())
            assert msg["type"] == "state"
            state = RobotState(
                position=Vec2(*msg["position"]),
                velocity=Vec2(*msg["velocity"]),
                time=msg["time"],
            )
            trial = TrialState(
                phase=TrialPhase(msg["trial"]["phase"]),
                next_target_index=msg["trial"]["next_target"],
                started_at=0.0,
            )
            if trial.phase is TrialPhase.COMPLETE:
                return seq
    raise AssertionError("trial did not complete within the tick budget")
