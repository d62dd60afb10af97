"""Wire protocol for the live session service.

Messages are JSON objects in canonical form: keys sorted, no
whitespace, and numbers rendered the way ECMAScript renders them
(JSON Canonicalization Scheme style). That makes the byte encoding of
any message identical between this server and a JavaScript client, so
protocol conformance can be checked byte-for-byte against a golden
corpus from both sides.

Message types (every message carries a monotonically increasing `seq`):

client -> server
  input   {type, seq, p_i: [x, y], button}
  control {type, seq, action: start|reset|set_method|set_env, ...}

server -> client
  hello   {type, seq, schema, role, method, env, params, tick_rate,
           broadcast_rate}
  state   {type, seq, schema, time, position, velocity, scales, risks,
           frame_angle, capsule, field_extent, trial, targets, contact,
           input_stale}
  ack     {type, seq, for_seq, action}
  error   {type, seq, message}
"""

from __future__ import annotations

import json
import math
from typing import Any

SCHEMA_VERSION = 1

CLIENT_TYPES = {"input", "control"}
SERVER_TYPES = {"hello", "state", "ack", "error"}
CONTROL_ACTIONS = {"start", "reset", "set_method", "set_env"}


class ProtocolError(ValueError):
    """A message violated the wire protocol."""


def es_number(value: float) -> str:
    """Render a float exactly as ECMAScript's Number-to-string would.

    Follows the ToString(Number) digit placement rules, using Python's
    shortest round-trip repr for the significant digits (both languages
    use shortest round-trip, so the digits agree).
    """
    if math.isnan(value) or math.isinf(value):
        raise ProtocolError("non-finite numbers cannot be encoded")
    if value == 0.0:
        return "0"
    sign = "-" if value < 0 else ""
    r = repr(abs(float(value)))
    if "e" in r:
        mantissa, _, exp_str = r.partition("e")
        exponent = int(exp_str)
    else:
        mantissa, exponent = r, 0
    int_part, _, frac_part = mantissa.partition(".")
    digits = int_part + frac_part
    first = next(i for i, ch in enumerate(digits) if ch != "0")
    # value = 0.s x 10^n with s the significant digits
    n = len(int_part) - first + exponent
    s = digits[first:].rstrip("0") or "0"
    k = len(s)
    if k <= n <= 21:
        body = s + "0" * (n - k)
    elif 0 < n <= 21:
        body = s[:n] + "." + s[n:]
    elif -6 < n <= 0:
        body = "0." + "0" * (-n) + s
    else:
        e = n - 1
        exp_text = f"e+{e}" if e >= 0 else f"e-{-e}"
        body = s if k == 1 else s[0] + "." + s[1:]
        body += exp_text
    return sign + body


def _encode(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, int):
        out.append(es_number(float(value)))
    elif isinstance(value, float):
        out.append(es_number(value))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise ProtocolError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    else:
        raise ProtocolError(f"cannot encode {type(value).__name__} on the wire")


def encode(message: dict) -> str:
    """Canonical encoding of a wire message."""
    out: list[str] = []
    _encode(message, out)
    return "".join(out)


def _require(obj: dict, key: str, types) -> Any:
    if key not in obj:
        raise ProtocolError(f"message missing field {key!r}")
    value = obj[key]
    allowed = types if isinstance(types, tuple) else (types,)
    if isinstance(value, bool) and bool not in allowed:
        raise ProtocolError(f"field {key!r} has wrong type bool")
    if not isinstance(value, allowed):
        raise ProtocolError(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _require_vec(obj: dict, key: str) -> tuple[float, float]:
    value = _require(obj, key, list)
    if len(value) != 2 or not all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in value
    ):
        raise ProtocolError(f"field {key!r} must be [x, y]")
    x, y = float(value[0]), float(value[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ProtocolError(f"field {key!r} must be finite")
    return x, y


def decode_client(text: str) -> dict:
    """Parse and validate a client -> server message."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolError("message must be a JSON object")
    msg_type = _require(obj, "type", str)
    if msg_type not in CLIENT_TYPES:
        raise ProtocolError(f"unknown client message type {msg_type!r}")
    seq = _require(obj, "seq", (int, float))
    if isinstance(seq, bool) or seq != int(seq) or seq < 0:
        raise ProtocolError("seq must be a nonnegative integer")
    obj["seq"] = int(seq)
    if msg_type == "input":
        _require_vec(obj, "p_i")
        _require(obj, "button", bool)
    else:
        action = _require(obj, "action", str)
        if action not in CONTROL_ACTIONS:
            raise ProtocolError(f"unknown control action {action!r}")
        if action == "set_method":
            _require(obj, "method", str)
        if action == "set_env":
            _require(obj, "env", str)
    return obj


def decode_server(text: str) -> dict:
    """Parse and validate a server -> client message (used by test clients)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolError("message must be a JSON object")
    msg_type = _require(obj, "type", str)
    if msg_type not in SERVER_TYPES:
        raise ProtocolError(f"unknown server message type {msg_type!r}")
    _require(obj, "seq", (int, float))
    if msg_type == "state":
        _require_vec(obj, "position")
        _require_vec(obj, "velocity")
        _require(obj, "trial", dict)
    return obj
