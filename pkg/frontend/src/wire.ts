// Wire protocol: canonical JSON (sorted keys, no whitespace, native
// ECMAScript number rendering). The byte encoding of any message is
// identical to the server's, which the golden-corpus test checks.

export const SCHEMA_VERSION = 1;

export interface InputMessage {
  type: "input";
  seq: number;
  p_i: [number, number];
  button: boolean;
}

export interface ControlMessage {
  type: "control";
  seq: number;
  action: "start" | "reset" | "set_method" | "set_env";
  method?: string;
  env?: string;
}

export interface TargetSpec {
  pos: [number, number];
  radius: number;
}

export interface EnvDoc {
  name: string;
  walls: [[number, number], [number, number]][];
  start: [number, number];
  targets: TargetSpec[];
  hallway_exit: { point: [number, number]; dir: [number, number] };
  hallway_width: number;
  route?: [number, number][][];
}

export interface HelloMessage {
  type: "hello";
  seq: number;
  schema: number;
  role: "pilot" | "spectator";
  method: string;
  env: EnvDoc;
  params: Record<string, number | null>;
  tick_rate: number;
  broadcast_rate: number;
}

export interface StateMessage {
  type: "state";
  seq: number;
  schema: number;
  time: number;
  position: [number, number];
  velocity: [number, number];
  scales: { s_human: number; s_risk: number; s_x: number; s_y: number };
  risks: { c_r: number; c_rx: number; c_ry: number; c_rx_dir: number; c_ry_dir: number };
  frame_angle: number;
  capsule: { a: [number, number]; b: [number, number]; radius: number } | null;
  field_extent: number;
  trial: { phase: string; next_target: number; exited_hallway: boolean };
  targets: TargetSpec[];
  contact: boolean;
  input_stale: boolean;
}

export interface AckMessage {
  type: "ack";
  seq: number;
  for_seq: number;
  action: string;
}

export interface ErrorMessage {
  type: "error";
  seq: number;
  message: string;
}

export type ServerMessage = HelloMessage | StateMessage | AckMessage | ErrorMessage;
export type ClientMessage = InputMessage | ControlMessage;

export class ProtocolError extends Error {}

function encodeValue(value: unknown, out: string[]): void {
  if (value === null || value === undefined) {
    out.push("null");
  } else if (value === true) {
    out.push("true");
  } else if (value === false) {
    out.push("false");
  } else if (typeof value === "string") {
    out.push(JSON.stringify(value));
  } else if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new ProtocolError("non-finite numbers cannot be encoded");
    }
    out.push(Object.is(value, -0) ? "0" : String(value));
  } else if (Array.isArray(value)) {
    out.push("[");
    value.forEach((item, i) => {
      if (i) out.push(",");
      encodeValue(item, out);
    });
    out.push("]");
  } else if (typeof value === "object") {
    const obj = value as Record<string, unknown>;
    out.push("{");
    Object.keys(obj)
      .sort()
      .forEach((key, i) => {
        if (i) out.push(",");
        out.push(JSON.stringify(key));
        out.push(":");
        encodeValue(obj[key], out);
      });
    out.push("}");
  } else {
    throw new ProtocolError(`cannot encode ${typeof value}`);
  }
}

export function encode(message: ClientMessage | Record<string, unknown>): string {
  const out: string[] = [];
  encodeValue(message, out);
  return out.join("");
}

function requireNumber(obj: Record<string, unknown>, key: string): number {
  const value = obj[key];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`field ${key} must be a finite number`);
  }
  return value;
}

function requireVec(obj: Record<string, unknown>, key: string): [number, number] {
  const value = obj[key];
  if (
    !Array.isArray(value) ||
    value.length !== 2 ||
    typeof value[0] !== "number" ||
    typeof value[1] !== "number"
  ) {
    throw new ProtocolError(`field ${key} must be [x, y]`);
  }
  return [value[0], value[1]];
}

export function decodeServer(text: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`invalid JSON: ${err}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("message must be a JSON object");
  }
  const record = obj as Record<string, unknown>;
  const type = record["type"];
  if (type !== "hello" && type !== "state" && type !== "ack" && type !== "error") {
    throw new ProtocolError(`unknown server message type ${String(type)}`);
  }
  requireNumber(record, "seq");
  if (type === "state") {
    requireVec(record, "position");
    requireVec(record, "velocity");
    requireNumber(record, "time");
    if (typeof record["trial"] !== "object" || record["trial"] === null) {
      throw new ProtocolError("state message missing trial");
    }
  }
  if (type === "hello" && typeof record["env"] !== "object") {
    throw new ProtocolError("hello message missing env");
  }
  if (type === "error" && typeof record["message"] !== "string") {
    throw new ProtocolError("error message missing text");
  }
  return record as unknown as ServerMessage;
}

export function decodeClient(text: string): ClientMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`invalid JSON: ${err}`);
  }
  const record = obj as Record<string, unknown>;
  const type = record["type"];
  if (type !== "input" && type !== "control") {
    throw new ProtocolError(`unknown client message type ${String(type)}`);
  }
  requireNumber(record, "seq");
  if (type === "input") {
    requireVec(record, "p_i");
    if (typeof record["button"] !== "boolean") {
      throw new ProtocolError("input message missing button");
    }
  } else if (
    record["action"] !== "start" &&
    record["action"] !== "reset" &&
    record["action"] !== "set_method" &&
    record["action"] !== "set_env"
  ) {
    throw new ProtocolError(`unknown control action ${String(record["action"])}`);
  }
  return record as unknown as ClientMessage;
}
