// Cockpit entry point: connects to the session service, streams inputs
// at 60 Hz, and renders the latest authoritative state.

import { InputSource } from "./input.js";
import { drawScaleBars, drawScene, fitViewport } from "./render.js";
import {
  encode,
  decodeServer,
  EnvDoc,
  HelloMessage,
  StateMessage,
} from "./wire.js";

const INPUT_HZ = 60;

interface ClientState {
  connected: boolean;
  role: string;
  env: EnvDoc | null;
  method: string;
  maxScale: number;
  robotRadius: number;
  latest: StateMessage | null;
  lastStateAt: number;
  notice: string;
}

const client: ClientState = {
  connected: false,
  role: "",
  env: null,
  method: "",
  maxScale: 5,
  robotRadius: 0.2,
  latest: null,
  lastStateAt: 0,
  notice: "connecting...",
};

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const hudCanvas = document.getElementById("hud") as HTMLCanvasElement;
const statusEl = document.getElementById("status") as HTMLElement;
const noticeEl = document.getElementById("notice") as HTMLElement;
const methodSel = document.getElementById("method") as HTMLSelectElement;
const envSel = document.getElementById("env") as HTMLSelectElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;

const input = new InputSource();
input.attach(window);

let socket: WebSocket | null = null;
let seq = 0;

function send(message: Record<string, unknown>): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    seq += 1;
    socket.send(encode({ ...message, seq }));
  }
}

function connect(): void {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  socket = new WebSocket(`${proto}//${location.host}/ws`);
  socket.onopen = () => {
    client.connected = true;
    client.notice = "";
  };
  socket.onclose = () => {
    client.connected = false;
    client.notice = "disconnected - retrying";
    setTimeout(connect, 1000);
  };
  socket.onmessage = (ev) => {
    const msg = decodeServer(String(ev.data));
    if (msg.type === "hello") {
      const hello = msg as HelloMessage;
      client.role = hello.role;
      client.env = hello.env;
      client.method = hello.method;
      client.maxScale = Number(hello.params["max_scale"] ?? 5);
      client.robotRadius = Number(hello.params["robot_radius"] ?? 0.2);
      methodSel.value = hello.method;
      envSel.value = hello.env.name;
      client.latest = null;
    } else if (msg.type === "state") {
      client.latest = msg as StateMessage;
      client.lastStateAt = performance.now();
    } else if (msg.type === "error") {
      client.notice = msg.message;
    } else if (msg.type === "ack") {
      client.notice = "";
      client.latest = null;
      if (msg.action === "set_env") {
        // the env document arrives in the hello; reconnect to get it
        socket?.close();
      }
    }
  };
}

function trialRunning(): boolean {
  return client.latest !== null && client.latest.trial.phase === "running";
}

methodSel.addEventListener("change", () => {
  if (trialRunning()) {
    client.notice = "finish or reset the trial before switching methods";
    methodSel.value = client.method;
    return;
  }
  send({ type: "control", action: "set_method", method: methodSel.value });
  client.method = methodSel.value;
});

envSel.addEventListener("change", () => {
  if (trialRunning()) {
    client.notice = "finish or reset the trial before switching maps";
    if (client.env) envSel.value = client.env.name;
    return;
  }
  send({ type: "control", action: "set_env", env: envSel.value });
});

resetBtn.addEventListener("click", () => {
  send({ type: "control", action: "reset" });
});

setInterval(() => {
  const reading = input.read(1 / INPUT_HZ);
  if (client.connected && client.role === "pilot") {
    send({
      type: "input",
      p_i: [reading.x, reading.y],
      button: reading.button,
    });
  }
}, 1000 / INPUT_HZ);

function frame(): void {
  const ctx = canvas.getContext("2d");
  const hud = hudCanvas.getContext("2d");
  if (ctx && client.env) {
    const view = fitViewport(client.env, canvas.width, canvas.height);
    drawScene(ctx, view, client.env, client.latest, client.robotRadius);
    const stale =
      client.latest !== null && performance.now() - client.lastStateAt > 500;
    if (!client.connected || stale) {
      ctx.fillStyle = "rgba(255,255,255,0.55)";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      ctx.fillStyle = "#333";
      ctx.font = "bold 18px sans-serif";
      ctx.fillText(client.connected ? "state stream stalled" : "disconnected",
        canvas.width / 2 - 80, canvas.height / 2);
    }
  }
  if (hud) {
    drawScaleBars(hud, client.latest, client.maxScale);
  }
  const s = client.latest;
  statusEl.textContent = s
    ? `role ${client.role} | t=${s.time.toFixed(2)}s | phase ${s.trial.phase}` +
      ` | target ${s.trial.next_target + 1}/4` +
      (s.input_stale ? " | INPUT STALE" : "") +
      (s.contact ? " | CONTACT" : "")
    : `role ${client.role || "-"} | waiting for state`;
  noticeEl.textContent = client.notice;
  requestAnimationFrame(frame);
}

connect();
requestAnimationFrame(frame);
