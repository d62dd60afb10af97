// Overhead 2D view: walls black, robot a green disk to scale, targets
// red circles, braking capsule red, field-extent band gray, plus local
// frame axes. Renders whatever the latest server state says; nothing is
// predicted client-side.

import type { EnvDoc, StateMessage } from "./wire.js";

export interface Viewport {
  scale: number; // pixels per meter
  offsetX: number;
  offsetY: number;
  height: number;
}

export function fitViewport(env: EnvDoc, width: number, height: number): Viewport {
  const xs: number[] = [env.start[0]];
  const ys: number[] = [env.start[1]];
  for (const wall of env.walls) {
    xs.push(wall[0][0], wall[1][0]);
    ys.push(wall[0][1], wall[1][1]);
  }
  for (const target of env.targets) {
    xs.push(target.pos[0]);
    ys.push(target.pos[1]);
  }
  const margin = 1.2;
  const minX = Math.min(...xs) - margin;
  const maxX = Math.max(...xs) + margin;
  const minY = Math.min(...ys) - margin;
  const maxY = Math.max(...ys) + margin;
  const scale = Math.min(width / (maxX - minX), height / (maxY - minY));
  return {
    scale,
    offsetX: minX - (width / scale - (maxX - minX)) / 2,
    offsetY: minY - (height / scale - (maxY - minY)) / 2,
    height,
  };
}

function toPx(view: Viewport, x: number, y: number): [number, number] {
  return [(x - view.offsetX) * view.scale, view.height - (y - view.offsetY) * view.scale];
}

function capsuleStroke(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  a: [number, number],
  b: [number, number],
  radius: number,
  style: string,
): void {
  const [ax, ay] = toPx(view, a[0], a[1]);
  const [bx, by] = toPx(view, b[0], b[1]);
  ctx.save();
  ctx.strokeStyle = style;
  ctx.lineCap = "round";
  ctx.lineWidth = 2 * radius * view.scale;
  ctx.beginPath();
  ctx.moveTo(ax, ay);
  ctx.lineTo(bx + 1e-6, by); // zero-length paths do not draw caps
  ctx.stroke();
  ctx.restore();
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  env: EnvDoc,
  state: StateMessage | null,
  robotRadius: number,
): void {
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  if (state && state.capsule) {
    // gray field band, then the red critical region on top
    capsuleStroke(ctx, view, state.capsule.a, state.capsule.b,
      state.capsule.radius + state.field_extent, "rgba(120,120,120,0.25)");
    capsuleStroke(ctx, view, state.capsule.a, state.capsule.b,
      state.capsule.radius, "rgba(220,40,40,0.45)");
  }

  ctx.strokeStyle = "#111";
  ctx.lineWidth = Math.max(2, 0.04 * view.scale);
  ctx.lineCap = "round";
  for (const wall of env.walls) {
    const [ax, ay] = toPx(view, wall[0][0], wall[0][1]);
    const [bx, by] = toPx(view, wall[1][0], wall[1][1]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }

  const nextIndex = state ? state.trial.next_target : 0;
  env.targets.forEach((target, i) => {
    const [tx, ty] = toPx(view, target.pos[0], target.pos[1]);
    ctx.beginPath();
    ctx.arc(tx, ty, target.radius * view.scale, 0, 2 * Math.PI);
    if (i === nextIndex && state && state.trial.phase !== "complete") {
      ctx.fillStyle = "rgba(220,40,40,0.85)";
      ctx.fill();
    } else {
      ctx.strokeStyle = "rgba(220,40,40,0.8)";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  });

  const pos = state ? state.position : env.start;
  const [rx, ry] = toPx(view, pos[0], pos[1]);
  ctx.beginPath();
  ctx.arc(rx, ry, robotRadius * view.scale, 0, 2 * Math.PI);
  ctx.fillStyle = state && state.contact ? "#cc2222" : "#1a9e3a";
  ctx.fill();

  if (state) {
    // local frame axes from the robot: x-hat points at the argmax risk
    const axis = (angle: number, style: string) => {
      const len = 0.6 * view.scale;
      ctx.strokeStyle = style;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(rx, ry);
      ctx.lineTo(rx + len * Math.cos(angle), ry - len * Math.sin(angle));
      ctx.stroke();
    };
    axis(state.frame_angle, "rgba(200,60,60,0.9)");
    axis(state.frame_angle + Math.PI / 2, "rgba(60,60,200,0.9)");
  }
}

export function drawScaleBars(
  ctx: CanvasRenderingContext2D,
  state: StateMessage | null,
  maxScale: number,
): void {
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const entries: [string, number, number][] = state
    ? [
        ["s_x", state.scales.s_x, maxScale],
        ["s_y", state.scales.s_y, maxScale],
        ["s_human", state.scales.s_human, 1],
        ["s_risk", state.scales.s_risk, 1],
      ]
    : [];
  const barWidth = ctx.canvas.width - 70;
  entries.forEach(([label, value, top], i) => {
    const y = 14 + i * 22;
    ctx.fillStyle = "#444";
    ctx.font = "12px sans-serif";
    ctx.fillText(label, 4, y + 10);
    ctx.fillStyle = "#ddd";
    ctx.fillRect(60, y, barWidth, 14);
    const frac = Math.max(0, Math.min(1, value / top));
    ctx.fillStyle = frac < 0.2 ? "#cc2222" : "#1a9e3a";
    ctx.fillRect(60, y, barWidth * frac, 14);
  });
  if (state && state.scales.s_x === 0 && state.scales.s_y === 0 && state.risks.c_r >= 1) {
    ctx.fillStyle = "#cc2222";
    ctx.font = "bold 13px sans-serif";
    ctx.fillText("BLOCKED: collision certain on commanded path", 4, 110);
  }
}
