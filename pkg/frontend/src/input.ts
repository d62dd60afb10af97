// Stick input from keyboard (WASD / arrows, ramping to full deflection
// over 150 ms) or the first connected gamepad; space or a trigger is the
// target-confirm button. The server applies its radial clamp regardless.

const KEY_RAMP_SECONDS = 0.15;

const KEY_AXES: Record<string, [number, number]> = {
  KeyW: [0, 1],
  ArrowUp: [0, 1],
  KeyS: [0, -1],
  ArrowDown: [0, -1],
  KeyA: [-1, 0],
  ArrowLeft: [-1, 0],
  KeyD: [1, 0],
  ArrowRight: [1, 0],
};

export interface StickReading {
  x: number;
  y: number;
  button: boolean;
  source: "keyboard" | "gamepad";
}

export class InputSource {
  private held = new Set<string>();
  private spaceHeld = false;
  private x = 0;
  private y = 0;

  attach(target: EventTarget): void {
    target.addEventListener("keydown", (ev) => this.onKey(ev as KeyboardEvent, true));
    target.addEventListener("keyup", (ev) => this.onKey(ev as KeyboardEvent, false));
  }

  private onKey(ev: KeyboardEvent, down: boolean): void {
    if (ev.code === "Space") {
      this.spaceHeld = down;
      ev.preventDefault();
      return;
    }
    if (ev.code in KEY_AXES) {
      if (down) {
        this.held.add(ev.code);
      } else {
        this.held.delete(ev.code);
      }
      ev.preventDefault();
    }
  }

  private keyboardTarget(): [number, number] {
    let tx = 0;
    let ty = 0;
    for (const code of this.held) {
      const [ax, ay] = KEY_AXES[code];
      tx += ax;
      ty += ay;
    }
    return [Math.max(-1, Math.min(1, tx)), Math.max(-1, Math.min(1, ty))];
  }

  private firstGamepad(): Gamepad | null {
    if (typeof navigator === "undefined" || !navigator.getGamepads) {
      return null;
    }
    for (const pad of navigator.getGamepads()) {
      if (pad && pad.connected) {
        return pad;
      }
    }
    return null;
  }

  read(dtSeconds: number): StickReading {
    const pad = this.firstGamepad();
    if (pad) {
      const x = pad.axes[0] ?? 0;
      const y = -(pad.axes[1] ?? 0); // stick up = +y in the world
      const button = Boolean(
        pad.buttons[0]?.pressed || pad.buttons[7]?.pressed || this.spaceHeld
      );
      this.x = x;
      this.y = y;
      return { x, y, button, source: "gamepad" };
    }
    const [tx, ty] = this.keyboardTarget();
    const step = dtSeconds / KEY_RAMP_SECONDS;
    this.x = approach(this.x, tx, step);
    this.y = approach(this.y, ty, step);
    return { x: this.x, y: this.y, button: this.spaceHeld, source: "keyboard" };
  }
}

function approach(value: number, target: number, step: number): number {
  if (value < target) {
    return Math.min(target, value + step);
  }
  if (value > target) {
    return Math.max(target, value - step);
  }
  return value;
}
