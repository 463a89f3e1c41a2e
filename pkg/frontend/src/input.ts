/**
 * Input bindings emulating the handheld controller: one source drives each of
 * the four control inputs (trigger -> throttle, two-axis tilt -> pitch/roll,
 * stick -> yaw, button -> arm). A binding is invalid unless every control is
 * bound exactly once.
 *
 * Keyboard feel: the trigger ramps while held (W/S), tilt springs toward a
 * fixed command while an arrow key is held and back to level on release, the
 * yaw stick snaps to a half deflection (A = ccw, D = cw), Enter arms.
 */

import { ControllerInput } from "./protocol.js";

export type BindingSource = "gamepad" | "keyboard" | "pointer-tilt";
export type ControlName = "throttle" | "tilt" | "yaw" | "arm";

export interface InputBinding {
  source: BindingSource;
  assignments: Record<ControlName, string>;
}

const CONTROLS: ControlName[] = ["throttle", "tilt", "yaw", "arm"];

export function validateBinding(binding: InputBinding): void {
  const seen = new Set<string>();
  for (const control of CONTROLS) {
    const assigned = binding.assignments[control];
    if (!assigned) {
      throw new Error(`control ${control} is not bound`);
    }
    if (seen.has(assigned)) {
      throw new Error(`axis ${assigned} bound twice`);
    }
    seen.add(assigned);
  }
  const extra = Object.keys(binding.assignments).filter(
    (key) => !CONTROLS.includes(key as ControlName));
  if (extra.length) {
    throw new Error(`unknown controls: ${extra.join(", ")}`);
  }
}

export const KEYBOARD_BINDING: InputBinding = {
  source: "keyboard",
  assignments: {
    throttle: "KeyW/KeyS ramp",
    tilt: "Arrow keys",
    yaw: "KeyA/KeyD",
    arm: "Enter",
  },
};

export const GAMEPAD_BINDING: InputBinding = {
  source: "gamepad",
  assignments: {
    throttle: "right trigger",
    tilt: "left stick",
    yaw: "right stick x",
    arm: "button A",
  },
};

export const POINTER_TILT_BINDING: InputBinding = {
  source: "pointer-tilt",
  assignments: {
    throttle: "KeyW/KeyS ramp",
    tilt: "pointer offset",
    yaw: "KeyA/KeyD",
    arm: "Enter",
  },
};

export const BINDING_PRESETS: Record<BindingSource, InputBinding> = {
  keyboard: KEYBOARD_BINDING,
  gamepad: GAMEPAD_BINDING,
  "pointer-tilt": POINTER_TILT_BINDING,
};

export interface ControllerSource {
  sample(dtMs: number, nowMs: number): ControllerInput;
}

const TRIGGER_RATE = 1.5; // trigger fraction per second while W/S held
const TILT_CMD_DEG = 6.0; // commanded tilt while an arrow key is held
const TILT_TAU_MS = 120; // spring time constant toward the commanded tilt
const YAW_DEFLECTION = 0.5;

export class KeyboardController implements ControllerSource {
  private held = new Set<string>();
  private trigger = 0;
  private tiltPitch = 0;
  private tiltRoll = 0;

  keydown(code: string): void {
    this.held.add(code);
  }

  keyup(code: string): void {
    this.held.delete(code);
  }

  releaseAll(): void {
    this.held.clear();
  }

  get heldKeys(): ReadonlySet<string> {
    return this.held;
  }

  sample(dtMs: number, nowMs: number): ControllerInput {
    const dt = dtMs / 1000;
    if (this.held.has("KeyW")) this.trigger += TRIGGER_RATE * dt;
    if (this.held.has("KeyS")) this.trigger -= TRIGGER_RATE * dt;
    this.trigger = Math.min(1, Math.max(0, this.trigger));

    const pitchTarget = (this.held.has("ArrowUp") ? TILT_CMD_DEG : 0)
      + (this.held.has("ArrowDown") ? -TILT_CMD_DEG : 0);
    const rollTarget = (this.held.has("ArrowRight") ? TILT_CMD_DEG : 0)
      + (this.held.has("ArrowLeft") ? -TILT_CMD_DEG : 0);
    const alpha = 1 - Math.exp(-dtMs / TILT_TAU_MS);
    this.tiltPitch += (pitchTarget - this.tiltPitch) * alpha;
    this.tiltRoll += (rollTarget - this.tiltRoll) * alpha;

    const yaw = (this.held.has("KeyA") ? YAW_DEFLECTION : 0)
      + (this.held.has("KeyD") ? -YAW_DEFLECTION : 0);

    return {
      trigger: this.trigger,
      tilt_pitch: this.tiltPitch,
      tilt_roll: this.tiltRoll,
      thumbstick_x: yaw,
      arm_button: this.held.has("Enter"),
      timestamp_ms: nowMs,
    };
  }
}

/** Subset of the Gamepad API the mapper needs; tests feed plain objects. */
export interface GamepadSnapshot {
  axes: number[];
  buttons: { pressed: boolean; value: number }[];
}

const GAMEPAD_MAX_TILT_DEG = 25;

export class GamepadController implements ControllerSource {
  constructor(private poll: () => GamepadSnapshot | null) {}

  sample(_dtMs: number, nowMs: number): ControllerInput {
    const pad = this.poll();
    if (!pad) {
      return { trigger: 0, tilt_pitch: 0, tilt_roll: 0, thumbstick_x: 0,
               arm_button: false, timestamp_ms: nowMs };
    }
    const axis = (i: number) => pad.axes[i] ?? 0;
    return {
      trigger: Math.min(1, Math.max(0, pad.buttons[7]?.value ?? 0)),
      tilt_pitch: -axis(1) * GAMEPAD_MAX_TILT_DEG, // stick up = forward
      tilt_roll: axis(0) * GAMEPAD_MAX_TILT_DEG,
      thumbstick_x: Math.min(1, Math.max(-1, -axis(2))),
      arm_button: pad.buttons[0]?.pressed ?? false,
      timestamp_ms: nowMs,
    };
  }
}

const POINTER_DEG_PER_FRACTION = 20; // full offset to screen edge = 20 deg

/** Pointer offset from screen center drives tilt; keyboard keeps the rest. */
export class PointerTiltController implements ControllerSource {
  private keyboard = new KeyboardController();
  private offsetX = 0; // -1..1 of half-extent
  private offsetY = 0;

  keydown(code: string): void {
    this.keyboard.keydown(code);
  }

  keyup(code: string): void {
    this.keyboard.keyup(code);
  }

  pointerMove(offsetX: number, offsetY: number): void {
    this.offsetX = Math.min(1, Math.max(-1, offsetX));
    this.offsetY = Math.min(1, Math.max(-1, offsetY));
  }

  sample(dtMs: number, nowMs: number): ControllerInput {
    const base = this.keyboard.sample(dtMs, nowMs);
    return {
      ...base,
      tilt_pitch: -this.offsetY * POINTER_DEG_PER_FRACTION, // up on screen = forward
      tilt_roll: this.offsetX * POINTER_DEG_PER_FRACTION,
    };
  }
}

export interface Scheduler {
  setInterval(fn: () => void, ms: number): unknown;
  clearInterval(handle: unknown): void;
  now(): number;
}

export const realScheduler: Scheduler = {
  setInterval: (fn, ms) => setInterval(fn, ms),
  clearInterval: (handle) => clearInterval(handle as Parameters<typeof clearInterval>[0]),
  now: () => Date.now(),
};

export const INPUT_INTERVAL_MS = 1000 / 60;

/** Samples a controller source at 60 Hz and forwards each ControllerInput. */
export class InputSampler {
  sampleCount = 0;
  private handle: unknown = null;
  private lastMs: number | null = null;

  constructor(private source: ControllerSource,
              private sink: (input: ControllerInput) => void,
              private scheduler: Scheduler = realScheduler) {}

  start(): void {
    if (this.handle !== null) return;
    this.lastMs = this.scheduler.now();
    this.handle = this.scheduler.setInterval(() => this.tick(), INPUT_INTERVAL_MS);
  }

  private tick(): void {
    const now = this.scheduler.now();
    const dt = this.lastMs === null ? INPUT_INTERVAL_MS : now - this.lastMs;
    this.lastMs = now;
    this.sampleCount += 1;
    this.sink(this.source.sample(dt, now));
  }

  stop(): void {
    if (this.handle !== null) {
      this.scheduler.clearInterval(this.handle);
      this.handle = null;
    }
  }
}
