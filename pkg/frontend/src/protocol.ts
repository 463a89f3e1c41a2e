/**
 * Message types and line framing for the session service protocol
 * (newline-delimited JSON, format 1; see ../../docs/protocol.md).
 */

export const PROTOCOL_VERSION = 1;

export interface ControllerInput {
  trigger: number;
  tilt_pitch: number;
  tilt_roll: number;
  thumbstick_x: number;
  arm_button: boolean;
  timestamp_ms: number;
}

export const NEUTRAL_INPUT: ControllerInput = {
  trigger: 0,
  tilt_pitch: 0,
  tilt_roll: 0,
  thumbstick_x: 0,
  arm_button: false,
  timestamp_ms: 0,
};

export interface QuadTelemetry {
  position: [number, number, number];
  velocity: [number, number, number];
  euler_deg: [number, number, number];
  armed: boolean;
}

export interface TelemetryMessage {
  type: "telemetry";
  t_ms: number;
  quad: QuadTelemetry;
  channels: number[];
  link: { lq: number; rssi: number; failsafe: boolean };
  arming: string;
  exercise: { script: string; step: number; total: number; status: string };
}

export interface WelcomeMessage {
  type: "welcome";
  version: number;
  role: "pilot" | "observer";
  courses: string[];
  scripts: string[];
}

export interface EventMessage {
  type: "event";
  event: string;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  error: string;
  detail?: string;
}

export interface CourseGate {
  center: [number, number, number];
  normal: [number, number, number];
  width: number;
  height: number;
}

export interface CourseData {
  format: number;
  name: string;
  gates: CourseGate[];
  obstacles: { center_xy: [number, number]; radius: number; height: number }[];
  landing_pad: { center_xy: [number, number]; radius: number };
  bounds: { min: [number, number, number]; max: [number, number, number] };
  scripts: Record<string, unknown[]>;
}

export interface CourseMessage {
  type: "course";
  course: CourseData;
}

export type ServerMessage =
  | WelcomeMessage
  | TelemetryMessage
  | EventMessage
  | ErrorMessage
  | CourseMessage
  | { type: "configured"; script: string }
  | { type: "courses"; courses: string[]; scripts: string[] };

/** Reassembles newline-delimited JSON from arbitrary stream chunks. */
export class LineCodec {
  private buffer = "";

  push(chunk: string): ServerMessage[] {
    this.buffer += chunk;
    const out: ServerMessage[] = [];
    for (;;) {
      const idx = this.buffer.indexOf("\n");
      if (idx < 0) break;
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (!line) continue;
      out.push(JSON.parse(line) as ServerMessage);
    }
    return out;
  }
}

export function encodeLine(message: Record<string, unknown>): string {
  return JSON.stringify(message) + "\n";
}

export function controlMessage(input: ControllerInput): Record<string, unknown> {
  return { type: "control_input", ...input };
}
