/**
 * HUD view-model: pure reducers from server messages to what the cockpit
 * shows. The UI never simulates physics; every number here came off the wire.
 */

import { EventMessage, TelemetryMessage } from "./protocol.js";

export const TICK_MIN = 172;
export const TICK_MAX = 1811;

export interface ChannelBar {
  label: string;
  tick: number;
  norm: number; // 0..1 across the semantic tick range
}

export interface HudState {
  connection: "connecting" | "live" | "reconnecting" | "version_mismatch";
  bars: ChannelBar[];
  armed: boolean;
  armingMode: string;
  lq: number;
  rssi: number;
  failsafe: boolean;
  banner: string | null;
  exercise: { script: string; step: number; total: number; status: string } | null;
  position: [number, number, number] | null;
  lastTelemetryMs: number | null;
}

const BAR_LABELS = ["roll", "pitch", "throttle", "yaw", "arm"];

export function tickToNorm(tick: number): number {
  const norm = (tick - TICK_MIN) / (TICK_MAX - TICK_MIN);
  return Math.min(1, Math.max(0, norm));
}

export function initialHud(): HudState {
  return {
    connection: "connecting",
    bars: BAR_LABELS.map((label) => ({ label, tick: 0, norm: 0 })),
    armed: false,
    armingMode: "disarmed",
    lq: 0,
    rssi: 0,
    failsafe: false,
    banner: null,
    exercise: null,
    position: null,
    lastTelemetryMs: null,
  };
}

export function reduceTelemetry(hud: HudState, frame: TelemetryMessage): HudState {
  return {
    ...hud,
    connection: "live",
    bars: BAR_LABELS.map((label, i) => ({
      label,
      tick: frame.channels[i],
      norm: tickToNorm(frame.channels[i]),
    })),
    armed: frame.quad.armed,
    armingMode: frame.arming,
    lq: frame.link.lq,
    rssi: frame.link.rssi,
    failsafe: frame.link.failsafe,
    banner: frame.link.failsafe ? "FAILSAFE" : hud.failsafe ? null : hud.banner,
    exercise: frame.exercise,
    position: frame.quad.position,
    lastTelemetryMs: frame.t_ms,
  };
}

export function reduceEvent(hud: HudState, message: EventMessage): HudState {
  switch (message.event) {
    case "link_failsafe":
      return { ...hud, failsafe: true, banner: "FAILSAFE" };
    case "link_restored":
      return { ...hud, failsafe: false, banner: null };
    case "exercise_completed":
      return { ...hud, banner: "EXERCISE COMPLETE" };
    case "collision_failed":
      return { ...hud, banner: "COLLISION - EXERCISE FAILED" };
    case "failsafe_disarm":
      return { ...hud, armed: false };
    case "session_ended": {
      const summary = message.summary as { status?: string } | undefined;
      const status = summary?.status ?? "ended";
      const banner = status === "completed" ? "EXERCISE COMPLETE"
        : `SESSION ${status.toUpperCase()}`;
      return { ...hud, banner };
    }
    case "connection_closed":
      return { ...hud, connection: "reconnecting", banner: "RECONNECTING..." };
    case "warning":
      return hud;
    default:
      return hud;
  }
}

export function reduceVersionMismatch(hud: HudState): HudState {
  return { ...hud, connection: "version_mismatch",
           banner: "PROTOCOL VERSION MISMATCH" };
}
