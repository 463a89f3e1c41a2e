/**
 * Browser entry point. Configuration via URL query parameters:
 *   ?server=ws://127.0.0.1:8766   bridge/WebSocket address
 *   &binding=keyboard|pointer-tilt|gamepad
 *   &script=track|basics
 */

import { SessionClient } from "./client.js";
import {
  BINDING_PRESETS,
  BindingSource,
  GamepadController,
  InputSampler,
  KeyboardController,
  PointerTiltController,
  validateBinding,
  type ControllerSource,
} from "./input.js";
import { HudState, initialHud, reduceEvent, reduceTelemetry, reduceVersionMismatch } from "./hud.js";
import { EventMessage, TelemetryMessage } from "./protocol.js";
import { buildCourseOps, buildDroneOps, renderOps, View } from "./scene.js";
import { WebSocketTransport } from "./transport.js";

function query(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

function setBar(el: HTMLElement, norm: number): void {
  const fill = el.querySelector(".fill") as HTMLElement;
  fill.style.width = `${(norm * 100).toFixed(1)}%`;
}

function renderHud(hud: HudState): void {
  for (const bar of hud.bars) {
    const el = document.getElementById(`bar-${bar.label}`);
    if (el) {
      setBar(el, bar.norm);
      const value = el.querySelector(".value") as HTMLElement;
      value.textContent = String(bar.tick || "-");
    }
  }
  const set = (id: string, text: string) => {
    const el = document.getElementById(id);
    if (el) el.textContent = text;
  };
  set("arm-state", hud.armed ? "ARMED" : hud.armingMode.toUpperCase());
  set("link-state", `LQ ${hud.lq}%  RSSI ${hud.rssi} dBm`);
  set("exercise-state", hud.exercise
    ? `${hud.exercise.script}: step ${hud.exercise.step}/${hud.exercise.total} (${hud.exercise.status})`
    : "no exercise");
  set("connection-state", hud.connection);
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = hud.banner ?? "";
    banner.style.display = hud.banner ? "block" : "none";
  }
}

async function main(): Promise<void> {
  const serverUrl = query("server", "ws://127.0.0.1:8766");
  const bindingName = query("binding", "keyboard") as BindingSource;
  const script = query("script", "track");

  const binding = BINDING_PRESETS[bindingName] ?? BINDING_PRESETS.keyboard;
  validateBinding(binding);

  let hud = initialHud();
  renderHud(hud);

  const transport = new WebSocketTransport(serverUrl);
  await transport.whenOpen();
  const client = new SessionClient(transport);

  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const view: View = { scale: 70, originX: canvas.width / 2 - 60, originY: canvas.height / 2 + 40 };

  let source: ControllerSource;
  const keyboard = new KeyboardController();
  const pointer = new PointerTiltController();
  if (bindingName === "gamepad") {
    source = new GamepadController(() => {
      const pads = navigator.getGamepads?.() ?? [];
      const pad = pads.find((p) => p !== null);
      return pad ? { axes: [...pad.axes], buttons: pad.buttons.map(
        (b) => ({ pressed: b.pressed, value: b.value })) } : null;
    });
  } else if (bindingName === "pointer-tilt") {
    source = pointer;
    canvas.addEventListener("mousemove", (ev) => {
      const rect = canvas.getBoundingClientRect();
      pointer.pointerMove(
        ((ev.clientX - rect.left) / rect.width) * 2 - 1,
        ((ev.clientY - rect.top) / rect.height) * 2 - 1,
      );
    });
  } else {
    source = keyboard;
  }
  const keyTarget = bindingName === "pointer-tilt" ? pointer : keyboard;
  window.addEventListener("keydown", (ev) => {
    if (!ev.repeat) keyTarget.keydown(ev.code);
  });
  window.addEventListener("keyup", (ev) => keyTarget.keyup(ev.code));

  client.on("telemetry", (message) => {
    hud = reduceTelemetry(hud, message as TelemetryMessage);
  });
  client.on("event", (message) => {
    hud = reduceEvent(hud, message as EventMessage);
  });
  client.on("error", (message) => {
    if ((message as { error: string }).error === "unsupported_version") {
      hud = reduceVersionMismatch(hud);
    }
  });

  const sampler = new InputSampler(source, (input) => {
    if (client.status === "ready" && client.role === "pilot") {
      client.sendControl(input);
    }
  });

  client.hello();
  await client.waitFor((m) => m.type === "welcome" || m.type === "error");
  if (client.status === "version_mismatch") {
    hud = reduceVersionMismatch(hud);
    renderHud(hud);
    return;
  }
  client.requestCourse();
  await client.waitFor((m) => m.type === "course");
  if (client.role === "pilot") {
    client.configure({ script });
    await client.waitFor((m) => m.type === "configured" || m.type === "error");
    client.start();
  }
  sampler.start();

  const frame = () => {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (client.course) renderOps(ctx, buildCourseOps(client.course, view));
    if (client.lastTelemetry) {
      renderOps(ctx, buildDroneOps(client.lastTelemetry.quad, view));
    }
    renderHud(hud);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

main().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = `CONNECTION FAILED: ${err}`;
    banner.style.display = "block";
  }
});
