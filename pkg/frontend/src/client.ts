/**
 * Session client: handshake, control stream, and message dispatch over any
 * Transport. Holds no simulation state of its own; everything shown to the
 * pilot comes from server telemetry.
 */

import {
  ControllerInput,
  CourseData,
  LineCodec,
  PROTOCOL_VERSION,
  ServerMessage,
  TelemetryMessage,
  WelcomeMessage,
  controlMessage,
  encodeLine,
} from "./protocol.js";
import { Transport } from "./transport.js";

export type ClientStatus =
  | "handshaking"
  | "ready"
  | "version_mismatch"
  | "disconnected";

type Handler = (message: ServerMessage) => void;

export interface ConfigureOptions {
  script?: string;
  loss_probability?: number;
  latency_ms?: number;
  packet_rate?: number;
  rng_seed?: number;
  failsafe_timeout_ms?: number;
  max_duration_s?: number;
}

export class SessionClient {
  status: ClientStatus = "handshaking";
  role: "pilot" | "observer" | null = null;
  course: CourseData | null = null;
  lastTelemetry: TelemetryMessage | null = null;

  private codec = new LineCodec();
  private handlers = new Map<string, Handler[]>();

  constructor(private transport: Transport) {
    transport.onData = (chunk) => {
      for (const message of this.codec.push(chunk)) this.dispatch(message);
    };
    transport.onClose = () => {
      this.status = "disconnected";
      this.emit({ type: "event", event: "connection_closed" });
    };
    transport.onError = (detail) => {
      this.emit({ type: "error", error: "transport", detail });
    };
  }

  on(type: string, handler: Handler): void {
    const list = this.handlers.get(type) ?? [];
    list.push(handler);
    this.handlers.set(type, list);
  }

  private emit(message: ServerMessage): void {
    for (const handler of this.handlers.get(message.type) ?? []) handler(message);
    for (const handler of this.handlers.get("*") ?? []) handler(message);
  }

  private dispatch(message: ServerMessage): void {
    if (message.type === "welcome") {
      const welcome = message as WelcomeMessage;
      this.role = welcome.role;
      this.status = "ready";
    } else if (message.type === "error" && message.error === "unsupported_version") {
      this.status = "version_mismatch";
    } else if (message.type === "telemetry") {
      this.lastTelemetry = message;
    } else if (message.type === "course") {
      this.course = message.course;
    }
    this.emit(message);
  }

  private send(obj: Record<string, unknown>): void {
    this.transport.send(encodeLine(obj));
  }

  hello(): void {
    this.send({ type: "hello", version: PROTOCOL_VERSION });
  }

  configure(options: ConfigureOptions): void {
    this.send({ type: "configure", ...options });
  }

  requestCourse(): void {
    this.send({ type: "get_course" });
  }

  start(): void {
    this.send({ type: "start" });
  }

  stop(): void {
    this.send({ type: "stop" });
  }

  sendControl(input: ControllerInput): void {
    this.send(controlMessage(input));
  }

  close(): void {
    this.transport.close();
  }

  /** Resolves once a message satisfying pred arrives. */
  waitFor<T extends ServerMessage>(pred: (m: ServerMessage) => boolean,
                                   timeoutMs = 15000): Promise<T> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("timed out waiting for message")), timeoutMs);
      this.on("*", (message) => {
        if (pred(message)) {
          clearTimeout(timer);
          resolve(message as T);
        }
      });
    });
  }
}
