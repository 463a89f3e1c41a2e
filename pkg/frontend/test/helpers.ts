/** Node-side test plumbing: a TCP transport (browsers use WebSocket via the
 * bridge; the protocol lines are identical) and a live service fixture. */

import { spawn, ChildProcess } from "node:child_process";
import { connect, Socket } from "node:net";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { Transport } from "../src/transport.js";

export class TcpTransport implements Transport {
  onData: ((chunk: string) => void) | null = null;
  onClose: (() => void) | null = null;
  onError: ((detail: string) => void) | null = null;

  private constructor(private sock: Socket) {
    sock.setEncoding("utf-8");
    sock.on("data", (chunk: string) => this.onData?.(chunk));
    sock.on("close", () => this.onClose?.());
    sock.on("error", (err) => this.onError?.(String(err)));
  }

  static open(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const sock = connect(port, host);
      sock.once("connect", () => resolve(new TcpTransport(sock)));
      sock.once("error", reject);
    });
  }

  send(text: string): void {
    this.sock.write(text);
  }

  close(): void {
    this.sock.destroy();
  }
}

export interface LiveService {
  host: string;
  port: number;
  proc: ChildProcess;
  stop(): void;
}

/** Spawns the Python session service on an ephemeral port. */
export function startService(extraArgs: string[] = []): Promise<LiveService> {
  const here = dirname(fileURLToPath(import.meta.url));
  const repoRoot = join(here, "..", "..", "..");
  const proc = spawn("python3", ["-m", "handpilot.cli", "serve",
                                 "--bind", "127.0.0.1:0", ...extraArgs], {
    cwd: repoRoot,
    env: { ...process.env, PYTHONPATH: join(repoRoot, "src") },
    stdio: ["ignore", "pipe", "pipe"],
  });
  return new Promise((resolve, reject) => {
    let out = "";
    const timer = setTimeout(() => {
      proc.kill();
      reject(new Error(`service did not start: ${out}`));
    }, 15000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const match = out.match(/listening on ([\d.]+):(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve({
          host: match[1],
          port: Number(match[2]),
          proc,
          stop: () => proc.kill(),
        });
      }
    });
    proc.stderr!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early (${code}): ${out}`));
    });
  });
}
