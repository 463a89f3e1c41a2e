/**
 * Stream transports. The client core only needs something that moves text
 * chunks both ways; the browser uses a WebSocket (each text frame carries one
 * or more protocol lines, e.g. via bridge.mjs), tests use a raw TCP socket.
 */

export interface Transport {
  send(text: string): void;
  close(): void;
  onData: ((chunk: string) => void) | null;
  onClose: (() => void) | null;
  onError: ((detail: string) => void) | null;
}

export class WebSocketTransport implements Transport {
  onData: ((chunk: string) => void) | null = null;
  onClose: (() => void) | null = null;
  onError: ((detail: string) => void) | null = null;
  private ws: WebSocket;

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (ev) => {
      if (typeof ev.data === "string" && this.onData) this.onData(ev.data);
    };
    this.ws.onclose = () => this.onClose?.();
    this.ws.onerror = () => this.onError?.("websocket error");
  }

  whenOpen(): Promise<void> {
    if (this.ws.readyState === WebSocket.OPEN) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.ws.addEventListener("open", () => resolve(), { once: true });
      this.ws.addEventListener("error", () => reject(new Error("connect failed")),
        { once: true });
    });
  }

  send(text: string): void {
    this.ws.send(text);
  }

  close(): void {
    this.ws.close();
  }
}
