// Telemetry subscription with automatic reconnect. Events are buffered
// here and drained by the render loop, so a burst of steps never forces
// a render per message; the UI coalesces to one paint per frame.

import { SocketFactory, TelemetryEvent, asTelemetryEvent } from "./types.js";

export type ConnectionState = "connecting" | "open" | "closed";

export interface FeedOptions {
  reconnectDelayMs?: number;
  bufferSize?: number;
}

export class TelemetryFeed {
  private socket: ReturnType<SocketFactory> | null = null;
  private buffer: TelemetryEvent[] = [];
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = true;
  private everConnected = false;
  private readonly reconnectDelayMs: number;
  private readonly bufferSize: number;

  /** Called on every state change; reconnected=true means events may have
   * been missed while the socket was down (the UI shows the gap badge). */
  onState: ((state: ConnectionState, info: { reconnected: boolean }) => void) | null = null;
  /** Called once per drained batch, after the events are in the buffer. */
  onEvents: ((events: TelemetryEvent[]) => void) | null = null;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    options: FeedOptions = {},
  ) {
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.bufferSize = options.bufferSize ?? 240;
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    if (this.socket !== null) {
      const socket = this.socket;
      this.socket = null;
      socket.onclose = null;
      socket.close();
    }
  }

  /** Events received since the last drain, oldest first. */
  drain(): TelemetryEvent[] {
    const events = this.buffer;
    this.buffer = [];
    return events;
  }

  private connect(): void {
    this.onState?.("connecting", { reconnected: false });
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      const reconnected = this.everConnected;
      this.everConnected = true;
      this.onState?.("open", { reconnected });
    };
    socket.onmessage = (ev) => {
      let value: unknown;
      try {
        value = JSON.parse(String(ev.data));
      } catch {
        return; // not an event; nothing to render
      }
      const event = asTelemetryEvent(value);
      if (event === null) return;
      this.buffer.push(event);
      if (this.buffer.length > this.bufferSize) {
        this.buffer.splice(0, this.buffer.length - this.bufferSize);
      }
      this.onEvents?.(this.buffer);
    };
    socket.onerror = () => {
      // the close handler owns recovery; errors always precede a close
    };
    socket.onclose = () => {
      this.socket = null;
      this.onState?.("closed", { reconnected: false });
      if (!this.stopped) {
        this.reconnectTimer = setTimeout(() => {
          this.reconnectTimer = null;
          if (!this.stopped) this.connect();
        }, this.reconnectDelayMs);
      }
    };
  }
}
