// Wire types for the engine's HTTP/WS surface. Everything the console
// displays comes out of these shapes; nothing is recomputed client-side.

export const N_POINTS = 5;

export interface PoseFrame {
  t: number;
  pts: [number, number][];
  conf: number[];
}

export interface EnergySummary {
  mean: number;
  min: number;
  max: number;
  std: number;
}

export interface TelemetryEvent {
  type: "step";
  schema: number;
  step: number;
  t_ms: number;
  energy: EnergySummary;
  energy_series: [number, number][];
  clip_id: string;
  similarity: number;
  top5: [string, number][];
  crossfade_ms: number;
  latency_ms: number;
  fault: string | null;
  repeated: boolean;
  gap: boolean;
}

export interface StatusView {
  state: "idle" | "running";
  library_clips: number;
  schema: number;
}

export interface EngineConfigView {
  clip_s: number;
  crossfade_ms: number;
  smoothing_tau_s: number;
  fps: number;
  seed: number;
  library: string;
  weights: string;
  output_mode: string;
  anti_repeat_window: number;
  port: number;
}

export interface LibraryClip {
  id: string;
  file: string;
  sha256: string;
  duration_s: number;
  tags: string[];
  gain_db: number;
}

// Minimal socket surface shared by the browser WebSocket and the ws
// package, so the telemetry feed and streamers are testable in node.
export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => WebSocketLike;

function isNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isPair(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && isNumber(v[0]) && isNumber(v[1]);
}

/** Validate one pose frame; returns a reason string when it must not be sent. */
export function poseFrameError(value: unknown): string | null {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    return "frame must be a JSON object";
  }
  const obj = value as Record<string, unknown>;
  if (!isNumber(obj.t) || !Number.isInteger(obj.t)) {
    return "t must be an integer millisecond timestamp";
  }
  const pts = obj.pts;
  if (!Array.isArray(pts) || pts.length !== N_POINTS) {
    return `pts must hold ${N_POINTS} point pairs`;
  }
  if (!pts.every(isPair)) {
    return "each point must be an [x, y] number pair";
  }
  if (obj.conf !== undefined) {
    const conf = obj.conf;
    if (!Array.isArray(conf) || conf.length !== N_POINTS || !conf.every(isNumber)) {
      return `conf must hold ${N_POINTS} numbers`;
    }
  }
  return null;
}

export function asPoseFrame(value: unknown): PoseFrame | null {
  if (poseFrameError(value) !== null) return null;
  const obj = value as { t: number; pts: [number, number][]; conf?: number[] };
  return { t: obj.t, pts: obj.pts, conf: obj.conf ?? new Array<number>(N_POINTS).fill(1.0) };
}

/** Telemetry guard: events that fail this are dropped, never rendered. */
export function asTelemetryEvent(value: unknown): TelemetryEvent | null {
  if (typeof value !== "object" || value === null) return null;
  const obj = value as Record<string, unknown>;
  if (obj.type !== "step") return null;
  if (!isNumber(obj.step) || !isNumber(obj.t_ms) || !isNumber(obj.crossfade_ms)) return null;
  if (typeof obj.clip_id !== "string" || !isNumber(obj.similarity)) return null;
  if (!Array.isArray(obj.top5) || !Array.isArray(obj.energy_series)) return null;
  const energy = obj.energy as Record<string, unknown> | undefined;
  if (typeof energy !== "object" || energy === null || !isNumber(energy.mean)) return null;
  return obj as unknown as TelemetryEvent;
}
