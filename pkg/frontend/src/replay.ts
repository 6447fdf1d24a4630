// Replay parsing and pose streaming. Frames go out in the same JSON
// schema replay files use; anything malformed is rejected here, before
// a byte reaches the engine, and the rate is capped at 30 fps no matter
// how fast the source produced frames.

import { PoseFrame, asPoseFrame, poseFrameError } from "./types.js";

export const MAX_FPS = 30;

export interface RejectedLine {
  line: number;
  reason: string;
}

export interface ParsedReplay {
  frames: PoseFrame[];
  rejected: RejectedLine[];
}

/** Parse a JSONL replay upload, keeping only frames the engine will accept.
 *
 * Bad JSON, schema violations, and timestamps that fail to increase are
 * recorded with their line number and dropped; the surviving sequence is
 * always valid to stream.
 */
export function parseReplay(text: string): ParsedReplay {
  const frames: PoseFrame[] = [];
  const rejected: RejectedLine[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = (lines[i] ?? "").trim();
    if (line === "") continue;
    let value: unknown;
    try {
      value = JSON.parse(line);
    } catch {
      rejected.push({ line: i + 1, reason: "invalid JSON" });
      continue;
    }
    const reason = poseFrameError(value);
    if (reason !== null) {
      rejected.push({ line: i + 1, reason });
      continue;
    }
    const frame = asPoseFrame(value)!;
    const last = frames[frames.length - 1];
    if (last !== undefined && frame.t <= last.t) {
      rejected.push({ line: i + 1, reason: "timestamp does not increase" });
      continue;
    }
    frames.push(frame);
  }
  return { frames, rejected };
}

/** Drop frames so the kept sequence never exceeds MAX_FPS (a 60 fps
 * camera comes out at 30). Timestamps are preserved, not rewritten.
 *
 * The threshold sits a hair under the nominal interval so integer-ms
 * timestamps (the 33/34 alternation of an exact 30 fps source) are not
 * dropped by rounding.
 */
export function capRate(frames: PoseFrame[], maxFps: number = MAX_FPS): PoseFrame[] {
  const minInterval = 1000 / maxFps - 1.0;
  const kept: PoseFrame[] = [];
  let lastT = -Infinity;
  for (const frame of frames) {
    if (frame.t - lastT >= minInterval) {
      kept.push(frame);
      lastT = frame.t;
    }
  }
  return kept;
}

export type FrameSink = (frame: PoseFrame) => void;

/** Paces frames out in real time according to their own timestamps.
 *
 * The sink receives at most MAX_FPS frames per second; stop() (or the end
 * of the list) finishes the run. One streamer handles one run.
 */
export class ReplayStreamer {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private frames: PoseFrame[] = [];
  private index = 0;
  private startedAt = 0;
  private baseT = 0;
  onFinish: (() => void) | null = null;

  constructor(private readonly sink: FrameSink) {}

  get running(): boolean {
    return this.timer !== null;
  }

  get sent(): number {
    return this.index;
  }

  start(frames: PoseFrame[]): void {
    if (this.timer !== null) throw new Error("streamer already running");
    this.frames = capRate(frames);
    if (this.frames.length === 0) return;
    this.index = 0;
    this.baseT = this.frames[0]!.t;
    this.startedAt = Date.now();
    this.tick();
  }

  stop(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private tick(): void {
    this.timer = null;
    const elapsed = Date.now() - this.startedAt;
    while (this.index < this.frames.length) {
      const frame = this.frames[this.index]!;
      if (frame.t - this.baseT > elapsed) break;
      this.sink(frame);
      this.index++;
    }
    if (this.index >= this.frames.length) {
      this.onFinish?.();
      return;
    }
    const next = this.frames[this.index]!;
    const delay = Math.max(0, next.t - this.baseT - (Date.now() - this.startedAt));
    this.timer = setTimeout(() => this.tick(), delay);
  }
}

/** Live source cap: admits a frame only when the 30 fps budget allows it.
 * Used on the camera path, where frames arrive at the device rate. */
export class RateGate {
  private lastT = -Infinity;

  constructor(private readonly maxFps: number = MAX_FPS) {}

  admit(t: number): boolean {
    if (t - this.lastT >= 1000 / this.maxFps - 1.0) {
      this.lastT = t;
      return true;
    }
    return false;
  }
}
