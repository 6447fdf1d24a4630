// Camera pose source. Estimation runs in the browser against whatever
// landmark model the deployment wires in; the engine itself never sees a
// pixel. Without a model, or when the camera is denied, the console
// falls back to replay upload.

import { FrameSink, RateGate } from "./replay.js";
import { N_POINTS } from "./types.js";

export interface LandmarkEstimate {
  pts: [number, number][];
  conf: number[];
}

/** One video frame in, five tracked points out, in the [-1, 1] camera
 * frame the engine expects. Implementations wrap a browser pose model. */
export interface LandmarkEstimator {
  estimate(video: HTMLVideoElement): Promise<LandmarkEstimate | null>;
}

export type CameraOutcome =
  | { kind: "streaming" }
  | { kind: "fallback"; reason: string };

const POLL_MS = 16; // poll at device-ish rate; the gate enforces 30 fps out

export class CameraSource {
  private stream: MediaStream | null = null;
  private video: HTMLVideoElement | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private readonly gate = new RateGate();

  constructor(
    private readonly sink: FrameSink,
    private readonly estimator: LandmarkEstimator | null,
    private readonly mediaDevices: MediaDevices | null = typeof navigator !== "undefined"
      ? navigator.mediaDevices
      : null,
  ) {}

  get running(): boolean {
    return this.timer !== null;
  }

  async start(): Promise<CameraOutcome> {
    if (this.estimator === null) {
      return { kind: "fallback", reason: "no pose model configured; upload a replay instead" };
    }
    if (this.mediaDevices === null) {
      return { kind: "fallback", reason: "camera unavailable; upload a replay instead" };
    }
    try {
      this.stream = await this.mediaDevices.getUserMedia({ video: true });
    } catch (err) {
      return {
        kind: "fallback",
        reason: `camera denied (${err instanceof Error ? err.message : String(err)}); upload a replay instead`,
      };
    }
    const video = document.createElement("video");
    video.srcObject = this.stream;
    video.muted = true;
    await video.play();
    this.video = video;

    const startedAt = Date.now();
    let busy = false;
    this.timer = setInterval(() => {
      if (busy || this.video === null) return;
      const t = Date.now() - startedAt;
      if (!this.gate.admit(t)) return;
      busy = true;
      this.estimator!.estimate(this.video)
        .then((estimate) => {
          if (estimate !== null && estimate.pts.length === N_POINTS) {
            this.sink({ t, pts: estimate.pts, conf: estimate.conf });
          }
        })
        .finally(() => {
          busy = false;
        });
    }, POLL_MS);
    return { kind: "streaming" };
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    if (this.video !== null) {
      this.video.pause();
      this.video.srcObject = null;
      this.video = null;
    }
    if (this.stream !== null) {
      for (const track of this.stream.getTracks()) track.stop();
      this.stream = null;
    }
  }
}
