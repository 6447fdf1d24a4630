// Browser entry point: one page, one store, one render loop. The store
// is written from server responses and telemetry only; the render loop
// paints whatever the store holds, at most once per animation frame.

import { ApiError, ConsoleApi } from "./api.js";
import { CameraSource, LandmarkEstimator } from "./camera.js";
import { ReplayStreamer, parseReplay } from "./replay.js";
import { ConsoleStore } from "./state.js";
import { TelemetryFeed } from "./telemetry.js";
import { PoseFrame, WebSocketLike, poseFrameError } from "./types.js";

const LATENCY_BUDGET_MS = 250;
const TRAIL_FRAMES = 90;

function wsUrl(path: string): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}${path}`;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

/** Pose uplink: one socket, frames validated before send, reopened per run. */
class PoseUplink {
  private socket: WebSocketLike | null = null;
  private queue: string[] = [];

  open(): void {
    if (this.socket !== null) return;
    const socket = new WebSocket(wsUrl("/ws/pose")) as unknown as WebSocketLike;
    socket.onopen = () => {
      for (const payload of this.queue) socket.send(payload);
      this.queue = [];
    };
    socket.onclose = () => {
      this.socket = null;
    };
    this.socket = socket;
  }

  send(frame: PoseFrame): void {
    if (poseFrameError(frame) !== null) return; // schema guard before send
    this.open();
    const payload = JSON.stringify(frame);
    const socket = this.socket!;
    if ((socket as unknown as WebSocket).readyState === WebSocket.OPEN) {
      socket.send(payload);
    } else {
      this.queue.push(payload);
    }
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
    this.queue = [];
  }
}

function main(): void {
  const store = new ConsoleStore();
  const api = new ConsoleApi("");
  const feed = new TelemetryFeed(
    wsUrl("/ws/telemetry"),
    (url) => new WebSocket(url) as unknown as WebSocketLike,
  );
  const uplink = new PoseUplink();
  const trail: PoseFrame[] = [];
  let lastEventAt = 0;
  let dirty = true;

  const streamer = new ReplayStreamer((frame) => {
    uplink.send(frame);
    trail.push(frame);
    if (trail.length > TRAIL_FRAMES) trail.shift();
    dirty = true;
  });
  streamer.onFinish = () => {
    store.applyError("replay finished");
  };

  // no pose model ships with the console; the camera path reports the
  // replay-upload fallback until a deployment provides an estimator
  const estimator: LandmarkEstimator | null = null;
  const camera = new CameraSource((frame) => {
    uplink.send(frame);
    trail.push(frame);
    if (trail.length > TRAIL_FRAMES) trail.shift();
    dirty = true;
  }, estimator);

  store.subscribe(() => {
    dirty = true;
  });
  feed.onState = (state, info) => store.applyConnection(state, info.reconnected);
  feed.start();

  const refresh = async (): Promise<void> => {
    try {
      store.applyStatus(await api.status());
      store.applyConfig(await api.config());
      store.applyLibrary((await api.library()).clips);
    } catch (err) {
      store.applyError(err instanceof Error ? err.message : String(err));
    }
  };

  const call = async (action: () => Promise<void>): Promise<void> => {
    try {
      await action();
    } catch (err) {
      if (err instanceof ApiError) {
        store.applyError(`${err.kind}: ${err.message}`);
      } else {
        store.applyError(err instanceof Error ? err.message : String(err));
      }
    }
  };

  // --- controls -----------------------------------------------------------

  el<HTMLButtonElement>("btn-start").onclick = () =>
    call(async () => {
      await api.startSession();
      store.applySessionState("running");
    });

  el<HTMLButtonElement>("btn-stop").onclick = () =>
    call(async () => {
      const done = await api.stopSession();
      store.applySessionState("idle");
      store.applyError(`session saved: ${done.log} (${done.steps} steps)`);
    });

  const bindSlider = (id: string, key: "crossfade_ms" | "smoothing_tau_s"): void => {
    const slider = el<HTMLInputElement>(id);
    slider.oninput = () => {
      store.editDraft({ [key]: Number(slider.value) });
    };
    slider.onchange = () =>
      call(async () => {
        store.applyConfig(await api.putConfig({ [key]: Number(slider.value) }));
      });
  };
  bindSlider("slider-crossfade", "crossfade_ms");
  bindSlider("slider-tau", "smoothing_tau_s");

  el<HTMLButtonElement>("btn-add-clip").onclick = () =>
    call(async () => {
      const input = el<HTMLInputElement>("input-clip-path");
      if (input.value.trim() === "") return;
      await api.addClip(input.value.trim());
      input.value = "";
      store.applyLibrary((await api.library()).clips);
    });

  el<HTMLElement>("library-list").addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const clipId = target.dataset.remove;
    if (clipId === undefined) return;
    void call(async () => {
      await api.removeClip(clipId);
      store.applyLibrary((await api.library()).clips);
    });
  });

  el<HTMLElement>("gap-badge").onclick = () => store.clearGapBadge();

  // --- pose sources ---------------------------------------------------------

  el<HTMLInputElement>("input-replay").onchange = async () => {
    const input = el<HTMLInputElement>("input-replay");
    const file = input.files?.[0];
    if (file === undefined) return;
    const parsed = parseReplay(await file.text());
    el<HTMLElement>("replay-note").textContent =
      `${parsed.frames.length} frames ready` +
      (parsed.rejected.length > 0 ? `, ${parsed.rejected.length} lines rejected` : "");
    el<HTMLButtonElement>("btn-stream").onclick = () => {
      if (streamer.running) return;
      streamer.start(parsed.frames);
    };
  };

  el<HTMLButtonElement>("btn-stream-stop").onclick = () => {
    streamer.stop();
    camera.stop();
  };

  el<HTMLButtonElement>("btn-camera").onclick = async () => {
    const outcome = await camera.start();
    el<HTMLElement>("camera-note").textContent =
      outcome.kind === "streaming" ? "camera streaming" : outcome.reason;
  };

  // --- render loop -----------------------------------------------------------

  const sparkline = el<HTMLCanvasElement>("sparkline");
  const trailCanvas = el<HTMLCanvasElement>("trail");

  const drawSparkline = (series: [number, number][]): void => {
    const ctx = sparkline.getContext("2d");
    if (ctx === null || series.length < 2) return;
    const { width, height } = sparkline;
    ctx.clearRect(0, 0, width, height);
    const energies = series.map((p) => p[1]);
    const hi = Math.max(...energies, 1e-9);
    ctx.beginPath();
    series.forEach(([, e], i) => {
      const x = (i / (series.length - 1)) * (width - 2) + 1;
      const y = height - 2 - (e / hi) * (height - 4);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.strokeStyle = "#4ade80";
    ctx.lineWidth = 1.5;
    ctx.stroke();
  };

  const drawTrail = (): void => {
    const ctx = trailCanvas.getContext("2d");
    if (ctx === null) return;
    const { width, height } = trailCanvas;
    ctx.clearRect(0, 0, width, height);
    trail.forEach((frame, i) => {
      const alpha = (i + 1) / trail.length;
      frame.pts.forEach(([x, y], j) => {
        ctx.fillStyle = `hsla(${j * 60 + 120}, 70%, 60%, ${alpha.toFixed(3)})`;
        ctx.fillRect(((x + 1) / 2) * width - 1.5, ((y + 1) / 2) * height - 1.5, 3, 3);
      });
    });
  };

  const render = (): void => {
    const view = store.view();
    el<HTMLElement>("conn-dot").className = `dot ${view.connection}`;
    el<HTMLElement>("session-state").textContent = view.sessionState;
    el<HTMLElement>("gap-badge").style.display = view.droppedEvents ? "inline-block" : "none";
    el<HTMLElement>("error-strip").textContent = view.error ?? "";

    const config = view.config;
    if (config !== null) {
      const fade = el<HTMLInputElement>("slider-crossfade");
      const tau = el<HTMLInputElement>("slider-tau");
      if (document.activeElement !== fade) fade.value = String(view.draft.crossfade_ms ?? config.crossfade_ms);
      if (document.activeElement !== tau) tau.value = String(view.draft.smoothing_tau_s ?? config.smoothing_tau_s);
      el<HTMLElement>("crossfade-value").textContent =
        `${config.crossfade_ms} ms` + (view.draft.crossfade_ms !== undefined ? " (pending)" : "");
      el<HTMLElement>("tau-value").textContent =
        `${config.smoothing_tau_s} s` + (view.draft.smoothing_tau_s !== undefined ? " (pending)" : "");
    }

    const list = el<HTMLElement>("library-list");
    list.innerHTML = view.library
      .map(
        (clip) =>
          `<li><span class="clip-id">${clip.id}</span>` +
          `<span class="clip-len">${clip.duration_s.toFixed(1)} s</span>` +
          `<button data-remove="${clip.id}" ${view.sessionState === "running" ? "disabled" : ""}>remove</button></li>`,
      )
      .join("");

    const event = view.lastEvent;
    if (event !== null) {
      el<HTMLElement>("clip-now").textContent = event.clip_id;
      el<HTMLElement>("clip-sim").textContent = event.similarity.toFixed(4);
      el<HTMLElement>("step-no").textContent = String(event.step);
      el<HTMLElement>("latency").textContent = `${event.latency_ms.toFixed(1)} ms`;
      el<HTMLElement>("latency-bar").style.width =
        `${Math.min(100, (event.latency_ms / LATENCY_BUDGET_MS) * 100).toFixed(1)}%`;
      el<HTMLElement>("fault").textContent = event.fault ?? "";
      const fadeProgress = Math.min(1, (Date.now() - lastEventAt) / Math.max(1, event.crossfade_ms));
      el<HTMLElement>("fade-bar").style.width = `${(fadeProgress * 100).toFixed(1)}%`;
      const top = Math.max(...event.top5.map(([, s]) => Math.abs(s)), 1e-9);
      el<HTMLElement>("top5").innerHTML = event.top5
        .map(
          ([id, score]) =>
            `<li><span class="bar" style="width:${((Math.abs(score) / top) * 100).toFixed(1)}%"></span>` +
            `<span class="clip-id">${id}</span><span class="score">${score.toFixed(4)}</span></li>`,
        )
        .join("");
      drawSparkline(event.energy_series);
    }
    drawTrail();
  };

  const loop = (): void => {
    const events = feed.drain();
    if (events.length > 0) {
      lastEventAt = Date.now();
      store.applyTelemetry(events);
    }
    if (dirty || (store.view().lastEvent !== null && Date.now() - lastEventAt < 2000)) {
      dirty = false;
      render();
    }
    requestAnimationFrame(loop);
  };

  void refresh();
  requestAnimationFrame(loop);
}

main();
