// Full loopback against a real engine: fixtures are synthesized on the
// fly, `dancemix serve` runs as a child process, and every interaction
// goes through the same modules the page uses, via the same-origin
// proxy. Covers the three console guarantees: a replay upload drives a
// live session, a crossfade change shows up in the following
// transition's telemetry, and a removed clip stops appearing in top-5.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { AddressInfo } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { WebSocket as WsSocket } from "ws";

import { createConsoleServer } from "../server.js";
import { ConsoleApi } from "../src/api.js";
import { ReplayStreamer, parseReplay } from "../src/replay.js";
import { ConsoleStore } from "../src/state.js";
import { TelemetryFeed } from "../src/telemetry.js";
import { TelemetryEvent, WebSocketLike } from "../src/types.js";

const ENGINE_PORT = 8991;
const ENGINE_BASE = `http://127.0.0.1:${ENGINE_PORT}`;

let scratch: string;
let engine: ChildProcess;
let engineLog = "";
let proxy: ReturnType<typeof createConsoleServer>;
let base: string; // proxy origin the "browser" talks to
let api: ConsoleApi;
let feed: TelemetryFeed;
let pose: WsSocket;
const events: TelemetryEvent[] = [];

function makeReplay(path: string, seconds: number): void {
  const lines: string[] = [];
  for (let k = 0; k < seconds * 30; k++) {
    const ph = (2 * Math.PI * (k / 30)) / 8;
    const pts = Array.from({ length: 5 }, (_, j) => [
      0.5 * Math.cos(ph + j * 1.257),
      0.5 * Math.sin(ph + j * 1.257),
    ]);
    lines.push(JSON.stringify({ t: Math.round((1000 * k) / 30), pts, conf: [1, 1, 1, 1, 1] }));
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

async function until<T>(probe: () => T | undefined, ms: number, what: string): Promise<T> {
  const t0 = Date.now();
  for (;;) {
    const value = probe();
    if (value !== undefined) return value;
    if (Date.now() - t0 > ms) throw new Error(`timed out waiting for ${what}\nengine log:\n${engineLog}`);
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
}

async function openPoseSocket(): Promise<WsSocket> {
  const socket = new WsSocket(`${base.replace("http", "ws")}/ws/pose`);
  await new Promise<void>((resolve, reject) => {
    socket.once("open", resolve);
    socket.once("error", reject);
  });
  return socket;
}

function streamReplay(text: string): ReplayStreamer {
  const parsed = parseReplay(text);
  expect(parsed.rejected).toEqual([]);
  const streamer = new ReplayStreamer((frame) => {
    if (pose.readyState === WsSocket.OPEN) pose.send(JSON.stringify(frame));
  });
  streamer.start(parsed.frames);
  return streamer;
}

beforeAll(async () => {
  scratch = mkdtempSync(join(tmpdir(), "console-loopback-"));
  const clips = join(scratch, "clips");
  const weights = join(scratch, "weights.dmwb");
  const library = join(scratch, "library");
  const configPath = join(scratch, "config.json");

  execFileSync("python3", [
    "-c",
    `
import os
import numpy as np
from scipy.io import wavfile
os.makedirs(${JSON.stringify(clips)})
sr = 22050
for freq in [196, 220, 247, 262, 294, 330, 349, 392]:
    t = np.arange(int(sr * 4.0)) / sr
    wavfile.write(os.path.join(${JSON.stringify(clips)}, f"tone_{freq}.wav"), sr,
                  (0.4 * np.sin(2 * np.pi * freq * t)).astype(np.float32))
`,
  ]);
  makeReplay(join(scratch, "replay.jsonl"), 90);
  execFileSync("dancemix", ["inspect", "--gen-random-weights", weights, "--seed", "11"]);
  execFileSync("dancemix", ["build-db", clips, "--weights", weights, "--out", library]);
  writeFileSync(
    configPath,
    JSON.stringify({
      library,
      weights,
      port: ENGINE_PORT,
      clip_s: 1.0,
      crossfade_ms: 200,
      smoothing_tau_s: 0,
    }),
  );

  engine = spawn("dancemix", ["serve", "--config", configPath, "--run-dir", join(scratch, "runs")]);
  engine.stdout?.on("data", (chunk: Buffer) => (engineLog += chunk.toString()));
  engine.stderr?.on("data", (chunk: Buffer) => (engineLog += chunk.toString()));

  let engineUp = false;
  for (let i = 0; i < 200 && !engineUp; i++) {
    engineUp = await fetch(`${ENGINE_BASE}/api/status`)
      .then((r) => r.ok)
      .catch(() => false);
    if (!engineUp) await new Promise((resolve) => setTimeout(resolve, 150));
  }
  if (!engineUp) throw new Error(`engine never came up\n${engineLog}`);

  proxy = createConsoleServer({ engine: ENGINE_BASE });
  await new Promise<void>((resolve) => proxy.listen(0, "127.0.0.1", resolve));
  base = `http://127.0.0.1:${(proxy.address() as AddressInfo).port}`;

  api = new ConsoleApi(base);
  feed = new TelemetryFeed(
    `${base.replace("http", "ws")}/ws/telemetry`,
    (url) => new WsSocket(url) as unknown as WebSocketLike,
  );
  feed.onEvents = () => events.push(...feed.drain());
  feed.start();
  pose = await openPoseSocket();
});

afterAll(async () => {
  feed?.stop();
  pose?.close();
  await new Promise<void>((resolve) => (proxy ? proxy.close(() => resolve()) : resolve()));
  if (engine && engine.exitCode === null) {
    engine.kill("SIGTERM");
    await new Promise((resolve) => setTimeout(resolve, 500));
    if (engine.exitCode === null) engine.kill("SIGKILL");
  }
  if (scratch) rmSync(scratch, { recursive: true, force: true });
});

describe("console loopback against a live engine", () => {
  let streamer: ReplayStreamer | null = null;
  let victim: string;

  it("serves the page and proxies status", { timeout: 30000 }, async () => {
    const page = await fetch(`${base}/`);
    expect(page.status).toBe(200);
    expect(page.headers.get("content-type")).toMatch(/text\/html/);
    expect(await page.text()).toMatch(/dancemix console/);

    const status = await api.status();
    expect(status.state).toBe("idle");
    expect(status.library_clips).toBe(8);
  });

  it("replay upload drives a live session: telemetry within 4 s", { timeout: 30000 }, async () => {
    const store = new ConsoleStore();
    store.applyStatus(await api.status());
    await api.startSession();
    store.applySessionState("running");

    const text = readFileSync(join(scratch, "replay.jsonl"), "utf-8");
    const started = Date.now();
    streamer = streamReplay(text);

    const first = await until(() => events[0], 6000, "first telemetry event");
    expect(Date.now() - started).toBeLessThan(4000);
    expect(first.clip_id).toBeTruthy();
    expect(first.top5).toHaveLength(5);
    expect(first.schema).toBe(1);

    store.applyTelemetry(events);
    expect(store.view().lastEvent).not.toBeNull();
    expect(store.view().sessionState).toBe("running");
  });

  it("a crossfade change is visible in the following transition", { timeout: 30000 }, async () => {
    await until(() => (events.length >= 2 ? true : undefined), 8000, "two events");
    const store = new ConsoleStore();
    store.applyConfig(await api.config());
    expect(store.view().config!.crossfade_ms).toBe(200);

    store.editDraft({ crossfade_ms: 120 });
    expect(store.view().pending).toBe(true);
    const ackStep = events[events.length - 1]!.step;
    store.applyConfig(await api.putConfig({ crossfade_ms: 120 }));
    expect(store.view().pending).toBe(false); // server echo confirmed the edit
    expect(store.view().config!.crossfade_ms).toBe(120);

    const changed = await until(
      () => events.find((e) => e.crossfade_ms === 120),
      6000,
      "transition with the new crossfade",
    );
    // at most one decision can already be in flight when the ack lands,
    // so the change appears no later than two steps after it
    expect(changed.step).toBeLessThanOrEqual(ackStep + 2);
  });

  it("a removed clip stops appearing in top-5 events", { timeout: 60000 }, async () => {
    streamer?.stop();
    const stopped = await api.stopSession();
    expect(stopped.steps).toBeGreaterThan(0);

    // pick a clip the engine was actually offering just now
    const last = events[events.length - 1]!;
    victim = last.top5[last.top5.length - 1]![0];
    await api.removeClip(victim);
    const store = new ConsoleStore();
    store.applyLibrary((await api.library()).clips);
    expect(store.view().library.map((c) => c.id)).not.toContain(victim);
    expect(store.view().libraryClips).toBe(7);

    events.length = 0;
    await api.startSession();
    const text = readFileSync(join(scratch, "replay.jsonl"), "utf-8");
    streamer = streamReplay(text);
    await until(() => (events.length >= 3 ? true : undefined), 15000, "three events after removal");
    streamer.stop();
    await api.stopSession();

    for (const event of events) {
      expect(event.clip_id).not.toBe(victim);
      for (const [id] of event.top5) expect(id).not.toBe(victim);
    }
    // seven clips remain, so the bars still show five entries
    expect(events[0]!.top5).toHaveLength(5);
  });
});
