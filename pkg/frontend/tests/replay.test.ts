import { describe, expect, it } from "vitest";

import { RateGate, capRate, parseReplay } from "../src/replay.js";
import { PoseFrame, asPoseFrame, poseFrameError } from "../src/types.js";

const goodFrame = (t: number): PoseFrame => ({
  t,
  pts: [
    [0.1, 0.2],
    [0.3, 0.4],
    [0.5, 0.6],
    [-0.1, -0.2],
    [0.0, 0.0],
  ],
  conf: [1, 1, 1, 1, 1],
});

describe("poseFrameError", () => {
  it("accepts a valid frame", () => {
    expect(poseFrameError(goodFrame(0))).toBeNull();
  });

  it("accepts a frame without conf and fills it in", () => {
    const { conf, ...bare } = goodFrame(10);
    expect(poseFrameError(bare)).toBeNull();
    expect(asPoseFrame(bare)?.conf).toEqual([1, 1, 1, 1, 1]);
  });

  it("rejects non-objects, missing t, and fractional t", () => {
    expect(poseFrameError(null)).toMatch(/object/);
    expect(poseFrameError([1, 2])).toMatch(/object/);
    expect(poseFrameError({ pts: goodFrame(0).pts })).toMatch(/t must be/);
    expect(poseFrameError({ ...goodFrame(0), t: 1.5 })).toMatch(/t must be/);
  });

  it("rejects wrong point counts and malformed points", () => {
    expect(poseFrameError({ ...goodFrame(0), pts: goodFrame(0).pts.slice(0, 4) })).toMatch(
      /5 point pairs/,
    );
    const bad = goodFrame(0);
    (bad.pts as unknown[])[2] = [1];
    expect(poseFrameError(bad)).toMatch(/\[x, y\]/);
  });

  it("rejects a conf vector of the wrong length", () => {
    expect(poseFrameError({ ...goodFrame(0), conf: [1, 1] })).toMatch(/conf/);
  });
});

describe("parseReplay", () => {
  it("keeps valid lines and skips blanks", () => {
    const text = [JSON.stringify(goodFrame(0)), "", JSON.stringify(goodFrame(33)), ""].join("\n");
    const parsed = parseReplay(text);
    expect(parsed.frames.map((f) => f.t)).toEqual([0, 33]);
    expect(parsed.rejected).toEqual([]);
  });

  it("records malformed lines with their numbers instead of sending them", () => {
    const text = [
      JSON.stringify(goodFrame(0)),
      "{ not json",
      JSON.stringify({ t: 50, pts: [[1, 2]] }),
      JSON.stringify(goodFrame(66)),
    ].join("\n");
    const parsed = parseReplay(text);
    expect(parsed.frames.map((f) => f.t)).toEqual([0, 66]);
    expect(parsed.rejected).toEqual([
      { line: 2, reason: "invalid JSON" },
      { line: 3, reason: "pts must hold 5 point pairs" },
    ]);
  });

  it("drops frames whose timestamp fails to increase", () => {
    const text = [goodFrame(0), goodFrame(100), goodFrame(100), goodFrame(50), goodFrame(150)]
      .map((f) => JSON.stringify(f))
      .join("\n");
    const parsed = parseReplay(text);
    expect(parsed.frames.map((f) => f.t)).toEqual([0, 100, 150]);
    expect(parsed.rejected.map((r) => r.line)).toEqual([3, 4]);
  });
});

describe("capRate", () => {
  it("passes an exact 30 fps stream through untouched", () => {
    const frames = Array.from({ length: 60 }, (_, k) => goodFrame(Math.round((k * 1000) / 30)));
    expect(capRate(frames)).toHaveLength(60);
  });

  it("halves a 60 fps stream down to 30", () => {
    const frames = Array.from({ length: 120 }, (_, k) => goodFrame(Math.round((k * 1000) / 60)));
    const kept = capRate(frames);
    // 2 seconds of frames at a cap of 30/s, give or take rounding at the edge
    expect(kept.length).toBeGreaterThanOrEqual(58);
    expect(kept.length).toBeLessThanOrEqual(61);
    for (let i = 1; i < kept.length; i++) {
      expect(kept[i]!.t - kept[i - 1]!.t).toBeGreaterThanOrEqual(1000 / 30 - 1);
    }
  });

  it("never exceeds the cap for arbitrary jittery input", () => {
    let t = 0;
    const frames: PoseFrame[] = [];
    let seed = 12345;
    const rand = (): number => {
      seed = (seed * 1103515245 + 12345) & 0x7fffffff;
      return seed / 0x7fffffff;
    };
    for (let i = 0; i < 500; i++) {
      t += Math.floor(rand() * 30); // 0..29 ms gaps: bursts well above 30 fps
      frames.push(goodFrame(t));
    }
    const kept = capRate(frames);
    for (let i = 1; i < kept.length; i++) {
      expect(kept[i]!.t - kept[i - 1]!.t).toBeGreaterThanOrEqual(1000 / 30 - 1);
    }
  });
});

describe("RateGate", () => {
  it("halves a 60 fps camera down to 30", () => {
    const gate = new RateGate();
    let admitted = 0;
    for (let k = 0; k < 60; k++) {
      if (gate.admit(Math.round((k * 1000) / 60))) admitted++;
    }
    expect(admitted).toBeLessThanOrEqual(31);
    expect(admitted).toBeGreaterThanOrEqual(29);
  });

  it("passes a 24 fps camera through untouched", () => {
    const gate = new RateGate();
    let admitted = 0;
    for (let k = 0; k < 24; k++) {
      if (gate.admit(Math.round((k * 1000) / 24))) admitted++;
    }
    expect(admitted).toBe(24);
  });
});
