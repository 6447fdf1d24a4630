import { describe, expect, it } from "vitest";

import { ApiError, ConsoleApi } from "../src/api.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function makeApi(
  respond: (url: string) => { status?: number; body?: unknown } = () => ({}),
): { api: ConsoleApi; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body === undefined ? undefined : JSON.parse(String(init.body)),
    });
    const { status = 200, body = {} } = respond(url);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { api: new ConsoleApi("http://engine", fetchImpl), calls };
}

describe("ConsoleApi", () => {
  it("issues exactly the documented calls for each control", async () => {
    const { api, calls } = makeApi();
    await api.status();
    await api.config();
    await api.putConfig({ crossfade_ms: 120 });
    await api.startSession();
    await api.stopSession();
    await api.library();
    await api.addClip("/clips/extra.wav");
    await api.removeClip("tone_392");
    expect(calls).toEqual([
      { url: "http://engine/api/status", method: "GET", body: undefined },
      { url: "http://engine/api/config", method: "GET", body: undefined },
      { url: "http://engine/api/config", method: "PUT", body: { crossfade_ms: 120 } },
      { url: "http://engine/api/session/start", method: "POST", body: {} },
      { url: "http://engine/api/session/stop", method: "POST", body: undefined },
      { url: "http://engine/api/library", method: "GET", body: undefined },
      {
        url: "http://engine/api/library/add",
        method: "POST",
        body: { path: "/clips/extra.wav" },
      },
      { url: "http://engine/api/library/tone_392", method: "DELETE", body: undefined },
    ]);
  });

  it("escapes clip ids in the remove path", async () => {
    const { api, calls } = makeApi();
    await api.removeClip("a clip/with slash");
    expect(calls[0]!.url).toBe("http://engine/api/library/a%20clip%2Fwith%20slash");
  });

  it("turns engine error bodies into typed errors", async () => {
    const { api } = makeApi(() => ({
      status: 409,
      body: { error: "library is locked during a session", kind: "DancemixError" },
    }));
    const err = await api.removeClip("tone_392").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).kind).toBe("DancemixError");
    expect((err as ApiError).message).toMatch(/locked/);
  });

  it("copes with non-JSON error bodies", async () => {
    const calls: Recorded[] = [];
    const api = new ConsoleApi("", async () => new Response("boom", { status: 500 }));
    const err = await api.status().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).message).toBe("HTTP 500");
    expect(calls).toHaveLength(0);
  });
});
