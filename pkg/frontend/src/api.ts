// Typed wrappers over the engine's documented HTTP endpoints. These are
// the only calls through which the console ever mutates engine state.

import { EngineConfigView, LibraryClip, StatusView } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly kind: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface SessionStartResponse {
  state: string;
  out_dir: string;
}

export interface SessionStopResponse {
  state: string;
  log: string;
  wav: string | null;
  steps: number;
}

export interface LibraryResponse {
  weights_sha256: string;
  clips: LibraryClip[];
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ConsoleApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchImpl(this.base + path, init);
    const payload = (await response.json().catch(() => ({}))) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(
        typeof payload.error === "string" ? payload.error : `HTTP ${response.status}`,
        response.status,
        typeof payload.kind === "string" ? payload.kind : "unknown",
      );
    }
    return payload as T;
  }

  status(): Promise<StatusView> {
    return this.request("GET", "/api/status");
  }

  config(): Promise<EngineConfigView> {
    return this.request("GET", "/api/config");
  }

  /** Partial update; the server merges and echoes the full config back. */
  putConfig(patch: Partial<EngineConfigView>): Promise<EngineConfigView> {
    return this.request("PUT", "/api/config", patch);
  }

  startSession(outDir?: string): Promise<SessionStartResponse> {
    return this.request("POST", "/api/session/start", outDir ? { out_dir: outDir } : {});
  }

  stopSession(): Promise<SessionStopResponse> {
    return this.request("POST", "/api/session/stop");
  }

  library(): Promise<LibraryResponse> {
    return this.request("GET", "/api/library");
  }

  addClip(path: string, id?: string): Promise<{ library_clips: number }> {
    return this.request("POST", "/api/library/add", id ? { path, id } : { path });
  }

  removeClip(id: string): Promise<{ library_clips: number }> {
    return this.request("DELETE", `/api/library/${encodeURIComponent(id)}`);
  }
}
