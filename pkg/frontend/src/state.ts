// Single client-side mirror of engine state. Every field except the
// config draft is written exclusively from server payloads (HTTP
// responses and telemetry events); the draft is the one optimistic
// piece, and it stays visually marked as pending until the server
// echoes it back.

import { ConnectionState } from "./telemetry.js";
import { EngineConfigView, LibraryClip, StatusView, TelemetryEvent } from "./types.js";

export const EVENT_RING = 120;

export interface ConsoleSnapshot {
  sessionState: "idle" | "running" | "unknown";
  libraryClips: number;
  schema: number | null;
  config: EngineConfigView | null;
  draft: Partial<EngineConfigView>;
  pending: boolean;
  library: LibraryClip[];
  connection: ConnectionState;
  lastEvent: TelemetryEvent | null;
  events: TelemetryEvent[];
  droppedEvents: boolean;
  error: string | null;
}

export class ConsoleStore {
  private snapshot: ConsoleSnapshot = {
    sessionState: "unknown",
    libraryClips: 0,
    schema: null,
    config: null,
    draft: {},
    pending: false,
    library: [],
    connection: "closed",
    lastEvent: null,
    events: [],
    droppedEvents: false,
    error: null,
  };
  private listeners: Array<() => void> = [];

  view(): ConsoleSnapshot {
    return this.snapshot;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private commit(patch: Partial<ConsoleSnapshot>): void {
    this.snapshot = { ...this.snapshot, ...patch };
    for (const listener of this.listeners) listener();
  }

  // --- server-confirmed updates ------------------------------------------

  applyStatus(status: StatusView): void {
    this.commit({
      sessionState: status.state,
      libraryClips: status.library_clips,
      schema: status.schema,
      error: null,
    });
  }

  /** A config response from the server confirms (or supersedes) the draft:
   * echoed keys leave the pending set, anything else in the draft stays. */
  applyConfig(config: EngineConfigView): void {
    const draft: Partial<EngineConfigView> = {};
    for (const key of Object.keys(this.snapshot.draft) as Array<keyof EngineConfigView>) {
      if (config[key] !== this.snapshot.draft[key]) {
        (draft as Record<string, unknown>)[key] = this.snapshot.draft[key];
      }
    }
    this.commit({ config, draft, pending: Object.keys(draft).length > 0, error: null });
  }

  applyLibrary(clips: LibraryClip[]): void {
    this.commit({ library: clips, libraryClips: clips.length, error: null });
  }

  applySessionState(state: "idle" | "running"): void {
    this.commit({ sessionState: state, error: null });
  }

  applyTelemetry(events: TelemetryEvent[]): void {
    if (events.length === 0) return;
    const ring = [...this.snapshot.events, ...events].slice(-EVENT_RING);
    const gap = events.some((e) => e.gap);
    this.commit({
      events: ring,
      lastEvent: ring[ring.length - 1] ?? null,
      droppedEvents: this.snapshot.droppedEvents || gap,
    });
  }

  applyConnection(state: ConnectionState, reconnected: boolean): void {
    // a reconnect means an unknown stretch of events never arrived
    this.commit({
      connection: state,
      droppedEvents: this.snapshot.droppedEvents || reconnected,
    });
  }

  applyError(message: string): void {
    this.commit({ error: message });
  }

  // --- the one optimistic path --------------------------------------------

  /** Stage a config edit. The UI renders staged values only inside the
   * pending marker; confirmed numbers keep coming from `config`. */
  editDraft(patch: Partial<EngineConfigView>): void {
    this.commit({ draft: { ...this.snapshot.draft, ...patch }, pending: true });
  }

  clearGapBadge(): void {
    this.commit({ droppedEvents: false });
  }
}
