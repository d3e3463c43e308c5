// The demo is a pure mirror of server-pushed state: this reducer is the only
// thing that mutates it, and only in response to decoded server frames.

import { ServerMsg } from "./protocol.js";

export type DemoState = {
  connection: "connecting" | "open" | "closed";
  sessionId: string;
  technique: string;
  page: number;
  progress: number;
  primed: boolean;
  barX: number;
  etaMs: number | null;
  rttMs: number | null;
  carriedLine: boolean;
  endOfDocument: boolean;
  flashUntil: number; // wall-clock ms; top bar flashes green after a turn
  lastError: string;
};

export function initialState(): DemoState {
  return {
    connection: "connecting",
    sessionId: "",
    technique: "eyeswipe",
    page: 0,
    progress: 0,
    primed: false,
    barX: 0,
    etaMs: null,
    rttMs: null,
    carriedLine: false,
    endOfDocument: false,
    flashUntil: 0,
    lastError: "",
  };
}

export function applyServerMsg(state: DemoState, msg: ServerMsg,
                               nowMs: number): DemoState {
  switch (msg.kind) {
    case "hello":
      return { ...state, connection: "open", sessionId: msg.session_id };
    case "ui_state":
      return {
        ...state,
        technique: msg.technique ?? state.technique,
        page: msg.page,
        progress: msg.progress,
        primed: msg.primed,
        barX: msg.bar_x_px,
        etaMs: msg.scheduled_eta_ms,
        rttMs: msg.diagnostics.rtt_ms ?? state.rttMs,
      };
    case "page":
      return {
        ...state,
        page: msg.index,
        carriedLine: msg.carried_line,
        endOfDocument: msg.end_of_document,
        flashUntil: nowMs + 600,
        progress: 0,
        primed: false,
      };
    case "error":
      return { ...state, lastError: msg.message };
    case "event":
    case "ping":
      return state;
  }
}
