// Wire protocol (version 1): one JSON object per WebSocket frame.

export const PROTOCOL_VERSION = 1;

export type ClientMsg =
  | { kind: "hello"; session_id?: string }
  | { kind: "configure"; technique: string; config?: Record<string, unknown> }
  | { kind: "sample"; t_ms: number; x_px: number; y_px: number; on_screen: boolean }
  | { kind: "ping"; t_ms: number };

export type UiState = {
  kind: "ui_state";
  technique: string | null;
  page: number;
  progress: number;
  primed: boolean;
  bar_x_px: number;
  scheduled_eta_ms: number | null;
  diagnostics: { rtt_ms?: number; heartbeat?: string };
};

export type ServerMsg =
  | { kind: "hello"; protocol: number; server: string; session_id: string }
  | UiState
  | { kind: "event"; t: number; technique: string; p: string; [key: string]: unknown }
  | { kind: "page"; index: number; carried_line: boolean; end_of_document: boolean }
  | { kind: "error"; message: string; fatal: boolean }
  | { kind: "ping"; t_ms: number };

export function encode(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

export function decode(text: string): ServerMsg | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const kind = (raw as { kind?: unknown }).kind;
  if (typeof kind !== "string") return null;
  switch (kind) {
    case "hello":
    case "ui_state":
    case "event":
    case "page":
    case "error":
    case "ping":
      return raw as ServerMsg;
    default:
      return null; // unknown kinds ignored for forward compatibility
  }
}
