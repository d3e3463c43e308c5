import assert from "node:assert/strict";
import { test } from "node:test";

import { decode, encode, PROTOCOL_VERSION, ServerMsg } from "../src/protocol.js";

test("protocol version is 1", () => {
  assert.equal(PROTOCOL_VERSION, 1);
});

test("encode produces newline-free JSON", () => {
  const text = encode({ kind: "sample", t_ms: 40, x_px: 1.5, y_px: 2.5,
                        on_screen: true });
  assert.ok(!text.includes("\n"));
  assert.deepEqual(JSON.parse(text), { kind: "sample", t_ms: 40, x_px: 1.5,
                                       y_px: 2.5, on_screen: true });
});

test("decode round-trips known server frames", () => {
  const ui: ServerMsg = {
    kind: "ui_state", technique: "hitbox", page: 2, progress: 0.5,
    primed: false, bar_x_px: 10, scheduled_eta_ms: null, diagnostics: {},
  };
  assert.deepEqual(decode(JSON.stringify(ui)), ui);
});

test("decode rejects malformed or unknown frames", () => {
  assert.equal(decode("{not json"), null);
  assert.equal(decode("42"), null);
  assert.equal(decode(JSON.stringify({ kind: "telepathy" })), null);
  assert.equal(decode(JSON.stringify({ noKind: true })), null);
});
