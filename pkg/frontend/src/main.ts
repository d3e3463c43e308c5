import { LOGICAL, makeNoise, NoiseMode, pointerToLogical } from "./geometry.js";
import { ClientMsg, decode, encode } from "./protocol.js";
import { PointerPump } from "./sampler.js";
import { draw } from "./render.js";
import { applyServerMsg, DemoState, initialState } from "./state.js";

const canvas = document.getElementById("screen") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const techniqueSelect = document.getElementById("technique") as HTMLSelectElement;
const noiseSelect = document.getElementById("noise") as HTMLSelectElement;
const dwellInput = document.getElementById("dwell") as HTMLInputElement;

const url = new URLSearchParams(location.search).get("ws")
  ?? "ws://127.0.0.1:8765";

let state: DemoState = initialState();
let ws: WebSocket | null = null;
let pump: PointerPump | null = null;
const t0 = performance.now();
const now = () => performance.now() - t0;

function setBanner(text: string, bad = false): void {
  banner.textContent = text;
  banner.className = bad ? "bad" : "ok";
}

function sendConfigure(): void {
  if (!ws || ws.readyState !== WebSocket.OPEN) return;
  const config: Record<string, unknown> = {};
  const dwell = Number(dwellInput.value);
  if (techniqueSelect.value === "hitbox" && dwell >= 500 && dwell <= 2000) {
    config["hitbox_dwell_ms"] = dwell;
  }
  ws.send(encode({ kind: "configure", technique: techniqueSelect.value,
                   config }));
}

function makePump(): PointerPump {
  const noise = makeNoise(noiseSelect.value as NoiseMode, 7);
  const p = new PointerPump(now, (msg: ClientMsg) => {
    if (ws && ws.readyState === WebSocket.OPEN) ws.send(encode(msg));
  }, noise);
  canvas.addEventListener("pointermove", (ev) => {
    p.update(pointerToLogical(ev.clientX, ev.clientY,
                              canvas.getBoundingClientRect()));
  });
  return p;
}

function connect(): void {
  state = initialState();
  setBanner("connecting...");
  ws = new WebSocket(url);
  ws.onopen = () => {
    ws!.send(encode({ kind: "hello", session_id: `demo-${Date.now()}` }));
  };
  ws.onmessage = (ev) => {
    const msg = decode(String(ev.data));
    if (!msg) return;
    if (msg.kind === "ping") {
      ws!.send(String(ev.data)); // echo the heartbeat back
      return;
    }
    if (msg.kind === "hello") {
      setBanner(`connected to ${msg.server}`);
      sendConfigure();
      pump?.stop();
      pump = makePump();
      pump.start();
    }
    if (msg.kind === "error") setBanner(msg.message, true);
    state = applyServerMsg(state, msg, performance.now());
  };
  ws.onclose = () => {
    setBanner("disconnected - retrying in 1s", true);
    pump?.stop();
    setTimeout(connect, 1000);
  };
}

techniqueSelect.addEventListener("change", sendConfigure);
dwellInput.addEventListener("change", sendConfigure);
noiseSelect.addEventListener("change", () => {
  pump?.stop();
  pump = makePump();
  pump.start();
});

function frame(): void {
  canvas.width = LOGICAL.width;
  canvas.height = LOGICAL.height;
  draw(ctx, state, performance.now());
  requestAnimationFrame(frame);
}

connect();
requestAnimationFrame(frame);
