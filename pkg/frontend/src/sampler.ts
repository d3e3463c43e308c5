// 25 Hz pointer pump. Timestamps come from an injected monotonic clock so
// tests can drive it deterministically.

import { Sample } from "./geometry.js";
import { ClientMsg } from "./protocol.js";

export const SAMPLE_INTERVAL_MS = 40;

export class PointerPump {
  private lastSample: Sample = { x: 0, y: 0, onScreen: false };
  private timer: ReturnType<typeof setInterval> | null = null;
  private sent = 0;

  constructor(private readonly now: () => number,
              private readonly send: (msg: ClientMsg) => void,
              private readonly transform: (s: Sample) => Sample = (s) => s) {}

  update(sample: Sample): void {
    this.lastSample = sample;
  }

  tick(): void {
    const s = this.transform(this.lastSample);
    this.send({
      kind: "sample",
      t_ms: this.now(),
      x_px: s.x,
      y_px: s.y,
      on_screen: s.onScreen,
    });
    this.sent += 1;
  }

  get sentCount(): number {
    return this.sent;
  }

  start(): void {
    if (this.timer === null) {
      this.timer = setInterval(() => this.tick(), SAMPLE_INTERVAL_MS);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
