// The logical screen the server reasons about; the canvas scales to fit but
// every sample is mapped back into these coordinates.

export const LOGICAL = {
  width: 428,
  height: 926,
  topBar: 100,
  bottomBar: 150,
};

export type Rect = { left: number; top: number; width: number; height: number };

export type Sample = { x: number; y: number; onScreen: boolean };

export function pointerToLogical(clientX: number, clientY: number,
                                 rect: Rect): Sample {
  const x = ((clientX - rect.left) / rect.width) * LOGICAL.width;
  const y = ((clientY - rect.top) / rect.height) * LOGICAL.height;
  const onScreen = x >= 0 && x < LOGICAL.width && y >= 0 && y < LOGICAL.height;
  return { x, y, onScreen };
}

// mulberry32: tiny deterministic PRNG for the client-side noise toggle
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export type NoiseMode = "off" | "sitting" | "walking";

// Feel-testing jitter only: a rough gaussian-ish wobble plus a lateral bias,
// loosely scaled like the simulation presets (60.1 px per cm).
export function makeNoise(mode: NoiseMode, seed = 1): (s: Sample) => Sample {
  if (mode === "off") return (s) => s;
  const rand = mulberry32(seed);
  const gauss = () => (rand() + rand() + rand() - 1.5) * 2.0;
  const sigmaPx = (mode === "sitting" ? 0.12 : 0.18) * 60.1;
  const biasPx = (mode === "sitting" ? 0.94 : 1.94) * 60.1
    * (rand() < 0.5 ? -1 : 1);
  return (s) => {
    if (!s.onScreen) return s;
    const x = s.x + biasPx + gauss() * sigmaPx;
    const y = s.y + gauss() * sigmaPx;
    return {
      x,
      y,
      onScreen: x >= 0 && x < LOGICAL.width && y >= 0 && y < LOGICAL.height,
    };
  };
}
