// Canvas rendering of the reading surface: instruction bar, fake text lines
// with the carried-line arrow, and the per-technique bottom widgets.

import { LOGICAL } from "./geometry.js";
import { DemoState } from "./state.js";

export const LINES_PER_PAGE = 16;
export const BAR_TRAVEL_PX = 2.7 * 60.1;
export const BAR_START_X = (LOGICAL.width - BAR_TRAVEL_PX) / 2;

// light-to-dark fill as the dwell progresses
export function hitboxShade(progress: number): string {
  const p = Math.min(1, Math.max(0, progress));
  const v = Math.round(225 - p * 170);
  return `rgb(${v},${v},${v + 20})`;
}

export function lineWidthFraction(pageIndex: number, line: number): number {
  // deterministic pseudo-text so pages look different without content
  const h = Math.sin((pageIndex * 31 + line) * 12.9898) * 43758.5453;
  return 0.55 + 0.4 * (h - Math.floor(h));
}

export function draw(ctx: CanvasRenderingContext2D, state: DemoState,
                     nowMs: number): void {
  const { width, height, topBar, bottomBar } = LOGICAL;
  ctx.clearRect(0, 0, width, height);

  // top instruction bar; flashes green right after a page turn
  ctx.fillStyle = nowMs < state.flashUntil ? "#3dbb4e" : "#dfe7ee";
  ctx.fillRect(0, 0, width, topBar);
  ctx.fillStyle = "#333";
  ctx.font = "14px sans-serif";
  ctx.fillText(
    state.endOfDocument ? "end of document"
      : `page ${state.page + 1} - ${state.technique}`, 12, topBar - 14);

  // reading area with fake text lines
  const readingH = height - topBar - bottomBar;
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, topBar, width, readingH);
  const lineH = readingH / LINES_PER_PAGE;
  for (let i = 0; i < LINES_PER_PAGE; i++) {
    const y = topBar + (i + 1) * lineH - 6;
    const carried = i === 0 && state.carriedLine;
    ctx.fillStyle = carried ? "#9fb7d4" : "#c8cdd3";
    const w = (width - 40) * lineWidthFraction(state.page, i);
    ctx.fillRect(carried ? 34 : 20, y - 8, w, 8);
    if (carried) {
      // the indication arrow in front of the carried line
      ctx.fillStyle = "#2c6cb0";
      ctx.beginPath();
      ctx.moveTo(12, y - 9);
      ctx.lineTo(28, y - 4);
      ctx.lineTo(12, y + 1);
      ctx.fill();
    }
  }

  // bottom operation area
  const bottomTop = height - bottomBar;
  ctx.fillStyle = "#eef1f4";
  ctx.fillRect(0, bottomTop, width, bottomBar);
  if (state.primed) {
    ctx.fillStyle = "#3dbb4e";
    ctx.fillRect(0, height - 6, width, 6);
  }
  if (state.technique === "hitbox") {
    ctx.fillStyle = hitboxShade(state.progress);
    ctx.fillRect(width / 2 - 70, bottomTop + 25, 140, bottomBar - 50);
    ctx.strokeStyle = "#8894a0";
    ctx.strokeRect(width / 2 - 70, bottomTop + 25, 140, bottomBar - 50);
  } else if (state.technique === "moving_bar") {
    ctx.strokeStyle = "#8894a0";
    ctx.strokeRect(BAR_START_X - 10, bottomTop + 25, BAR_TRAVEL_PX + 20,
                   bottomBar - 50);
    ctx.fillStyle = "#2c6cb0";
    ctx.fillRect(state.barX - 4, bottomTop + 25, 8, bottomBar - 50);
  } else if (state.technique === "eyeswipe") {
    ctx.fillStyle = "#6b7680";
    ctx.fillText("dwell here, then look to the top", width / 2 - 95,
                 bottomTop + bottomBar / 2);
  } else if (state.technique === "auto_scroll") {
    ctx.fillStyle = "#6b7680";
    const eta = state.etaMs === null ? "estimating..."
      : `turn scheduled (${Math.max(0, state.etaMs).toFixed(0)} ms)`;
    ctx.fillText(eta, width / 2 - 70, bottomTop + bottomBar / 2);
  }
}
