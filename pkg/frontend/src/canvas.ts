/**
 * Canvas renderer. Pure display: world coordinates come verbatim from
 * service frames; the only transforms are pan/zoom fitting and the
 * upward-positive y flip.
 */

import { splitChains } from "./protocol.js";
import type { StudioState } from "./state.js";
import type { Vec2 } from "./path.js";

export interface Viewport {
  scale: number; // pixels per micrometre
  originX: number; // world x at canvas left
  originY: number; // world y at canvas BOTTOM (y grows upward)
}

export function fitViewport(
  points: Vec2[],
  width: number,
  height: number,
  marginFraction = 0.1,
): Viewport {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  }
  if (!Number.isFinite(minX)) {
    return { scale: 1, originX: 0, originY: 0 };
  }
  const spanX = Math.max(maxX - minX, 1);
  const spanY = Math.max(maxY - minY, 1);
  const pad = marginFraction;
  const scale = Math.min(
    width / (spanX * (1 + 2 * pad)),
    height / (spanY * (1 + 2 * pad)),
  );
  return {
    scale,
    originX: minX - spanX * pad,
    originY: minY - spanY * pad,
  };
}

export function worldToScreen(vp: Viewport, p: Vec2, height: number): Vec2 {
  return [(p[0] - vp.originX) * vp.scale, height - (p[1] - vp.originY) * vp.scale];
}

export function screenToWorld(vp: Viewport, p: Vec2, height: number): Vec2 {
  return [p[0] / vp.scale + vp.originX, (height - p[1]) / vp.scale + vp.originY];
}

const CHAIN_COLORS = ["#1f6feb", "#8250df", "#0969da"];

export function drawStudio(
  ctx: CanvasRenderingContext2D,
  state: StudioState,
  vp: Viewport,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, width, height);

  if (state.overlay) {
    ctx.strokeStyle = "#b0b8c4";
    ctx.setLineDash([6, 4]);
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    state.overlay.forEach((p, i) => {
      const [sx, sy] = worldToScreen(vp, p, height);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
    ctx.setLineDash([]);
  }

  const frame = state.frame;
  if (!frame) return;
  const chains = splitChains(frame.points, state.chainSizes);
  chains.forEach((chain, ci) => {
    ctx.strokeStyle = CHAIN_COLORS[ci % CHAIN_COLORS.length]!;
    ctx.lineWidth = 2;
    ctx.lineJoin = "round";
    ctx.beginPath();
    chain.forEach((p, i) => {
      const [sx, sy] = worldToScreen(vp, p, height);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
  });

  frame.points.forEach((p, gid) => {
    const [sx, sy] = worldToScreen(vp, p, height);
    const isDriven = frame.driven === gid;
    const isSelected = state.selectedPoint === gid;
    if (!isDriven && !isSelected) return;
    ctx.beginPath();
    ctx.arc(sx, sy, isDriven ? 5 : 4, 0, Math.PI * 2);
    ctx.fillStyle = isDriven ? "#d1242f" : "#1a7f37";
    ctx.fill();
  });
}
