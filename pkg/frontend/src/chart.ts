/**
 * Hand-rolled canvas renderer: shaded missing runs behind a truth line and
 * the visible models' imputation segments, clipped to the active viewport.
 */

import type { RenderModel } from './state.js';

const PAD = { left: 48, right: 12, top: 10, bottom: 24 };
const SHADE_COLOR = 'rgba(120, 120, 120, 0.18)';
const AXIS_COLOR = '#999999';
const GRID_COLOR = 'rgba(0, 0, 0, 0.07)';

interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  tMin: number;
  tMax: number;
  yMin: number;
  yMax: number;
}

function yRange(rm: RenderModel): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of rm.series) {
    for (const seg of s.segments) {
      for (const v of seg.values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
  }
  if (!isFinite(lo) || !isFinite(hi)) return [0, 1];
  const margin = (hi - lo || 1) * 0.08;
  return [lo - margin, hi + margin];
}

function xPx(f: Frame, t: number): number {
  return f.x0 + ((t - f.tMin) / (f.tMax - f.tMin)) * f.w;
}

function yPx(f: Frame, v: number): number {
  return f.y0 + f.h - ((v - f.yMin) / (f.yMax - f.yMin)) * f.h;
}

function drawAxes(ctx: CanvasRenderingContext2D, f: Frame): void {
  ctx.strokeStyle = AXIS_COLOR;
  ctx.lineWidth = 1;
  ctx.strokeRect(f.x0, f.y0, f.w, f.h);
  ctx.fillStyle = AXIS_COLOR;
  ctx.font = '11px sans-serif';
  ctx.textAlign = 'center';
  const ticks = 6;
  for (let i = 0; i <= ticks; i++) {
    const t = f.tMin + ((f.tMax - f.tMin) * i) / ticks;
    const x = xPx(f, t);
    ctx.beginPath();
    ctx.moveTo(x, f.y0);
    ctx.lineTo(x, f.y0 + f.h);
    ctx.strokeStyle = GRID_COLOR;
    ctx.stroke();
    ctx.fillText(Math.round(t).toString(), x, f.y0 + f.h + 16);
  }
  ctx.textAlign = 'right';
  for (let i = 0; i <= 4; i++) {
    const v = f.yMin + ((f.yMax - f.yMin) * i) / 4;
    ctx.fillText(v.toFixed(2), f.x0 - 6, yPx(f, v) + 4);
  }
}

function drawSegment(
  ctx: CanvasRenderingContext2D,
  f: Frame,
  start: number,
  values: number[],
  color: string,
  width: number,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  let pen = false;
  for (let i = 0; i < values.length; i++) {
    const t = start + i;
    if (t < f.tMin || t > f.tMax) {
      pen = false;
      continue;
    }
    const x = xPx(f, t);
    const y = yPx(f, values[i]);
    if (pen) {
      ctx.lineTo(x, y);
    } else {
      ctx.moveTo(x, y);
      pen = true;
    }
  }
  ctx.stroke();
}

export function drawChart(canvas: HTMLCanvasElement, rm: RenderModel): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const dpr = window.devicePixelRatio || 1;
  const cssW = canvas.clientWidth || 900;
  const cssH = canvas.clientHeight || 360;
  canvas.width = cssW * dpr;
  canvas.height = cssH * dpr;
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
  ctx.clearRect(0, 0, cssW, cssH);

  const [yMin, yMax] = yRange(rm);
  const f: Frame = {
    x0: PAD.left,
    y0: PAD.top,
    w: cssW - PAD.left - PAD.right,
    h: cssH - PAD.top - PAD.bottom,
    tMin: rm.viewport.tMin,
    tMax: Math.max(rm.viewport.tMax, rm.viewport.tMin + 1),
    yMin,
    yMax,
  };

  ctx.save();
  ctx.beginPath();
  ctx.rect(f.x0, f.y0, f.w, f.h);
  ctx.clip();

  ctx.fillStyle = SHADE_COLOR;
  for (const [start, length] of rm.shaded) {
    const a = Math.max(start, f.tMin);
    const b = Math.min(start + length, f.tMax);
    if (b <= a) continue;
    ctx.fillRect(xPx(f, a), f.y0, xPx(f, b) - xPx(f, a), f.h);
  }

  for (const s of rm.series) {
    const width = s.kind === 'truth' ? 1.4 : 1.6;
    for (const seg of s.segments) {
      drawSegment(ctx, f, seg.start, seg.values, s.color, width);
    }
  }
  ctx.restore();

  drawAxes(ctx, f);
}

/** Map a canvas-relative pixel x back to a timestep within the viewport. */
export function pixelToTimestep(canvas: HTMLCanvasElement, rm: RenderModel, px: number): number {
  const cssW = canvas.clientWidth || 900;
  const w = cssW - PAD.left - PAD.right;
  const frac = (px - PAD.left) / w;
  return rm.viewport.tMin + frac * (rm.viewport.tMax - rm.viewport.tMin);
}
