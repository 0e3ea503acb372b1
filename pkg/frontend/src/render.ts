/** Thin canvas drawing layer over the view models in views.ts. */

import { ActuatorBar, AttitudeModel, Point, WindArrowModel } from "./views.js";

const TRACE = "#4fc3f7";
const GRID = "#2a3a4a";
const TEXT = "#cfd8dc";

function clear(ctx: CanvasRenderingContext2D): void {
  ctx.fillStyle = "#121a22";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

export function drawPolyline(
  ctx: CanvasRenderingContext2D,
  points: readonly Point[],
  color = TRACE,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(points[0].x, points[0].y);
  for (const p of points.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.stroke();
}

export function drawGroundTrack(
  ctx: CanvasRenderingContext2D,
  points: readonly Point[],
  target: Point | null,
): void {
  clear(ctx);
  drawPolyline(ctx, points);
  if (points.length > 0) {
    const head = points[points.length - 1];
    ctx.fillStyle = "#ffca28";
    ctx.beginPath();
    ctx.arc(head.x, head.y, 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (target !== null) {
    ctx.strokeStyle = "#ef5350";
    ctx.beginPath();
    ctx.arc(target.x, target.y, 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function drawStrip(
  ctx: CanvasRenderingContext2D,
  points: readonly Point[],
  label: string,
): void {
  clear(ctx);
  ctx.strokeStyle = GRID;
  ctx.beginPath();
  ctx.moveTo(0, ctx.canvas.height / 2);
  ctx.lineTo(ctx.canvas.width, ctx.canvas.height / 2);
  ctx.stroke();
  drawPolyline(ctx, points);
  ctx.fillStyle = TEXT;
  ctx.font = "11px sans-serif";
  ctx.fillText(label, 6, 14);
}

export function drawAttitude(
  ctx: CanvasRenderingContext2D,
  model: AttitudeModel,
): void {
  clear(ctx);
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.save();
  ctx.translate(w / 2, h / 2);
  ctx.rotate((-model.rollDeg * Math.PI) / 180);
  const horizon = (model.pitchDeg / 45) * (h / 2);
  ctx.fillStyle = "#355f91";
  ctx.fillRect(-w, -h + horizon, 2 * w, h); // sky
  ctx.fillStyle = "#6b4f2a";
  ctx.fillRect(-w, horizon, 2 * w, h); // ground
  ctx.strokeStyle = "#eceff1";
  ctx.beginPath();
  ctx.moveTo(-w, horizon);
  ctx.lineTo(w, horizon);
  ctx.stroke();
  ctx.restore();
  ctx.strokeStyle = "#ffca28";
  ctx.beginPath();
  ctx.moveTo(w / 2 - 20, h / 2);
  ctx.lineTo(w / 2 + 20, h / 2);
  ctx.stroke();
  ctx.fillStyle = TEXT;
  ctx.font = "11px sans-serif";
  ctx.fillText(`hdg ${model.headingDeg.toFixed(0)}`, 6, 14);
}

export function drawActuatorBars(
  ctx: CanvasRenderingContext2D,
  bars: readonly ActuatorBar[],
): void {
  clear(ctx);
  const w = ctx.canvas.width;
  const rowH = ctx.canvas.height / bars.length;
  const mid = w * 0.6;
  const halfSpan = w * 0.35;
  ctx.font = "10px sans-serif";
  bars.forEach((bar, i) => {
    const y = i * rowH;
    ctx.fillStyle = TEXT;
    ctx.fillText(bar.name, 4, y + rowH * 0.7);
    ctx.strokeStyle = GRID;
    ctx.strokeRect(mid - halfSpan, y + 2, 2 * halfSpan, rowH - 4);
    const v = Number.isFinite(bar.value) ? bar.value : 0;
    ctx.fillStyle = v >= 0 ? TRACE : "#ef5350";
    ctx.fillRect(mid, y + 3, v * halfSpan, rowH - 6);
  });
}

export function drawWindArrow(
  ctx: CanvasRenderingContext2D,
  model: WindArrowModel,
): void {
  clear(ctx);
  const cx = ctx.canvas.width / 2;
  const cy = ctx.canvas.height / 2;
  const r = Math.min(cx, cy) - 8;
  ctx.strokeStyle = GRID;
  ctx.beginPath();
  ctx.arc(cx, cy, r, 0, 2 * Math.PI);
  ctx.stroke();
  if (model.speed > 1e-6) {
    const len = r * Math.min(1, model.speed / 5);
    const dx = Math.cos(model.angleRad) * len;
    const dy = -Math.sin(model.angleRad) * len;
    ctx.strokeStyle = "#ffca28";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(cx - dx, cy - dy);
    ctx.lineTo(cx + dx, cy + dy);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(cx + dx, cy + dy, 3, 0, 2 * Math.PI);
    ctx.fillStyle = "#ffca28";
    ctx.fill();
  }
  ctx.fillStyle = TEXT;
  ctx.font = "11px sans-serif";
  ctx.fillText(`${model.speed.toFixed(1)} m/s`, 6, 14);
}
