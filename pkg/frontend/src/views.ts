/**
 * Pure view models for the console widgets.
 *
 * Everything here is plain math from telemetry frames to drawable
 * geometry: the canvas/DOM layer in render.ts consumes these, and the
 * tests exercise them directly with synthetic frames.
 */

import { CHANNEL_NAMES, Frame, column } from "./protocol.js";

export interface Point {
  x: number;
  y: number;
}

/** Time series with a rolling retention window (seconds of sim time). */
export class RollingSeries {
  private ts: number[] = [];
  private vs: number[] = [];

  constructor(public readonly windowS = 60) {}

  push(t: number, v: number): void {
    this.ts.push(t);
    this.vs.push(v);
    const cutoff = t - this.windowS;
    let drop = 0;
    while (drop < this.ts.length && this.ts[drop] < cutoff) drop++;
    if (drop > 0) {
      this.ts.splice(0, drop);
      this.vs.splice(0, drop);
    }
  }

  get length(): number {
    return this.ts.length;
  }

  times(): readonly number[] {
    return this.ts;
  }

  values(): readonly number[] {
    return this.vs;
  }

  /** Polyline in pixel space for a strip chart of the retained window. */
  polyline(width: number, height: number, vMin: number, vMax: number): Point[] {
    if (this.ts.length === 0) return [];
    const t1 = this.ts[this.ts.length - 1];
    const t0 = t1 - this.windowS;
    const span = Math.max(vMax - vMin, 1e-12);
    return this.ts.map((t, i) => ({
      x: ((t - t0) / this.windowS) * width,
      y: height - ((this.vs[i] - vMin) / span) * height,
    }));
  }
}

/** Plan-view ground track: world x/y history scaled into a square canvas. */
export function groundTrack(
  xs: readonly number[],
  ys: readonly number[],
  size: number,
  marginPx = 10,
): Point[] {
  if (xs.length === 0) return [];
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const span = Math.max(xMax - xMin, yMax - yMin, 1e-9);
  const scale = (size - 2 * marginPx) / span;
  const cx = (xMin + xMax) / 2;
  const cy = (yMin + yMax) / 2;
  // East to the right, north up.
  return xs.map((x, i) => ({
    x: size / 2 + (x - cx) * scale,
    y: size / 2 - (ys[i] - cy) * scale,
  }));
}

/** Maximum perpendicular deviation of a polyline from its chord, px. */
export function maxDeviationFromChord(points: readonly Point[]): number {
  if (points.length < 3) return 0;
  const a = points[0];
  const b = points[points.length - 1];
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy);
  if (len < 1e-12) {
    return Math.max(...points.map((p) => Math.hypot(p.x - a.x, p.y - a.y)));
  }
  let worst = 0;
  for (const p of points) {
    const d = Math.abs(dx * (p.y - a.y) - dy * (p.x - a.x)) / len;
    if (d > worst) worst = d;
  }
  return worst;
}

export interface AttitudeModel {
  rollDeg: number;
  pitchDeg: number;
  headingDeg: number;
}

const DEG = 180 / Math.PI;

export function attitude(frame: Frame): AttitudeModel {
  const headingDeg = (column(frame, "yaw_rad") * DEG + 360) % 360;
  return {
    rollDeg: column(frame, "roll_rad") * DEG,
    pitchDeg: column(frame, "pitch_rad") * DEG,
    headingDeg,
  };
}

export interface ActuatorBar {
  name: string;
  value: number;
}

/** The 8 echoed actuator commands, ready for bar rendering in [-1, 1]. */
export function actuatorBars(frame: Frame): ActuatorBar[] {
  return CHANNEL_NAMES.map((name) => ({
    name,
    value: column(frame, `cmd_${name}`),
  }));
}

export interface WindArrowModel {
  /** Direction the air moves toward, radians from east, CCW (ENU). */
  angleRad: number;
  speed: number;
}

export function windArrow(frame: Frame): WindArrowModel {
  const wx = column(frame, "wind_x_mps");
  const wy = column(frame, "wind_y_mps");
  return { angleRad: Math.atan2(wy, wx), speed: Math.hypot(wx, wy) };
}

/**
 * Dominant frequency of a rendered trace estimated from mean-crossings.
 * Used to verify oscillations survive the series -> polyline pipeline.
 */
export function dominantFrequency(
  times: readonly number[],
  values: readonly number[],
): number {
  if (times.length < 3) return 0;
  const mean = values.reduce((a, b) => a + b, 0) / values.length;
  let crossings = 0;
  let first = NaN;
  let last = NaN;
  for (let i = 1; i < values.length; i++) {
    const a = values[i - 1] - mean;
    const b = values[i] - mean;
    if ((a < 0 && b >= 0) || (a >= 0 && b < 0)) {
      crossings++;
      if (Number.isNaN(first)) first = times[i];
      last = times[i];
    }
  }
  if (crossings < 2 || last <= first) return 0;
  // crossings - 1 half-periods between the first and last crossing
  return (crossings - 1) / (2 * (last - first));
}
