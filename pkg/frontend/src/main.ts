/**
 * Console entry point: wires the session, keyboard input and canvas
 * widgets together. The bridge endpoint comes from the `ws` query
 * parameter and defaults to /ws on the serving host.
 */

import { Frame, Mode, column } from "./protocol.js";
import { ConsoleSession } from "./session.js";
import { KeyboardInput } from "./input.js";
import {
  RollingSeries,
  actuatorBars,
  attitude,
  dominantFrequency,
  groundTrack,
  windArrow,
} from "./views.js";
import {
  drawActuatorBars,
  drawAttitude,
  drawGroundTrack,
  drawStrip,
  drawWindArrow,
} from "./render.js";

function endpointFromLocation(): string {
  const params = new URLSearchParams(window.location.search);
  const explicit = params.get("ws");
  if (explicit !== null) return explicit;
  const scheme = window.location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${window.location.host}/ws`;
}

function ctx2d(id: string): CanvasRenderingContext2D {
  const canvas = document.getElementById(id) as HTMLCanvasElement;
  return canvas.getContext("2d")!;
}

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

const SEND_PERIOD_MS = 50; // 20 Hz input sampling, under the 30 Hz ceiling

function start(): void {
  const session = new ConsoleSession(endpointFromLocation());
  const keyboard = new KeyboardInput();

  const track = { xs: [] as number[], ys: [] as number[] };
  const altSeries = new RollingSeries(60);
  const finGyroSeries = new RollingSeries(15);

  const banner = el<HTMLDivElement>("banner");
  const pausedBadge = el<HTMLSpanElement>("paused-badge");
  const staleBadge = el<HTMLSpanElement>("stale-badge");
  const modeSelect = el<HTMLSelectElement>("mode");
  const inflation = el<HTMLInputElement>("inflation");
  const inflationEcho = el<HTMLSpanElement>("inflation-echo");
  const windSpeed = el<HTMLInputElement>("wind-speed");
  const windFrom = el<HTMLInputElement>("wind-from");
  const windMag = el<HTMLInputElement>("wind-mag");
  const status = el<HTMLSpanElement>("status");
  const finGyroLabel = el<HTMLSpanElement>("fin-gyro-freq");

  const trackCtx = ctx2d("ground-track");
  const altCtx = ctx2d("alt-strip");
  const attCtx = ctx2d("attitude");
  const barsCtx = ctx2d("actuators");
  const finCtx = ctx2d("fin-gyro");
  const windCtx = ctx2d("wind-arrow");

  let lastRendered: Frame | null = null;

  function render(frame: Frame): void {
    track.xs.push(column(frame, "pos_x_m"));
    track.ys.push(column(frame, "pos_y_m"));
    if (track.xs.length > 3000) {
      track.xs.shift();
      track.ys.shift();
    }
    const t = frame.t_s;
    altSeries.push(t, column(frame, "pos_z_m"));
    finGyroSeries.push(t, column(frame, "gyro_yaw_radps"));

    const size = trackCtx.canvas.width;
    const pts = groundTrack(track.xs, track.ys, size);
    drawGroundTrack(trackCtx, pts, null);

    const alts = altSeries.values();
    const lo = Math.min(-1, ...alts) - 0.5;
    const hi = Math.max(1, ...alts) + 0.5;
    drawStrip(
      altCtx,
      altSeries.polyline(altCtx.canvas.width, altCtx.canvas.height, lo, hi),
      "altitude [m]",
    );

    drawAttitude(attCtx, attitude(frame));
    drawActuatorBars(barsCtx, actuatorBars(frame));

    const gyros = finGyroSeries.values();
    const amp = Math.max(0.2, ...gyros.map(Math.abs));
    drawStrip(
      finCtx,
      finGyroSeries.polyline(finCtx.canvas.width, finCtx.canvas.height, -amp, amp),
      "fin gyro yaw [rad/s]",
    );
    const freq = dominantFrequency(finGyroSeries.times(), gyros);
    finGyroLabel.textContent = freq > 0.05 ? `${freq.toFixed(2)} Hz` : "-";

    drawWindArrow(windCtx, windArrow(frame));

    pausedBadge.hidden = !frame.paused;
    inflationEcho.textContent = column(frame, "inflation_level").toFixed(2);
    status.textContent =
      `t=${t.toFixed(1)} s  mode=${frame.mode}  ` +
      `airspeed=${column(frame, "airspeed_mps").toFixed(2)} m/s`;
    if (frame.mode !== modeSelect.value) modeSelect.value = frame.mode;
    lastRendered = frame;
  }

  session.on({
    frame: (frame) => {
      // Paused: keep the last drawn charts frozen, only toggle the badge.
      if (frame.paused && lastRendered !== null) {
        pausedBadge.hidden = false;
        return;
      }
      render(frame);
    },
    state: (state, detail) => {
      banner.hidden = state === "open";
      banner.textContent =
        state === "open" ? "" : `connection ${state} ${detail}`.trim();
    },
    stale: (isStale) => {
      staleBadge.hidden = !isStale;
    },
    ack: (ack) => {
      if (!ack.ok) {
        banner.hidden = false;
        banner.textContent = `command rejected: ${ack.detail}`;
        setTimeout(() => {
          if (session.state === "open") banner.hidden = true;
        }, 3000);
      }
    },
    ackTimeout: () => {
      banner.hidden = false;
      banner.textContent = "command not acknowledged within 1 s";
    },
  });

  window.addEventListener("keydown", (e) => keyboard.keyDown(e.code));
  window.addEventListener("keyup", (e) => keyboard.keyUp(e.code));
  window.addEventListener("blur", () => keyboard.reset());

  setInterval(() => {
    if (session.state !== "open") return;
    if (modeSelect.value === "manual") {
      session.send({ type: "actuators", values: keyboard.channels() });
    }
  }, SEND_PERIOD_MS);

  modeSelect.addEventListener("change", () => {
    session.send({ type: "mode", mode: modeSelect.value as Mode });
  });
  inflation.addEventListener("input", () => {
    session.send({ type: "inflation", level: Number(inflation.value) });
  });
  const pushWind = () => {
    session.send({
      type: "wind",
      speed: Number(windSpeed.value),
      from_deg: Number(windFrom.value),
      magnitude: Number(windMag.value),
    });
  };
  el<HTMLButtonElement>("wind-apply").addEventListener("click", pushWind);
  el<HTMLButtonElement>("pause").addEventListener("click", () =>
    session.send({ type: "pause" }),
  );
  el<HTMLButtonElement>("resume").addEventListener("click", () =>
    session.send({ type: "resume" }),
  );

  session.connect();
}

window.addEventListener("DOMContentLoaded", start);
