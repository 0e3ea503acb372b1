/**
 * The JSON wire protocol spoken with the live bridge over a websocket.
 *
 * Inbound messages are either telemetry frames (flat objects keyed by the
 * telemetry column names plus mode/pause metadata) or command acks.
 * Outbound messages are command objects with a `type` discriminator.
 */

export const NUM_CHANNELS = 8;

export const CHANNEL_NAMES = [
  "yaw_thruster",
  "top_rudder",
  "bottom_rudder",
  "left_elevator",
  "right_elevator",
  "thrust_vector",
  "left_main",
  "right_main",
] as const;

export type ChannelName = (typeof CHANNEL_NAMES)[number];

export type Mode = "manual" | "loiter" | "path";

export interface Frame {
  type: "frame";
  mode: Mode;
  paused: boolean;
  timescale: number;
  wall_ratio: number;
  t_s: number;
  /** Telemetry columns: pos_x_m, yaw_rad, gyro_yaw_radps, cmd_*, ... */
  [column: string]: number | string | boolean;
}

export interface Ack {
  type: "ack";
  ok: boolean;
  detail: string;
}

export type ServerMessage = Frame | Ack;

export type Command =
  | { type: "actuators"; values: number[] }
  | { type: "mode"; mode: Mode }
  | { type: "setpoint"; v: [number, number, number] }
  | { type: "inflation"; level: number }
  | {
      type: "wind";
      speed?: number;
      from_deg?: number;
      magnitude?: number;
      ref_altitude?: number;
    }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "timescale"; factor: number };

/** Parse one inbound websocket message; null if malformed or unknown. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const obj = raw as Record<string, unknown>;
  if (obj.type === "ack") {
    if (typeof obj.ok !== "boolean") return null;
    return { type: "ack", ok: obj.ok, detail: String(obj.detail ?? "") };
  }
  if (obj.type === "frame") {
    if (typeof obj.t_s !== "number" || typeof obj.mode !== "string") {
      return null;
    }
    return obj as unknown as Frame;
  }
  return null;
}

/** Read a numeric telemetry column, NaN when absent. */
export function column(frame: Frame, name: string): number {
  const v = frame[name];
  return typeof v === "number" ? v : NaN;
}

/** The 8 echoed actuator commands from a frame, in channel order. */
export function actuatorEcho(frame: Frame): number[] {
  return CHANNEL_NAMES.map((name) => column(frame, `cmd_${name}`));
}

export function encodeCommand(cmd: Command): string {
  if (cmd.type === "actuators") {
    if (cmd.values.length !== NUM_CHANNELS) {
      throw new Error(`actuators command needs ${NUM_CHANNELS} values`);
    }
    if (!cmd.values.every((v) => Number.isFinite(v))) {
      throw new Error("actuator values must be finite");
    }
  }
  if (cmd.type === "inflation" && !(cmd.level >= 0 && cmd.level <= 1)) {
    throw new Error("inflation level must be in [0, 1]");
  }
  return JSON.stringify(cmd);
}
