import { describe, expect, it } from "vitest";

import {
  CHANNEL_NAMES,
  actuatorEcho,
  column,
  encodeCommand,
  parseServerMessage,
  Frame,
} from "../src/protocol.js";

function frame(extra: Record<string, unknown> = {}): Frame {
  return parseServerMessage(
    JSON.stringify({
      type: "frame",
      mode: "loiter",
      paused: false,
      timescale: 1,
      wall_ratio: 1,
      t_s: 1.25,
      pos_x_m: 3.5,
      ...extra,
    }),
  ) as Frame;
}

describe("parseServerMessage", () => {
  it("parses frames and acks", () => {
    const f = frame();
    expect(f.type).toBe("frame");
    expect(f.t_s).toBe(1.25);
    const ack = parseServerMessage('{"type":"ack","ok":true,"detail":""}');
    expect(ack).toEqual({ type: "ack", ok: true, detail: "" });
  });

  it("rejects malformed input", () => {
    expect(parseServerMessage("{not json")).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
    expect(parseServerMessage('{"type":"mystery"}')).toBeNull();
    expect(parseServerMessage('{"type":"frame","mode":"loiter"}')).toBeNull();
    expect(parseServerMessage('{"type":"ack"}')).toBeNull();
  });
});

describe("column access", () => {
  it("reads numeric columns and NaNs out missing ones", () => {
    const f = frame();
    expect(column(f, "pos_x_m")).toBe(3.5);
    expect(Number.isNaN(column(f, "no_such_column"))).toBe(true);
  });

  it("collects the actuator echo in channel order", () => {
    const extra: Record<string, number> = {};
    CHANNEL_NAMES.forEach((name, i) => {
      extra[`cmd_${name}`] = i / 10;
    });
    expect(actuatorEcho(frame(extra))).toEqual(
      [0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
    );
  });
});

describe("encodeCommand", () => {
  it("round-trips a valid actuator command", () => {
    const text = encodeCommand({
      type: "actuators",
      values: [0, 0, 0, 0, 0, 0, 1, 1],
    });
    expect(JSON.parse(text)).toEqual({
      type: "actuators",
      values: [0, 0, 0, 0, 0, 0, 1, 1],
    });
  });

  it("rejects wrong-length or non-finite actuator vectors", () => {
    expect(() =>
      encodeCommand({ type: "actuators", values: [1, 2, 3] }),
    ).toThrow(/8 values/);
    expect(() =>
      encodeCommand({ type: "actuators", values: [NaN, 0, 0, 0, 0, 0, 0, 0] }),
    ).toThrow(/finite/);
  });

  it("rejects out-of-range inflation", () => {
    expect(() => encodeCommand({ type: "inflation", level: 1.5 })).toThrow();
    expect(() => encodeCommand({ type: "inflation", level: -0.1 })).toThrow();
    expect(JSON.parse(encodeCommand({ type: "inflation", level: 0.2 }))).toEqual(
      { type: "inflation", level: 0.2 },
    );
  });
});
