/**
 * Keyboard (and gamepad-axis) piloting bindings.
 *
 * Axes are mapped into the 8 actuator channels the bridge expects:
 * throttle drives both main thrusters, yaw drives the tail thruster and
 * both rudders, pitch drives both elevators, and vector tilts the mains.
 * Neutral input is an all-zero actuator message.
 */

import { NUM_CHANNELS } from "./protocol.js";

export interface Axes {
  /** forward +1 .. reverse -1 */
  throttle: number;
  /** right +1 .. left -1 */
  yaw: number;
  /** nose up +1 .. nose down -1 */
  pitch: number;
  /** thrust vector up +1 .. down -1 */
  vector: number;
}

export const NEUTRAL_AXES: Axes = { throttle: 0, yaw: 0, pitch: 0, vector: 0 };

export interface KeyBindings {
  throttleUp: string;
  throttleDown: string;
  yawLeft: string;
  yawRight: string;
  pitchUp: string;
  pitchDown: string;
  vectorUp: string;
  vectorDown: string;
}

export const DEFAULT_BINDINGS: KeyBindings = {
  throttleUp: "KeyW",
  throttleDown: "KeyS",
  yawLeft: "KeyA",
  yawRight: "KeyD",
  pitchUp: "ArrowUp",
  pitchDown: "ArrowDown",
  vectorUp: "ArrowRight",
  vectorDown: "ArrowLeft",
};

const clamp = (v: number) => Math.max(-1, Math.min(1, v));

/** Resolve the currently held keys into stick axes. */
export function axesFromKeys(
  held: ReadonlySet<string>,
  bindings: KeyBindings = DEFAULT_BINDINGS,
): Axes {
  const axis = (plus: string, minus: string) =>
    (held.has(plus) ? 1 : 0) - (held.has(minus) ? 1 : 0);
  return {
    throttle: axis(bindings.throttleUp, bindings.throttleDown),
    yaw: axis(bindings.yawRight, bindings.yawLeft),
    pitch: axis(bindings.pitchUp, bindings.pitchDown),
    vector: axis(bindings.vectorUp, bindings.vectorDown),
  };
}

/**
 * Map stick axes to the 8-channel actuator vector, channel order:
 * [yaw_thruster, top_rudder, bottom_rudder, left_elevator, right_elevator,
 *  thrust_vector, left_main, right_main].
 */
export function axesToChannels(axes: Axes): number[] {
  const values = new Array<number>(NUM_CHANNELS).fill(0);
  values[0] = clamp(axes.yaw);
  values[1] = clamp(axes.yaw);
  values[2] = clamp(axes.yaw);
  values[3] = clamp(axes.pitch);
  values[4] = clamp(axes.pitch);
  values[5] = clamp(axes.vector);
  values[6] = clamp(axes.throttle);
  values[7] = clamp(axes.throttle);
  return values;
}

/** Tracks which bound keys are held; feed it keydown/keyup events. */
export class KeyboardInput {
  private held = new Set<string>();

  constructor(public bindings: KeyBindings = DEFAULT_BINDINGS) {}

  keyDown(code: string): void {
    if (Object.values(this.bindings).includes(code)) this.held.add(code);
  }

  keyUp(code: string): void {
    this.held.delete(code);
  }

  /** Release everything (window blur, mode change). */
  reset(): void {
    this.held.clear();
  }

  axes(): Axes {
    return axesFromKeys(this.held, this.bindings);
  }

  channels(): number[] {
    return axesToChannels(this.axes());
  }
}
