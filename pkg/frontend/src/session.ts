/**
 * Connection/session state machine for the console.
 *
 * Owns exactly one socket at a time, reconnects with exponential backoff,
 * throttles outbound commands to at most 30 Hz (the most recent command of
 * each type wins while throttled), flags the stream stale after 1 s without
 * frames, and surfaces an ack timeout if a command goes unanswered for 1 s.
 *
 * The socket and the clock are injected so the whole machine is testable
 * without a network or real time.
 */

import { Ack, Command, Frame, encodeCommand, parseServerMessage } from "./protocol.js";

export interface SocketLike {
  send(text: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
}

export type SocketFactory = (endpoint: string) => SocketLike;

export interface Scheduler {
  now(): number;
  setTimeout(fn: () => void, ms: number): number;
  clearTimeout(id: number): void;
}

export type ConnectionState = "connecting" | "open" | "retrying" | "closed";

export interface SessionEvents {
  frame?: (frame: Frame) => void;
  ack?: (ack: Ack) => void;
  state?: (state: ConnectionState, detail: string) => void;
  stale?: (isStale: boolean) => void;
  ackTimeout?: () => void;
}

export interface SessionOptions {
  socketFactory?: SocketFactory;
  scheduler?: Scheduler;
  /** Outbound command ceiling, Hz. */
  maxCommandHz?: number;
  /** Frames older than this mark the stream stale, ms. */
  staleAfterMs?: number;
  /** Unanswered commands time out after this, ms. */
  ackTimeoutMs?: number;
  /** First reconnect delay, ms; doubles up to backoffCapMs. */
  backoffInitialMs?: number;
  backoffCapMs?: number;
}

const defaultScheduler: Scheduler = {
  now: () => Date.now(),
  setTimeout: (fn, ms) => setTimeout(fn, ms) as unknown as number,
  clearTimeout: (id) => clearTimeout(id),
};

export class ConsoleSession {
  readonly endpoint: string;
  state: ConnectionState = "closed";
  lastFrame: Frame | null = null;
  stale = false;

  private readonly makeSocket: SocketFactory;
  private readonly clock: Scheduler;
  private readonly minSendIntervalMs: number;
  private readonly staleAfterMs: number;
  private readonly ackTimeoutMs: number;
  private readonly backoffInitialMs: number;
  private readonly backoffCapMs: number;

  private events: SessionEvents = {};
  private socket: SocketLike | null = null;
  private backoffMs: number;
  private closedByUser = false;
  private lastSendAt = -Infinity;
  private pending = new Map<string, Command>();
  private flushTimer: number | null = null;
  private staleTimer: number | null = null;
  private ackTimer: number | null = null;
  private awaitingAcks = 0;

  constructor(endpoint: string, options: SessionOptions = {}) {
    this.endpoint = endpoint;
    this.makeSocket = options.socketFactory ?? defaultWebSocketFactory;
    this.clock = options.scheduler ?? defaultScheduler;
    this.minSendIntervalMs = 1000 / (options.maxCommandHz ?? 30);
    this.staleAfterMs = options.staleAfterMs ?? 1000;
    this.ackTimeoutMs = options.ackTimeoutMs ?? 1000;
    this.backoffInitialMs = options.backoffInitialMs ?? 500;
    this.backoffCapMs = options.backoffCapMs ?? 8000;
    this.backoffMs = this.backoffInitialMs;
  }

  on(events: SessionEvents): void {
    this.events = { ...this.events, ...events };
  }

  connect(): void {
    this.closedByUser = false;
    this.openSocket();
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
    this.socket = null;
    this.cancelTimers();
    this.setState("closed", "closed by user");
  }

  /**
   * Queue a command. At most one command per type is pending; within the
   * rate window the newest replaces the older one, so held-down controls
   * never back up behind their own history.
   */
  send(cmd: Command): void {
    this.pending.set(cmd.type, cmd);
    this.flush();
  }

  private flush(): void {
    if (this.state !== "open" || this.pending.size === 0) return;
    const wait = this.lastSendAt + this.minSendIntervalMs - this.clock.now();
    if (wait > 0) {
      if (this.flushTimer === null) {
        this.flushTimer = this.clock.setTimeout(() => {
          this.flushTimer = null;
          this.flush();
        }, wait);
      }
      return;
    }
    const next = this.pending.values().next().value as Command;
    this.pending.delete(next.type);
    this.socket!.send(encodeCommand(next));
    this.lastSendAt = this.clock.now();
    this.awaitingAcks += 1;
    this.armAckTimer();
    if (this.pending.size > 0) this.flush();
  }

  private openSocket(): void {
    this.setState("connecting", this.endpoint);
    const socket = this.makeSocket(this.endpoint);
    this.socket = socket;
    socket.onopen = () => {
      if (socket !== this.socket) return;
      this.backoffMs = this.backoffInitialMs;
      this.setState("open", "");
      this.armStaleTimer();
      this.flush();
    };
    socket.onmessage = (event) => {
      if (socket !== this.socket) return;
      this.handleMessage(event.data);
    };
    const onDrop = () => {
      if (socket !== this.socket || this.closedByUser) return;
      this.socket = null;
      this.cancelTimers();
      this.scheduleRetry();
    };
    socket.onclose = onDrop;
    socket.onerror = onDrop;
  }

  private scheduleRetry(): void {
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.backoffCapMs);
    this.setState("retrying", `reconnecting in ${delay} ms`);
    this.clock.setTimeout(() => {
      if (!this.closedByUser && this.socket === null) this.openSocket();
    }, delay);
  }

  private handleMessage(text: string): void {
    const msg = parseServerMessage(text);
    if (msg === null) return;
    if (msg.type === "ack") {
      if (this.awaitingAcks > 0) this.awaitingAcks -= 1;
      this.armAckTimer();
      this.events.ack?.(msg);
      return;
    }
    this.lastFrame = msg;
    if (this.stale) {
      this.stale = false;
      this.events.stale?.(false);
    }
    this.armStaleTimer();
    this.events.frame?.(msg);
  }

  private armStaleTimer(): void {
    if (this.staleTimer !== null) this.clock.clearTimeout(this.staleTimer);
    this.staleTimer = this.clock.setTimeout(() => {
      this.staleTimer = null;
      if (!this.stale) {
        this.stale = true;
        this.events.stale?.(true);
      }
    }, this.staleAfterMs);
  }

  private armAckTimer(): void {
    if (this.ackTimer !== null) {
      this.clock.clearTimeout(this.ackTimer);
      this.ackTimer = null;
    }
    if (this.awaitingAcks === 0) return;
    this.ackTimer = this.clock.setTimeout(() => {
      this.ackTimer = null;
      this.awaitingAcks = 0;
      this.events.ackTimeout?.();
    }, this.ackTimeoutMs);
  }

  private cancelTimers(): void {
    for (const id of [this.flushTimer, this.staleTimer, this.ackTimer]) {
      if (id !== null) this.clock.clearTimeout(id);
    }
    this.flushTimer = this.staleTimer = this.ackTimer = null;
    this.awaitingAcks = 0;
    this.pending.clear();
  }

  private setState(state: ConnectionState, detail: string): void {
    this.state = state;
    this.events.state?.(state, detail);
  }
}

function defaultWebSocketFactory(endpoint: string): SocketLike {
  return new WebSocket(endpoint) as unknown as SocketLike;
}
