"""Live service mode: the simulation stepped in real time (or scaled),
driven by JSON commands and streaming JSON telemetry frames.

The simulation loop is the sole owner of world state. Network handlers
never touch it directly; they enqueue validated commands into a bounded
FIFO which the loop drains at control-tick boundaries, and they read
frames from a broadcast snapshot. With zero commands the served run is
step-for-step identical to the headless scenario runner.
"""

import asyncio
import json
import math
import time

import numpy as np

from .scenario import COLUMNS, MODES, NUM_CHANNELS, SimSession, SpecError

COMMAND_TYPES = ("actuators", "mode", "setpoint", "inflation", "wind",
                 "pause", "resume", "timescale")
WIND_KEYS = ("speed", "from_deg", "magnitude", "ref_altitude",
             "reference_airspeed")
QUEUE_LIMIT = 256


def _ack(ok, detail=""):
    return {"type": "ack", "ok": bool(ok), "detail": detail}


class BridgeSession:
    """A scenario session plus live-command handling and frame snapshots.

    Transport-agnostic: :meth:`apply_command` takes decoded JSON objects
    and returns the acknowledgment object; :meth:`tick` advances one
    control period; :meth:`frame` is the current outbound snapshot.
    """

    def __init__(self, spec):
        self.sim = SimSession(spec)
        self.paused = False
        self.timescale = 1.0
        self._last_row = None

    @property
    def sim_time(self):
        return self.sim.time

    def tick(self):
        if not self.paused:
            self._last_row = self.sim.tick()
        return self._last_row

    def apply_command(self, cmd):
        """Validate and apply one command; returns the ack object.

        State changes are atomic with respect to stepping because the
        caller only invokes this between ticks."""
        if not isinstance(cmd, dict) or "type" not in cmd:
            return _ack(False, "command must be an object with a 'type'")
        kind = cmd["type"]
        if kind not in COMMAND_TYPES:
            return _ack(False, f"unknown command type {kind!r}")
        try:
            return getattr(self, f"_cmd_{kind}")(cmd)
        except (SpecError, ValueError, TypeError, KeyError) as exc:
            return _ack(False, f"{type(exc).__name__}: {exc}")

    # ---- individual commands ------------------------------------------------

    def _cmd_actuators(self, cmd):
        values = np.asarray(cmd["values"], dtype=float)
        if values.shape != (NUM_CHANNELS,) or not np.all(np.isfinite(values)):
            return _ack(False, f"need {NUM_CHANNELS} finite actuator values")
        clipped = np.clip(values, -1.0, 1.0)
        self.sim.manual_cmds = clipped
        if np.any(clipped != values):
            return _ack(True, "values clamped to [-1, 1]")
        return _ack(True)

    def _cmd_mode(self, cmd):
        mode = cmd["mode"]
        if mode not in MODES:
            return _ack(False, f"unknown mode {mode!r}")
        self.sim.set_mode(mode)
        if mode != "manual":
            self.sim.setpoint_override = None
        return _ack(True)

    def _cmd_setpoint(self, cmd):
        v = np.asarray(cmd["v"], dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            return _ack(False, "setpoint needs 3 finite components")
        self.sim.setpoint_override = v
        return _ack(True)

    def _cmd_inflation(self, cmd):
        level = float(cmd["level"])
        if not 0.0 <= level <= 1.0:
            return _ack(False, "inflation level must be in [0, 1]")
        self.sim.vehicle.set_inflation(level)
        return _ack(True)

    def _cmd_wind(self, cmd):
        changes = {k: float(cmd[k]) for k in WIND_KEYS if k in cmd}
        if not changes:
            return _ack(False, f"wind command takes {WIND_KEYS}")
        self.sim.set_wind(**changes)
        return _ack(True)

    def _cmd_pause(self, cmd):
        self.paused = True
        return _ack(True)

    def _cmd_resume(self, cmd):
        self.paused = False
        return _ack(True)

    def _cmd_timescale(self, cmd):
        factor = float(cmd["factor"])
        if not (math.isfinite(factor) and factor > 0):
            return _ack(False, "timescale factor must be positive")
        self.timescale = factor
        return _ack(True)

    # ---- outbound -----------------------------------------------------------

    def frame(self, wall_ratio=1.0):
        """Current telemetry snapshot as the outbound frame object."""
        payload = {"type": "frame", "mode": self.sim.mode,
                   "paused": self.paused, "timescale": self.timescale,
                   "wall_ratio": float(wall_ratio)}
        row = self._last_row
        if row is None:
            row = [math.nan] * len(COLUMNS)
        payload.update({name: float(v) for name, v in zip(COLUMNS, row)})
        payload["t_s"] = self.sim_time
        return payload


class BridgeServer:
    """Owns the asyncio simulation loop and the client fan-out."""

    def __init__(self, spec, rate=20.0, timescale=1.0):
        self.session = BridgeSession(spec)
        self.session.timescale = float(timescale)
        self.rate = float(rate)
        self.queue = asyncio.Queue(maxsize=QUEUE_LIMIT)
        self.clients = set()
        self._task = None

    async def start(self):
        self._task = asyncio.create_task(self._run())

    async def stop(self):
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass

    async def submit(self, websocket, cmd):
        await self.queue.put((websocket, cmd))

    async def _drain_commands(self):
        while not self.queue.empty():
            websocket, cmd = self.queue.get_nowait()
            ack = self.session.apply_command(cmd)
            await self._send(websocket, ack)

    async def _send(self, websocket, obj):
        if websocket is None:
            return
        try:
            await websocket.send_text(json.dumps(obj))
        except Exception:
            self.clients.discard(websocket)

    async def _broadcast(self, obj):
        text = json.dumps(obj)
        for websocket in list(self.clients):
            try:
                await websocket.send_text(text)
            except Exception:
                self.clients.discard(websocket)

    async def _run(self):
        """Step pinned to the wall clock; when the host falls behind, sim
        time lags wall time rather than steps being dropped."""
        session = self.session
        period = session.sim.spec.control_period
        frame_every = max(1, int(round(1.0 / (self.rate * period))))
        anchor_wall = time.monotonic()
        anchor_sim = session.sim_time
        scale = session.timescale
        ticks = 0
        while True:
            await self._drain_commands()
            if session.timescale != scale or session.paused:
                anchor_wall = time.monotonic()
                anchor_sim = session.sim_time
                scale = session.timescale
            if session.paused:
                await self._broadcast(session.frame())
                await asyncio.sleep(1.0 / self.rate)
                continue
            session.tick()
            ticks += 1
            target = anchor_wall + (session.sim_time - anchor_sim) / scale
            now = time.monotonic()
            lag = now - target
            if ticks % frame_every == 0:
                ratio = scale if lag < period else 0.0
                await self._broadcast(session.frame(wall_ratio=ratio))
            if lag < 0:
                await asyncio.sleep(-lag)
            else:
                # overloaded host: yield to the event loop, keep stepping
                await asyncio.sleep(0)


def create_app(spec, rate=20.0, timescale=1.0, static_dir=None):
    """FastAPI application exposing the websocket endpoint at /ws."""
    from contextlib import asynccontextmanager

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    server = BridgeServer(spec, rate=rate, timescale=timescale)

    @asynccontextmanager
    async def _lifespan(app):
        await server.start()
        try:
            yield
        finally:
            await server.stop()

    app = FastAPI(title="blimpsim bridge", lifespan=_lifespan)
    app.state.server = server

    @app.websocket("/ws")
    async def _ws(websocket: WebSocket):
        await websocket.accept()
        server.clients.add(websocket)
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    cmd = json.loads(text)
                except json.JSONDecodeError as exc:
                    await websocket.send_text(json.dumps(
                        _ack(False, f"invalid JSON: {exc}")))
                    continue
                await server.submit(websocket, cmd)
        except WebSocketDisconnect:
            pass
        finally:
            server.clients.discard(websocket)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="console")
    return app


def serve(spec, host="127.0.0.1", port=8000, rate=20.0, timescale=1.0,
          static_dir=None):
    """Run the bridge service until interrupted."""
    import uvicorn

    app = create_app(spec, rate=rate, timescale=timescale,
                     static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
