import asyncio
import json
import math

import numpy as np
import pytest

from blimpsim.bridge import BridgeServer, BridgeSession, create_app
from blimpsim.scenario import COLUMNS, ScenarioSpec, SimSession


def short_spec(**overrides):
    kwargs = dict(name="bridge-test", mode="loiter",
                  loiter=dict(hold_position=[20.0, 0.0, 0.0], gain=0.06),
                  duration=10.0, seed=0)
    kwargs.update(overrides)
    return ScenarioSpec(**kwargs)


# ---- command handling -------------------------------------------------------

def test_malformed_command_rejected():
    session = BridgeSession(short_spec())
    assert session.apply_command("pause")["ok"] is False
    assert session.apply_command({})["ok"] is False
    assert session.apply_command({"type": "warp"})["ok"] is False


def test_actuator_command_validation_and_clamp():
    session = BridgeSession(short_spec())
    ack = session.apply_command({"type": "actuators", "values": [0.5] * 8})
    assert ack["ok"] is True and ack["detail"] == ""
    ack = session.apply_command({"type": "actuators", "values": [3.0] * 8})
    assert ack["ok"] is True
    assert "clamped" in ack["detail"]
    np.testing.assert_array_equal(session.sim.manual_cmds, np.ones(8))
    ack = session.apply_command({"type": "actuators", "values": [0.5] * 3})
    assert ack["ok"] is False
    ack = session.apply_command({"type": "actuators",
                                 "values": [math.nan] * 8})
    assert ack["ok"] is False


def test_mode_command():
    session = BridgeSession(short_spec())
    assert session.apply_command({"type": "mode", "mode": "manual"})["ok"]
    assert session.sim.mode == "manual"
    assert not session.apply_command({"type": "mode", "mode": "warp"})["ok"]
    # path mode without path parameters is rejected
    assert not session.apply_command({"type": "mode", "mode": "path"})["ok"]


def test_setpoint_and_inflation_and_wind_commands():
    session = BridgeSession(short_spec())
    assert session.apply_command({"type": "setpoint",
                                  "v": [1.0, 0.0, 0.0]})["ok"]
    np.testing.assert_array_equal(session.sim.setpoint_override,
                                  [1.0, 0.0, 0.0])
    assert not session.apply_command({"type": "setpoint",
                                      "v": [1.0, 0.0]})["ok"]
    assert session.apply_command({"type": "inflation", "level": 0.5})["ok"]
    assert session.sim.vehicle.inflation_level == 0.5
    assert not session.apply_command({"type": "inflation",
                                      "level": 1.5})["ok"]
    assert session.apply_command({"type": "wind", "speed": 2.0,
                                  "from_deg": 90.0})["ok"]
    assert session.sim.env.config.speed == 2.0
    assert not session.apply_command({"type": "wind"})["ok"]


def test_pause_freezes_sim_time():
    session = BridgeSession(short_spec())
    session.tick()
    t = session.sim_time
    assert session.apply_command({"type": "pause"})["ok"]
    session.tick()
    session.tick()
    assert session.sim_time == t
    frame = session.frame()
    assert frame["paused"] is True
    assert session.apply_command({"type": "resume"})["ok"]
    session.tick()
    assert session.sim_time > t


def test_timescale_command():
    session = BridgeSession(short_spec())
    assert session.apply_command({"type": "timescale", "factor": 4.0})["ok"]
    assert session.timescale == 4.0
    assert not session.apply_command({"type": "timescale",
                                      "factor": 0.0})["ok"]
    assert not session.apply_command({"type": "timescale",
                                      "factor": math.inf})["ok"]


def test_leaving_manual_clears_setpoint_override():
    session = BridgeSession(short_spec())
    session.apply_command({"type": "mode", "mode": "manual"})
    session.apply_command({"type": "setpoint", "v": [1.0, 0.0, 0.0]})
    session.apply_command({"type": "mode", "mode": "loiter"})
    assert session.sim.setpoint_override is None


# ---- telemetry frames -------------------------------------------------------

def test_frame_carries_all_columns():
    session = BridgeSession(short_spec())
    session.tick()
    frame = session.frame(wall_ratio=1.0)
    assert frame["type"] == "frame"
    for name in COLUMNS:
        assert name in frame
    assert frame["mode"] == "loiter"
    assert frame["timescale"] == 1.0
    json.dumps(frame)  # serializable


def test_manual_actuator_echo_in_next_frame():
    session = BridgeSession(short_spec())
    session.apply_command({"type": "mode", "mode": "manual"})
    session.apply_command({"type": "actuators",
                           "values": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                                      0.25, 0.25]})
    session.tick()
    frame = session.frame()
    assert frame["cmd_left_main"] == 0.25
    assert frame["cmd_right_main"] == 0.25


# ---- non-interference -------------------------------------------------------

def test_zero_command_bridge_equals_headless():
    spec = short_spec()
    bridge = BridgeSession(spec)
    headless = SimSession(ScenarioSpec.from_dict(spec.to_dict()))
    for _ in range(250):
        row_bridge = np.array(bridge.tick())
        row_headless = np.array(headless.tick())
        np.testing.assert_array_equal(row_bridge, row_headless)


def test_inflation_command_equals_timeline_event():
    spec = short_spec()
    via_event = SimSession(ScenarioSpec.from_dict(
        dict(spec.to_dict(),
             events=[dict(t=1.0, action="set_inflation", level=0.5)])
    ))
    bridge = BridgeSession(spec)
    rows_event, rows_bridge = [], []
    for i in range(200):
        if i == 50:  # t = 1.0 at 50 Hz
            bridge.apply_command({"type": "inflation", "level": 0.5})
        rows_event.append(via_event.tick())
        rows_bridge.append(bridge.tick())
    np.testing.assert_array_equal(np.array(rows_bridge),
                                  np.array(rows_event))


# ---- server queue -----------------------------------------------------------

class FakeSocket:
    def __init__(self):
        self.sent = []

    async def send_text(self, text):
        self.sent.append(json.loads(text))


def test_server_drains_commands_in_fifo_order():
    async def scenario():
        server = BridgeServer(short_spec())
        sock = FakeSocket()
        await server.submit(sock, {"type": "mode", "mode": "manual"})
        await server.submit(sock, {"type": "actuators",
                                   "values": [2.0] * 8})
        await server.submit(sock, {"type": "bogus"})
        await server.submit(sock, {"type": "pause"})
        await server._drain_commands()
        return server, sock

    server, sock = asyncio.run(scenario())
    assert [a["ok"] for a in sock.sent] == [True, True, False, True]
    assert "clamped" in sock.sent[1]["detail"]
    assert server.session.sim.mode == "manual"
    assert server.session.paused is True


def test_server_broadcast_drops_dead_clients():
    async def scenario():
        server = BridgeServer(short_spec())

        class DeadSocket:
            async def send_text(self, text):
                raise RuntimeError("gone")

        live = FakeSocket()
        server.clients.update({live, DeadSocket()})
        await server._broadcast({"type": "frame"})
        return server, live

    server, live = asyncio.run(scenario())
    assert server.clients == {live}
    assert live.sent == [{"type": "frame"}]


# ---- websocket endpoint -----------------------------------------------------

@pytest.fixture()
def client():
    fastapi_testclient = pytest.importorskip("fastapi.testclient")
    app = create_app(short_spec(), rate=20.0, timescale=50.0)
    with fastapi_testclient.TestClient(app) as client:
        yield client


def recv_until(ws, predicate, limit=200):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if predicate(msg):
            return msg
    raise AssertionError("expected message not received")


def test_websocket_streams_frames(client):
    with client.websocket_connect("/ws") as ws:
        frame = recv_until(ws, lambda m: m["type"] == "frame")
        assert "pos_x_m" in frame


def test_websocket_command_round_trip(client):
    with client.websocket_connect("/ws") as ws:
        recv_until(ws, lambda m: m["type"] == "frame")
        ws.send_text(json.dumps({"type": "mode", "mode": "manual"}))
        ack = recv_until(ws, lambda m: m["type"] == "ack")
        assert ack["ok"] is True
        ws.send_text(json.dumps({"type": "inflation", "level": 0.5}))
        ack = recv_until(ws, lambda m: m["type"] == "ack")
        assert ack["ok"] is True
        frame = recv_until(
            ws, lambda m: m["type"] == "frame"
            and m["inflation_level"] == 0.5
        )
        assert frame["mode"] == "manual"


def test_websocket_rejects_invalid_json(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_text("{not json")
        ack = recv_until(ws, lambda m: m["type"] == "ack")
        assert ack["ok"] is False
        assert "JSON" in ack["detail"]
