"""Headless scenario runner: wires wind, vehicle, control and guidance,
executes a timed event script and persists telemetry.

The stepping core lives in :class:`SimSession` so the live service can
share it. Runs are fully deterministic: equal spec and seed produce
byte-identical telemetry files. Telemetry is written at the control rate
as CSV with a frozen column order; summaries are JSON documents.
"""

import copy
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from . import fastpath
from .control import (
    NUM_CHANNELS,
    FlightController,
    Setpoints,
)
from .environment import RHO_AIR, Environment, WindConfig
from .guidance import LoiterSpec, PathFollower, PathSpec, loiter_setpoint
from .multibody import GRAVITY, NonFiniteState
from .rotations import quat_rotate
from .vehicle import load_vehicle, reference_blimp_document

MODES = ("manual", "loiter", "path")

# frozen telemetry column order; names carry units
COLUMNS = (
    "t_s",
    "pos_x_m", "pos_y_m", "pos_z_m",
    "roll_rad", "pitch_rad", "yaw_rad",
    "vel_x_mps", "vel_y_mps", "vel_z_mps",
    "airvel_x_mps", "airvel_y_mps", "airvel_z_mps",
    "airspeed_mps",
    "wind_x_mps", "wind_y_mps", "wind_z_mps",
    "vsp_x_mps", "vsp_y_mps", "vsp_z_mps",
    "vspc_x_mps", "vspc_y_mps", "vspc_z_mps",
    "b_scale",
    "sp_pitch_rad", "sp_yaw_rate_radps", "sp_thrust_norm", "sp_gamma_rad",
    "cmd_yaw_thruster", "cmd_top_rudder", "cmd_bottom_rudder",
    "cmd_left_elevator", "cmd_right_elevator", "cmd_thrust_vector",
    "cmd_left_main", "cmd_right_main",
    "gyro_roll_radps", "gyro_pitch_radps", "gyro_yaw_radps",
    "target_x_m", "target_y_m", "target_z_m",
    "cross_track_m",
    "inflation_level",
)

EVENT_ACTIONS = ("set_inflation", "set_deflation", "wind", "mode",
                 "setpoint")


class SpecError(ValueError):
    """Scenario specification failed validation."""


@dataclass
class ScenarioSpec:
    """Everything needed to reproduce one run."""

    name: str = "scenario"
    vehicle: dict | None = None        # None = packaged reference blimp
    wind: dict = field(default_factory=dict)
    mode: str = "loiter"
    loiter: dict = field(default_factory=dict)
    path: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    duration: float = 60.0
    dt: float = 0.001
    control_rate: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise SpecError("duration must be positive")
        if self.dt <= 0 or self.control_rate <= 0:
            raise SpecError("dt and control_rate must be positive")
        if self.mode not in MODES:
            raise SpecError(f"unknown mode {self.mode!r}")
        times = [float(e.get("t", 0.0)) for e in self.events]
        if times != sorted(times):
            raise SpecError("events must be time-ordered")
        for e in self.events:
            if e.get("action") not in EVENT_ACTIONS:
                raise SpecError(f"unknown event action {e.get('action')!r}")
        steps = self.control_period / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise SpecError("control period must be a multiple of dt")

    @property
    def control_period(self):
        return 1.0 / self.control_rate

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return copy.deepcopy(self.__dict__)


def presets():
    """Shipped scenario presets keyed by name."""
    square = [[0.0, 0.0, 0.0], [40.0, 0.0, 0.0],
              [40.0, 40.0, 0.0], [0.0, 40.0, 0.0]]
    # presets use the projection form of the cross-track correction;
    # the literal form diverges on long segments (see guidance docstring)
    sq_path = dict(waypoints=square, speed=2.0, projected_correction=True,
                   acceptance_radius=14.0, gain=0.2)
    deflate = [dict(t=150.0, action="set_deflation", free_play=0.14,
                    offset=0.0, stiffness_scale=0.2, buoyancy_scale=0.95)]
    return {
        "exp2-loiter": ScenarioSpec(
            name="exp2-loiter", mode="loiter",
            loiter=dict(hold_position=[20.0, 0.0, 0.0], gain=0.06),
            duration=300.0, seed=0,
        ),
        "exp3-path": ScenarioSpec(
            name="exp3-path", mode="path",
            path=sq_path,
            duration=420.0, seed=0,
        ),
        "exp4-wind-loiter": ScenarioSpec(
            name="exp4-wind-loiter", mode="loiter",
            loiter=dict(hold_position=[20.0, 0.0, 0.0], gain=0.06),
            wind=dict(speed=1.5, from_deg=135.0, magnitude=3.0),
            duration=300.0, seed=7,
        ),
        "exp4-wind-path": ScenarioSpec(
            name="exp4-wind-path", mode="path",
            path=sq_path,
            wind=dict(speed=1.5, from_deg=135.0, magnitude=3.0),
            duration=420.0, seed=7,
        ),
        "exp5-deflate-loiter": ScenarioSpec(
            name="exp5-deflate-loiter", mode="loiter",
            loiter=dict(hold_position=[20.0, 0.0, 0.0], gain=0.06),
            wind=dict(speed=0.5, from_deg=90.0, magnitude=1.0),
            events=deflate, duration=300.0, seed=3,
        ),
        "exp5-deflate-path": ScenarioSpec(
            name="exp5-deflate-path", mode="path",
            path=sq_path,
            wind=dict(speed=0.5, from_deg=90.0, magnitude=1.0),
            events=[dict(deflate[0], t=210.0)], duration=420.0, seed=3,
        ),
        "tune": ScenarioSpec(
            name="tune", mode="loiter",
            loiter=dict(hold_position=[20.0, 0.0, 0.0], gain=0.06),
            duration=60.0, seed=0,
        ),
    }


class SimSession:
    """One live simulation: vehicle + wind + controller + guidance.

    Owns all mutable state; advance it one control tick at a time with
    :meth:`tick`. External mutation (mode, setpoint, wind, inflation,
    manual actuator values) happens between ticks only.
    """

    def __init__(self, spec):
        self.spec = spec
        doc = spec.vehicle if spec.vehicle is not None \
            else reference_blimp_document()
        self.vehicle = load_vehicle(doc)
        self.world = self.vehicle.world
        wind_cfg = dict(spec.wind)
        wind_cfg.setdefault("seed", spec.seed)
        self.env = Environment(WindConfig(**wind_cfg), spec.dt)
        self.controller = FlightController(self.vehicle.gains)
        self.mode = spec.mode
        self.manual_cmds = np.zeros(NUM_CHANNELS)
        self.setpoint_override = None
        self.time = 0.0
        self.tick_index = 0
        self.steps_per_tick = int(round(spec.control_period / spec.dt))
        self._pending_events = list(spec.events)
        self._build_guidance()
        self._thr_body = np.array(
            [t.body_index for t in self.vehicle.thrusters], dtype=np.int64
        )
        self._thr_axis = np.stack(
            [t.axis for t in self.vehicle.thrusters]
        ) if self.vehicle.thrusters else np.zeros((0, 3))
        self._scratch_f = np.zeros((len(self.world.mass), 3))
        self._scratch_t = np.zeros((len(self.world.mass), 3))
        self.use_fastpath = fastpath.available

    def _build_guidance(self):
        ref = self.vehicle.reference_index
        start = self.world.pos[ref].copy()
        loiter_cfg = dict(self.spec.loiter)
        loiter_cfg.setdefault("hold_position", start)
        self.loiter = LoiterSpec(**loiter_cfg)
        if self.spec.path:
            self.follower = PathFollower(PathSpec(**self.spec.path))
        else:
            self.follower = None
        if self.mode == "path" and self.follower is None:
            raise SpecError("path mode requires path parameters")

    # ---- external mutation (between ticks) ---------------------------------

    def set_mode(self, mode):
        if mode not in MODES:
            raise SpecError(f"unknown mode {mode!r}")
        if mode == "path" and self.follower is None:
            raise SpecError("path mode requires path parameters")
        self.mode = mode
        self.controller.reset()

    def set_wind(self, **changes):
        cfg = self.env.config
        fields = dict(
            speed=cfg.speed, from_deg=cfg.from_deg,
            magnitude=cfg.magnitude, ref_altitude=cfg.ref_altitude,
            seed=cfg.seed, knots_per_magnitude=cfg.knots_per_magnitude,
            reference_airspeed=cfg.reference_airspeed,
        )
        fields.update(changes)
        self.env = Environment(WindConfig(**fields), self.spec.dt)

    def apply_event(self, event):
        action = event["action"]
        if action == "set_inflation":
            self.vehicle.set_inflation(float(event["level"]))
        elif action == "set_deflation":
            self.vehicle.set_deflation(
                free_play=float(event.get("free_play", 0.0)),
                offset=float(event.get("offset", 0.0)),
                stiffness_scale=float(event.get("stiffness_scale", 1.0)),
                buoyancy_scale=float(event.get("buoyancy_scale", 1.0)),
            )
        elif action == "wind":
            keys = ("speed", "from_deg", "magnitude", "ref_altitude",
                    "seed", "reference_airspeed")
            self.set_wind(**{k: event[k] for k in keys if k in event})
        elif action == "mode":
            self.set_mode(event["mode"])
        elif action == "setpoint":
            self.setpoint_override = np.asarray(event["v"], dtype=float)
        else:
            raise SpecError(f"unknown event action {action!r}")

    # ---- stepping -----------------------------------------------------------

    def _guidance_setpoint(self, position):
        if self.setpoint_override is not None:
            return self.setpoint_override, self.loiter.hold_position
        if self.mode == "loiter":
            return (loiter_setpoint(position, self.loiter),
                    self.loiter.hold_position)
        sp = self.follower.setpoint(position, t=self.time)
        _, seg_end = self.follower.spec.segment(self.follower.segment_index)
        return sp, seg_end

    def _cross_track(self, position):
        """Distance to the nearest point of the closed path circuit; in
        loiter mode, distance to the hold position."""
        if self.mode == "path" and self.follower is not None:
            spec = self.follower.spec
            best = math.inf
            for i in range(spec.num_segments):
                p0, p1 = spec.segment(i)
                seg = p1 - p0
                s = np.dot(position - p0, seg) / np.dot(seg, seg)
                proj = p0 + np.clip(s, 0.0, 1.0) * seg
                best = min(best, float(np.linalg.norm(position - proj)))
            return best
        return float(np.linalg.norm(position - self.loiter.hold_position))

    def tick(self):
        """One control period: sense, decide, actuate, integrate.

        Returns the telemetry row (tuple in COLUMNS order)."""
        while self._pending_events and \
                self._pending_events[0].get("t", 0.0) <= self.time + 1e-9:
            self.apply_event(self._pending_events.pop(0))

        v = self.vehicle
        w = self.world
        wind_now = self.env.wind()
        nav, fin_gyro = v.read_sensors(wind_now)
        ref_pos = w.pos[v.reference_index]

        if self.mode == "manual":
            cmds = np.clip(self.manual_cmds, -1.0, 1.0).copy()
            sp = Setpoints()
            target = ref_pos.copy()
        else:
            v_sp, target = self._guidance_setpoint(ref_pos)
            sp, cmds = self.controller.update(
                nav, fin_gyro, v_sp, self.spec.control_period
            )

        row = self._row(nav, fin_gyro, sp, cmds, wind_now, ref_pos, target)

        # actuate: servos slew once per tick, thrust held over the block
        self._scratch_f[:] = 0.0
        self._scratch_t[:] = 0.0
        v.apply_actuators(cmds, self.spec.control_period,
                          self._scratch_f, self._scratch_t)
        clipped = np.clip(cmds, -1.0, 1.0)
        thr_force = np.stack([
            t.scale * clipped[t.channel] * t.max_thrust * t.axis
            for t in v.thrusters
        ]) if v.thrusters else np.zeros((0, 3))

        wind_block = self.env.wind_block(self.steps_per_tick)
        self._advance(wind_block, thr_force)
        self.tick_index += 1
        self.time = self.tick_index * self.spec.control_period
        return row

    def _advance(self, wind_block, thr_force):
        v = self.vehicle
        w = self.world
        dt = self.spec.dt
        if self.use_fastpath:
            buoy_force = v.buoy_cb * v.buoy_volume * RHO_AIR * GRAVITY
            done = fastpath.run_steps(
                dt, w.pos, w.quat, w.vel, w.omega, w.mass, w.inertia,
                w.inv_inertia, w.jp, w.jc, w.j_pa, w.j_ca, w.j_pq, w.j_cq,
                w.k_lin, w.c_lin, w.k_rot, w.c_rot, w.free_lin, w.free_rot,
                w.rest_rot, v.aero_body, v.aero_cyl, v.aero_area,
                v.aero_cl0, v.aero_cd0, v.aero_cd1, v.aero_stall, v.aero_kq,
                v.aero_offset, v.aero_quat, v.buoy_body, buoy_force,
                v.buoy_center, self._thr_body, thr_force, wind_block,
            )
            w.time += done * dt
            if done < len(wind_block):
                raise NonFiniteState(
                    f"non-finite body state at t={w.time:.6f} s; "
                    "reduce dt or joint stiffness"
                )
        else:
            for k in range(len(wind_block)):
                self._scratch_f[:] = 0.0
                self._scratch_t[:] = 0.0
                v.environment_forces(wind_block[k], self._scratch_f,
                                     self._scratch_t)
                for i, bi in enumerate(self._thr_body):
                    self._scratch_f[bi] += quat_rotate(
                        w.quat[bi], thr_force[i]
                    )
                w.step_arrays(dt, self._scratch_f, self._scratch_t)

    def _row(self, nav, fin_gyro, sp, cmds, wind, ref_pos, target):
        airvel = nav.velocity - wind
        airspeed = nav.airspeed if nav.airspeed is not None else math.nan
        return (
            self.time,
            ref_pos[0], ref_pos[1], ref_pos[2],
            nav.euler[0], nav.euler[1], nav.euler[2],
            nav.velocity[0], nav.velocity[1], nav.velocity[2],
            airvel[0], airvel[1], airvel[2],
            airspeed,
            wind[0], wind[1], wind[2],
            sp.v_sp[0], sp.v_sp[1], sp.v_sp[2],
            sp.v_sp_corrected[0], sp.v_sp_corrected[1], sp.v_sp_corrected[2],
            sp.b,
            sp.pitch, sp.yaw_rate, sp.thrust, sp.gamma,
            cmds[0], cmds[1], cmds[2], cmds[3], cmds[4], cmds[5],
            cmds[6], cmds[7],
            fin_gyro[0], fin_gyro[1], fin_gyro[2],
            target[0], target[1], target[2],
            self._cross_track(ref_pos),
            self.vehicle.inflation_level,
        )


def run(spec, out_dir=None):
    """Execute a scenario; returns (telemetry array, summary dict).

    When ``out_dir`` is given, writes ``<name>.csv``, ``<name>.summary.json``
    and ``<name>.spec.json`` into it.
    """
    session = SimSession(spec)
    n_ticks = int(round(spec.duration * spec.control_rate))
    rows = np.empty((n_ticks, len(COLUMNS)))
    for i in range(n_ticks):
        rows[i] = session.tick()

    summary = summarize_array(rows, control_rate=spec.control_rate)
    summary["scenario"] = spec.name
    summary["seed"] = spec.seed
    if spec.mode == "path" and session.follower is not None:
        summary["waypoint_captures"] = [
            [float(t), int(i)] for t, i in session.follower.captures
        ]

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, spec.name)
        write_csv(base + ".csv", rows)
        with open(base + ".summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(base + ".spec.json", "w") as fh:
            json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rows, summary


def write_csv(path, rows):
    with open(path, "w") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.10g}" for x in row) + "\n")


def read_csv(path):
    """Telemetry array from a CSV written by :func:`write_csv`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != COLUMNS:
            raise SpecError(f"{path}: unexpected telemetry columns")
        return np.loadtxt(fh, delimiter=",", ndmin=2)


def _col(rows, name):
    return rows[:, COLUMNS.index(name)]


def _welch_peak(series, fs):
    """(peak frequency Hz, peak power) of a Welch periodogram; DC excluded."""
    nper = min(len(series), 512)
    freqs, psd = signal.welch(series, fs=fs, nperseg=nper)
    if len(psd) < 2:
        return 0.0, 0.0
    i = 1 + int(np.argmax(psd[1:]))
    return float(freqs[i]), float(psd[i])


def summarize_array(rows, control_rate=50.0):
    """Summary metrics for a telemetry array (frozen column order)."""
    if len(rows) == 0:
        raise SpecError("empty telemetry log")
    pos = rows[:, 1:4]
    target = np.column_stack(
        [_col(rows, "target_x_m"), _col(rows, "target_y_m"),
         _col(rows, "target_z_m")]
    )
    pos_err = np.linalg.norm(pos - target, axis=1)
    alt_err = _col(rows, "target_z_m") - _col(rows, "pos_z_m")
    airspeed = _col(rows, "airspeed_mps")
    if np.any(np.isnan(airspeed)):  # airspeed sensor disabled
        airspeed = np.linalg.norm(
            rows[:, COLUMNS.index("airvel_x_mps"):
                 COLUMNS.index("airvel_z_mps") + 1], axis=1)
    cross = _col(rows, "cross_track_m")

    summary = {
        "duration": float(rows[-1, 0]),
        "samples": int(len(rows)),
        "position_error_rms": float(np.sqrt(np.mean(pos_err**2))),
        "altitude_error_rms": float(np.sqrt(np.mean(alt_err**2))),
        "altitude_error_std": float(np.std(alt_err)),
        "mean_airspeed": float(np.mean(airspeed)),
        "cross_track_rms": float(np.sqrt(np.mean(cross**2))),
    }

    # pre/post split at the first inflation-level change
    inflation = _col(rows, "inflation_level")
    change = np.nonzero(np.diff(inflation) != 0.0)[0]
    split = int(change[0] + 1) if len(change) else None
    pitch_rate = _col(rows, "gyro_pitch_radps")
    yaw_rate = _col(rows, "gyro_yaw_radps")
    if split is not None and 0 < split < len(rows):
        pre, post = slice(0, split), slice(split, None)
        summary["deflation_time"] = float(rows[split, 0])
        summary["altitude_error_std_pre"] = float(np.std(alt_err[pre]))
        summary["altitude_error_std_post"] = float(np.std(alt_err[post]))
        for name, series in (("pitch_rate", pitch_rate),
                             ("fin_gyro_yaw", yaw_rate)):
            f_pre, p_pre = _welch_peak(series[pre], control_rate)
            f_post, p_post = _welch_peak(series[post], control_rate)
            summary[f"{name}_peak_hz_pre"] = f_pre
            summary[f"{name}_peak_power_pre"] = p_pre
            summary[f"{name}_peak_hz_post"] = f_post
            summary[f"{name}_peak_power_post"] = p_post
    else:
        f, p = _welch_peak(pitch_rate, control_rate)
        summary["pitch_rate_peak_hz"] = f
        summary["pitch_rate_peak_power"] = p
        f, p = _welch_peak(yaw_rate, control_rate)
        summary["fin_gyro_yaw_peak_hz"] = f
        summary["fin_gyro_yaw_peak_power"] = p
    return summary


def summarize(path, control_rate=None):
    """Summary metrics for a telemetry CSV file."""
    rows = read_csv(path)
    if control_rate is None:
        if len(rows) > 1:
            control_rate = 1.0 / (rows[1, 0] - rows[0, 0])
        else:
            control_rate = 50.0
    return summarize_array(rows, control_rate=control_rate)


def spectral_emergence(pre, post, fs, f_min=0.0):
    """(frequency, gain dB) of the strongest post/pre PSD ratio.

    Both series are Welch-estimated on a common frequency grid; the ratio
    is evaluated where the post spectrum peaks locally above ``f_min``.
    """
    nper = min(len(pre), len(post), 512)
    freqs, psd_pre = signal.welch(pre, fs=fs, nperseg=nper)
    _, psd_post = signal.welch(post, fs=fs, nperseg=nper)
    mask = freqs > f_min
    ratio = np.where(mask, psd_post / np.maximum(psd_pre, 1e-300), 0.0)
    i = int(np.argmax(ratio))
    gain_db = 10.0 * math.log10(max(ratio[i], 1e-300))
    return float(freqs[i]), gain_db
