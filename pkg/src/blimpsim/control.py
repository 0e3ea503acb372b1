"""Cascaded flight controller.

Outer layer: flow (wind) estimation from ground velocity and indicated
airspeed, wind-corrected velocity setpoint, and four controllers deriving
the virtual command axes — pitch setpoint, yaw rate, thrust and thrust
vector angle. Inner layer: PI rate loops on pitch and yaw driven by the
fin-mounted gyro, and a mixing matrix mapping virtual axes onto the 8
actuator channels.

Angle conventions: ENU world, yaw counterclockwise-positive about world z,
pitch positive nose-up. All PI integrators are hard-clamped (anti-windup).
"""

import math
from dataclasses import dataclass, field

import numpy as np

EPS_HORIZONTAL = 1e-3  # m/s, below which direction is undefined

# actuator channel order (frozen)
CH_YAW_THRUSTER = 0
CH_TOP_RUDDER = 1
CH_BOTTOM_RUDDER = 2
CH_LEFT_ELEVATOR = 3
CH_RIGHT_ELEVATOR = 4
CH_THRUST_VECTOR = 5
CH_LEFT_MAIN = 6
CH_RIGHT_MAIN = 7
NUM_CHANNELS = 8
CHANNEL_NAMES = (
    "yaw_thruster", "top_rudder", "bottom_rudder", "left_elevator",
    "right_elevator", "thrust_vector", "left_main", "right_main",
)


@dataclass
class NavState:
    """Controller input snapshot (ground-truth in this simulator)."""

    velocity: np.ndarray                 # world frame, m/s
    euler: np.ndarray                    # roll, pitch, yaw (rad)
    airspeed: float | None = None        # indicated, m/s; None if disabled

    def __post_init__(self):
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.euler = np.asarray(self.euler, dtype=float)


@dataclass
class ControllerGains:
    # outer loops
    yaw_kp: float = 0.4            # rad/s per rad of direction error
    turn_rate_limit: float = math.radians(10.0)
    climb_kp: float = 0.35         # rad per m/s vertical error
    climb_ki: float = 0.06
    climb_clamp: float = 0.25      # rad, integral clamp
    pitch_limit: float = 0.35      # rad, pitch setpoint safety clamp
    thrust_kp: float = 0.6
    thrust_ki: float = 0.25
    thrust_clamp: float = 1.0
    pitch_thrust_kp: float = 1.2   # thrust per rad of pitch setpoint
    gamma_kp: float = 5.0          # thrust vector angle per rad of pitch
    v_min: float = 1.0
    v_max: float = 2.0
    # inner rate loops
    pitch_outer_kp: float = 1.2    # rad/s per rad of pitch error
    pitch_rate_kp: float = 0.8
    pitch_rate_ki: float = 0.2
    pitch_rate_clamp: float = 0.3
    yaw_rate_kp: float = 2.0
    yaw_rate_ki: float = 0.5
    yaw_rate_clamp: float = 1.0
    # first-order low-pass on the rate gyro; the gyro sits on a flexible
    # fin, unfiltered feedback closes a loop around the fin flex mode
    gyro_lpf_hz: float = 2.5
    # mixer weights
    mix_rudder: float = 1.0
    mix_yaw_thruster: float = 1.0
    mix_elevator: float = 1.0
    control_period: float = 0.02

    def __post_init__(self):
        if self.v_min <= 0 or self.v_max <= self.v_min:
            raise ValueError("require 0 < v_min < v_max")
        for name in ("climb_clamp", "thrust_clamp", "pitch_rate_clamp",
                     "yaw_rate_clamp"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Setpoints:
    """Commanded virtual axes plus the quantities that produced them."""

    v_sp: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v_sp_corrected: np.ndarray = field(default_factory=lambda: np.zeros(3))
    b: float = 1.0
    pitch: float = 0.0
    yaw_rate: float = 0.0
    thrust: float = 0.0
    gamma: float = 0.0


@dataclass
class PiState:
    """Clamped integral accumulator."""

    clamp: float
    value: float = 0.0

    def update(self, error, ki, dt):
        self.value = float(
            np.clip(self.value + ki * error * dt, -self.clamp, self.clamp)
        )
        return self.value

    def reset(self):
        self.value = 0.0


def forward_axis(euler):
    """World-frame unit vector along the body forward axis."""
    _, pitch, yaw = euler
    cp = math.cos(pitch)
    return np.array([cp * math.cos(yaw), cp * math.sin(yaw),
                     math.sin(pitch)])


def estimate_flow(velocity, euler, airspeed=None):
    """Estimated wind flow: ground velocity minus forward airspeed rotated
    into the world frame. With no airspeed sensor the forward component of
    the ground velocity substitutes, zeroing the estimated forward flow."""
    fwd = forward_axis(euler)
    if airspeed is None:
        airspeed = float(np.dot(velocity, fwd))
    return np.asarray(velocity, dtype=float) - airspeed * fwd


def correct_setpoint(v_sp, flow, gains, heading=None):
    """Scale the velocity setpoint so the commanded airspeed magnitude
    lies in [v_min, v_max]; returns (corrected air-relative setpoint, b).

    b solves |b*v_sp - flow| = limit (largest non-negative root) when the
    raw air-relative magnitude leaves the band; when no such root exists
    (wind beyond v_max) the closest-approach scale is used.
    """
    v_sp = np.asarray(v_sp, dtype=float)
    flow = np.asarray(flow, dtype=float)
    norm_sp = np.linalg.norm(v_sp)
    if norm_sp < 1e-12:
        flow_mag = np.linalg.norm(flow)
        if flow_mag < 1e-12:
            if heading is None:
                heading = np.array([1.0, 0.0, 0.0])
            return gains.v_min * np.asarray(heading, dtype=float), 0.0
        mag = float(np.clip(flow_mag, gains.v_min, gains.v_max))
        return -flow / flow_mag * mag, 0.0

    rel = v_sp - flow
    mag = np.linalg.norm(rel)
    if gains.v_min <= mag <= gains.v_max:
        return rel, 1.0
    limit = gains.v_min if mag < gains.v_min else gains.v_max

    a = float(np.dot(v_sp, v_sp))
    bb = float(np.dot(v_sp, flow))
    c = float(np.dot(flow, flow)) - limit * limit
    disc = bb * bb - a * c
    if disc >= 0.0:
        b = (bb + math.sqrt(disc)) / a
        if b < 0.0:
            b = max(0.0, bb / a)
    else:
        b = max(0.0, bb / a)
    return b * v_sp - flow, b


def signed_horizontal_angle(from_vec, to_vec):
    """Signed angle (CCW positive) between horizontal projections."""
    fx, fy = from_vec[0], from_vec[1]
    tx, ty = to_vec[0], to_vec[1]
    if math.hypot(fx, fy) < EPS_HORIZONTAL or \
            math.hypot(tx, ty) < EPS_HORIZONTAL:
        return 0.0
    return math.atan2(fx * ty - fy * tx, fx * tx + fy * ty)


def direction_cmd(v_sp_corrected, v_air, gains):
    """Yaw-rate setpoint from horizontal direction error, rate-limited."""
    angle = signed_horizontal_angle(v_air, v_sp_corrected)
    return float(np.clip(gains.yaw_kp * angle, -gains.turn_rate_limit,
                         gains.turn_rate_limit))


def climb_cmd(v_sp_corrected, v_air, gains, pi, dt):
    """Pitch setpoint: PI on vertical air-relative velocity error."""
    error = v_sp_corrected[2] - v_air[2]
    p = gains.climb_kp * error + pi.update(error, gains.climb_ki, dt)
    return float(np.clip(p, -gains.pitch_limit, gains.pitch_limit))


def thrust_cmd(v_sp_corrected, v_air, pitch_sp, gains, pi, dt):
    """Thrust: PI on airspeed magnitude error plus the pitch cross-term."""
    error = np.linalg.norm(v_sp_corrected) - np.linalg.norm(v_air)
    t = (gains.thrust_kp * error + pi.update(error, gains.thrust_ki, dt)
         + gains.pitch_thrust_kp * pitch_sp)
    return float(np.clip(t, -1.0, 1.0))


def thrust_vector_cmd(pitch_sp, gains):
    """Thrust vector angle, 0 (forward) .. pi/2 (upward)."""
    return float(np.clip(gains.gamma_kp * pitch_sp, 0.0, math.pi / 2))


def rate_loops(yaw_rate_sp, pitch_sp, gyro, euler, gains, states, dt):
    """Inner PI loops; gyro = (roll, pitch-up, yaw-ccw) rates of the
    sensor body, deliberately the fin-mounted one."""
    pitch_rate_sp = gains.pitch_outer_kp * (pitch_sp - euler[1])
    pitch_err = pitch_rate_sp - gyro[1]
    pitch_axis = gains.pitch_rate_kp * pitch_err + states["pitch"].update(
        pitch_err, gains.pitch_rate_ki, dt
    )
    yaw_err = yaw_rate_sp - gyro[2]
    yaw_axis = gains.yaw_rate_kp * yaw_err + states["yaw"].update(
        yaw_err, gains.yaw_rate_ki, dt
    )
    return float(np.clip(pitch_axis, -1, 1)), float(np.clip(yaw_axis, -1, 1))


def mix(pitch_axis, yaw_axis, thrust_axis, gamma, gains):
    """Map virtual axes onto the 8 actuator channels, saturating each.

    No differential main thrust: both main thrusters carry the thrust
    axis; gamma rides its own servo channel normalized to [0, 1]."""
    cmds = np.zeros(NUM_CHANNELS)
    cmds[CH_YAW_THRUSTER] = gains.mix_yaw_thruster * yaw_axis
    cmds[CH_TOP_RUDDER] = gains.mix_rudder * yaw_axis
    cmds[CH_BOTTOM_RUDDER] = gains.mix_rudder * yaw_axis
    cmds[CH_LEFT_ELEVATOR] = gains.mix_elevator * pitch_axis
    cmds[CH_RIGHT_ELEVATOR] = gains.mix_elevator * pitch_axis
    cmds[CH_THRUST_VECTOR] = gamma / (math.pi / 2)
    cmds[CH_LEFT_MAIN] = thrust_axis
    cmds[CH_RIGHT_MAIN] = thrust_axis
    return np.clip(cmds, -1.0, 1.0)


class FlightController:
    """Owns the PI states; consumes NavState snapshots, emits commands."""

    def __init__(self, gains=None):
        self.gains = gains or ControllerGains()
        self.reset()

    def reset(self):
        g = self.gains
        self.climb_pi = PiState(g.climb_clamp)
        self.thrust_pi = PiState(g.thrust_clamp)
        self.rate_states = {
            "pitch": PiState(g.pitch_rate_clamp),
            "yaw": PiState(g.yaw_rate_clamp),
        }
        self.gyro_filt = np.zeros(3)

    def _filter_gyro(self, fin_gyro, dt):
        g = self.gains
        if g.gyro_lpf_hz <= 0:
            self.gyro_filt = np.asarray(fin_gyro, dtype=float)
        else:
            tau = 1.0 / (2.0 * math.pi * g.gyro_lpf_hz)
            a = dt / (tau + dt)
            self.gyro_filt = self.gyro_filt + a * (fin_gyro - self.gyro_filt)
        return self.gyro_filt

    def update(self, nav, fin_gyro, v_sp, dt):
        """One control tick: returns (Setpoints, actuator command array)."""
        g = self.gains
        flow = estimate_flow(nav.velocity, nav.euler, nav.airspeed)
        v_air = nav.velocity - flow
        heading = forward_axis(nav.euler)
        v_sp_corr, b = correct_setpoint(v_sp, flow, g, heading=heading)

        yaw_rate = direction_cmd(v_sp_corr, v_air, g)
        pitch = climb_cmd(v_sp_corr, v_air, g, self.climb_pi, dt)
        thrust = thrust_cmd(v_sp_corr, v_air, pitch, g, self.thrust_pi, dt)
        gamma = thrust_vector_cmd(pitch, g)

        gyro = self._filter_gyro(np.asarray(fin_gyro, dtype=float), dt)
        pitch_axis, yaw_axis = rate_loops(
            yaw_rate, pitch, gyro, nav.euler, g, self.rate_states, dt
        )
        cmds = mix(pitch_axis, yaw_axis, thrust, gamma, g)
        sp = Setpoints(
            v_sp=np.asarray(v_sp, dtype=float),
            v_sp_corrected=v_sp_corr,
            b=b,
            pitch=pitch,
            yaw_rate=yaw_rate,
            thrust=thrust,
            gamma=gamma,
        )
        return sp, cmds
