"""Global wind (mean + Dryden turbulence) and buoyancy.

Wind is a single time-varying world-frame flow vector, constant in space.
Turbulence follows the MIL-F-8785C low-altitude Dryden model: seeded white
noise shaped by a first-order filter (longitudinal) and two second-order
filters (lateral, vertical), discretized with the bilinear transform. The
discrete input gains are normalized so the stationary output standard
deviation equals the closed-form intensity exactly, independent of dt.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .multibody import GRAVITY, Wrench
from .rotations import quat_rotate

RHO_AIR = 1.225
FT_PER_M = 3.28084
MPS_PER_KNOT = 0.514444

# wind-speed-at-20ft per turbulence magnitude unit; calibration knob, the
# source mapping for "magnitude" is unspecified
KNOTS_PER_MAGNITUDE = 2.0


@dataclass
class WindConfig:
    speed: float = 0.0            # mean wind speed, m/s
    from_deg: float = 0.0         # compass from-direction (0 = north)
    magnitude: float = 0.0        # turbulence scale 0..7
    ref_altitude: float = 50.0    # m, sets Dryden length scales
    seed: int = 0
    knots_per_magnitude: float = KNOTS_PER_MAGNITUDE
    # Filter airspeed is a fixed reference so the gust series does not
    # depend on the vehicle trajectory (reproducible across guidance
    # modes); defaults to the mean wind speed, floored at 1 m/s.
    reference_airspeed: float | None = None

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("wind speed must be non-negative")
        if not 0 <= self.magnitude <= 7:
            raise ValueError("turbulence magnitude must be in [0, 7]")

    @property
    def filter_airspeed(self):
        v = self.reference_airspeed
        if v is None:
            v = self.speed
        return max(1.0, float(v))


def dryden_intensities(magnitude, altitude_m,
                       knots_per_magnitude=KNOTS_PER_MAGNITUDE):
    """MIL-F-8785C low-altitude (sigma_u, sigma_v, sigma_w) in m/s."""
    w20 = magnitude * knots_per_magnitude * MPS_PER_KNOT
    h_ft = max(10.0, altitude_m * FT_PER_M)
    sigma_w = 0.1 * w20
    sigma_u = sigma_w / (0.177 + 0.000823 * h_ft) ** 0.4
    return sigma_u, sigma_u, sigma_w


def dryden_scales(altitude_m):
    """MIL-F-8785C low-altitude (L_u, L_v, L_w) in meters."""
    h_ft = max(10.0, altitude_m * FT_PER_M)
    l_w = h_ft
    l_u = h_ft / (0.177 + 0.000823 * h_ft) ** 1.2
    return l_u / FT_PER_M, l_u / FT_PER_M, l_w / FT_PER_M


def _normalized_biquad(num_s, den_s, dt, sigma):
    """Bilinear-discretize num_s/den_s and scale the numerator so the
    stationary output std under unit white-noise input is sigma."""
    b, a = signal.bilinear(num_s, den_s, fs=1.0 / dt)
    if sigma == 0.0:
        return np.zeros_like(b), a
    # stationary variance = sum of squared impulse response; summing
    # positive terms stays accurate even with poles very close to 1,
    # where the discrete Lyapunov solve turns ill-conditioned
    r = float(np.max(np.abs(np.roots(a))))
    r = min(r, 1.0 - 1e-12)
    n = int(min(max(math.log(1e-16) / (2.0 * math.log(r)), 1024), 5e6))
    impulse = np.zeros(n)
    impulse[0] = 1.0
    var = float(np.sum(signal.lfilter(b, a, impulse) ** 2))
    return b * (sigma / math.sqrt(var)), a


class DrydenState:
    """Shaping-filter memories and RNG state for one gust process triple."""

    def __init__(self, config, dt, airspeed=None, altitude=None):
        self.config = config
        self.dt = float(dt)
        v = airspeed if airspeed is not None else config.filter_airspeed
        h = altitude if altitude is not None else config.ref_altitude
        self.airspeed = max(1.0, float(v))
        self.altitude = float(h)
        self.rng = np.random.default_rng(config.seed)

        sig_u, sig_v, sig_w = dryden_intensities(
            config.magnitude, self.altitude, config.knots_per_magnitude
        )
        l_u, l_v, l_w = dryden_scales(self.altitude)
        a_u = self.airspeed / l_u
        self.ba_u = _normalized_biquad([1.0], [1.0 / a_u, 1.0], self.dt, sig_u)
        self.ba_v = self._second_order(l_v, sig_v)
        self.ba_w = self._second_order(l_w, sig_w)
        self.zi = [np.zeros(max(len(a), len(b)) - 1) for b, a in
                   (self.ba_u, self.ba_v, self.ba_w)]

    def _second_order(self, scale, sigma):
        a = self.airspeed / scale
        # H(s) = (s + a/sqrt(3)) / (s + a)^2, gain normalized afterwards
        num = [1.0, a / math.sqrt(3.0)]
        den = [1.0, 2.0 * a, a * a]
        return _normalized_biquad(num, den, self.dt, sigma)

    def step(self):
        """Advance one sample; returns the gust triple (u, v, w) in m/s.

        Bit-identical to one sample of :meth:`run` (both go through the
        same filter routine and state).
        """
        return self.run(1)[0]

    def run(self, n):
        """Generate n samples at once; identical to n calls of step()."""
        noise = self.rng.standard_normal((n, 3))
        out = np.empty((n, 3))
        for i, (b, a) in enumerate((self.ba_u, self.ba_v, self.ba_w)):
            out[:, i], self.zi[i] = signal.lfilter(b, a, noise[:, i],
                                                   zi=self.zi[i])
        return out


def dryden_step(state, dt, airspeed, altitude, config):
    """Advance the Dryden filters one step of dt and return the gust.

    The filters are parameterized at construction; a change of dt,
    airspeed or altitude re-discretizes them (filter memories reset).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    airspeed = max(1.0, airspeed)
    if (dt != state.dt or airspeed != state.airspeed
            or altitude != state.altitude):
        state.__init__(state.config, dt, airspeed, altitude)
    return state.step()


def compass_to_enu(from_deg, speed):
    """Mean-wind vector in ENU from a compass from-direction."""
    theta = math.radians(from_deg)
    return np.array(
        [-speed * math.sin(theta), -speed * math.cos(theta), 0.0]
    )


@dataclass
class BuoyancySection:
    """Upward force on one hull section; c_b is run-time mutable."""

    body: str
    volume: float
    c_b: float = 1.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if self.volume <= 0:
            raise ValueError("displaced volume must be positive")
        if self.c_b < 0:
            raise ValueError("buoyancy coefficient must be non-negative")

    def force_up(self, rho=RHO_AIR):
        return self.c_b * self.volume * rho * GRAVITY


def buoyancy_wrench(section, rho=RHO_AIR, orientation=None):
    """World-frame wrench of one buoyancy section about its body origin."""
    force = np.array([0.0, 0.0, section.force_up(rho)])
    if orientation is None:
        arm = section.center
    else:
        arm = quat_rotate(orientation, section.center)
    return Wrench(section.body, force=force, torque=np.cross(arm, force))


class Environment:
    """Owns the wind state; advanced once per physics step."""

    def __init__(self, config, dt):
        self.config = config
        self.dt = float(dt)
        self.mean = compass_to_enu(config.from_deg, config.speed)
        self.gust = np.zeros(3)
        self.time = 0.0
        if config.magnitude > 0:
            self.dryden = DrydenState(config, dt)
            self._triad = self._gust_triad()
        else:
            self.dryden = None
            self._triad = np.eye(3)

    def _gust_triad(self):
        """Columns: longitudinal (along mean wind), lateral, vertical-up."""
        if self.config.speed > 0:
            u = self.mean / np.linalg.norm(self.mean)
        else:
            u = np.array([1.0, 0.0, 0.0])
        w = np.array([0.0, 0.0, 1.0])
        v = np.cross(w, u)
        return np.column_stack([u, v, w])

    def step_wind(self):
        """Advance one step; bit-identical to one row of wind_block."""
        return self.wind_block(1)[0]

    def wind_block(self, n):
        """Per-step wind vectors for the next n steps, (n, 3); identical
        to n successive step_wind calls."""
        out = np.tile(self.mean, (n, 1))
        if self.dryden is not None:
            raw = self.dryden.run(n)
            # broadcasted column combination instead of a matmul: rounding
            # is then independent of the block size n
            t = self._triad
            gusts = (raw[:, 0:1] * t[:, 0] + raw[:, 1:2] * t[:, 1]
                     + raw[:, 2:3] * t[:, 2])
            out += gusts
            self.gust = gusts[-1].copy()
        self.time += n * self.dt
        return out

    def wind(self):
        """Current world-frame flow vector (mean + gust)."""
        return self.mean + self.gust

    def wind_at(self, t=None):
        # constant in space; time is advanced by the stepping context
        return self.wind()
