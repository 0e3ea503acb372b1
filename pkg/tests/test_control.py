import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from blimpsim.control import (
    CH_BOTTOM_RUDDER,
    CH_LEFT_ELEVATOR,
    CH_LEFT_MAIN,
    CH_RIGHT_ELEVATOR,
    CH_RIGHT_MAIN,
    CH_THRUST_VECTOR,
    CH_TOP_RUDDER,
    CH_YAW_THRUSTER,
    ControllerGains,
    FlightController,
    NavState,
    PiState,
    climb_cmd,
    correct_setpoint,
    direction_cmd,
    estimate_flow,
    mix,
    rate_loops,
    signed_horizontal_angle,
    thrust_cmd,
    thrust_vector_cmd,
)

GAINS = ControllerGains()

component = st.floats(min_value=-6.0, max_value=6.0, allow_nan=False)
vec3 = st.tuples(component, component, component)


# ---- flow estimation --------------------------------------------------------

def test_estimate_flow_still_air():
    euler = np.array([0.0, 0.0, 0.0])
    np.testing.assert_allclose(
        estimate_flow([2.0, 0.0, 0.0], euler, airspeed=2.0), np.zeros(3),
        atol=1e-12,
    )


def test_estimate_flow_headwind():
    euler = np.array([0.0, 0.0, 0.0])
    np.testing.assert_allclose(
        estimate_flow([2.0, 0.0, 0.0], euler, airspeed=1.5),
        [0.5, 0.0, 0.0], atol=1e-12,
    )


def test_estimate_flow_without_airspeed_sensor():
    euler = np.array([0.0, 0.0, 0.0])
    flow = estimate_flow([2.0, 1.0, 0.0], euler, airspeed=None)
    np.testing.assert_allclose(flow, [0.0, 1.0, 0.0], atol=1e-12)


# ---- setpoint correction ----------------------------------------------------

def test_correct_setpoint_in_band_is_identity():
    corrected, b = correct_setpoint([1.5, 0.0, 0.0], np.zeros(3), GAINS)
    assert b == 1.0
    np.testing.assert_allclose(corrected, [1.5, 0.0, 0.0], atol=1e-12)


def test_correct_setpoint_scales_up_to_v_min():
    corrected, b = correct_setpoint([0.5, 0.0, 0.0], np.zeros(3), GAINS)
    assert b == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(corrected, [1.0, 0.0, 0.0], atol=1e-12)


def test_correct_setpoint_scales_down_to_v_max():
    corrected, b = correct_setpoint([5.0, 0.0, 0.0], np.zeros(3), GAINS)
    assert b == pytest.approx(0.4, abs=1e-12)
    np.testing.assert_allclose(corrected, [2.0, 0.0, 0.0], atol=1e-12)


def test_correct_setpoint_zero_setpoint_faces_the_flow():
    flow = np.array([0.5, 0.0, 0.0])
    corrected, b = correct_setpoint(np.zeros(3), flow, GAINS)
    assert b == 0.0
    np.testing.assert_allclose(corrected, [-1.0, 0.0, 0.0], atol=1e-12)


def test_correct_setpoint_all_zero_uses_heading():
    corrected, b = correct_setpoint(np.zeros(3), np.zeros(3), GAINS,
                                    heading=[0.0, 1.0, 0.0])
    assert b == 0.0
    np.testing.assert_allclose(corrected, [0.0, 1.0, 0.0], atol=1e-12)


def check_setpoint_cases(v_sp, flow, gains):
    corrected, b = correct_setpoint(v_sp, flow, gains)
    norm_sp = np.linalg.norm(v_sp)
    mag = np.linalg.norm(corrected)
    raw = np.linalg.norm(np.asarray(v_sp, float) - flow)
    if norm_sp < 1e-12:
        assert gains.v_min - 1e-9 <= mag <= gains.v_max + 1e-9
        return
    if gains.v_min <= raw <= gains.v_max:
        assert b == 1.0
        np.testing.assert_allclose(corrected, np.asarray(v_sp) - flow,
                                   atol=1e-12)
        return
    limit = gains.v_min if raw < gains.v_min else gains.v_max
    assert b >= 0.0
    air = corrected + flow  # = b * v_sp
    # collinearity with the requested direction when b > 0
    if b > 1e-12:
        cosine = np.dot(air, v_sp) / (np.linalg.norm(air) * norm_sp)
        assert cosine == pytest.approx(1.0, abs=1e-9)
    # either the root hits the limit exactly, or no root existed and the
    # closest-approach scale leaves |corrected| beyond the limit
    a = float(np.dot(v_sp, v_sp))
    bb = float(np.dot(v_sp, flow))
    c = float(np.dot(flow, flow)) - limit * limit
    if bb * bb - a * c >= 0.0 and (bb + math.sqrt(bb * bb - a * c)) / a >= 0:
        assert mag == pytest.approx(limit, abs=1e-9)


def test_correct_setpoint_invariant_sweep(rng):
    for _ in range(20_000):
        v_sp = rng.normal(scale=3.0, size=3)
        flow = rng.normal(scale=2.0, size=3)
        check_setpoint_cases(v_sp, flow, GAINS)


@settings(max_examples=300)
@given(vec3, vec3)
def test_correct_setpoint_property(v_sp, flow):
    check_setpoint_cases(np.array(v_sp), np.array(flow), GAINS)


# ---- outer loops ------------------------------------------------------------

def test_direction_cmd_aligned_is_zero():
    assert direction_cmd([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], GAINS) == 0.0


def test_direction_cmd_left_error_clamps_at_limit():
    gains = ControllerGains(yaw_kp=0.5)
    # setpoint 90 degrees to the left of current air velocity
    cmd = direction_cmd([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], gains)
    assert cmd == pytest.approx(math.radians(10.0), abs=1e-9)


def test_direction_cmd_antiparallel_saturates():
    cmd = direction_cmd([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], GAINS)
    assert abs(cmd) == pytest.approx(GAINS.turn_rate_limit, abs=1e-12)


def test_direction_cmd_degenerate_horizontal_projection():
    assert direction_cmd([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], GAINS) == 0.0
    assert direction_cmd([1.0, 0.0, 0.0], [0.0, 0.0, -1.0], GAINS) == 0.0


@settings(max_examples=200)
@given(vec3, vec3, st.floats(-math.pi, math.pi))
def test_direction_cmd_rotation_equivariant(v_sp, v_air, theta):
    # stay away from the epsilon cutoff and the +/-pi angle branch cut,
    # where rounding legitimately flips the result
    assume(math.hypot(v_sp[0], v_sp[1]) > 2e-3)
    assume(math.hypot(v_air[0], v_air[1]) > 2e-3)
    angle = signed_horizontal_angle(v_air, v_sp)
    assume(abs(abs(angle) - math.pi) > 1e-6)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    base = direction_cmd(np.array(v_sp), np.array(v_air), GAINS)
    rotated = direction_cmd(rot @ np.array(v_sp), rot @ np.array(v_air),
                            GAINS)
    assert rotated == pytest.approx(base, abs=1e-9)


def test_signed_horizontal_angle_sign_convention():
    # counterclockwise (left) positive
    assert signed_horizontal_angle([1, 0, 0], [0, 1, 0]) == pytest.approx(
        math.pi / 2
    )
    assert signed_horizontal_angle([1, 0, 0], [0, -1, 0]) == pytest.approx(
        -math.pi / 2
    )


def test_climb_cmd_proportional_value():
    gains = ControllerGains(climb_kp=0.4, climb_ki=0.0)
    pi = PiState(gains.climb_clamp)
    # vertical error 0.5 m/s
    cmd = climb_cmd([0.0, 0.0, 0.5], np.zeros(3), gains, pi, 0.02)
    assert cmd == pytest.approx(0.2, abs=1e-12)


def test_climb_cmd_zero_error_is_zero():
    pi = PiState(GAINS.climb_clamp)
    assert climb_cmd(np.zeros(3), np.zeros(3), GAINS, pi, 0.02) == 0.0


def test_climb_integrator_pins_at_clamp():
    gains = ControllerGains(climb_kp=0.0, climb_ki=1.0, climb_clamp=0.25)
    pi = PiState(gains.climb_clamp)
    for _ in range(1000):
        climb_cmd([0.0, 0.0, 2.0], np.zeros(3), gains, pi, 0.02)
        assert abs(pi.value) <= gains.climb_clamp + 1e-15
    assert pi.value == pytest.approx(gains.climb_clamp, abs=1e-12)


def test_climb_cmd_respects_pitch_limit():
    pi = PiState(GAINS.climb_clamp)
    cmd = climb_cmd([0.0, 0.0, 10.0], np.zeros(3), GAINS, pi, 0.02)
    assert cmd == pytest.approx(GAINS.pitch_limit, abs=1e-12)


def test_thrust_cmd_value_with_cross_term():
    gains = ControllerGains(thrust_kp=0.3, thrust_ki=0.0,
                            pitch_thrust_kp=0.5)
    pi = PiState(gains.thrust_clamp)
    cmd = thrust_cmd([1.0, 0.0, 0.0], np.zeros(3), 0.2, gains, pi, 0.02)
    assert cmd == pytest.approx(0.4, abs=1e-12)


def test_thrust_cmd_saturates_at_one():
    gains = ControllerGains(thrust_kp=10.0, thrust_ki=0.0)
    pi = PiState(gains.thrust_clamp)
    cmd = thrust_cmd([2.0, 0.0, 0.0], np.zeros(3), 0.0, gains, pi, 0.02)
    assert cmd == 1.0


def test_thrust_cmd_allows_reverse():
    gains = ControllerGains(thrust_kp=0.6, thrust_ki=0.0,
                            pitch_thrust_kp=0.0)
    pi = PiState(gains.thrust_clamp)
    cmd = thrust_cmd(np.zeros(3), [2.0, 0.0, 0.0], 0.0, gains, pi, 0.02)
    assert cmd < 0.0


def test_thrust_vector_cmd_values():
    assert thrust_vector_cmd(0.0, GAINS) == 0.0
    gains = ControllerGains(gamma_kp=2.0)
    assert thrust_vector_cmd(0.3, gains) == pytest.approx(0.6, abs=1e-12)
    gains = ControllerGains(gamma_kp=4.0)
    assert thrust_vector_cmd(0.5, gains) == pytest.approx(math.pi / 2,
                                                          abs=1e-12)
    # vectoring never points backward
    assert thrust_vector_cmd(-0.5, gains) == 0.0


# ---- inner loops and mixing -------------------------------------------------

def fresh_states(gains):
    return {"pitch": PiState(gains.pitch_rate_clamp),
            "yaw": PiState(gains.yaw_rate_clamp)}


def test_rate_loops_all_setpoints_met():
    gains = GAINS
    axes = rate_loops(0.0, 0.0, np.zeros(3), np.zeros(3), gains,
                      fresh_states(gains), 0.02)
    assert axes == (0.0, 0.0)


def test_rate_loops_outer_pitch_hierarchy():
    gains = ControllerGains(pitch_outer_kp=1.0, pitch_rate_kp=1.0,
                            pitch_rate_ki=0.0)
    # pitch error 0.1 rad, zero measured rate: the inner setpoint is
    # 0.1 rad/s and with unit rate gain the axis equals it
    pitch_axis, _ = rate_loops(0.0, 0.1, np.zeros(3), np.zeros(3), gains,
                               fresh_states(gains), 0.02)
    assert pitch_axis == pytest.approx(0.1, abs=1e-12)


def test_rate_loops_integrators_stay_clamped():
    gains = ControllerGains(yaw_rate_ki=50.0, pitch_rate_ki=50.0)
    states = fresh_states(gains)
    for _ in range(500):
        rate_loops(1.0, 0.5, np.zeros(3), np.zeros(3), gains, states, 0.02)
        assert abs(states["yaw"].value) <= gains.yaw_rate_clamp + 1e-15
        assert abs(states["pitch"].value) <= gains.pitch_rate_clamp + 1e-15


def test_mix_zero_in_zero_out():
    np.testing.assert_array_equal(mix(0.0, 0.0, 0.0, 0.0, GAINS),
                                  np.zeros(8))


def test_mix_pitch_axis_maps_to_elevators():
    cmds = mix(0.5, 0.0, 0.0, 0.0, GAINS)
    assert cmds[CH_LEFT_ELEVATOR] == 0.5
    assert cmds[CH_RIGHT_ELEVATOR] == 0.5
    others = np.delete(cmds, [CH_LEFT_ELEVATOR, CH_RIGHT_ELEVATOR])
    np.testing.assert_array_equal(others, np.zeros(6))


def test_mix_yaw_axis_maps_to_rudders_and_thruster():
    cmds = mix(0.0, 0.4, 0.0, 0.0, GAINS)
    assert cmds[CH_TOP_RUDDER] == pytest.approx(0.4)
    assert cmds[CH_BOTTOM_RUDDER] == pytest.approx(0.4)
    assert cmds[CH_YAW_THRUSTER] == pytest.approx(0.4)


def test_mix_thrust_and_gamma_channels():
    cmds = mix(0.0, 0.0, 0.7, math.pi / 4, GAINS)
    assert cmds[CH_LEFT_MAIN] == 0.7
    assert cmds[CH_RIGHT_MAIN] == 0.7
    assert cmds[CH_THRUST_VECTOR] == pytest.approx(0.5)


def test_mix_saturates_channels():
    cmds = mix(5.0, -5.0, 2.0, math.pi, GAINS)
    assert np.all(cmds <= 1.0)
    assert np.all(cmds >= -1.0)


# ---- assembled controller ---------------------------------------------------

def test_controller_is_deterministic():
    def run():
        ctl = FlightController(ControllerGains())
        rng = np.random.default_rng(3)
        out = []
        for _ in range(100):
            nav = NavState(velocity=rng.normal(size=3),
                           euler=rng.normal(scale=0.2, size=3),
                           airspeed=float(rng.uniform(0, 2)))
            gyro = rng.normal(scale=0.1, size=3)
            _, cmds = ctl.update(nav, gyro, rng.normal(size=3), 0.02)
            out.append(cmds)
        return np.stack(out)

    np.testing.assert_array_equal(run(), run())


def test_controller_output_within_saturation(rng):
    ctl = FlightController(ControllerGains())
    for _ in range(200):
        nav = NavState(velocity=rng.normal(scale=3, size=3),
                       euler=rng.normal(scale=0.3, size=3),
                       airspeed=float(rng.uniform(-1, 3)))
        sp, cmds = ctl.update(nav, rng.normal(size=3), rng.normal(size=3),
                              0.02)
        assert np.all(np.abs(cmds) <= 1.0)
        assert 0.0 <= sp.gamma <= math.pi / 2
        assert abs(sp.yaw_rate) <= GAINS.turn_rate_limit + 1e-12


def test_gains_validation():
    with pytest.raises(ValueError):
        ControllerGains(v_min=0.0)
    with pytest.raises(ValueError):
        ControllerGains(v_min=2.0, v_max=1.0)
    with pytest.raises(ValueError):
        ControllerGains(climb_clamp=0.0)


def test_gains_round_trip():
    gains = ControllerGains(yaw_kp=0.7, v_max=3.0)
    again = ControllerGains.from_dict(gains.to_dict())
    assert again == gains
