import numpy as np
import pytest

from blimpsim.vehicle import (
    DanglingReference,
    OutOfRange,
    SchemaError,
    Vehicle,
    load_vehicle,
    reference_blimp_document,
)


def minimal_document():
    return {
        "name": "minimal",
        "bodies": [
            {"name": "hull", "mass": 4.0,
             "inertia": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
             "position": [0.0, 0.0, 0.0]},
            {"name": "fin", "mass": 0.5,
             "inertia": [[0.01, 0, 0], [0, 0.01, 0], [0, 0, 0.01]],
             "position": [-2.0, 0.0, 0.0]},
        ],
        "joints": [
            {"parent": "hull", "child": "fin", "anchor": [-1.5, 0, 0],
             "k_lin": 500.0, "c_lin": 10.0, "k_rot": 50.0, "c_rot": 1.0,
             "hull_attachment": True},
        ],
        "aero": [
            {"body": "hull", "kind": "quasi-cylindrical", "area": 1.0,
             "c_l0": 0.2, "c_d0": 0.1, "c_d1": 1.0, "alpha_stall": 0.3},
        ],
        "buoyancy": [
            {"body": "hull", "volume": 3.0, "c_b": 0.9},
        ],
        "actuators": [
            {"type": "servo", "name": "fin_servo", "parent": "hull",
             "child": "fin", "axis": 2, "max_angle": 0.5,
             "rate_limit": 2.0, "channel": 1},
            {"type": "thruster", "name": "main", "body": "hull",
             "axis": [1.0, 0.0, 0.0], "max_thrust": 15.0, "channel": 6},
        ],
        "sensors": {"imu_body": "fin", "reference_body": "hull"},
        "gains": {},
    }


def test_reference_blimp_mass_and_length(reference_vehicle):
    report = reference_vehicle.trim_report()
    assert report["total_mass"] == pytest.approx(10.0, rel=1e-6)
    # span of body positions along x is in the 5 m class
    span = np.ptp(reference_vehicle.world.pos[:, 0])
    assert 3.5 < span < 6.0


def test_reference_blimp_is_slightly_heavy(reference_vehicle):
    report = reference_vehicle.trim_report()
    assert report["net_vertical_force"] < 0.0
    assert report["total_buoyancy"] > 0.9 * report["total_weight"]


def test_dangling_joint_reference():
    doc = minimal_document()
    doc["joints"][0]["child"] = "nosuchbody"
    with pytest.raises(DanglingReference) as err:
        Vehicle(doc)
    assert "nosuchbody" in str(err.value)


def test_empty_body_list_is_schema_error():
    doc = minimal_document()
    doc["bodies"] = []
    with pytest.raises(SchemaError):
        Vehicle(doc)


def test_unknown_aero_body():
    doc = minimal_document()
    doc["aero"][0]["body"] = "ghost"
    with pytest.raises(DanglingReference):
        Vehicle(doc)


def test_document_round_trip(reference_document):
    vehicle = load_vehicle(reference_document)
    again = load_vehicle(vehicle.to_document())
    assert again.trim_report() == vehicle.trim_report()
    np.testing.assert_array_equal(again.world.pos, vehicle.world.pos)
    np.testing.assert_array_equal(again.world.k_rot, vehicle.world.k_rot)


def test_set_inflation_restores_nominal():
    vehicle = Vehicle(minimal_document())
    nominal_k = vehicle.world.k_rot.copy()
    nominal_cb = vehicle.buoy_cb.copy()
    vehicle.set_inflation(0.4)
    assert not np.allclose(vehicle.world.k_rot, nominal_k)
    vehicle.set_inflation(1.0)
    np.testing.assert_array_equal(vehicle.world.k_rot, nominal_k)
    np.testing.assert_array_equal(vehicle.buoy_cb, nominal_cb)


def test_set_inflation_idempotent():
    vehicle = Vehicle(minimal_document())
    vehicle.set_inflation(0.6)
    k = vehicle.world.k_rot.copy()
    cb = vehicle.buoy_cb.copy()
    vehicle.set_inflation(0.6)
    np.testing.assert_array_equal(vehicle.world.k_rot, k)
    np.testing.assert_array_equal(vehicle.buoy_cb, cb)


def test_set_inflation_out_of_range():
    vehicle = Vehicle(minimal_document())
    with pytest.raises(OutOfRange):
        vehicle.set_inflation(1.5)
    with pytest.raises(OutOfRange):
        vehicle.set_inflation(-0.1)


def test_set_deflation_scales_stiffness_and_buoyancy():
    vehicle = Vehicle(minimal_document())
    k0 = vehicle.world.k_rot[0].copy()
    cb0 = vehicle.buoy_cb[0]
    vehicle.set_deflation(free_play=0.14, stiffness_scale=0.2,
                          buoyancy_scale=0.95)
    np.testing.assert_allclose(vehicle.world.k_rot[0], 0.2 * k0)
    assert vehicle.buoy_cb[0] == pytest.approx(0.95 * cb0)
    np.testing.assert_allclose(vehicle.world.free_rot[0],
                               np.full(3, 0.14))
    with pytest.raises(OutOfRange):
        vehicle.set_deflation(stiffness_scale=-1.0)


def test_servo_slew_rate_limit():
    vehicle = Vehicle(minimal_document())
    out_f = np.zeros((2, 3))
    out_t = np.zeros((2, 3))
    cmds = np.zeros(8)
    cmds[1] = 1.0  # target angle 0.5 rad, rate 2 rad/s
    vehicle.apply_actuators(cmds, 0.1, out_f, out_t)
    servo = vehicle.servos[0]
    assert servo.angle == pytest.approx(0.2, abs=1e-12)
    assert vehicle.world.rest_rot[servo.joint_index, servo.axis] \
        == pytest.approx(0.2, abs=1e-12)
    vehicle.apply_actuators(cmds, 0.1, out_f, out_t)
    assert servo.angle == pytest.approx(0.4, abs=1e-12)
    vehicle.apply_actuators(cmds, 0.1, out_f, out_t)
    assert servo.angle == pytest.approx(0.5, abs=1e-12)  # target reached


def test_thruster_force_scaling():
    vehicle = Vehicle(minimal_document())
    out_f = np.zeros((2, 3))
    out_t = np.zeros((2, 3))
    cmds = np.zeros(8)
    cmds[6] = 1.0
    vehicle.apply_actuators(cmds, 0.02, out_f, out_t)
    np.testing.assert_allclose(out_f[0], [15.0, 0.0, 0.0], atol=1e-12)
    out_f[:] = 0.0
    cmds[6] = -0.5
    vehicle.apply_actuators(cmds, 0.02, out_f, out_t)
    np.testing.assert_allclose(out_f[0], [-7.5, 0.0, 0.0], atol=1e-12)


def test_zero_commands_zero_thrust():
    vehicle = Vehicle(minimal_document())
    out_f = np.zeros((2, 3))
    out_t = np.zeros((2, 3))
    vehicle.apply_actuators(np.zeros(8), 0.02, out_f, out_t)
    np.testing.assert_array_equal(out_f, np.zeros((2, 3)))
    np.testing.assert_array_equal(out_t, np.zeros((2, 3)))


def test_read_sensors_at_rest():
    vehicle = Vehicle(minimal_document())
    nav, fin_gyro = vehicle.read_sensors(np.zeros(3))
    np.testing.assert_allclose(nav.velocity, np.zeros(3))
    np.testing.assert_allclose(nav.euler, np.zeros(3), atol=1e-12)
    assert nav.airspeed == 0.0
    np.testing.assert_allclose(fin_gyro, np.zeros(3))


def test_read_sensors_airspeed_is_forward_component():
    vehicle = Vehicle(minimal_document())
    ref = vehicle.reference_index
    vehicle.world.vel[ref] = [2.0, 1.0, 0.0]
    nav, _ = vehicle.read_sensors(np.array([0.5, 0.0, 0.0]))
    assert nav.airspeed == pytest.approx(1.5, abs=1e-12)


def test_fin_gyro_tracks_imu_body():
    vehicle = Vehicle(minimal_document())
    vehicle.world.omega[vehicle.imu_index] = [0.1, 0.2, 0.3]
    _, fin_gyro = vehicle.read_sensors(np.zeros(3))
    # reported as (roll, pitch-up, yaw-ccw) of the sensor body
    np.testing.assert_allclose(fin_gyro, [0.1, -0.2, 0.3], atol=1e-12)


def test_airspeed_sensor_can_be_disabled():
    doc = minimal_document()
    doc["sensors"]["airspeed_enabled"] = False
    vehicle = Vehicle(doc)
    nav, _ = vehicle.read_sensors(np.zeros(3))
    assert nav.airspeed is None


def test_load_vehicle_from_json_string(reference_document):
    import json

    vehicle = load_vehicle(json.dumps(reference_document))
    assert vehicle.trim_report()["total_mass"] == pytest.approx(10.0,
                                                                rel=1e-6)


def test_unknown_actuator_type():
    doc = minimal_document()
    doc["actuators"][0]["type"] = "rocket"
    with pytest.raises(SchemaError):
        Vehicle(doc)


def test_bad_channel_rejected():
    doc = minimal_document()
    doc["actuators"][1]["channel"] = 9
    with pytest.raises(SchemaError):
        Vehicle(doc)
