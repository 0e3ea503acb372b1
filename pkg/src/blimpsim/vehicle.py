"""Vehicle description loading, blimp assembly and run-time services.

A vehicle document is a JSON object with top-level keys ``bodies``,
``joints``, ``aero``, ``buoyancy``, ``actuators``, ``sensors`` and
``gains`` (SI units throughout). Joint anchors may be given either as a
shared vehicle-frame point (``anchor``) or explicitly per body. Joints
flagged ``hull_attachment`` are the ones softened by deflation.

The inflation service scales hull-attachment joint stiffness/damping,
free-play and buoyancy coefficients between physics steps; nominal values
are retained so full inflation restores them bitwise.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import aero as aeromod
from .control import ControllerGains, NUM_CHANNELS
from .environment import RHO_AIR, BuoyancySection
from .multibody import GRAVITY, BodyPrimitive, BodyState, JointSpec, World
from .rotations import (
    cross3,
    heading_pitch_of,
    quat_from_euler_xyz,
    quat_multiply,
    quat_rotate,
    quat_rotate_inverse,
)


class SchemaError(ValueError):
    """Document shape/field error; message carries the field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class DanglingReference(ValueError):
    pass


class NonPositiveMass(ValueError):
    pass


class OutOfRange(ValueError):
    pass


def _require(doc, key, path, kind=None):
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind}")
    return value


def _vec3(value, path):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise SchemaError(path, "expected a 3-vector")
    return arr


def _per_axis(value, path):
    """Accept a scalar (isotropic) or a 3-vector."""
    if np.isscalar(value):
        return np.full(3, float(value))
    return _vec3(value, path)


@dataclass
class ServoActuator:
    name: str
    joint_index: int
    axis: int            # 0/1/2 in the joint frame
    max_angle: float     # rad at full command
    rate_limit: float    # rad/s
    channel: int
    scale: float = 1.0   # command sign/scale
    angle: float = 0.0   # current slewed position


@dataclass
class ThrusterActuator:
    name: str
    body_index: int
    axis: np.ndarray     # body-frame thrust direction
    max_thrust: float    # N, reversible
    channel: int
    scale: float = 1.0


class Vehicle:
    """Assembled world plus aero/buoyancy/actuator/sensor bindings."""

    def __init__(self, document):
        self.document = document
        self.name = document.get("name", "vehicle")
        self._build(document)

    # ---- assembly ------------------------------------------------------

    def _build(self, doc):
        bodies_doc = _require(doc, "bodies", "$", list)
        if not bodies_doc:
            raise SchemaError("$.bodies", "body list is empty")
        bodies, states = [], []
        for i, b in enumerate(bodies_doc):
            path = f"$.bodies[{i}]"
            name = _require(b, "name", path, str)
            mass = float(_require(b, "mass", path))
            if mass <= 0:
                raise NonPositiveMass(f"{path}: mass must be positive")
            inertia = np.asarray(_require(b, "inertia", path), dtype=float)
            pos = _vec3(_require(b, "position", path), f"{path}.position")
            quat = quat_from_euler_xyz(
                _vec3(b.get("orientation_rpy", (0, 0, 0)),
                      f"{path}.orientation_rpy"))
            bodies.append(BodyPrimitive(name, mass, inertia,
                                        shape=b.get("shape", {})))
            states.append(BodyState(position=pos, orientation=quat))
        index = {b.name: i for i, b in enumerate(bodies)}
        body_pos = {b.name: s.position for b, s in zip(bodies, states)}

        joints = []
        self.hull_joint_indices = []
        self._joint_key = {}
        for i, j in enumerate(_require(doc, "joints", "$", list)):
            path = f"$.joints[{i}]"
            parent = _require(j, "parent", path, str)
            child = _require(j, "child", path, str)
            for who in (parent, child):
                if who not in index:
                    raise DanglingReference(
                        f"{path}: unknown body {who!r}")
            if "anchor" in j:
                anchor = _vec3(j["anchor"], f"{path}.anchor")
                pa = anchor - body_pos[parent]
                ca = anchor - body_pos[child]
            else:
                pa = _vec3(j.get("parent_anchor", (0, 0, 0)),
                           f"{path}.parent_anchor")
                ca = _vec3(j.get("child_anchor", (0, 0, 0)),
                           f"{path}.child_anchor")
            spec = JointSpec(
                parent=parent,
                child=child,
                parent_anchor=pa,
                child_anchor=ca,
                parent_frame=quat_from_euler_xyz(
                    _vec3(j.get("parent_frame_rpy", (0, 0, 0)),
                          f"{path}.parent_frame_rpy")),
                child_frame=quat_from_euler_xyz(
                    _vec3(j.get("child_frame_rpy", (0, 0, 0)),
                          f"{path}.child_frame_rpy")),
                k_lin=_per_axis(j.get("k_lin", 0.0), f"{path}.k_lin"),
                c_lin=_per_axis(j.get("c_lin", 0.0), f"{path}.c_lin"),
                k_rot=_per_axis(j.get("k_rot", 0.0), f"{path}.k_rot"),
                c_rot=_per_axis(j.get("c_rot", 0.0), f"{path}.c_rot"),
                free_lin=_per_axis(j.get("free_lin", 0.0),
                                   f"{path}.free_lin"),
                free_rot=_per_axis(j.get("free_rot", 0.0),
                                   f"{path}.free_rot"),
            )
            if j.get("hull_attachment", False):
                self.hull_joint_indices.append(i)
            self._joint_key[(parent, child)] = i
            joints.append(spec)

        self.world = World(bodies, states, joints)

        # aero bindings
        aero_doc = _require(doc, "aero", "$", list)
        prims = []
        self.aero_body = np.zeros(len(aero_doc), dtype=int)
        self.aero_offset = np.zeros((len(aero_doc), 3))
        self.aero_quat = np.tile([1.0, 0, 0, 0], (len(aero_doc), 1))
        for i, a in enumerate(aero_doc):
            path = f"$.aero[{i}]"
            body = _require(a, "body", path, str)
            if body not in index:
                raise DanglingReference(f"{path}: unknown body {body!r}")
            prim = aeromod.AeroPrimitive(
                kind=_require(a, "kind", path, str),
                area=float(_require(a, "area", path)),
                c_l0=float(_require(a, "c_l0", path)),
                c_d0=float(_require(a, "c_d0", path)),
                c_d1=float(_require(a, "c_d1", path)),
                alpha_stall=float(_require(a, "alpha_stall", path)),
                k_q=float(a.get("k_q", aeromod.DEFAULT_KQ)),
            )
            prims.append(prim)
            self.aero_body[i] = index[body]
            self.aero_offset[i] = _vec3(a.get("offset", (0, 0, 0)),
                                        f"{path}.offset")
            self.aero_quat[i] = quat_from_euler_xyz(
                _vec3(a.get("orientation_rpy", (0, 0, 0)),
                      f"{path}.orientation_rpy"))
        self.aero_prims = prims
        self.aero_cyl = np.array(
            [p.kind == aeromod.CYLINDRICAL for p in prims])
        self.aero_area = np.array([p.area for p in prims])
        self.aero_cl0 = np.array([p.c_l0 for p in prims])
        self.aero_cd0 = np.array([p.c_d0 for p in prims])
        self.aero_cd1 = np.array([p.c_d1 for p in prims])
        self.aero_stall = np.array([p.alpha_stall for p in prims])
        self.aero_kq = np.array([p.k_q for p in prims])

        # buoyancy sections
        self.buoyancy = []
        for i, s in enumerate(_require(doc, "buoyancy", "$", list)):
            path = f"$.buoyancy[{i}]"
            body = _require(s, "body", path, str)
            if body not in index:
                raise DanglingReference(f"{path}: unknown body {body!r}")
            self.buoyancy.append(BuoyancySection(
                body=body,
                volume=float(_require(s, "volume", path)),
                c_b=float(s.get("c_b", 1.0)),
                center=_vec3(s.get("center", (0, 0, 0)), f"{path}.center"),
            ))
        self.buoy_body = np.array(
            [index[s.body] for s in self.buoyancy], dtype=int)
        self.buoy_volume = np.array([s.volume for s in self.buoyancy])
        self.buoy_cb = np.array([s.c_b for s in self.buoyancy])
        self.buoy_center = np.stack(
            [s.center for s in self.buoyancy]) if self.buoyancy \
            else np.zeros((0, 3))

        # actuators
        self.servos = []
        self.thrusters = []
        channels = set()
        for i, a in enumerate(_require(doc, "actuators", "$", list)):
            path = f"$.actuators[{i}]"
            kind = _require(a, "type", path, str)
            channel = int(_require(a, "channel", path))
            if not 0 <= channel < NUM_CHANNELS:
                raise SchemaError(f"{path}.channel",
                                  f"must be in [0, {NUM_CHANNELS})")
            channels.add(channel)
            if kind == "servo":
                parent = _require(a, "parent", path, str)
                child = _require(a, "child", path, str)
                key = (parent, child)
                if key not in self._joint_key:
                    raise DanglingReference(
                        f"{path}: no joint {parent!r} -> {child!r}")
                self.servos.append(ServoActuator(
                    name=_require(a, "name", path, str),
                    joint_index=self._joint_key[key],
                    axis=int(_require(a, "axis", path)),
                    max_angle=float(_require(a, "max_angle", path)),
                    rate_limit=float(_require(a, "rate_limit", path)),
                    channel=channel,
                    scale=float(a.get("scale", 1.0)),
                ))
            elif kind == "thruster":
                body = _require(a, "body", path, str)
                if body not in index:
                    raise DanglingReference(
                        f"{path}: unknown body {body!r}")
                self.thrusters.append(ThrusterActuator(
                    name=_require(a, "name", path, str),
                    body_index=index[body],
                    axis=_vec3(_require(a, "axis", path), f"{path}.axis"),
                    max_thrust=float(_require(a, "max_thrust", path)),
                    channel=channel,
                    scale=float(a.get("scale", 1.0)),
                ))
            else:
                raise SchemaError(f"{path}.type",
                                  f"unknown actuator type {kind!r}")

        sensors = _require(doc, "sensors", "$", dict)
        for key in ("imu_body", "reference_body"):
            body = _require(sensors, key, "$.sensors", str)
            if body not in index:
                raise DanglingReference(f"$.sensors.{key}: "
                                        f"unknown body {body!r}")
        self.imu_index = index[sensors["imu_body"]]
        self.reference_index = index[sensors["reference_body"]]
        self.airspeed_enabled = bool(sensors.get("airspeed_enabled", True))

        self.gains = ControllerGains.from_dict(doc.get("gains", {}))

        # nominal copies for the inflation service
        w = self.world
        hj = np.array(self.hull_joint_indices, dtype=int)
        self._hull_idx = hj
        self.nominal_k_lin = w.k_lin[hj].copy()
        self.nominal_c_lin = w.c_lin[hj].copy()
        self.nominal_k_rot = w.k_rot[hj].copy()
        self.nominal_c_rot = w.c_rot[hj].copy()
        self.nominal_free_lin = w.free_lin[hj].copy()
        self.nominal_free_rot = w.free_rot[hj].copy()
        self.nominal_cb = self.buoy_cb.copy()
        self.inflation_level = 1.0

    # ---- inflation service ----------------------------------------------

    def set_inflation(self, level):
        """Scale hull-attachment joints and buoyancy for inflation level
        s in [0, 1]: stiffness/damping by s^2, buoyancy by s, free-play by
        (2 - s). s = 1 restores nominal values exactly. Idempotent."""
        if not 0.0 <= level <= 1.0:
            raise OutOfRange(f"inflation level {level} outside [0, 1]")
        s = float(level)
        self._apply_scales(k_scale=s * s, free_scale=2.0 - s,
                           free_extra=0.0, cb_scale=s)
        self.inflation_level = s

    def set_deflation(self, free_play=0.0, offset=0.0, stiffness_scale=1.0,
                      buoyancy_scale=1.0):
        """Explicit deflation: scale stiffness/damping and buoyancy of the
        hull-attachment joints, widen rotational free-play by ``free_play``
        rad, and shift the rotational rest position by ``offset`` rad."""
        if stiffness_scale < 0 or buoyancy_scale < 0 or free_play < 0:
            raise OutOfRange("deflation parameters must be non-negative")
        self._apply_scales(k_scale=stiffness_scale, free_scale=1.0,
                           free_extra=free_play, cb_scale=buoyancy_scale)
        w = self.world
        hj = self._hull_idx
        w.rest_rot[hj] = offset
        self.inflation_level = float(stiffness_scale)

    def _apply_scales(self, k_scale, free_scale, free_extra, cb_scale):
        w = self.world
        hj = self._hull_idx
        w.k_lin[hj] = k_scale * self.nominal_k_lin
        w.c_lin[hj] = k_scale * self.nominal_c_lin
        w.k_rot[hj] = k_scale * self.nominal_k_rot
        w.c_rot[hj] = k_scale * self.nominal_c_rot
        w.free_lin[hj] = free_scale * self.nominal_free_lin
        w.free_rot[hj] = free_scale * self.nominal_free_rot + free_extra
        w.rest_rot[hj] = 0.0
        self.buoy_cb[:] = cb_scale * self.nominal_cb
        for section, cb in zip(self.buoyancy, self.buoy_cb):
            section.c_b = float(cb)

    # ---- forces ----------------------------------------------------------

    def environment_forces(self, wind_world, out_force, out_torque):
        """Accumulate aero and buoyancy wrenches into (N,3) arrays."""
        w = self.world
        ab = self.aero_body
        q_b = w.quat[ab]
        arm = quat_rotate(q_b, self.aero_offset)
        omega_w = quat_rotate(w.quat, w.omega)
        v_pt = w.vel[ab] + cross3(omega_w[ab], arm)
        q_prim = quat_multiply(q_b, self.aero_quat)
        flow_prim = quat_rotate_inverse(q_prim, wind_world - v_pt)
        f_prim = aeromod.aero_forces_batch(
            self.aero_cyl, self.aero_area, self.aero_cl0, self.aero_cd0,
            self.aero_cd1, self.aero_stall, self.aero_kq, flow_prim)
        f_w = quat_rotate(q_prim, f_prim)
        np.add.at(out_force, ab, f_w)
        np.add.at(out_torque, ab, cross3(arm, f_w))

        if len(self.buoyancy):
            bb = self.buoy_body
            f_up = self.buoy_cb * self.buoy_volume * RHO_AIR * GRAVITY
            f_vec = np.zeros((len(bb), 3))
            f_vec[:, 2] = f_up
            arm_b = quat_rotate(w.quat[bb], self.buoy_center)
            np.add.at(out_force, bb, f_vec)
            np.add.at(out_torque, bb, cross3(arm_b, f_vec))

    def apply_actuators(self, cmds, dt, out_force, out_torque):
        """Slew servos toward their commands and accumulate thruster
        wrenches. Commands are clipped to [-1, 1]."""
        cmds = np.clip(np.asarray(cmds, dtype=float), -1.0, 1.0)
        w = self.world
        for servo in self.servos:
            target = servo.scale * cmds[servo.channel] * servo.max_angle
            max_step = servo.rate_limit * dt
            delta = np.clip(target - servo.angle, -max_step, max_step)
            servo.angle += delta
            w.rest_rot[servo.joint_index, servo.axis] = servo.angle
        for thr in self.thrusters:
            force_b = thr.scale * cmds[thr.channel] * thr.max_thrust \
                * thr.axis
            out_force[thr.body_index] += quat_rotate(
                w.quat[thr.body_index], force_b)

    # ---- sensors ---------------------------------------------------------

    def read_sensors(self, wind_world=None):
        """NavState from the hull reference body plus the fin gyro.

        The gyro reports (roll, pitch-up, yaw-ccw) rates of the sensor
        body, which differs from the hull when the joints deform."""
        from .control import NavState  # local to avoid cycle at import

        w = self.world
        ref = self.reference_index
        euler = heading_pitch_of(w.quat[ref])
        if self.airspeed_enabled:
            if wind_world is None:
                wind_world = np.zeros(3)
            rel = quat_rotate_inverse(w.quat[ref],
                                      w.vel[ref] - wind_world)
            airspeed = float(rel[0])
        else:
            airspeed = None
        nav = NavState(velocity=w.vel[ref].copy(), euler=euler,
                       airspeed=airspeed)
        om = w.omega[self.imu_index]
        fin_gyro = np.array([om[0], -om[1], om[2]])
        return nav, fin_gyro

    # ---- reports / serialization ------------------------------------------

    def trim_report(self):
        weight = float(np.sum(self.world.mass)) * GRAVITY
        lift = float(np.sum(self.buoy_cb * self.buoy_volume)) \
            * RHO_AIR * GRAVITY
        return {
            "total_mass": float(np.sum(self.world.mass)),
            "total_weight": weight,
            "total_buoyancy": lift,
            "net_vertical_force": lift - weight,
        }

    def to_document(self):
        """Round-trip the (possibly mutated) vehicle back to a document."""
        doc = json.loads(json.dumps(self.document))
        for section, entry in zip(self.buoyancy, doc["buoyancy"]):
            entry["c_b"] = section.c_b
        return doc


def load_vehicle(document):
    """Assemble a vehicle from a parsed document, a JSON string or a
    file path."""
    if isinstance(document, (str, bytes)):
        text = str(document)
        if text.lstrip().startswith("{"):
            document = json.loads(text)
        else:
            with open(text) as fh:
                document = json.load(fh)
    if not isinstance(document, dict):
        raise SchemaError("$", "expected a JSON object")
    return Vehicle(document)


def reference_blimp_document():
    """The canonical reference blimp (5 m, 10 kg class)."""
    with resources.files("blimpsim.data").joinpath(
            "reference_blimp.json").open() as fh:
        return json.load(fh)
