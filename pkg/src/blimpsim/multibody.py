"""Fixed-step 6-DOF multibody simulation.

Rigid bodies connected by per-axis spring-damper joints, integrated with
semi-implicit (symplectic) Euler at a fixed time step. Joint springs act
outside a configurable free-play dead zone; dampers act everywhere. All
joint wrench pairs are exactly equal and opposite, so internal forces
conserve momentum to rounding error.

World state is owned by a single stepping context; everything else
interacts through the external wrench list passed to ``step`` and
read-only snapshots between steps.
"""

from dataclasses import dataclass, field

import numpy as np

from .rotations import (
    cross3,
    quat_conjugate,
    quat_multiply,
    quat_normalize,
    quat_rotate,
    quat_rotate_inverse,
    quat_to_euler_xyz,
)

GRAVITY = 9.81


class NonFiniteState(RuntimeError):
    """Raised when integration produces NaN/inf state (instability)."""


IDENTITY_QUAT = (1.0, 0.0, 0.0, 0.0)


@dataclass
class BodyPrimitive:
    """A rigid component: hull section, fin, gondola, thruster, ballast."""

    name: str
    mass: float
    inertia: np.ndarray  # 3x3 principal-frame tensor, kg m^2
    shape: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float)
        if self.inertia.shape == (3,):
            self.inertia = np.diag(self.inertia)
        if self.mass <= 0:
            raise ValueError(f"body {self.name!r}: mass must be positive")
        if self.inertia.shape != (3, 3):
            raise ValueError(f"body {self.name!r}: inertia must be 3x3")
        if not np.allclose(self.inertia, self.inertia.T):
            raise ValueError(f"body {self.name!r}: inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0):
            raise ValueError(
                f"body {self.name!r}: inertia must be positive definite"
            )


@dataclass
class BodyState:
    """World-frame pose and velocity; angular velocity is body-frame."""

    position: np.ndarray
    orientation: np.ndarray = field(
        default_factory=lambda: np.array(IDENTITY_QUAT)
    )
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.orientation = quat_normalize(
            np.asarray(self.orientation, dtype=float)
        )
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float)


@dataclass
class JointSpec:
    """Spring-damper connection between two bodies.

    Anchors and joint-frame quaternions are expressed in the respective
    body frames. ``rest_rotation`` is the spring-neutral relative rotation
    (intrinsic XYZ angles of the child joint frame in the parent joint
    frame); servo actuators drive it. Free-play half-ranges define a dead
    zone in which no spring force/torque acts; dampers act inside it too.
    """

    parent: str
    child: str
    parent_anchor: np.ndarray = field(default_factory=lambda: np.zeros(3))
    child_anchor: np.ndarray = field(default_factory=lambda: np.zeros(3))
    parent_frame: np.ndarray = field(
        default_factory=lambda: np.array(IDENTITY_QUAT)
    )
    child_frame: np.ndarray = field(
        default_factory=lambda: np.array(IDENTITY_QUAT)
    )
    k_lin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    c_lin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    k_rot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    c_rot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    free_lin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    free_rot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rest_rotation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in (
            "parent_anchor",
            "child_anchor",
            "parent_frame",
            "child_frame",
            "k_lin",
            "c_lin",
            "k_rot",
            "c_rot",
            "free_lin",
            "free_rot",
            "rest_rotation",
        ):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("k_lin", "c_lin", "k_rot", "c_rot"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"joint {self.parent}->{self.child}: "
                                 f"{name} must be non-negative")
        for name in ("free_lin", "free_rot"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"joint {self.parent}->{self.child}: "
                                 f"{name} must be non-negative")


@dataclass
class Wrench:
    """World-frame force and torque about a body's origin."""

    body: str
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=float)
        self.torque = np.asarray(self.torque, dtype=float)


def _dead_zone(x, half_range):
    """Displacement beyond the symmetric dead zone, sign preserved."""
    return np.sign(x) * np.maximum(np.abs(x) - half_range, 0.0)


def joint_wrench(joint, parent_state, child_state):
    """Wrench pair exerted by one joint: (on parent, on child).

    Forces are applied about each body's origin; both sides are computed
    about the common midpoint of the two anchors so the pair is exactly
    equal and opposite in force and in torque about that point.
    """
    qp = quat_normalize(parent_state.orientation)
    qc = quat_normalize(child_state.orientation)
    qjp = quat_multiply(qp, joint.parent_frame)
    qjc = quat_multiply(qc, joint.child_frame)
    rp_w = quat_rotate(qp, joint.parent_anchor)
    rc_w = quat_rotate(qc, joint.child_anchor)
    anchor_p = parent_state.position + rp_w
    anchor_c = child_state.position + rc_w

    d_j = quat_rotate_inverse(qjp, anchor_c - anchor_p)
    omega_p_w = quat_rotate(qp, parent_state.angular_velocity)
    omega_c_w = quat_rotate(qc, child_state.angular_velocity)
    v_p = parent_state.velocity + cross3(omega_p_w, rp_w)
    v_c = child_state.velocity + cross3(omega_c_w, rc_w)
    dv_j = quat_rotate_inverse(qjp, v_c - v_p)

    force_j = -joint.k_lin * _dead_zone(d_j, joint.free_lin) - joint.c_lin * dv_j
    force_w = quat_rotate(qjp, force_j)

    q_rel = quat_multiply(quat_conjugate(qjp), qjc)
    theta = quat_to_euler_xyz(q_rel)
    domega_j = quat_rotate_inverse(qjp, omega_c_w - omega_p_w)
    torque_j = (
        -joint.k_rot * _dead_zone(theta - joint.rest_rotation, joint.free_rot)
        - joint.c_rot * domega_j
    )
    torque_w = quat_rotate(qjp, torque_j)

    mid = 0.5 * (anchor_p + anchor_c)
    on_child = Wrench(
        joint.child,
        force=force_w,
        torque=cross3(mid - child_state.position, force_w) + torque_w,
    )
    on_parent = Wrench(
        joint.parent,
        force=-force_w,
        torque=cross3(mid - parent_state.position, -force_w) - torque_w,
    )
    return on_parent, on_child


class World:
    """A set of bodies and joints advanced at a fixed time step.

    Body state lives in flat arrays for vectorized joint evaluation; the
    per-body view is available through :meth:`body_state`.
    """

    def __init__(self, bodies, states, joints, gravity=True,
                 ground_contact=False, ground_stiffness=2000.0,
                 ground_damping=200.0):
        names = [b.name for b in bodies]
        if len(set(names)) != len(names):
            raise ValueError("body names must be unique")
        self.bodies = list(bodies)
        self.index = {b.name: i for i, b in enumerate(self.bodies)}
        self.joints = list(joints)
        self.gravity_enabled = gravity
        self.ground_contact = ground_contact
        self.ground_stiffness = ground_stiffness
        self.ground_damping = ground_damping
        self.time = 0.0

        n = len(bodies)
        self.mass = np.array([b.mass for b in bodies])
        self.inertia = np.stack([b.inertia for b in bodies])
        self.inv_inertia = np.linalg.inv(self.inertia)
        self.pos = np.stack([np.asarray(s.position, float) for s in states])
        self.quat = quat_normalize(
            np.stack([np.asarray(s.orientation, float) for s in states])
        )
        self.vel = np.stack([np.asarray(s.velocity, float) for s in states])
        self.omega = np.stack(
            [np.asarray(s.angular_velocity, float) for s in states]
        )
        assert self.pos.shape == (n, 3)
        self._pack_joints()

    def _pack_joints(self):
        js = self.joints
        self.jp = np.array([self.index[j.parent] for j in js], dtype=int)
        self.jc = np.array([self.index[j.child] for j in js], dtype=int)
        if len(js) == 0:
            for name in ("j_pa", "j_ca"):
                setattr(self, name, np.zeros((0, 3)))
            for name in ("j_pq", "j_cq"):
                setattr(self, name, np.zeros((0, 4)))
            for name in ("k_lin", "c_lin", "k_rot", "c_rot",
                         "free_lin", "free_rot", "rest_rot"):
                setattr(self, name, np.zeros((0, 3)))
            return
        self.j_pa = np.stack([j.parent_anchor for j in js])
        self.j_ca = np.stack([j.child_anchor for j in js])
        self.j_pq = np.stack([j.parent_frame for j in js])
        self.j_cq = np.stack([j.child_frame for j in js])
        self.k_lin = np.stack([j.k_lin for j in js]).astype(float)
        self.c_lin = np.stack([j.c_lin for j in js]).astype(float)
        self.k_rot = np.stack([j.k_rot for j in js]).astype(float)
        self.c_rot = np.stack([j.c_rot for j in js]).astype(float)
        self.free_lin = np.stack([j.free_lin for j in js]).astype(float)
        self.free_rot = np.stack([j.free_rot for j in js]).astype(float)
        self.rest_rot = np.stack([j.rest_rotation for j in js]).astype(float)

    # ---- snapshots -----------------------------------------------------

    def body_state(self, name):
        i = self.index[name]
        return BodyState(
            position=self.pos[i].copy(),
            orientation=self.quat[i].copy(),
            velocity=self.vel[i].copy(),
            angular_velocity=self.omega[i].copy(),
        )

    # ---- force assembly ------------------------------------------------

    def _joint_forces(self):
        """Accumulated joint forces/torques (world frame) per body."""
        n = len(self.bodies)
        force = np.zeros((n, 3))
        torque = np.zeros((n, 3))
        if len(self.joints) == 0:
            return force, torque
        jp, jc = self.jp, self.jc
        qp = self.quat[jp]
        qc = self.quat[jc]
        qjp = quat_multiply(qp, self.j_pq)
        qjc = quat_multiply(qc, self.j_cq)
        rp_w = quat_rotate(qp, self.j_pa)
        rc_w = quat_rotate(qc, self.j_ca)
        anchor_p = self.pos[jp] + rp_w
        anchor_c = self.pos[jc] + rc_w

        omega_w = quat_rotate(self.quat, self.omega)
        d_j = quat_rotate_inverse(qjp, anchor_c - anchor_p)
        v_p = self.vel[jp] + cross3(omega_w[jp], rp_w)
        v_c = self.vel[jc] + cross3(omega_w[jc], rc_w)
        dv_j = quat_rotate_inverse(qjp, v_c - v_p)
        force_j = -self.k_lin * _dead_zone(d_j, self.free_lin) \
            - self.c_lin * dv_j
        force_w = quat_rotate(qjp, force_j)

        q_rel = quat_multiply(quat_conjugate(qjp), qjc)
        theta = quat_to_euler_xyz(q_rel)
        domega_j = quat_rotate_inverse(qjp, omega_w[jc] - omega_w[jp])
        torque_j = -self.k_rot * _dead_zone(
            theta - self.rest_rot, self.free_rot
        ) - self.c_rot * domega_j
        torque_w = quat_rotate(qjp, torque_j)

        mid = 0.5 * (anchor_p + anchor_c)
        tau_c = cross3(mid - self.pos[jc], force_w) + torque_w
        tau_p = cross3(mid - self.pos[jp], -force_w) - torque_w

        np.add.at(force, jc, force_w)
        np.add.at(force, jp, -force_w)
        np.add.at(torque, jc, tau_c)
        np.add.at(torque, jp, tau_p)
        return force, torque

    # ---- stepping ------------------------------------------------------

    def step(self, dt, external_wrenches=()):
        """Advance all bodies one semi-implicit Euler step."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        n = len(self.bodies)
        f_ext = np.zeros((n, 3))
        t_ext = np.zeros((n, 3))
        for w in external_wrenches:
            i = w.body if isinstance(w.body, (int, np.integer)) \
                else self.index[w.body]
            f_ext[i] += w.force
            t_ext[i] += w.torque
        self.step_arrays(dt, f_ext, t_ext)
        return self

    def step_arrays(self, dt, f_ext, t_ext):
        """Hot path: external force/torque given as (N,3) world arrays."""
        force, torque = self._joint_forces()
        force += f_ext
        torque += t_ext
        if self.gravity_enabled:
            force[:, 2] -= self.mass * GRAVITY
        if self.ground_contact:
            pen = np.minimum(self.pos[:, 2], 0.0)
            contact = pen < 0.0
            if np.any(contact):
                force[:, 2] += np.where(
                    contact,
                    -self.ground_stiffness * pen
                    - self.ground_damping * self.vel[:, 2] * contact,
                    0.0,
                )

        self.vel += (dt / self.mass)[:, None] * force
        self.pos += dt * self.vel

        tau_body = quat_rotate_inverse(self.quat, torque)
        i_omega = np.einsum("nij,nj->ni", self.inertia, self.omega)
        omega_dot = np.einsum(
            "nij,nj->ni",
            self.inv_inertia,
            tau_body - cross3(self.omega, i_omega),
        )
        self.omega += dt * omega_dot

        omega_quat = np.concatenate(
            [np.zeros((len(self.bodies), 1)), self.omega], axis=1
        )
        self.quat += 0.5 * dt * quat_multiply(self.quat, omega_quat)
        self.quat = quat_normalize(self.quat)
        self.time += dt

        if not (
            np.isfinite(self.vel).all() and np.isfinite(self.omega).all()
        ):
            raise NonFiniteState(
                f"non-finite body state at t={self.time:.6f} s; "
                "reduce dt or joint stiffness"
            )
        return self

    # ---- probes ----------------------------------------------------------

    def total_momentum(self):
        """(linear, angular-about-origin) momentum in the world frame."""
        linear = (self.mass[:, None] * self.vel).sum(axis=0)
        omega_w = quat_rotate(self.quat, self.omega)
        i_omega_body = np.einsum("nij,nj->ni", self.inertia, self.omega)
        spin_w = quat_rotate(self.quat, i_omega_body)
        angular = (
            cross3(self.pos, self.mass[:, None] * self.vel) + spin_w
        ).sum(axis=0)
        return linear, angular

    def kinetic_energy(self):
        trans = 0.5 * (self.mass * np.sum(self.vel**2, axis=1)).sum()
        i_omega = np.einsum("nij,nj->ni", self.inertia, self.omega)
        rot = 0.5 * np.sum(self.omega * i_omega)
        return trans + rot

    def potential_energy(self):
        pe = 0.0
        if self.gravity_enabled:
            pe += GRAVITY * float(np.sum(self.mass * self.pos[:, 2]))
        if len(self.joints):
            jp, jc = self.jp, self.jc
            qjp = quat_multiply(self.quat[jp], self.j_pq)
            qjc = quat_multiply(self.quat[jc], self.j_cq)
            anchor_p = self.pos[jp] + quat_rotate(self.quat[jp], self.j_pa)
            anchor_c = self.pos[jc] + quat_rotate(self.quat[jc], self.j_ca)
            d_j = quat_rotate_inverse(qjp, anchor_c - anchor_p)
            d_eff = _dead_zone(d_j, self.free_lin)
            pe += 0.5 * float(np.sum(self.k_lin * d_eff**2))
            theta = quat_to_euler_xyz(
                quat_multiply(quat_conjugate(qjp), qjc)
            )
            t_eff = _dead_zone(theta - self.rest_rot, self.free_rot)
            pe += 0.5 * float(np.sum(self.k_rot * t_eff**2))
        return pe

    def total_energy(self):
        return self.kinetic_energy() + self.potential_energy()


def step(world, dt, external_wrenches=()):
    """Module-level stepping entry point; mutates and returns the world."""
    return world.step(dt, external_wrenches)


def total_momentum(world):
    return world.total_momentum()
