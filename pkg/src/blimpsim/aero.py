"""Per-primitive aerodynamic lift and drag from the local flow vector.

Flow convention: the flow vector is air velocity minus body velocity,
expressed in the primitive's frame, so moving forward through still air
gives f_x < 0 and the drag force opposes the motion. Two primitive kinds
exist: quasi-planar surfaces (lateral flow ignored) and quasi-cylindrical
bodies (lateral flow folded into the vertical axis by an L1 rotation and
resulting vertical forces mapped back along the lateral flow direction).
"""

import math
from dataclasses import dataclass

import numpy as np

# k_q default: standard dynamic pressure 1/2 rho at sea level
RHO_AIR = 1.225
DEFAULT_KQ = 0.5 * RHO_AIR

PLANAR = "quasi-planar"
CYLINDRICAL = "quasi-cylindrical"


class AllZeroWeights(ValueError):
    """Hull drag distribution requested with all-zero weights."""


@dataclass
class AeroPrimitive:
    """Aerodynamic descriptor: kind, reference area, the 4 coefficients."""

    kind: str
    area: float
    c_l0: float
    c_d0: float
    c_d1: float
    alpha_stall: float
    k_q: float = DEFAULT_KQ

    def __post_init__(self):
        if self.kind not in (PLANAR, CYLINDRICAL):
            raise ValueError(f"unknown aero kind {self.kind!r}")
        if self.area <= 0:
            raise ValueError("area must be positive")
        if min(self.c_l0, self.c_d0, self.c_d1, self.k_q) < 0:
            raise ValueError("aero coefficients must be non-negative")
        if not 0 < self.alpha_stall < math.pi / 2:
            raise ValueError("alpha_stall must lie in (0, pi/2)")


@dataclass
class AeroResult:
    alpha: float
    q_d: float
    lift: np.ndarray   # primitive frame, N
    drag: np.ndarray   # primitive frame, N
    drag_dir: np.ndarray
    lift_dir: np.ndarray

    @property
    def total(self):
        return self.lift + self.drag


def rotate_cylindrical_flow(f):
    """Fold lateral flow into the vertical axis: [fx, 0, |fy|+|fz|].

    Also returns the lateral-flow direction angle phi = atan2(fy, fz) used
    to map resulting z-axis forces back onto the original lateral plane.
    """
    f = np.asarray(f, dtype=float)
    rotated = np.array([f[0], 0.0, abs(f[1]) + abs(f[2])])
    phi = math.atan2(f[1], f[2])
    return rotated, phi


def angle_of_attack(fx, fz):
    """arctan(fz / fx), range [-pi/2, pi/2]; 0 when the planar flow is zero."""
    if fx == 0.0:
        if fz == 0.0:
            return 0.0
        return math.copysign(math.pi / 2, fz)
    return math.atan(fz / fx)


def lift_coefficient(alpha, prim):
    """Piecewise-linear lift curve, peaking at c_l0 at the stall angle."""
    a = abs(alpha)
    if a <= prim.alpha_stall:
        return prim.c_l0 * a / prim.alpha_stall
    return prim.c_l0 * (math.pi - 2 * a) / (math.pi - 2 * prim.alpha_stall)


def drag_coefficient(alpha, prim):
    """Linear blend from c_d0 (axial flow) to c_d1 (cross flow)."""
    frac = 2 * abs(alpha) / math.pi
    return prim.c_d0 * (1 - frac) + prim.c_d1 * frac


def aero_force(prim, flow):
    """Lift and drag forces in the primitive frame for the given flow."""
    flow = np.asarray(flow, dtype=float)
    if prim.kind == CYLINDRICAL:
        f, phi = rotate_cylindrical_flow(flow)
    else:
        f, phi = np.array([flow[0], 0.0, flow[2]]), None

    planar_sq = f[0] * f[0] + f[2] * f[2]
    if planar_sq == 0.0:
        zero = np.zeros(3)
        return AeroResult(0.0, 0.0, zero, zero.copy(), zero.copy(),
                          zero.copy())

    alpha = angle_of_attack(f[0], f[2])
    q_d = prim.k_q * planar_sq
    drag_dir = f / math.sqrt(planar_sq)
    if alpha == 0.0:
        lift_dir = np.zeros(3)
    else:
        lift_dir = np.cross(drag_dir, [0.0, math.copysign(1.0, alpha), 0.0])
    lift = q_d * prim.area * lift_coefficient(alpha, prim) * lift_dir
    drag = q_d * prim.area * drag_coefficient(alpha, prim) * drag_dir

    if prim.kind == CYLINDRICAL:
        lift = _unrotate_cylindrical(lift, phi)
        drag = _unrotate_cylindrical(drag, phi)
    return AeroResult(alpha, q_d, lift, drag, drag_dir, lift_dir)


def _unrotate_cylindrical(v, phi):
    """Rotate a rotated-frame force back: z-component splits along the
    original lateral flow direction (rotation by phi about x)."""
    s, c = math.sin(phi), math.cos(phi)
    return np.array([v[0], s * v[2], c * v[2]])


def aero_forces_batch(kinds_cyl, area, c_l0, c_d0, c_d1, alpha_stall, k_q,
                      flows):
    """Vectorized total aero force for many primitives (hot path).

    ``kinds_cyl`` is a boolean mask (True = quasi-cylindrical), coefficient
    arrays are (P,), ``flows`` is (P, 3) in each primitive's frame. Returns
    total force (P, 3) in primitive frames. Matches :func:`aero_force`.
    """
    flows = np.asarray(flows, dtype=float)
    fx = flows[:, 0]
    fy = np.where(kinds_cyl, 0.0, flows[:, 1])
    fz = np.where(
        kinds_cyl, np.abs(flows[:, 1]) + np.abs(flows[:, 2]), flows[:, 2]
    )
    phi = np.arctan2(flows[:, 1], flows[:, 2])

    planar_sq = fx * fx + fz * fz
    ok = planar_sq > 0.0
    safe_sq = np.where(ok, planar_sq, 1.0)
    alpha = np.where(
        fx == 0.0,
        np.where(fz == 0.0, 0.0, np.copysign(np.pi / 2, fz)),
        np.arctan(fz / np.where(fx == 0.0, 1.0, fx)),
    )
    q_d = k_q * planar_sq
    inv_norm = 1.0 / np.sqrt(safe_sq)
    dx, dz = fx * inv_norm, fz * inv_norm

    a = np.abs(alpha)
    c_l = np.where(
        a <= alpha_stall,
        c_l0 * a / alpha_stall,
        c_l0 * (np.pi - 2 * a) / (np.pi - 2 * alpha_stall),
    )
    frac = 2 * a / np.pi
    c_d = c_d0 * (1 - frac) + c_d1 * frac

    # lift dir = drag_dir x [0, sign(alpha), 0] = (-dz*s, 0, dx*s)
    s = np.where(alpha == 0.0, 0.0, np.sign(alpha))
    lift_mag = q_d * area * c_l
    drag_mag = q_d * area * c_d
    tot_x = lift_mag * (-dz * s) + drag_mag * dx
    tot_z = lift_mag * (dx * s) + drag_mag * dz

    out = np.zeros_like(flows)
    out[:, 0] = np.where(ok, tot_x, 0.0)
    z = np.where(ok, tot_z, 0.0)
    out[:, 1] = np.where(kinds_cyl, np.sin(phi) * z, 0.0)
    out[:, 2] = np.where(kinds_cyl, np.cos(phi) * z, z)
    return out


def distribute_hull_drag(n, hull_cd, weights=None):
    """Split a whole-hull frontal drag coefficient over n sections,
    proportional to weights; the outputs sum to hull_cd."""
    if n < 1:
        raise ValueError("need at least one hull section")
    if weights is None:
        weights = np.ones(n)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError("weights length must equal n")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    total = weights.sum()
    if total == 0:
        raise AllZeroWeights("hull drag weights are all zero")
    return list(hull_cd * weights / total)
