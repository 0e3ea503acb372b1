"""Quaternion and rotation helpers, vectorized over leading axes.

Quaternions are stored as [w, x, y, z] and map body frame to world frame.
All functions accept either a single quaternion/vector or a batch with the
quaternion/vector on the last axis.
"""

import numpy as np


def cross3(a, b):
    """Cross product on the last axis; component form avoids the axis
    bookkeeping overhead of np.cross in the per-step hot path."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    out = np.empty(np.broadcast(a, b).shape)
    out[..., 0] = ay * bz - az * by
    out[..., 1] = az * bx - ax * bz
    out[..., 2] = ax * by - ay * bx
    return out


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    return q / n


def quat_multiply(q, r):
    """Hamilton product q ⊗ r."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    w1, x1, y1, z1 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    w2, x2, y2, z2 = r[..., 0], r[..., 1], r[..., 2], r[..., 3]
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conjugate(q):
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def quat_rotate(q, v):
    """Rotate vector(s) v by quaternion(s) q (body -> world for a pose quat)."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    w = q[..., :1]
    u = q[..., 1:]
    # v' = v + w t + u x t  with  t = 2 u x v
    t = 2.0 * cross3(u, v)
    return v + w * t + cross3(u, t)


def quat_rotate_inverse(q, v):
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    w = q[..., :1]
    u = q[..., 1:]
    t = -2.0 * cross3(u, v)
    return v + w * t - cross3(u, t)


def quat_to_matrix(q):
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - z * w)
    m[..., 0, 2] = 2 * (x * z + y * w)
    m[..., 1, 0] = 2 * (x * y + z * w)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - x * w)
    m[..., 2, 0] = 2 * (x * z - y * w)
    m[..., 2, 1] = 2 * (y * z + x * w)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def quat_from_euler_xyz(angles):
    """Quaternion for intrinsic X-Y-Z rotation by angles [ax, ay, az]."""
    angles = np.asarray(angles, dtype=float)
    ax, ay, az = angles[..., 0] / 2, angles[..., 1] / 2, angles[..., 2] / 2
    zeros = np.zeros_like(ax)
    qx = np.stack([np.cos(ax), np.sin(ax), zeros, zeros], axis=-1)
    qy = np.stack([np.cos(ay), zeros, np.sin(ay), zeros], axis=-1)
    qz = np.stack([np.cos(az), zeros, zeros, np.sin(az)], axis=-1)
    return quat_multiply(quat_multiply(qx, qy), qz)


def quat_to_euler_xyz(q):
    """Intrinsic X-Y-Z angles of the rotation, i.e. R = Rx(a) Ry(b) Rz(c).

    Valid away from the b = ±pi/2 singularity; joint deformation angles stay
    well inside that range.
    """
    m = quat_to_matrix(q)
    b = np.arcsin(np.clip(m[..., 0, 2], -1.0, 1.0))
    a = np.arctan2(-m[..., 1, 2], m[..., 2, 2])
    c = np.arctan2(-m[..., 0, 1], m[..., 0, 0])
    return np.stack([a, b, c], axis=-1)


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = np.asarray(angle, dtype=float)
    half = angle / 2.0
    return np.concatenate(
        [np.cos(half)[..., None], np.sin(half)[..., None] * axis], axis=-1
    )


def heading_pitch_of(q):
    """Yaw (CCW about world z from +x) and pitch (elevation) of the body
    forward axis, plus roll about that axis.

    Returns (roll, pitch, yaw). Pitch is positive nose-up.
    """
    m = quat_to_matrix(q)
    fwd = m[..., :, 0]
    left = m[..., :, 1]
    yaw = np.arctan2(fwd[..., 1], fwd[..., 0])
    pitch = np.arcsin(np.clip(fwd[..., 2], -1.0, 1.0))
    # roll: angle of the body-left axis out of the horizontal plane
    horiz_left = np.stack(
        [-np.sin(yaw), np.cos(yaw), np.zeros_like(yaw)], axis=-1
    )
    up = np.cross(fwd, horiz_left)
    roll = np.arctan2(
        np.sum(left * up, axis=-1), np.sum(left * horiz_left, axis=-1)
    )
    return np.stack([roll, pitch, yaw], axis=-1)


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)
